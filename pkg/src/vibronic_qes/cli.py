"""Command-line front end: ``vibronic-qes <command> [options]``.

Every command builds a plain ``dict`` report (``{"schema": 1, ...}``) that is
rendered as an aligned table, CSV or JSON.  Reports hold only JSON-native
values so that ``json.loads(json.dumps(report)) == report``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bethe, model, oracle, polyop, sl2
from .model import ModelParams, PhysicalParams

log = logging.getLogger("vibronic_qes")

COMMANDS = ("exceptional", "couplings", "bethe", "verify", "oracle", "sweep")
SCHEMA = 1
KERNEL_TOL = 1e-9


@dataclass
class RunConfig:
    command: str
    model: ModelParams | None = None
    physical: PhysicalParams | None = None
    n_range: tuple[int, int] = (0, 3)
    basis: int = 200
    fmt: str = "table"
    out: str | None = None
    include_unphysical: bool = False
    inject_fault: bool = False
    f_grid: tuple[float, float, int] | None = None
    b_grid: tuple[float, float, int] | None = None
    tolerance: float = 1e-7
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if (self.model is None) == (self.physical is None):
            raise ValueError("exactly one parameter block (dimensionless or physical) is required")
        lo, hi = self.n_range
        if lo < 0 or hi < lo:
            raise ValueError(f"invalid n-range {lo}..{hi}")

    @property
    def params(self) -> ModelParams:
        return self.model if self.model is not None else model.to_dimensionless(self.physical)

    @property
    def levels(self) -> range:
        return range(self.n_range[0], self.n_range[1] + 1)


def parse_n_range(text: str) -> tuple[int, int]:
    if ".." in text:
        a, b = text.split("..", 1)
        return int(a), int(b)
    return int(text), int(text)


def _cx(z) -> list[float] | float:
    z = complex(z) + 0.0
    return float(z.real) if z.imag == 0 else [float(z.real), float(z.imag)]


def _roots(rs) -> list[list[float]]:
    return [[float(complex(r).real) + 0.0, float(complex(r).imag) + 0.0] for r in rs]


# -- commands ----------------------------------------------------------------


def cmd_exceptional(cfg: RunConfig) -> dict:
    p = cfg.physical or PhysicalParams(F1=-cfg.model.F + cfg.model.b, F2=cfg.model.b, V=cfg.model.v)
    unit = "physical" if cfg.physical else "hbar*Omega"
    rows = []
    for n in cfg.levels:
        eps, E = model.exceptional_energy(n, p)
        rows.append({"n": n, "epsilon": eps, "E": E, "lambda": n + 0.5})
    return {"rows": rows, "energy_unit": unit}


def _couplings_rows(n: int, mp: ModelParams, include_unphysical: bool, checks: list) -> list[dict]:
    rows = []
    for c in sl2.allowed_couplings(n, mp):
        if not c.physical and not include_unphysical:
            continue
        res = sl2.kernel_residual(c, mp)
        ok = res < KERNEL_TOL
        checks.append({"name": f"kernel n={n} v2={_fmt(c.v_squared)}", "passed": ok, "detail": res})
        rows.append({
            "n": n,
            "v_squared": _cx(c.v_squared),
            "physical": c.physical,
            "degree_deficient": c.degree_deficient,
            "multiplicity": c.multiplicity,
            "kernel_residual": res,
            "roots": _roots(c.roots),
        })
    return rows


def cmd_couplings(cfg: RunConfig) -> dict:
    mp = cfg.params
    checks: list[dict] = []
    rows = []
    for n in cfg.levels:
        rows += _couplings_rows(n, mp, cfg.include_unphysical, checks)
    if mp.F == 0:
        cfg.warnings.append("F = 0: algebraization conditions degenerate; kernels below degree n are flagged")
    return {"rows": rows, "checks": checks}


def cmd_bethe(cfg: RunConfig) -> dict:
    mp = cfg.params
    rows = []
    for n in cfg.levels:
        if n == 0:
            rows.append({
                "n": 0, "roots": [], "residue_norm": 0.0, "implied_v_squared": 0.0,
                "constraint_residual": mp.v**2, "converged": True, "physical": True,
            })
            continue
        diag = bethe.SolveDiagnostics()
        for s in bethe.solve_bethe(n, None, mp, diagnostics=diag):
            if not s.physical and not cfg.include_unphysical:
                continue
            rows.append({
                "n": n,
                "roots": _roots(s.roots),
                "residue_norm": s.residue_norm,
                "implied_v_squared": _cx(s.implied_v_squared),
                "constraint_residual": s.constraint_residual,
                "converged": s.converged,
                "physical": s.physical,
            })
        if diag.failures:
            cfg.warnings.append(f"n={n}: {len(diag.failures)} seeds failed")
    return {"rows": rows}


def cmd_oracle(cfg: RunConfig) -> dict:
    mp = cfg.params
    ocfg = oracle.OracleConfig(cfg.basis, cfg.tolerance)
    for n in cfg.levels:
        ocfg.check_level(n)
    rep = oracle.spectrum(mp, ocfg)
    rows = []
    for n in cfg.levels:
        matched, gap = oracle.match_exceptional(rep, n, ocfg)
        m = rep.matches[-1]
        rows.append({"n": n, "target": m.target, "nearest": m.nearest, "gap": gap, "matched": matched})
    k = min(len(rep.eigenvalues), 2 * (cfg.n_range[1] + 2))
    return {
        "rows": rows,
        "eigenvalues": [float(x) for x in rep.eigenvalues[:k]],
        "trusted_max": rep.trusted_max,
        "policy": rep.policy,
    }


def _check(checks: list, name: str, passed: bool, detail) -> None:
    checks.append({"name": name, "passed": bool(passed), "detail": detail})


def cmd_verify(cfg: RunConfig) -> dict:
    mp = cfg.params
    checks: list[dict] = []
    rng = np.random.default_rng(12345)
    levels = list(cfg.levels)
    n_max = max(levels)

    for n in range(max(n_max, 2) + 1):
        g = sl2.make_generators(n)
        ok = (
            polyop.commutator(g.jplus, g.jminus).allclose(-2 * g.jzero)
            and polyop.commutator(g.jplus, g.jzero).allclose(-1 * g.jplus)
            and polyop.commutator(g.jminus, g.jzero).allclose(g.jminus)
        )
        _check(checks, f"sl2 commutators n={n}", ok, None)
        lhs = polyop.DiffOperator([0, 0, 0, [0.0, 1.0]])
        rhs = polyop.compose(g.jzero, polyop.compose(g.jminus, g.jminus)) + (n / 2) * polyop.DiffOperator.d(2)
        _check(checks, f"z d^3 identity n={n}", lhs.allclose(rhs), None)
        try:
            sl2.build_general_qes(sl2.QesCoefficients(*rng.normal(size=9)), n)
            _check(checks, f"general QES coefficients n={n}", True, None)
        except sl2.ConsistencyError as exc:
            _check(checks, f"general QES coefficients n={n}", False, str(exc))

    for n in levels:
        lp = model.level_params(n, mp)
        h4 = sl2.build_h4(lp, mp)
        if cfg.inject_fault:
            h4 = h4 + polyop.DiffOperator([[0.0, 0.1]])
        rep = sl2.qes_condition_check(h4, n)
        _check(checks, f"QES condition E2=n n={n}", rep.holds, rep.notes)
        if rep.degenerate:
            cfg.warnings.append(f"n={n}: F = 0, algebraization conditions are degenerate")
        proj = sl2.project_invariant_subspace(h4, n)
        _check(checks, f"invariant subspace n={n}", proj.invariant_flag, proj.spill)

    # H4 = A o B - v^2 with A = 1/2 d^2 - z d + F z + E1, B = 1/2 d^2 - z d + E2
    lp = model.level_params(n_max, mp)
    A = polyop.DiffOperator([[lp.E1, mp.F], [0.0, -1.0], [0.5]])
    B = polyop.DiffOperator([[lp.E2], [0.0, -1.0], [0.5]])
    h4 = sl2.build_h4(lp, mp)
    _check(checks, "factorisation H4 = A o B - v^2", (polyop.compose(A, B) - polyop.DiffOperator([mp.v**2])).allclose(h4, 1e-10), None)

    ocfg = oracle.OracleConfig(max(cfg.basis, n_max + 20), cfg.tolerance)
    for n in levels:
        couplings = [c for c in sl2.allowed_couplings(n, mp) if c.physical]
        for c in couplings:
            res = sl2.kernel_residual(c, mp)
            _check(checks, f"kernel n={n} v2={_fmt(c.v_squared)}", res < KERNEL_TOL, res)
        if n >= 1:
            sols = [s for s in bethe.solve_bethe(n, None, mp) if s.physical]
            kernels = [c for c in couplings if not c.degree_deficient]
            same = len(sols) == len(kernels) and all(
                any(bethe.same_root_set(s.roots, c.roots) for c in kernels) for s in sols
            )
            _check(checks, f"Bethe roots = kernel roots n={n}", same, len(sols))
            for s in sols:
                v2 = s.implied_v_squared.real
                v = math.sqrt(v2) if v2 > KERNEL_TOL else 0.0
                s = bethe.BetheSolution(n, s.roots, s.level, mp.with_coupling(v), s.residue_norm)
                _check(checks, f"restriction n={n}", s.constraint_residual <= 1e-9, s.constraint_residual)
                if v > 0:
                    y1, y2 = bethe.wavefunctions(s)
                    r1, r2 = bethe.coupled_residuals(y1, y2, s.level, s.params)
                    scale = max(1.0, np.max(np.abs(y2.coeffs)))
                    worst = float(max(np.max(np.abs(r1.coeffs)), np.max(np.abs(r2.coeffs))) / scale)
                    _check(checks, f"coupled equations n={n}", worst < 1e-8, worst)
        for c in couplings:
            if c.v_squared == 0 and len(couplings) > 1:
                continue
            rep = oracle.spectrum(mp.with_coupling(math.sqrt(c.v_squared)), ocfg, window=(n, n + 1))
            matched, gap = oracle.match_exceptional(rep, n, ocfg)
            _check(checks, f"oracle n={n} v2={_fmt(c.v_squared)}", matched, gap)
    return {"rows": checks, "checks": checks}


def _grid(spec: tuple[float, float, int] | None, default: float) -> np.ndarray:
    if spec is None:
        return np.array([default])
    a, b, k = spec
    return np.linspace(a, b, int(k))


def _sweep_point(F: float, b: float, levels: range, ocfg: oracle.OracleConfig, include_unphysical: bool) -> list[dict]:
    mp = ModelParams(F=float(F), b=float(b))
    decoupled = {}
    rows = []
    for n in levels:
        try:
            cs = sl2.allowed_couplings(n, mp)
        except Exception as exc:
            rows.append({"F": float(F), "b": float(b), "n": n, "v_squared": None, "gap": None, "status": f"error: {exc}"})
            continue
        for c in cs:
            if not c.physical and not include_unphysical:
                continue
            row = {"F": float(F), "b": float(b), "n": n, "v_squared": _cx(c.v_squared), "gap": None, "status": "ok"}
            if F == 0:
                row["status"] = "ok (F=0 degenerate)"
            if c.physical:
                try:
                    if c.v_squared == 0:
                        # one v = 0 spectrum serves every level at this grid point
                        if "rep" not in decoupled:
                            decoupled["rep"] = oracle.spectrum(mp, ocfg, window=(levels[0], levels[-1] + 1), method="schur")
                        rep = decoupled["rep"]
                    else:
                        rep = oracle.spectrum(mp.with_coupling(math.sqrt(c.v_squared)), ocfg, window=(n, n + 1), method="schur")
                    row["gap"] = oracle.match_exceptional(rep, n, ocfg)[1]
                except Exception as exc:
                    row["status"] = f"error: {exc}"
            rows.append(row)
    return rows


def cmd_sweep(cfg: RunConfig) -> dict:
    base = cfg.params
    Fs = _grid(cfg.f_grid, base.F)
    bs = _grid(cfg.b_grid, base.b)
    ocfg = oracle.OracleConfig(max(cfg.basis, cfg.n_range[1] + 20), cfg.tolerance)
    points = [(F, b) for F in Fs for b in bs]
    if any(F == 0 for F in Fs):
        cfg.warnings.append("F = 0 line: algebraization conditions are degenerate there")
    threads = int(os.environ.get("VIBRONIC_QES_THREADS", "1") or 1)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        chunks = list(ex.map(lambda p: _sweep_point(p[0], p[1], cfg.levels, ocfg, cfg.include_unphysical), points))
    return {"rows": [r for chunk in chunks for r in chunk]}


HANDLERS = {
    "exceptional": cmd_exceptional,
    "couplings": cmd_couplings,
    "bethe": cmd_bethe,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
    "sweep": cmd_sweep,
}


def run(cfg: RunConfig) -> dict:
    body = HANDLERS[cfg.command](cfg)
    checks = body.get("checks", [])
    report = {
        "schema": SCHEMA,
        "command": cfg.command,
        "params": asdict(cfg.params),
        "n_range": list(cfg.n_range),
        **body,
        "warnings": list(cfg.warnings),
        "ok": all(c["passed"] for c in checks),
    }
    if cfg.physical is not None:
        report["physical"] = asdict(cfg.physical)
    return _jsonable(report)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return _cx(obj)
    return obj


# -- rendering ---------------------------------------------------------------


def _fmt(x, digits: int = 6) -> str:
    if isinstance(x, bool) or x is None:
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(x)
    if isinstance(x, (float, np.floating)):
        return f"{x:.{digits}g}"
    if isinstance(x, complex):
        return f"{x.real:.{digits}g}{x.imag:+.{digits}g}j"
    if isinstance(x, list):
        if len(x) == 2 and all(isinstance(v, float) for v in x):
            return _fmt(complex(*x), digits)
        return ";".join(_fmt(v, digits) for v in x)
    return str(x)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    rows = report.get("rows", [])
    cols: list[str] = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r.get(c), 17) for c in cols])
        return buf.getvalue()
    table = [cols] + [[_fmt(r.get(c)) for c in cols] for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(cols))] if cols else []
    lines = ["  ".join(cell.rjust(wd) for cell, wd in zip(row, widths)) for row in table]
    lines += [f"warning: {w}" for w in report.get("warnings", [])]
    if "checks" in report:
        failed = sum(not c["passed"] for c in report["checks"])
        lines.append(f"{len(report['checks']) - failed} passed, {failed} failed")
    return "\n".join(lines) + "\n"


# -- argument handling -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vibronic-qes", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--f", type=float, help="dimensionless slope difference F")
    p.add_argument("--b", type=float, help="dimensionless shift b")
    p.add_argument("--v", type=float, help="dimensionless coupling v")
    p.add_argument("--physical", type=float, nargs=6, metavar=("M", "HBAR", "OMEGA", "F1", "F2", "V"))
    p.add_argument("--n", default=None, help="level or range A..B")
    p.add_argument("--basis", type=int, default=None, help="oscillator basis size N")
    p.add_argument("--tolerance", type=float, default=None, help="oracle match tolerance")
    p.add_argument("--format", dest="fmt", choices=("table", "csv", "json"), default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None, help="JSON file; flags override it")
    p.add_argument("--include-unphysical", action="store_true", default=None)
    p.add_argument("--f-grid", type=float, nargs=3, metavar=("START", "STOP", "COUNT"))
    p.add_argument("--b-grid", type=float, nargs=3, metavar=("START", "STOP", "COUNT"))
    p.add_argument("--inject-fault", action="store_true", help="corrupt H4 (negative control for verify)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    file_cfg: dict = {}
    if args.config:
        with open(args.config) as fh:
            file_cfg = json.load(fh)

    mp = pp = None
    if any(x is not None for x in (args.f, args.b, args.v)):
        base = file_cfg.get("model", {})
        mp = ModelParams(
            F=args.f if args.f is not None else base.get("F", 0.0),
            b=args.b if args.b is not None else base.get("b", 0.0),
            v=args.v if args.v is not None else base.get("v", 0.0),
        )
    elif args.physical is not None:
        pp = PhysicalParams(*args.physical)
    elif "physical" in file_cfg and "model" in file_cfg:
        raise ValueError("config file has both 'model' and 'physical' blocks")
    elif "physical" in file_cfg:
        pp = PhysicalParams(**file_cfg["physical"])
    else:
        mp = ModelParams(**file_cfg.get("model", {}))

    def pick(flag, key, default):
        return flag if flag is not None else file_cfg.get(key, default)

    n_text = pick(args.n, "n", "0..3")
    grid = lambda flag, key: tuple(flag) if flag is not None else (tuple(file_cfg[key]) if key in file_cfg else None)
    return RunConfig(
        command=args.command,
        model=mp,
        physical=pp,
        n_range=parse_n_range(str(n_text)),
        basis=int(pick(args.basis, "basis", 200)),
        fmt=pick(args.fmt, "format", "table"),
        out=pick(args.out, "out", None),
        include_unphysical=bool(pick(args.include_unphysical, "include_unphysical", False)),
        inject_fault=args.inject_fault,
        f_grid=grid(args.f_grid, "f_grid"),
        b_grid=grid(args.b_grid, "b_grid"),
        tolerance=float(pick(args.tolerance, "tolerance", 1e-7)),
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        report = run(cfg)
    except (ValueError, oracle.UntrustedTarget) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = render(report, cfg.fmt)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report["ok"] else 1


if __name__ == "__main__":
    sys.exit(main())
