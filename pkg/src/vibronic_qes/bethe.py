"""Bethe-ansatz roots of the polynomial solutions of ``H4``.

For ``y = prod(z - z_i)`` the quotient ``H4 y / y`` has simple poles at the
roots.  Setting every residue to zero gives ``n`` algebraic equations for the
``z_i``; the constant left over fixes the coupling::

    v^2 - E1 E2 = -F sum(z_i) + n(n-1) + n(1 - E2 - E1)

With ``w_j = 1/(z_i - z_j)`` and power sums ``s_k = sum_{j != i} w_j^k`` the
sums over mutually distinct indices reduce to

    pairs   sum w_j w_l        = s1^2 - s2
    triples sum w_p w_l w_j    = s1^3 - 3 s1 s2 + 2 s3
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import LevelParams, ModelParams, level_params
from .polyop import Polynomial, apply, DiffOperator
from .sl2 import allowed_couplings

log = logging.getLogger(__name__)

CONVERGED_TOL = 1e-9
COLLISION_TOL = 1e-10
DEDUP_TOL = 1e-7


class CoincidentRoots(ValueError):
    pass


class DecoupledState(ValueError):
    """Second component cannot be rebuilt because ``v == 0``."""


@dataclass(frozen=True)
class BetheSolution:
    n: int
    roots: np.ndarray
    level: LevelParams
    params: ModelParams
    residue_norm: float
    iterations: int = 0
    seed: str = ""

    @property
    def v(self) -> float:
        return self.params.v

    @property
    def converged(self) -> bool:
        return self.residue_norm <= CONVERGED_TOL

    @property
    def y1(self) -> Polynomial:
        return Polynomial.from_roots(self.roots)

    @property
    def implied_v_squared(self) -> complex:
        """Coupling for which these roots give an exact polynomial solution."""
        n, lp, F = self.n, self.level, self.params.F
        v2 = lp.E1 * lp.E2 - F * np.sum(self.roots) + n * (n - 1) + n * (1 - lp.E2 - lp.E1)
        return complex(v2)

    @property
    def physical(self) -> bool:
        v2 = self.implied_v_squared
        tol = CONVERGED_TOL * max(1.0, abs(v2))
        return abs(v2.imag) <= tol and v2.real >= -tol

    @property
    def constraint_residual(self) -> float:
        return constraint_residual(self)


@dataclass
class SolveDiagnostics:
    seeds_tried: int = 0
    converged: int = 0
    failures: list[str] = field(default_factory=list)


def _h4_parts(lp: LevelParams, mp: ModelParams):
    F, E1, E2 = mp.F, lp.E1, lp.E2
    c2 = E1 / 2 + E2 / 2 - 1.0
    c1 = 1.0 - E2 - E1

    def q2(z):
        return z * z + F / 2 * z + c2

    def q1(z):
        return -F * z * z + c1 * z

    def dq2(z):
        return 2 * z + F / 2

    def dq1(z):
        return -2 * F * z + c1

    return q2, q1, dq2, dq1


def _inverse_differences(roots: np.ndarray) -> np.ndarray:
    diff = roots[:, None] - roots[None, :]
    n = roots.size
    off = ~np.eye(n, dtype=bool)
    if n > 1 and np.min(np.abs(diff[off])) <= COLLISION_TOL:
        raise CoincidentRoots("roots closer than collision tolerance")
    w = np.zeros_like(diff)
    w[off] = 1.0 / diff[off]
    return w


def bethe_residues(roots, lp: LevelParams, mp: ModelParams) -> np.ndarray:
    """Residue of ``H4 y / y`` at each root of ``y = prod(z - z_i)``."""
    z = np.asarray(roots, dtype=complex)
    if z.size < 1:
        raise ValueError("need at least one root")
    w = _inverse_differences(z)
    s1, s2, s3 = w.sum(1), (w**2).sum(1), (w**3).sum(1)
    q2, q1, _, _ = _h4_parts(lp, mp)
    quad = s1**3 - 3 * s1 * s2 + 2 * s3
    trip = 3 * (s1**2 - s2)
    return quad - z * trip + q2(z) * 2 * s1 + q1(z)


def bethe_jacobian(roots, lp: LevelParams, mp: ModelParams) -> np.ndarray:
    """``J[i, k] = d residue_i / d z_k`` (holomorphic in the roots)."""
    z = np.asarray(roots, dtype=complex)
    w = _inverse_differences(z)
    s1, s2 = w.sum(1), (w**2).sum(1)
    q2, _, dq2, dq1 = _h4_parts(lp, mp)
    s1c, s2c, zc = s1[:, None], s2[:, None], z[:, None]
    # dR_i/dw_ik
    dR_dw = (3 * s1c**2 - 3 * (s2c + 2 * s1c * w) + 6 * w**2) - 3 * zc * (2 * s1c - 2 * w) + 2 * q2(zc)
    # dw_ik/dz_k = +w_ik^2, dw_ik/dz_i = -w_ik^2
    J = dR_dw * w**2
    np.fill_diagonal(J, 0.0)
    explicit = -3 * (s1**2 - s2) + 2 * dq2(z) * s1 + dq1(z)
    J[np.diag_indices_from(J)] = explicit - J.sum(1)
    return J


def _newton(z0: np.ndarray, lp, mp, max_iter: int = 60):
    z = z0.astype(complex)
    r = bethe_residues(z, lp, mp)
    nr = np.max(np.abs(r))
    for it in range(1, max_iter + 1):
        if nr <= 1e-14 * max(1.0, np.max(np.abs(z)) ** 3):
            return z, nr, it
        J = bethe_jacobian(z, lp, mp)
        try:
            step = np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            return z, nr, it
        t = 1.0
        while t > 1e-4:
            try:
                zt = z - t * step
                rt = bethe_residues(zt, lp, mp)
            except CoincidentRoots:
                t /= 2
                continue
            nt = np.max(np.abs(rt))
            if np.isfinite(nt) and nt < nr:
                break
            t /= 2
        else:
            return z, nr, it
        z, r, nr = zt, rt, nt
    return z, nr, max_iter


def _spread_seeds(n: int, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    k = np.arange(n)
    cheb = np.cos(np.pi * (k + 0.5) / n) * np.sqrt(2 * n + 1)
    seeds = [cheb.astype(complex)]
    for _ in range(count - 1):
        s = cheb * rng.uniform(0.3, 2.0) + rng.normal(scale=0.5, size=n) + 1j * rng.normal(scale=0.5, size=n)
        seeds.append(s)
    return seeds


def _canonical(roots: np.ndarray) -> np.ndarray:
    r = np.round(roots, 12)
    order = np.lexsort((r.imag, r.real))
    return roots[order]


def same_root_set(a, b, tol: float = DEDUP_TOL) -> bool:
    """True if two root lists agree up to permutation within ``tol``."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if a.size != b.size:
        return False
    if a.size == 0:
        return True
    cost = np.abs(a[:, None] - b[None, :])
    i, j = linear_sum_assignment(cost)
    return bool(np.max(cost[i, j]) <= tol * max(1.0, np.max(np.abs(a))))


def solve_bethe(
    n: int,
    lp: LevelParams | None,
    mp: ModelParams,
    seeds=None,
    random_starts: int = 0,
    rng: np.random.Generator | None = None,
    diagnostics: SolveDiagnostics | None = None,
) -> list[BetheSolution]:
    """Newton multistart on :func:`bethe_residues`.

    Default seeds are the roots of the full-degree kernel polynomials from
    :func:`allowed_couplings`.  If there are none (or ``random_starts`` is set),
    perturbed Chebyshev spreads are tried.  Failures do not raise; they are
    recorded in ``diagnostics``.
    """
    if n < 1:
        raise ValueError("Bethe equations need n >= 1")
    lp = lp or level_params(n, mp)
    diag = diagnostics if diagnostics is not None else SolveDiagnostics()
    rng = rng or np.random.default_rng(0)

    starts: list[tuple[str, np.ndarray]] = []
    if seeds is None:
        for c in allowed_couplings(n, mp):
            if not c.degree_deficient and c.kernel_poly.degree == n:
                starts.append((f"kernel v2={c.v_squared}", c.roots))
        if not starts:
            random_starts = max(random_starts, 20)
    else:
        starts = [(f"user{i}", np.asarray(s, dtype=complex)) for i, s in enumerate(seeds)]
    starts += [(f"spread{i}", s) for i, s in enumerate(_spread_seeds(n, random_starts, rng))] if random_starts else []

    found: list[BetheSolution] = []
    for label, z0 in starts:
        diag.seeds_tried += 1
        if z0.size != n:
            diag.failures.append(f"{label}: wrong number of roots")
            continue
        try:
            z, nr, it = _newton(z0, lp, mp)
        except CoincidentRoots:
            diag.failures.append(f"{label}: coincident roots")
            continue
        if not nr <= CONVERGED_TOL:
            diag.failures.append(f"{label}: residual {nr:.3g}")
            continue
        z = _canonical(z)
        sol = BetheSolution(n, z, lp, mp, float(nr), it, label)
        if any(same_root_set(s.roots, z) for s in found):
            continue
        found.append(sol)
        diag.converged += 1
    if not found:
        log.info("no Bethe solution for n=%d: %s", n, diag.failures)
    found.sort(key=lambda s: (s.implied_v_squared.real, s.implied_v_squared.imag))
    return found


def constraint_residual(sol: BetheSolution) -> float:
    """``|v^2 - E1 E2 - (-F sum z + n(n-1) + n(1 - E2 - E1))|``."""
    return float(abs(sol.v**2 - sol.implied_v_squared))


def _a2(E2: float) -> DiffOperator:
    return DiffOperator([[E2], [0.0, -1.0], [0.5]])


def _a1(F: float, E1: float) -> DiffOperator:
    return DiffOperator([[E1, -F], [0.0, -1.0], [0.5]])


def mirror(p: Polynomial) -> Polynomial:
    """``p(-z)``."""
    c = np.array(p.coeffs, copy=True)
    c[1::2] *= -1
    return Polynomial(c)


def wavefunctions(sol: BetheSolution) -> tuple[Polynomial, Polynomial]:
    """Polynomial parts ``(y1, y2)`` of the two channel components.

    ``psi_k(z) = exp(-z^2/2) y_k(z)`` solve the dimensionless coupled pair

        1/2 y1'' - z y1' + (E1 - F z) y1 = v y2
        1/2 y2'' - z y2' + E2 y2         = v y1

    ``H4`` is the fourth-order equation of the harmonic (second) channel with
    the slope reflected, so ``y2(z) = prod(-z - z_i)`` up to sign and
    ``y1`` follows from the second line.
    """
    if sol.v == 0:
        raise DecoupledState("v = 0: channels decouple and y1 is not fixed by y2")
    lp = sol.level
    y2 = mirror(sol.y1)
    y1 = apply(_a2(lp.E2), y2) / sol.v
    return y1, y2


def coupled_residuals(y1: Polynomial, y2: Polynomial, lp: LevelParams, mp: ModelParams):
    """Left minus right side of both polynomial equations, as polynomials."""
    r1 = apply(_a1(mp.F, lp.E1), y1) - mp.v * y2
    r2 = apply(_a2(lp.E2), y2) - mp.v * y1
    return r1, r2
