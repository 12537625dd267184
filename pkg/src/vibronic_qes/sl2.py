"""Hidden sl(2) structure of the decoupled fourth-order operator.

The generators act on polynomials of degree ``<= n``::

    J+ = z^2 d - n z,    J0 = z d - n/2,    J- = d

A second-order operator built bilinearly from them preserves that space.  The
fourth-order vibronic operator ``H4`` preserves it exactly when ``E2 = n``;
restricting it to the space turns the search for polynomial solutions into a
small eigenvalue problem for the coupling ``v**2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from .model import LevelParams, ModelParams, level_params
from .polyop import DiffOperator, Polynomial, apply, compose, poly_roots

COEFF_TOL = 1e-12
SPILL_TOL = 1e-10
MONIC_TOL = 1e-12


class ConsistencyError(RuntimeError):
    """Raised when an expanded operator disagrees with its closed form."""


@dataclass(frozen=True)
class Sl2Generators:
    n: int
    jplus: DiffOperator
    jzero: DiffOperator
    jminus: DiffOperator


@dataclass(frozen=True)
class QesCoefficients:
    C_pp: float = 0.0
    C_p0: float = 0.0
    C_pm: float = 0.0
    C_0m: float = 0.0
    C_mm: float = 0.0
    C_p: float = 0.0
    C_0: float = 0.0
    C_m: float = 0.0
    C: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            if not np.isfinite(getattr(self, f.name)):
                raise ValueError(f"{f.name} must be finite")


@dataclass(frozen=True)
class SubspaceProjection:
    n: int
    matrix: np.ndarray
    invariant_flag: bool
    spill: float


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the three algebraization conditions on an order-4 operator."""

    n: int
    holds: bool
    conditions: dict[str, tuple[float, float]]
    degenerate: bool = False
    notes: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Coupling:
    """One admissible coupling for level ``n`` with its polynomial solution."""

    n: int
    v_squared: complex
    kernel_poly: Polynomial
    physical: bool
    degree_deficient: bool
    multiplicity: int = 1

    @property
    def roots(self) -> np.ndarray:
        if self.kernel_poly.degree < 1:
            return np.zeros(0, dtype=complex)
        return poly_roots(self.kernel_poly)


def make_generators(n: int) -> Sl2Generators:
    if n < 0:
        raise ValueError("n must be non-negative")
    jplus = DiffOperator([[0.0, -float(n)], [0.0, 0.0, 1.0]])
    jzero = DiffOperator([[-n / 2], [0.0, 1.0]])
    jminus = DiffOperator.d(1)
    return Sl2Generators(n, jplus, jzero, jminus)


def qes_closed_form(c: QesCoefficients, n: int) -> tuple[Polynomial, Polynomial, Polynomial]:
    """``(P4, P3, P2)`` written directly in terms of the C's."""
    P4 = Polynomial([c.C_mm, c.C_0m, c.C_pm, c.C_p0, c.C_pp])
    P3 = Polynomial([
        c.C_m - n / 2 * c.C_0m,
        c.C_0 - n * c.C_pm,
        c.C_p + c.C_p0 * (1 - 1.5 * n),
        c.C_pp * (2 - 2 * n),
    ])
    P2 = Polynomial([
        c.C - n / 2 * c.C_0,
        n**2 / 2 * c.C_p0 - n * c.C_p,
        c.C_pp * n * (n - 1),
    ])
    return P4, P3, P2


def build_general_qes(c: QesCoefficients, n: int) -> DiffOperator:
    """Expand the general bilinear combination of generators.

    The expansion is checked against :func:`qes_closed_form`; a mismatch means
    the operator algebra itself is broken and raises :class:`ConsistencyError`.
    """
    g = make_generators(n)
    Jp, J0, Jm = g.jplus, g.jzero, g.jminus
    op = (
        c.C_pp * compose(Jp, Jp)
        + c.C_p0 * compose(Jp, J0)
        + c.C_pm * compose(Jp, Jm)
        + c.C_0m * compose(J0, Jm)
        + c.C_mm * compose(Jm, Jm)
        + c.C_p * Jp
        + c.C_0 * J0
        + c.C_m * Jm
        + DiffOperator([c.C])
    )
    expected = DiffOperator(list(qes_closed_form(c, n)[::-1]))
    scale = max(1.0, max(abs(getattr(c, f.name)) for f in fields(c)) * (1 + n) ** 2)
    if not op.allclose(expected, atol=COEFF_TOL * scale):
        raise ConsistencyError("generator expansion disagrees with closed-form coefficients")
    return op


def build_h4(lp: LevelParams, mp: ModelParams) -> DiffOperator:
    """Fourth-order operator acting on the polynomial part of a vibronic state."""
    F, E1, E2, v = mp.F, lp.E1, lp.E2, mp.v
    return DiffOperator([
        [E1 * E2 - v**2, F * E2],
        [0.0, 1.0 - E2 - E1, -F],
        [E1 / 2 + E2 / 2 - 1.0, F / 2, 1.0],
        [0.0, -1.0],
        [0.25],
    ])


def qes_condition_check(op: DiffOperator, n: int) -> ConditionReport:
    """Test ``b3 = -2(n-1)a4``, ``c2 = n(n-1)a4``, ``c1 = -n[(n-1)a3 + b2]``.

    ``a``, ``b``, ``c`` are the coefficients of the d^2, d^1 and d^0 parts.
    Only these three conditions are checked; nothing is required of
    the d^3 and d^4 parts.
    """
    if op.order < 2:
        raise ValueError("operator must have order >= 2")
    P4, P3, P2 = op.coefficient(2), op.coefficient(1), op.coefficient(0)
    if P4.degree > 4 or P3.degree > 3 or P2.degree > 2:
        raise ValueError("coefficient degrees exceed (4, 3, 2)")
    a4, a3 = P4.coeff(4), P4.coeff(3)
    b3, b2 = P3.coeff(3), P3.coeff(2)
    c2, c1 = P2.coeff(2), P2.coeff(1)
    conds = {
        "b3 = -2(n-1) a4": (b3, -2 * (n - 1) * a4),
        "c2 = n(n-1) a4": (c2, n * (n - 1) * a4),
        "c1 = -n[(n-1) a3 + b2]": (c1, -n * ((n - 1) * a3 + b2)),
    }
    scale = max(1.0, *(abs(x) for x in (a4, a3, b3, b2, c2, c1))) * (1 + n) ** 2
    holds = all(abs(lhs - rhs) <= COEFF_TOL * scale for lhs, rhs in conds.values())
    notes = []
    if a4 == 0 and a3 == 0 and b3 == 0 and c2 == 0:
        notes.append("first two conditions are vacuous (a4 = a3 = b3 = c2 = 0)")
        notes.append("third condition reads c1 = -n b2; for H4 this is F*E2 = n*F and fixes E2 = n")
    degenerate = b2 == 0 and c1 == 0
    if degenerate:
        notes.append("b2 = c1 = 0 (F = 0): all conditions reduce to 0 = 0 and E2 is not fixed")
    return ConditionReport(n=n, holds=holds, conditions=conds, degenerate=degenerate, notes=notes)


def project_invariant_subspace(op: DiffOperator, n: int) -> SubspaceProjection:
    """Matrix of ``op`` on span{1, z, ..., z^n}; column j is the image of z^j."""
    M = np.zeros((n + 1, n + 1))
    spill = 0.0
    scale = 0.0
    for j in range(n + 1):
        img = apply(op, Polynomial.monomial(j)).coeffs
        if np.iscomplexobj(img):
            raise TypeError("real operator expected")
        M[: min(n + 1, img.size), j] = img[: n + 1]
        scale = max(scale, np.max(np.abs(img)))
        if img.size > n + 1:
            spill = max(spill, float(np.max(np.abs(img[n + 1:]))))
    rel = spill / scale if scale > 0 else 0.0
    return SubspaceProjection(n=n, matrix=M, invariant_flag=rel <= SPILL_TOL, spill=rel)


def coupling_matrix(n: int, mp: ModelParams) -> tuple[np.ndarray, float]:
    """``(A0, E1*E2)`` where ``A0`` is H4 on degree-``<= n`` polynomials minus its
    scalar term.  Polynomial solutions exist for ``v**2 = E1*E2 + mu``, ``mu`` an
    eigenvalue of ``A0``."""
    lp = level_params(n, mp)
    op = build_h4(lp, mp.with_coupling(0.0))
    shift = lp.E1 * lp.E2
    proj = project_invariant_subspace(op - DiffOperator([shift]), n)
    if not proj.invariant_flag:
        raise ConsistencyError(f"H4 does not preserve degree-{n} polynomials")
    return proj.matrix, shift


def allowed_couplings(n: int, mp: ModelParams, tol: float = 1e-9) -> list[Coupling]:
    """All couplings ``v**2`` for which level ``n`` carries a polynomial solution.

    The ``v`` field of ``mp`` is ignored.  Negative or complex ``v**2`` are kept
    and marked ``physical=False``.  Kernel polynomials are scaled monic unless
    their top coefficient vanishes, in which case they are marked
    ``degree_deficient`` and normalised to unit leading coefficient instead.
    """
    A0, shift = coupling_matrix(n, mp)
    try:
        mu, vecs = np.linalg.eig(A0)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed for n={n}") from exc
    scale = max(1.0, float(np.max(np.abs(A0))) if A0.size else 1.0)
    out = []
    for k in np.argsort(-mu.real, kind="stable"):
        v2 = shift + mu[k]
        if abs(v2.imag) <= tol * scale:
            v2 = float(v2.real)
            if abs(v2) <= tol * scale:
                v2 = 0.0
        vec = vecs[:, k]
        if np.max(np.abs(vec.imag)) <= 1e-13 * np.max(np.abs(vec)):
            vec = vec.real
        top = vec[-1]
        nrm = np.max(np.abs(vec))
        deficient = abs(top) <= MONIC_TOL * nrm
        if deficient:
            lead = vec[np.flatnonzero(np.abs(vec) > MONIC_TOL * nrm)[-1]]
            vec = vec / lead
        else:
            vec = vec / top
        mult = int(np.sum(np.abs(mu - mu[k]) <= 1e-8 * scale))
        physical = isinstance(v2, float) and v2 >= 0
        out.append(Coupling(n, v2, Polynomial(vec), physical, bool(deficient), mult))
    return out


def kernel_residual(c: Coupling, mp: ModelParams) -> float:
    """Relative size of ``H4 y`` for a coupling's kernel polynomial."""
    v2 = c.v_squared
    lp = level_params(c.n, mp)
    op = build_h4(lp, mp.with_coupling(0.0)) - DiffOperator([v2])
    r = apply(op, c.kernel_poly)
    scale = max(1.0, abs(v2), abs(lp.E1 * lp.E2)) * max(1.0, np.max(np.abs(c.kernel_poly.coeffs)))
    return float(np.max(np.abs(r.coeffs)) / scale)
