"""Brute-force spectrum of the coupled two-channel problem.

The dimensionless pair is written in the harmonic-oscillator number basis
``|k>``, ``k = 0..N-1``, as one symmetric ``2N x 2N`` eigenproblem::

    [[H0 + F Z + F b I,  v I],
     [v I,               H0 ]]

with ``H0 = diag(k + 1/2)`` and ``Z`` the position operator.  Eigenvalues are
``lambda = E2 + 1/2``, so exceptional levels sit exactly at ``n + 1/2``.
Only the lower half of the spectrum is trusted against basis truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import blas

from .model import ModelParams


class EigensolverError(RuntimeError):
    pass


class UntrustedTarget(ValueError):
    """Target eigenvalue lies outside the truncation-safe part of the spectrum."""


@dataclass(frozen=True)
class OracleConfig:
    basis_size: int = 200
    match_tolerance: float = 1e-7

    def __post_init__(self):
        if self.basis_size < 8:
            raise ValueError("basis_size must be >= 8")
        if not self.match_tolerance > 0:
            raise ValueError("match_tolerance must be positive")

    def check_level(self, n: int) -> None:
        if self.basis_size < n + 20:
            raise ValueError(f"basis_size {self.basis_size} too small for level {n} (need >= n + 20)")


@dataclass(frozen=True)
class Match:
    n: int
    target: float
    nearest: float
    gap: float
    matched: bool


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    basis_size: int
    trusted_max: float
    matches: list[Match] = field(default_factory=list)
    policy: str = "eigenvalues with index < N (lower half of 2N) are trusted"


def position_matrix(N: int) -> np.ndarray:
    if N < 2:
        raise ValueError("N must be >= 2")
    off = np.sqrt(np.arange(1, N) / 2.0)
    return np.diag(off, 1) + np.diag(off, -1)


def coupled_matrix(mp: ModelParams, cfg: OracleConfig) -> np.ndarray:
    N = cfg.basis_size
    H0 = np.diag(np.arange(N) + 0.5)
    Z = position_matrix(N)
    eye = np.eye(N)
    return np.block([
        [H0 + mp.F * Z + mp.F * mp.b * eye, mp.v * eye],
        [mp.v * eye, H0],
    ])


def tridiagonalize(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Householder reduction of a symmetric matrix; returns (diagonal, off-diagonal).

    Only the lower triangle is referenced.  The active trailing block is kept
    as its own Fortran-ordered array so BLAS ``symv``/``syr2`` update it in place.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("square matrix expected")
    if not np.all(np.isfinite(A)):
        raise EigensolverError("matrix has non-finite entries")
    d = np.zeros(n)
    e = np.zeros(max(n - 1, 0))
    S = np.array(A, order="F", copy=True)
    for k in range(n - 2):
        d[k] = S[0, 0]
        x = S[1:, 0]
        sigma = np.linalg.norm(x)
        S = np.asfortranarray(S[1:, 1:])
        if sigma == 0.0:
            continue
        alpha = -np.copysign(sigma, x[0])
        u = x.copy()
        u[0] -= alpha
        u /= np.linalg.norm(u)
        p = blas.dsymv(1.0, S, u, lower=1)
        w = p - np.dot(u, p) * u
        S = blas.dsyr2(-2.0, u, w, a=S, lower=1, overwrite_a=1)
        e[k] = alpha
    if n >= 2:
        d[n - 2], d[n - 1], e[n - 2] = S[0, 0], S[1, 1], S[1, 0]
    elif n == 1:
        d[0] = S[0, 0]
    return d, e


def sturm_count(d: np.ndarray, e2: np.ndarray, x: np.ndarray, pivmin: float) -> np.ndarray:
    """Number of eigenvalues of the tridiagonal matrix below each entry of ``x``."""
    x = np.asarray(x, dtype=float)
    if x.size <= 6:
        dl, el = d.tolist(), e2.tolist()
        return np.array([_sturm_scalar(dl, el, float(xi), pivmin) for xi in x.ravel()]).reshape(x.shape)
    neg = np.zeros((d.size,) + x.shape, dtype=bool)
    t = np.empty_like(x)
    q = d[0] - x
    for i in range(d.size):
        if i:
            np.divide(e2[i - 1], q, out=t)
            np.subtract(d[i], x, out=q)
            q -= t
        if not q.all():
            q[q == 0] = -pivmin
        np.less(q, 0, out=neg[i])
    return neg.sum(0)


def _sturm_scalar(d: list, e2: list, x: float, pivmin: float) -> int:
    q = d[0] - x
    if q == 0.0:
        q = -pivmin
    count = q < 0
    for di, ei in zip(d[1:], e2):
        q = di - x - ei / q
        if q == 0.0:
            q = -pivmin
        if q < 0:
            count += 1
    return int(count)


def _bisect(d, e2, idx, lo, hi, pivmin, max_iter):
    eps = np.finfo(float).eps
    lo, hi = lo.copy(), hi.copy()
    for _ in range(max_iter):
        active = hi - lo > 2 * eps * np.maximum(np.abs(lo), np.abs(hi)) + 4 * pivmin
        if not active.any():
            return (lo + hi) / 2
        a = np.flatnonzero(active)
        mid = (lo[a] + hi[a]) / 2
        left = sturm_count(d, e2, mid, pivmin) > idx[a]
        hi[a[left]] = mid[left]
        lo[a[~left]] = mid[~left]
    raise EigensolverError(f"bisection did not converge in {max_iter} steps; max width {np.max(hi - lo):.3g}")


def _bounds(d, e):
    r = np.abs(np.concatenate(([0.0], e))) + np.abs(np.concatenate((e, [0.0])))
    lo, hi = float(np.min(d - r)), float(np.max(d + r))
    pad = 1e-12 * max(abs(lo), abs(hi), 1.0)
    return lo - pad, hi + pad


def tridiagonal_eigvalsh(d: np.ndarray, e: np.ndarray, select=None, max_iter: int = 200) -> np.ndarray:
    """Eigenvalues of a symmetric tridiagonal matrix by Sturm bisection.

    ``select`` is ``None`` (all), an int ``m`` (lowest ``m``) or an index array.
    """
    n = d.size
    if select is None:
        idx = np.arange(n)
    elif np.isscalar(select):
        idx = np.arange(min(int(select), n))
    else:
        idx = np.asarray(select, dtype=int)
    if idx.size == 0:
        return np.zeros(0)
    e2 = e**2
    pivmin = np.finfo(float).tiny * max(1.0, float(np.max(e2, initial=1.0)))
    lo0, hi0 = _bounds(d, e)
    return _bisect(d, e2, idx, np.full(idx.size, lo0), np.full(idx.size, hi0), pivmin, max_iter)


def tridiagonal_count_below(d: np.ndarray, e: np.ndarray, x: float) -> int:
    pivmin = np.finfo(float).tiny * max(1.0, float(np.max(e**2, initial=1.0)))
    return int(sturm_count(d, e**2, np.array([x]), pivmin)[0])


def symmetric_eigvalsh(A: np.ndarray, select=None) -> np.ndarray:
    """Ascending eigenvalues of a dense symmetric matrix (see :func:`tridiagonal_eigvalsh`)."""
    A = np.asarray(A, dtype=float)
    if not np.array_equal(A, A.T):
        raise ValueError("matrix is not exactly symmetric")
    d, e = tridiagonalize(A)
    return tridiagonal_eigvalsh(d, e, select)


def schur_count_below(mp: ModelParams, N: int, x: float) -> int:
    """Eigenvalues of :func:`coupled_matrix` below ``x`` without building it.

    The second channel block ``H0 - x`` is diagonal, so by inertia additivity
    the count is the number of ``k + 1/2 < x`` plus the Sturm count of the
    tridiagonal Schur complement
    ``H0 + F Z + F b - x - v^2 (H0 - x)^-1``.
    """
    x = float(x)
    half = x - 0.5
    if half == round(half) and 0 <= half < N:
        x = math.nextafter(x, -math.inf)
    count = min(max(math.ceil(x - 0.5), 0), N)
    F, shift, v2 = mp.F, mp.F * mp.b - x, mp.v * mp.v
    pivmin = np.finfo(float).tiny * max(1.0, F * F * N)
    q = 1.0
    for k in range(N):
        h = k + 0.5
        dk = h + shift - v2 / (h - x)
        q = dk - (F * F * k / 2) / q if k else dk
        if q == 0.0:
            q = -pivmin
        if q < 0:
            count += 1
    return count


def _schur_eigvals(mp: ModelParams, N: int, idx, lo: float, hi: float) -> np.ndarray:
    eps = np.finfo(float).eps
    out = []
    for i in idx:
        a, b = lo, hi
        for _ in range(200):
            if b - a <= 2 * eps * max(abs(a), abs(b), 1e-300):
                break
            mid = (a + b) / 2
            if mid in (a, b):
                break
            if schur_count_below(mp, N, mid) > i:
                b = mid
            else:
                a = mid
        else:
            raise EigensolverError(f"bisection for eigenvalue {i} did not converge")
        out.append((a + b) / 2)
    return np.array(out)


def _schur_bounds(mp: ModelParams, N: int) -> tuple[float, float]:
    # Gershgorin discs of the full 2N matrix
    r = abs(mp.F) * math.sqrt(N / 2) * 2 + abs(mp.v)
    lo = 0.5 + min(0.0, mp.F * mp.b) - r
    hi = N - 0.5 + max(0.0, mp.F * mp.b) + r
    pad = 1e-12 * max(abs(lo), abs(hi), 1.0)
    return lo - pad, hi + pad


def spectrum(
    mp: ModelParams,
    cfg: OracleConfig,
    window: tuple[float, float] | None = None,
    method: str = "dense",
) -> SpectrumReport:
    """Trusted eigenvalues of :func:`coupled_matrix`, ascending.

    With ``window=(lo, hi)`` only trusted eigenvalues inside the window are
    computed, which is much cheaper for large bases.

    ``method="dense"`` tridiagonalises the stored matrix.  ``method="schur"``
    bisects on :func:`schur_count_below` and never forms the matrix; it is the
    fast choice for a few windowed eigenvalues.
    """
    N = cfg.basis_size
    if method == "schur":
        lo, hi = _schur_bounds(mp, N)
        top = _schur_eigvals(mp, N, [N - 1], lo, hi)[0]
        if window is None:
            ev = _schur_eigvals(mp, N, range(N), lo, hi)
        else:
            i0 = schur_count_below(mp, N, window[0])
            i1 = min(schur_count_below(mp, N, window[1]), N)
            ev = _schur_eigvals(mp, N, range(i0, i1), lo, hi)
        return SpectrumReport(eigenvalues=ev, basis_size=N, trusted_max=float(top))
    if method != "dense":
        raise ValueError(f"unknown method {method!r}")
    d, e = tridiagonalize(coupled_matrix(mp, cfg))
    if window is None:
        ev = tridiagonal_eigvalsh(d, e, N)
        return SpectrumReport(eigenvalues=ev, basis_size=N, trusted_max=float(ev[-1]))
    i0 = tridiagonal_count_below(d, e, window[0])
    i1 = min(tridiagonal_count_below(d, e, window[1]), N)
    ev = tridiagonal_eigvalsh(d, e, np.append(np.arange(i0, i1), N - 1))
    return SpectrumReport(eigenvalues=ev[:-1], basis_size=N, trusted_max=float(ev[-1]))


def match_exceptional(report: SpectrumReport, n: int, cfg: OracleConfig) -> tuple[bool, float]:
    target = n + 0.5
    if target > report.trusted_max:
        raise UntrustedTarget(f"target {target} above trusted range {report.trusted_max:.6g}")
    gap = float(np.min(np.abs(report.eigenvalues - target)))
    matched = gap <= cfg.match_tolerance
    nearest = float(report.eigenvalues[np.argmin(np.abs(report.eigenvalues - target))])
    report.matches.append(Match(n, target, nearest, gap, matched))
    return matched, gap
