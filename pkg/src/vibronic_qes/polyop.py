"""Dense polynomials and linear differential operators with polynomial coefficients.

A :class:`Polynomial` stores real (or, internally, complex) coefficients in
ascending powers of ``z``.  The zero polynomial is stored as the single
coefficient ``(0.0,)`` and has degree ``-1``.

A :class:`DiffOperator` is ``sum_k p_k(z) d^k/dz^k``; ``terms[k]`` is ``p_k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

MAX_ORDER = 8


class OrderCapExceeded(ValueError):
    pass


def _trim(c: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return np.zeros(1, dtype=c.dtype)
    return c[: nz[-1] + 1]


@dataclass(frozen=True, eq=False)
class Polynomial:
    coeffs: np.ndarray

    def __init__(self, coeffs: Iterable[complex] | np.ndarray = (0.0,)):
        c = np.array(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs)
        if c.size == 0:
            c = np.zeros(1)
        if not np.iscomplexobj(c):
            c = c.astype(float)
        c = _trim(c)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def monomial(cls, k: int, scale: float = 1.0) -> Polynomial:
        c = np.zeros(k + 1)
        c[k] = scale
        return cls(c)

    @classmethod
    def from_roots(cls, roots: Sequence[complex]) -> Polynomial:
        """Monic polynomial ``prod(z - r)``; real-valued if the roots allow it."""
        if len(roots) == 0:
            return cls([1.0])
        c = npoly.polyfromroots(np.asarray(roots, dtype=complex))
        if np.all(np.abs(c.imag) <= 1e-13 * np.max(np.abs(c))):
            c = c.real
        return cls(c)

    @property
    def degree(self) -> int:
        if self.coeffs.size == 1 and self.coeffs[0] == 0:
            return -1
        return self.coeffs.size - 1

    @property
    def is_zero(self) -> bool:
        return self.degree < 0

    def coeff(self, k: int) -> complex:
        return self.coeffs[k] if 0 <= k < self.coeffs.size else 0.0

    def padded(self, length: int) -> np.ndarray:
        out = np.zeros(max(length, self.coeffs.size), dtype=self.coeffs.dtype)
        out[: self.coeffs.size] = self.coeffs
        return out

    def deriv(self, m: int = 1) -> Polynomial:
        if m == 0:
            return self
        if self.coeffs.size <= m:
            return Polynomial()
        return Polynomial(npoly.polyder(self.coeffs, m))

    def __call__(self, z):
        return npoly.polyval(z, self.coeffs)

    def __add__(self, other: Polynomial | float) -> Polynomial:
        other = _as_poly(other)
        return Polynomial(npoly.polyadd(self.coeffs, other.coeffs))

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial(-self.coeffs)

    def __sub__(self, other: Polynomial | float) -> Polynomial:
        return self + (-_as_poly(other))

    def __rsub__(self, other: Polynomial | float) -> Polynomial:
        return _as_poly(other) - self

    def __mul__(self, other: Polynomial | float) -> Polynomial:
        if isinstance(other, Polynomial):
            return Polynomial(npoly.polymul(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * other)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> Polynomial:
        return Polynomial(self.coeffs / scalar)

    def allclose(self, other: Polynomial, atol: float = 1e-12, rtol: float = 0.0) -> bool:
        n = max(self.coeffs.size, other.coeffs.size)
        a, b = self.padded(n), other.padded(n)
        scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1.0)
        return bool(np.max(np.abs(a - b)) <= atol + rtol * scale)

    def __repr__(self) -> str:
        return f"Polynomial({self.coeffs.tolist()!r})"


def _as_poly(p: Polynomial | float) -> Polynomial:
    return p if isinstance(p, Polynomial) else Polynomial([p])


@dataclass(frozen=True, eq=False)
class DiffOperator:
    """``sum_k terms[k](z) * d^k/dz^k``."""

    terms: tuple[Polynomial, ...]

    def __init__(self, terms: Sequence[Polynomial | Sequence[float] | float]):
        ts = []
        for t in terms:
            if isinstance(t, Polynomial):
                ts.append(t)
            elif np.isscalar(t):
                ts.append(Polynomial([t]))
            else:
                ts.append(Polynomial(t))
        while len(ts) > 1 and ts[-1].is_zero:
            ts.pop()
        if not ts:
            ts = [Polynomial()]
        object.__setattr__(self, "terms", tuple(ts))

    @classmethod
    def identity(cls) -> DiffOperator:
        return cls([1.0])

    @classmethod
    def d(cls, k: int = 1) -> DiffOperator:
        return cls([0.0] * k + [1.0])

    @classmethod
    def multiply(cls, p: Polynomial | Sequence[float]) -> DiffOperator:
        return cls([p])

    @property
    def order(self) -> int:
        return len(self.terms) - 1

    def coefficient(self, k: int) -> Polynomial:
        return self.terms[k] if k < len(self.terms) else Polynomial()

    def __add__(self, other: DiffOperator) -> DiffOperator:
        n = max(len(self.terms), len(other.terms))
        return DiffOperator([self.coefficient(k) + other.coefficient(k) for k in range(n)])

    def __neg__(self) -> DiffOperator:
        return DiffOperator([-t for t in self.terms])

    def __sub__(self, other: DiffOperator) -> DiffOperator:
        return self + (-other)

    def __mul__(self, scalar: float) -> DiffOperator:
        return DiffOperator([t * scalar for t in self.terms])

    __rmul__ = __mul__

    def __matmul__(self, other: DiffOperator) -> DiffOperator:
        return compose(self, other)

    def allclose(self, other: DiffOperator, atol: float = 1e-12) -> bool:
        n = max(len(self.terms), len(other.terms))
        return all(self.coefficient(k).allclose(other.coefficient(k), atol=atol) for k in range(n))

    def __repr__(self) -> str:
        return f"DiffOperator({[t.coeffs.tolist() for t in self.terms]!r})"


def apply(op: DiffOperator, y: Polynomial) -> Polynomial:
    out = Polynomial()
    for k, p in enumerate(op.terms):
        if p.is_zero:
            continue
        out = out + p * y.deriv(k)
    return out


def compose(a: DiffOperator, b: DiffOperator, max_order: int = MAX_ORDER) -> DiffOperator:
    """Operator product ``a o b`` via the Leibniz rule.

    ``a_k D^k (b_j D^j) = a_k sum_i C(k, i) b_j^(k-i) D^(i+j)``.
    """
    order = a.order + b.order
    if order > max_order:
        raise OrderCapExceeded(f"composed order {order} exceeds cap {max_order}")
    out = [Polynomial() for _ in range(order + 1)]
    for k, ak in enumerate(a.terms):
        if ak.is_zero:
            continue
        for j, bj in enumerate(b.terms):
            if bj.is_zero:
                continue
            for i in range(k + 1):
                dbj = bj.deriv(k - i)
                if dbj.is_zero:
                    continue
                out[i + j] = out[i + j] + comb(k, i) * (ak * dbj)
    return DiffOperator(out)


def commutator(a: DiffOperator, b: DiffOperator, max_order: int = MAX_ORDER) -> DiffOperator:
    return compose(a, b, max_order) - compose(b, a, max_order)


def poly_roots(p: Polynomial, polish: bool = True) -> np.ndarray:
    """All complex roots of ``p`` with multiplicity.

    Companion-matrix eigenvalues followed by a few Newton steps per root.
    Newton is skipped for roots where the derivative vanishes (multiple roots).
    """
    if p.is_zero:
        raise ValueError("zero polynomial has no well-defined roots")
    if p.degree == 0:
        return np.zeros(0, dtype=complex)
    roots = npoly.polyroots(p.coeffs).astype(complex)
    if not polish:
        return roots
    dp = p.deriv()
    scale = np.max(np.abs(p.coeffs))
    for i, r in enumerate(roots):
        for _ in range(5):
            f = p(r)
            df = dp(r)
            if abs(f) <= 1e-15 * scale * max(1.0, abs(r)) ** p.degree:
                break
            if abs(df) <= 1e-8 * scale * max(1.0, abs(r)) ** (p.degree - 1):
                break
            step = f / df
            if not np.isfinite(step) or abs(p(r - step)) >= abs(f):
                break
            r = r - step
        roots[i] = r
    return roots
