"""Parameters of the two-channel harmonic vibronic model and the maps between
physical and dimensionless variables.

The coupled system is

    -hbar^2/(2m) psi1'' + (m Omega^2 x^2/2 - F1 x) psi1 + V psi2 = E psi1
    -hbar^2/(2m) psi2'' + (m Omega^2 x^2/2 - F2 x) psi2 + V psi1 = E psi2

Shifting ``x = X + F2/(m Omega^2)`` and scaling ``X = sqrt(hbar/(m Omega)) z``
leaves three dimensionless numbers: the slope difference ``F``, the channel-2
shift ``b`` and the coupling ``v``.  Everything downstream works in ``z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class PhysicalParams:
    m: float = 1.0
    hbar: float = 1.0
    Omega: float = 1.0
    F1: float = 0.0
    F2: float = 0.0
    V: float = 0.0

    def __post_init__(self):
        for name in ("m", "hbar", "Omega", "F1", "F2", "V"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        for name in ("m", "hbar", "Omega"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def energy_unit(self) -> float:
        return self.hbar * self.Omega

    @property
    def force_unit(self) -> float:
        return math.sqrt(self.hbar * self.m * self.Omega**3)


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless slope difference ``F``, shift ``b`` and coupling ``v``.

    ``v`` is kept non-negative by :func:`to_dimensionless`; a negative value
    is accepted (it only flips the sign of the second component).
    """

    F: float = 0.0
    b: float = 0.0
    v: float = 0.0

    def __post_init__(self):
        for name in ("F", "b", "v"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def with_coupling(self, v: float) -> ModelParams:
        return replace(self, v=v)


@dataclass(frozen=True)
class LevelParams:
    n: int
    E1: float
    E2: float


def to_dimensionless(p: PhysicalParams) -> ModelParams:
    unit, eunit = p.force_unit, p.energy_unit
    if unit == 0 or eunit == 0 or not math.isfinite(unit * eunit):
        raise ValueError("parameter scales under- or overflow")
    F = (p.F2 - p.F1) / unit
    b = p.F2 / unit
    v = abs(p.V) / eunit
    if not all(math.isfinite(x) for x in (F, b, v)):
        raise ValueError("dimensionless parameters overflow")
    return ModelParams(F=F, b=b, v=v)


def level_params(n: int, mp: ModelParams) -> LevelParams:
    """Channel energies for the exceptional level ``n``.

    The polynomial sector closes only for ``E2 = n``.  Eliminating ``E`` between
    the two channel energies gives ``E1 - E2 = -F*b``.
    """
    if n < 0:
        raise ValueError("level index must be non-negative")
    return LevelParams(n=int(n), E1=n - mp.F * mp.b, E2=float(n))


def channel_energies(E: float, p: PhysicalParams) -> tuple[float, float]:
    """(E1, E2) of the decoupled operator for a physical energy ``E``."""
    u = p.m * p.Omega**2
    E1 = (E - p.F2**2 / (2 * u) + p.F1 * p.F2 / u) / p.energy_unit - 0.5
    E2 = (E + p.F2**2 / (2 * u)) / p.energy_unit - 0.5
    return E1, E2


def exceptional_energy(n: int, p: PhysicalParams) -> tuple[float, float]:
    """Return ``(epsilon, E)`` for exceptional level ``n``.

    ``epsilon = (n + 1) - b**2/2`` and ``E = hbar*Omega*(n + 1/2) - F2**2/(2 m Omega**2)``;
    the two are related by ``epsilon = E/(hbar Omega) + 1/2``.
    """
    if n < 0:
        raise ValueError("level index must be non-negative")
    b = p.F2 / p.force_unit
    eps = (n + 1) - b**2 / 2
    E = p.energy_unit * (n + 0.5) - p.F2**2 / (2 * p.m * p.Omega**2)
    return eps, E


def channel_swap(p: PhysicalParams) -> PhysicalParams:
    return replace(p, F1=p.F2, F2=p.F1)


def to_physical_coordinate(z, p: PhysicalParams):
    return math.sqrt(p.hbar / (p.m * p.Omega)) * np.asarray(z) + p.F2 / (p.m * p.Omega**2)


def gauge_envelope(z):
    return np.exp(-np.square(z) / 2)
