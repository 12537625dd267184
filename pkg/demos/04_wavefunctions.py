"""Rebuild both channel components of an exceptional state and sample them.

Writes a plot-ready CSV (z, psi1, psi2) to stdout after a short report.

Run:  python demos/04_wavefunctions.py > state.csv
"""

import math
import sys

import numpy as np
from scipy.integrate import trapezoid

from vibronic_qes import ModelParams, gauge_envelope, solve_bethe, wavefunctions
from vibronic_qes.bethe import coupled_residuals

n, F, b = 2, 0.8, 0.3
sols = [s for s in solve_bethe(n, None, ModelParams(F, b)) if s.physical and s.implied_v_squared.real > 0]
seed = sols[-1]
v = math.sqrt(seed.implied_v_squared.real)
sol = solve_bethe(n, None, ModelParams(F, b, v), seeds=[seed.roots])[0]

y1, y2 = wavefunctions(sol)
r1, r2 = coupled_residuals(y1, y2, sol.level, sol.params)
print(f"# n={n} F={F} b={b} v={v:.9f}", file=sys.stderr)
print(f"# coupled-equation residuals: {np.max(np.abs(r1.coeffs)):.1e}, {np.max(np.abs(r2.coeffs)):.1e}", file=sys.stderr)

z = np.linspace(-5, 5, 201)
psi1 = gauge_envelope(z) * y1(z).real
psi2 = gauge_envelope(z) * y2(z).real
norm = math.sqrt(trapezoid(psi1**2 + psi2**2, z))
print(f"# channel weights: {trapezoid(psi1**2, z) / norm**2:.4f}, {trapezoid(psi2**2, z) / norm**2:.4f}", file=sys.stderr)

print("z,psi1,psi2")
for zi, a, c in zip(z, psi1 / norm, psi2 / norm):
    print(f"{zi:.4f},{a:.10f},{c:.10f}")
