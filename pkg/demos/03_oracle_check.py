"""Cross-check the algebra against brute-force diagonalisation.

For each admissible coupling the spectrum of the full coupled problem should
contain lambda = n + 1/2 exactly.  A coupling picked at random should not.

Run:  python demos/03_oracle_check.py
"""

import math

import numpy as np

from vibronic_qes import ModelParams, OracleConfig, allowed_couplings, match_exceptional, spectrum

F, b = 1.1, -0.25
cfg = OracleConfig(basis_size=200)

print("admissible couplings")
for n in range(1, 5):
    for c in allowed_couplings(n, ModelParams(F, b)):
        if not c.physical or c.v_squared == 0:
            continue
        rep = spectrum(ModelParams(F, b, math.sqrt(c.v_squared)), cfg, window=(n, n + 1))
        ok, gap = match_exceptional(rep, n, cfg)
        print(f"  n={n}  v={math.sqrt(c.v_squared):.6f}  gap {gap:.1e}  matched={ok}")

print("\nrandom couplings")
rng = np.random.default_rng(0)
for v in rng.uniform(0.2, 2.0, size=4):
    rep = spectrum(ModelParams(F, b, v), cfg)
    ok, gap = match_exceptional(rep, 2, cfg)
    print(f"  n=2  v={v:.6f}  gap {gap:.1e}  matched={ok}")
