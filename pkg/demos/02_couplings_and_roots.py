"""Which couplings make level n algebraic, and where the polynomial roots sit.

Run:  python demos/02_couplings_and_roots.py
"""

import numpy as np

from vibronic_qes import ModelParams, allowed_couplings, solve_bethe
from vibronic_qes.bethe import same_root_set

mp = ModelParams(F=0.9, b=0.35)


def tidy(x: complex) -> float:
    return round(complex(x).real, 12) + 0.0


for n in range(4):
    print(f"level n = {n}")
    couplings = allowed_couplings(n, mp)
    for c in couplings:
        tag = "physical" if c.physical else "v^2 < 0 "
        roots = np.array2string(c.roots + 0.0, precision=4, suppress_small=True)
        print(f"  v^2 = {tidy(c.v_squared):+10.6f}  {tag}  roots {roots}")
    if n == 0:
        continue
    # The Bethe equations know nothing about v.  Solving them independently and
    # reading v^2 off the leftover constant must land on the same list.
    for s in solve_bethe(n, None, mp, random_starts=5):
        hit = any(same_root_set(s.roots, c.roots) for c in couplings)
        print(f"  Bethe: implied v^2 = {tidy(s.implied_v_squared):+10.6f}  "
              f"residue {s.residue_norm:.1e}  in kernel list: {hit}")
