"""Exceptional energies of a two-channel model, in physical and reduced units.

Run:  python demos/01_exceptional_ladder.py
"""

from vibronic_qes import PhysicalParams, channel_swap, exceptional_energy, to_dimensionless

# A molecule-like choice: heavier mass, two linear forces of opposite sign.
p = PhysicalParams(m=2.0, hbar=1.0, Omega=1.5, F1=-0.8, F2=1.2, V=0.4)
mp = to_dimensionless(p)
print(f"reduced parameters: F = {mp.F:.6f}, b = {mp.b:.6f}, v = {mp.v:.6f}")

# The algebraic levels form an evenly spaced ladder pinned to channel 2's
# displaced oscillator.  Only the coupling decides which rung is realised.
print("\n n   epsilon      E")
for n in range(5):
    eps, E = exceptional_energy(n, p)
    print(f"{n:2d}  {eps:9.5f}  {E:9.5f}")

# Swapping the channels gives the ladder tied to the other spinor component.
q = channel_swap(p)
print("\nafter swapping F1 and F2:")
for n in range(5):
    eps, E = exceptional_energy(n, q)
    print(f"{n:2d}  {eps:9.5f}  {E:9.5f}")
