"""
================================================================================
01. Local charges of the spin families
================================================================================

The family ``x S_x + y S_y + z S_z`` has a single degenerate point at the
origin. Each band m = -s, ..., s carries charge 2m on any cube around it.
"""
from fractions import Fraction

import numpy as np

from bandtop import make_spin_family, sphere_chern_numbers

########################################################################################################################
# Charges for the first few spins
# -------------------------------
# The cube half-width and the grid size change nothing.

for s in (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2)):
    fam = make_spin_family(s)
    for r, N in ((0.2, 24), (1.0, 48)):
        res = sphere_chern_numbers(fam, np.zeros(3), r, N)
        print(f"s = {s!s:>3}  r = {r:.1f}  N = {N}:  charges {[c.value for c in res]}")

########################################################################################################################
# Reversing the orientation of the surface negates every charge

fam = make_spin_family(1)
print("outward", [c.value for c in sphere_chern_numbers(fam, np.zeros(3), 0.5)])
print("inward ", [c.value for c in sphere_chern_numbers(fam, np.zeros(3), 0.5, orientation=-1)])

########################################################################################################################
# The raw sums show how close to an integer the plaquette method lands

for c in sphere_chern_numbers(make_spin_family(Fraction(3, 2)), np.zeros(3), 0.5):
    print(f"band {c.band}: raw {c.raw:+.12f}, largest plaquette phase {c.max_plaquette_phase:.3f}")
