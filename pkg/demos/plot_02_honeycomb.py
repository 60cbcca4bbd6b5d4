"""
================================================================================
02. Dirac points of the honeycomb lattice
================================================================================

The two-band honeycomb family degenerates at two momenta related by time
reversal. Their equatorial chiralities are opposite and a small loop
around either one picks up a Berry phase of pi.
"""
import numpy as np

from bandtop import berry_phase, circle_loop, classify_point, find_degeneracies, make_honeycomb

hc = make_honeycomb()
scan = find_degeneracies(hc)

########################################################################################################################
# Locations and chiralities

for p in scan.points:
    m = classify_point(hc, p, others=scan.points)
    print(f"k = {np.round(p.location / np.pi, 6)} pi   pattern {p.pattern}   chirality {m.chiralities[0]:+d}")

########################################################################################################################
# Berry phases on loops of radius 0.1
# -----------------------------------
# The phase is defined mod 2 pi. ``unwound`` is the sum of the link angles
# without reduction, useful to see the winding.

for p in scan.points:
    for band in range(2):
        res = berry_phase(hc, circle_loop(p.location, 0.1, band))
        print(f"band {band} around {np.round(p.location, 4)}: phase {res.phase:+.6f} "
              f"({res.points} loop points)")

########################################################################################################################
# A loop that encloses nothing has trivial phase

print("empty loop:", berry_phase(hc, circle_loop((1.0, 1.0), 0.3, 0)).phase)
