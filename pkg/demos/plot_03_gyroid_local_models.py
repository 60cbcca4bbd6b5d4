"""
================================================================================
03. Local models of the Gyroid degeneracies
================================================================================

The four-band Gyroid family has four isolated degenerate points: two
triple points and two double Weyl points. At each one the first-order
data of every eigenvalue group is tested against the spin-s pattern and
given a chirality.
"""
import numpy as np

from bandtop import classify_point, find_degeneracies, make_gyroid

g = make_gyroid()
scan = find_degeneracies(g)
print(f"{len(scan.points)} isolated points, {len(scan.curves)} curves")

########################################################################################################################
# One row per point

for p in scan.points:
    m = classify_point(g, p, others=scan.points)
    spins = ", ".join(b.spin_label for b in m.blocks)
    dets = ", ".join("-" if b.det_L is None else f"{b.det_L:+.3f}" for b in m.blocks)
    print(f"{np.round(p.location / np.pi, 4)} pi  {p.type_label():10s} spins ({spins})  "
          f"chirality {m.chiralities}  det L ({dets})  charges {m.charges}")

########################################################################################################################
# The charges always equal chirality times 2m, block by block

for p in scan.points:
    m = classify_point(g, p, others=scan.points)
    assert m.expected_charges() == m.charges
print("charges agree with the spin-type prediction")
