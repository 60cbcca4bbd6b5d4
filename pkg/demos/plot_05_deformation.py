"""
================================================================================
05. Splitting the triple points
================================================================================

Changing the three spanning-tree hopping weights of the Gyroid keeps time
reversal but breaks the degeneracies apart. Each triple point splits into
four Weyl points, each double Weyl point into two, and the total charge in
a fixed ball around every original point stays the same.

This one takes about half a minute.
"""
import numpy as np

from bandtop import find_degeneracies, make_gyroid, track_default_deformation

g = make_gyroid()
scan = find_degeneracies(g)
trace = track_default_deformation(g, (0.0, 0.005, 0.01), base_scan=scan)
print("perturbation:", trace.perturbation, "  fallback used:", trace.used_fallback)

########################################################################################################################
# Points per ball and ball charges along the deformation

for st in trace.steps:
    print(f"lambda = {st.lam:<6}  points per ball {[len(p) for p in st.ball_points]}  "
          f"ball charges {st.ball_charges}")
print("charges conserved:", trace.conserved)

########################################################################################################################
# Where the origin's triple point went

st = trace.steps[-1]
for p in st.ball_points[0]:
    print(f"  {np.round(p.location, 5)}  pattern {p.pattern}")
