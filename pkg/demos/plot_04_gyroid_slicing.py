"""
================================================================================
04. Slicing the Gyroid torus
================================================================================

Cutting the 3-torus into 2-tori ``k_z = t`` gives one Chern number per band
for every t. These step functions jump exactly at the degenerate points,
by the local charges found there, and obey a list of global constraints.
"""
from pathlib import Path

from bandtop import check_global, classify_point, find_degeneracies, make_gyroid, slice_profile
from bandtop.analysis import mutate_phantom_jump, mutate_trs_pairing, flip_chirality
from bandtop.plotting import chi_svg

g = make_gyroid()
scan = find_degeneracies(g)
models = [classify_point(g, p, others=scan.points) for p in scan.points]

########################################################################################################################
# The chi table along z, and the same along x and y

profiles = [slice_profile(g, ax, scan) for ax in range(3)]
for row in profiles[2].table():
    lo, hi, *chi = row
    print(f"t in ({lo:.4f}, {hi:.4f}):  chi = {tuple(chi)}")
print("x and y agree with z:", profiles[0].chi == profiles[2].chi == profiles[1].chi)
print("jumps:", profiles[2].jumps)

########################################################################################################################
# Global constraints
# ------------------

rep = check_global(profiles[2], models)
for c in rep.checks:
    print(f"{c.clause:>3}  {c.status:5s}  {c.description}")

########################################################################################################################
# Corrupting the data trips exactly one clause each

print("phantom jump pair  ->", check_global(mutate_phantom_jump(profiles[2]), models).failed)
print("broken TRS pairing ->", check_global(mutate_trs_pairing(profiles[2]), models).failed)
print("flipped chirality  ->", check_global(profiles[2], [flip_chirality(models[0])] + models[1:]).failed)

########################################################################################################################
# A small SVG of the step functions

out = Path("gyroid_chi_z.svg")
out.write_text(chi_svg(profiles[2]))
print("wrote", out)
