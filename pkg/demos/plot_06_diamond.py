"""
================================================================================
06. Degenerate circles of the diamond lattice
================================================================================

The three-dimensional two-band family degenerates along three circles, not
at points. Every coordinate slice meets a circle, so there is no slicing;
instead the chirality on small disks transverse to the curves is compared
between k and -k.
"""
import numpy as np

from bandtop import find_degeneracies, make_diamond, slice_profile
from bandtop.analysis import transverse_pairs
from bandtop.errors import NoValidSlicing

dia = make_diamond()
scan = find_degeneracies(dia)
samples = [s for c in scan.curves for s in c.samples]
print(f"{len(scan.points)} isolated points, {len(scan.curves)} curve(s), {len(samples)} samples")
for s in samples[:6]:
    print("  sample", np.round(s.location / np.pi, 4), "pi  locus dim", s.locus_dim)

########################################################################################################################
# Slicing is refused on every axis

for ax in range(3):
    try:
        slice_profile(dia, ax, scan)
    except NoValidSlicing as exc:
        print(f"axis {ax}: {exc}")

########################################################################################################################
# Transverse chiralities at k and -k

for p in transverse_pairs(dia, scan, n=10):
    print(f"{np.round(p.location, 3)}  {p.chirality:+d}   vs   {np.round(p.partner, 3)}  {p.partner_chirality:+d}")
