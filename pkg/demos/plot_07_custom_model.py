"""
================================================================================
07. Analysing a model from a JSON file
================================================================================

Any tight-binding family can be given as a list of Fourier terms
``c exp(i n.k)`` per matrix entry. ``models/weyl_pair.json`` encodes

    H(k) = sin k_x s_x + sin k_y s_y + (cos k_x + cos k_y + cos k_z - 2) s_z

which has two Weyl points on the k_z axis and no time reversal.
"""
import json
from pathlib import Path

from bandtop import analyze, load_model
from bandtop.report import dumps

fam = load_model(Path(__file__).with_name("models") / "weyl_pair.json")
report = analyze(fam)

########################################################################################################################
# Points and local models

for lm in report["local_models"]:
    print(lm["location"], "spins", lm["spins"], "chiralities", lm["chiralities"], "charges", lm["charges"])

########################################################################################################################
# The x and y axes see both points at the same parameter, so only z is sliced

print("sliced axes:", sorted(report["slices"]))
print("notes:", report["notes"])
print("z-axis chi:", report["slices"].get("z", {}).get("chi"))
print("status:", report["status"])

########################################################################################################################
# The whole report is plain JSON

Path("weyl_pair_report.json").write_text(dumps(report))
print(json.dumps(report["constraints"].get("z", {}), indent=1)[:400])
