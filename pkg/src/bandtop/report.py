"""Assembling and re-auditing analysis reports.

A report is a plain JSON-serialisable dict (schema ``bandtop.report/1``,
documented in the README). Everything numeric in it is produced
deterministically from the model and the parameters, so re-running with
the same inputs reproduces it exactly.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Optional

import numpy as np

from . import __version__
from .analysis import (ConstraintReport, LocalSummary, SliceProfile, check_global, slice_profile,
                       transverse_pairs)
from .degeneracy import DegeneracyScan, DegeneratePoint, find_degeneracies
from .errors import BandtopError, GenericityError, NoValidSlicing
from .localmodel import LocalModel, classify_point
from .models import HamiltonianFamily, torus_distance, wrap
from .topology import berry_phase, circle_loop

SCHEMA = "bandtop.report/1"
AXIS_NAMES = "xyz"


def _f(x):
    return [float(v) for v in np.asarray(x, dtype=float).ravel()]


def model_dict(family: HamiltonianFamily) -> dict:
    return dict(name=family.name, d=family.d, k=family.k, periodic=family.periodic,
                symmetries=[s.kind for s in family.symmetries])


def point_dict(p: DegeneratePoint) -> dict:
    return dict(location=_f(p.location), pattern=list(p.pattern), type=p.type_label(),
                residual_gap=float(p.residual_gap), locus_dim=int(p.locus_dim), exact=bool(p.exact),
                eigenvalues=_f(p.values))


def scan_dict(scan: DegeneracyScan, d: int) -> dict:
    return dict(grid=scan.grid,
                points=[point_dict(p) for p in scan.points],
                curves=[dict(samples=[_f(s.location) for s in c.samples],
                             covers_circle=[bool(c.covers_circle(a)) for a in range(d)])
                        for c in scan.curves],
                near=[point_dict(p) for p in scan.near])


def local_model_dict(lm: LocalModel) -> dict:
    summ = LocalSummary.of(lm).to_dict()
    summ.update(
        residual=float(lm.residual),
        radius=None if lm.radius is None else float(lm.radius),
        blocks=[dict(bands=list(b.bands), spin=b.spin_label, chirality=b.chirality,
                     det_L=None if b.det_L is None else float(b.det_L), residual=float(b.residual),
                     trace_part=_f(b.a))
                for b in lm.blocks],
        notes=list(lm.notes))
    return summ


def _status(reports) -> bool:
    return all(r.passed for r in reports)


def analyze(family: HamiltonianFamily, grid: int = 48, threshold: float = 0.05,
            sphere_r: Optional[float] = None, tol: float = 1e-8, seed: Optional[int] = None,
            chern_grid: int = 32, berry_r: float = 0.1) -> dict:
    """Full pipeline: scan, refine, classify, slice, check.

    Returns the report dict; ``report["status"]["passed"]`` is True when
    every applicable constraint clause passes.
    """
    params = dict(grid=grid, threshold=threshold, sphere_r=sphere_r, tol=tol, seed=seed,
                  chern_grid=chern_grid, berry_r=berry_r)
    scan = find_degeneracies(family, N=grid, threshold=threshold, tol=tol)
    report = dict(schema=SCHEMA, tool=dict(name="bandtop", version=__version__),
                  model=model_dict(family), parameters=params,
                  degeneracies=scan_dict(scan, family.d))
    spin_seed = 0 if seed is None else int(seed)
    models = [classify_point(family, p, r=sphere_r, N=chern_grid, others=scan.points, seed=spin_seed)
              for p in scan.points]
    report["local_models"] = [local_model_dict(m) for m in models]
    constraint_reports = {}
    report["slices"] = {}
    report["slicing_refused"] = {}
    notes = []
    if family.d == 3 and family.periodic:
        for ax in range(3):
            name = AXIS_NAMES[ax]
            try:
                prof = slice_profile(family, ax, scan, N=chern_grid, gauge_seed=seed)
            except (NoValidSlicing, GenericityError) as exc:
                # a refused axis is reported, the other axes still get checked
                report["slicing_refused"][name] = str(exc)
                continue
            report["slices"][name] = prof.to_dict()
            constraint_reports[name] = check_global(prof, models)
        if scan.curves and family.has_symmetry("trs"):
            pairs = transverse_pairs(family, scan)
            report["transverse_pairs"] = [dict(k=_f(p.location), minus_k=_f(p.partner),
                                               chirality=p.chirality, partner_chirality=p.partner_chirality)
                                          for p in pairs]
            constraint_reports["transverse"] = _transverse_report(report["transverse_pairs"])
    elif family.d == 2 and family.periodic:
        notes.append("H^2 of the torus minus the degenerate points vanishes, so all Chern charges vanish")
        report["berry"] = []
        for p in scan.points:
            for band in range(family.k):
                try:
                    res = berry_phase(family, circle_loop(p.location, berry_r, band), gauge_seed=seed)
                except BandtopError as exc:  # a band touching the loop is reported, not fatal
                    report["berry"].append(dict(center=_f(p.location), band=band, error=str(exc)))
                    continue
                report["berry"].append(dict(center=_f(p.location), radius=berry_r, band=band,
                                            phase=res.phase, unwound=res.unwound, points=res.points))
        if family.has_symmetry("trs"):
            constraint_reports["2d"] = _trs_2d_report(models)
    else:
        notes.append("chart family: no slicing")
    report["constraints"] = {k: v.to_dict() for k, v in constraint_reports.items()}
    report["notes"] = notes
    report["status"] = dict(passed=_status(constraint_reports.values()))
    return report


def _trs_2d_report(models) -> ConstraintReport:
    sums = [LocalSummary.of(m) for m in models]
    pairs, bad = [], []
    for m in sums:
        k = np.asarray(m.location)
        if torus_distance(k, wrap(-k)) <= 1e-6:
            continue
        for o in sums:
            if torus_distance(o.location, wrap(-k)) <= 1e-6:
                pairs.append((m, o))
                if tuple(m.chiralities) != tuple(-c for c in o.chiralities):
                    bad.append(dict(k=_f(k), chiralities=list(m.chiralities),
                                    partner=list(o.chiralities)))
    checks = [dict(clause="2d-TRS", description="equatorial chiralities at k and -k are opposite",
                   status="fail" if bad else ("pass" if pairs else "inapplicable"),
                   witness=dict(pairs=len(pairs), violations=bad))]
    return ConstraintReport.from_dict(dict(checks=checks))


def _transverse_report(pairs) -> ConstraintReport:
    ok = all(p["chirality"] == -p["partner_chirality"] for p in pairs)
    checks = [dict(clause="T", description="transverse-disk chiralities at k and -k are opposite",
                   status=("pass" if ok else "fail") if pairs else "inapplicable",
                   witness=dict(pairs=len(pairs)))]
    return ConstraintReport.from_dict(dict(checks=checks))


def audit(report: dict) -> dict:
    """Re-run the constraint checks on the data stored in a report.

    Returns ``{"constraints": {name: ConstraintReport dict}, "passed": bool}``.
    """
    if report.get("schema") != SCHEMA:
        raise ValueError(f"not a {SCHEMA} report")
    lms = [LocalSummary.of(m) for m in report.get("local_models", [])]
    out = {}
    for name, prof in report.get("slices", {}).items():
        out[name] = check_global(SliceProfile.from_dict(prof), lms).to_dict()
    if "transverse_pairs" in report:
        out["transverse"] = _transverse_report(report["transverse_pairs"]).to_dict()
    model = report.get("model", {})
    if model.get("d") == 2 and model.get("periodic") and "trs" in model.get("symmetries", []):
        out["2d"] = _trs_2d_report(lms).to_dict()
    passed = all(r["passed"] for r in out.values())
    return dict(constraints=out, passed=passed)


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, default=_default)


def _default(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialise {type(x).__name__}")
