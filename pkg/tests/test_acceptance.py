"""Acceptance criteria 1-10, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are collected in
the "acceptance criteria" terminal section) or directly with
``python3 tests/test_acceptance.py``.
"""
from fractions import Fraction

import numpy as np
import pytest

from bandtop.analysis import (check_global, flip_chirality, mutate_phantom_jump, mutate_trs_pairing,
                              transverse_pairs)
from bandtop.errors import NoValidSlicing
from bandtop.localmodel import classify_point, local_charges
from bandtop.models import make_spin_family, torus_delta, torus_distance
from bandtop.topology import berry_phase, circle_loop, slice_chern_numbers, sphere_chern_numbers

from conftest import ACCEPTANCE_LINES, GYROID_POINTS

PI = np.pi
HALF = Fraction(1, 2)

EXPECTED = {
    "origin": dict(pattern=(3, 1), spins=(Fraction(1), Fraction(0)), chir=(1,)),
    "pi": dict(pattern=(1, 3), spins=(Fraction(0), Fraction(1)), chir=(-1,)),
    "half": dict(pattern=(2, 2), spins=(HALF, HALF), chir=(-1, 1)),
    "three_half": dict(pattern=(2, 2), spins=(HALF, HALF), chir=(-1, 1)),
}
CHI_TABLE = [(-1, 0, 1, 0), (0, -1, 0, 1), (0, 1, 0, -1), (1, 0, -1, 0)]


def record(n: int, ok: bool, detail: str):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _named(scan):
    out = {}
    for name, loc in GYROID_POINTS.items():
        hits = [p for p in scan.points if torus_distance(p.location, loc) <= 1e-6]
        out[name] = hits[0] if len(hits) == 1 else None
    return out


def test_c01_spin_charge_law():
    bad = []
    for s in (HALF, Fraction(1), Fraction(3, 2), Fraction(2), Fraction(5, 2)):
        fam = make_spin_family(s)
        expect = [int(2 * (-s + j)) for j in range(fam.k)]
        for r in (0.2, 0.5, 1.0):
            for N in (24, 48):
                got = [c.value for c in sphere_chern_numbers(fam, np.zeros(3), r, N)]
                if got != expect:
                    bad.append((str(s), r, N, got))
    record(1, not bad, "2m per band for s = 1/2..5/2, r in {0.2, 0.5, 1}, N in {24, 48}"
           + (f"; mismatches {bad}" if bad else ""))


def test_c02_gyroid_degeneracies(gyroid_scan):
    named = _named(gyroid_scan)
    patterns = {n: (p.pattern if p else None) for n, p in named.items()}
    want = {n: e["pattern"] for n, e in EXPECTED.items()}
    ok = len(gyroid_scan.points) == 4 and not gyroid_scan.curves and patterns == want
    record(2, ok, f"{len(gyroid_scan.points)} points within 1e-6 of the expected locations, patterns {patterns}")


def test_c03_gyroid_local_models(gyroid_scan, gyroid_models):
    named = _named(gyroid_scan)
    by_loc = {id(m.point): m for m in gyroid_models}
    got, ok = {}, True
    for name, p in named.items():
        m = by_loc.get(id(p))
        if m is None:
            ok = False
            continue
        got[name] = (tuple(str(s) for s in m.spin_type), m.chiralities)
        ok &= m.spin_type == EXPECTED[name]["spins"] and m.chiralities == EXPECTED[name]["chir"]
    origin = by_loc[id(named["origin"])] if named["origin"] is not None else None
    triple = origin.charges if origin else None
    ok &= triple is not None and tuple(triple[:3]) == (-2, 0, 2)
    record(3, ok, f"spin types and chiralities {got}; triple-point charges {triple}")


def test_c04_gyroid_chi_table(gyroid_profiles):
    tables = [[tuple(c) for c in p.chi] for p in gyroid_profiles]
    crit = [[round(t, 6) for t in p.critical_params] for p in gyroid_profiles]
    want_crit = [round(x, 6) for x in (0.0, PI / 2, PI, 3 * PI / 2)]
    ok = tables[2] == CHI_TABLE and tables[0] == tables[2] and tables[1] == tables[2]
    ok &= all(c == want_crit for c in crit)
    record(4, ok, f"z-axis chi table {tables[2]}; x, y equal z: {tables[0] == tables[2] and tables[1] == tables[2]}")


def test_c05_global_constraints(gyroid_profiles, gyroid_models):
    prof = gyroid_profiles[2]
    base = check_global(prof, gyroid_models)
    m1 = check_global(mutate_phantom_jump(prof), gyroid_models).failed
    m2 = check_global(mutate_trs_pairing(prof), gyroid_models).failed
    flipped = [flip_chirality(gyroid_models[0])] + list(gyroid_models[1:])
    m3 = check_global(prof, flipped).failed
    axes_ok = all(check_global(p, gyroid_models).passed for p in gyroid_profiles)
    clauses = [c.clause for c in base.checks]
    ok = base.passed and axes_ok and m1 == ["4"] and m2 == ["6"] and m3 == ["5"]
    ok &= {"1", "2", "3", "4", "5", "6", "7", "C1", "C2"} <= set(clauses)
    record(5, ok, f"clauses {clauses} pass on all axes: {axes_ok}; mutations fail {m1}, {m2}, {m3} "
                  "(intended 4, 6, 5)")


def test_c06_honeycomb(honeycomb, honeycomb_scan):
    want = [(2 * PI / 3, 4 * PI / 3), (4 * PI / 3, 2 * PI / 3)]
    pts = honeycomb_scan.points
    located = [min((torus_distance(p.location, w) for p in pts), default=np.inf) for w in want]
    models = [classify_point(honeycomb, p, others=pts) for p in pts]
    chir = []
    for w in want:
        m = min(models, key=lambda m: torus_distance(m.point.location, w))
        chir.append(m.chiralities[0])
    phases = [abs(berry_phase(honeycomb, circle_loop(w, 0.1, band)).phase) for w in want for band in (0, 1)]
    ok = len(pts) == 2 and max(located) <= 1e-6 and chir == [-1, 1]
    ok &= all(abs(ph - PI) <= 1e-4 for ph in phases)
    record(6, ok, f"{len(pts)} Dirac points (max offset {max(located):.1e}); chiralities {chir}; "
                  f"|Berry phase| - pi up to {max(abs(p - PI) for p in phases):.1e}")


def _circle_distance(x):
    best = np.inf
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        best = min(best, max(abs(torus_delta(x[i], PI)), abs(torus_delta(x[j] - x[k], PI))))
    return best


def test_c07_diamond(diamond, diamond_scan):
    from bandtop.analysis import slice_profile
    samples = [s for c in diamond_scan.curves for s in c.samples]
    off = max((_circle_distance(np.asarray(s.location)) for s in samples), default=np.inf)
    dims = {s.locus_dim for s in samples} | {p.locus_dim for p in diamond_scan.points}
    refused = []
    for ax in range(3):
        try:
            slice_profile(diamond, ax, diamond_scan)
        except NoValidSlicing:
            refused.append(ax)
    pairs = transverse_pairs(diamond, diamond_scan, n=10)
    ok = bool(samples) and off <= 1e-4 and min(dims) >= 1 and refused == [0, 1, 2]
    ok &= len(pairs) == 10 and all(p.opposite for p in pairs)
    record(7, ok, f"{len(samples)} curve samples, max distance to the circles {off:.1e}; locus dims {sorted(dims)}; "
                  f"slicing refused on axes {refused}; {sum(p.opposite for p in pairs)}/{len(pairs)} "
                  "transverse pairs opposite")


def test_c08_jumps_equal_charges(gyroid, gyroid_scan, gyroid_profiles):
    bad = []
    for p in gyroid_scan.points:
        q = local_charges(gyroid, p, others=gyroid_scan.points)
        for prof in gyroid_profiles:
            jp = prof.jump_at(p.location[prof.axis])
            if tuple(jp) != tuple(q):
                bad.append((np.round(p.location, 4).tolist(), prof.axis, jp, q))
    record(8, not bad, "slice jumps equal sphere charges for every point, band and axis"
           + (f"; mismatches {bad}" if bad else ""))


def test_c09_deformation(deformation_trace):
    from bandtop.analysis import deformation_generic
    tr = deformation_trace
    counts = tr.counts(-1)
    triple_balls = [j for j, b in enumerate(tr.balls)
                    if min(torus_distance(b.center, GYROID_POINTS[n]) for n in ("origin", "pi")) < 1e-6]
    doubles = [all(len(p.pattern) == 3 for p in tr.steps[-1].ball_points[j]) for j in triple_balls]
    generic = deformation_generic(tr)
    ok = len(triple_balls) == 2 and all(counts[j] == 4 for j in triple_balls) and all(doubles)
    ok &= not generic and tr.conserved and tr.trs_preserved
    record(9, ok, f"ball counts {counts} at lambda={tr.lambdas[-1]}; off t=0,pi slices: {not generic}; "
                  f"charges conserved: {tr.conserved}; fallback used: {tr.used_fallback}")


def test_c10_gauge_and_orientation(gyroid, honeycomb):
    diffs = []
    for seed in (1, 2, 3):
        a = slice_chern_numbers(gyroid, 2, 0.7)
        b = slice_chern_numbers(gyroid, 2, 0.7, gauge_seed=seed)
        diffs += [abs(x.raw - y.raw) for x, y in zip(a, b)]
        a = sphere_chern_numbers(gyroid, (PI / 2,) * 3, 0.3)
        b = sphere_chern_numbers(gyroid, (PI / 2,) * 3, 0.3, gauge_seed=seed)
        diffs += [abs(x.raw - y.raw) for x, y in zip(a, b)]
        loop = circle_loop((2 * PI / 3, 4 * PI / 3), 0.1, 0)
        # Berry phases live mod 2pi and these sit at the +-pi branch cut
        diffs.append(abs(torus_delta(berry_phase(honeycomb, loop).phase,
                                     berry_phase(honeycomb, loop, gauge_seed=seed).phase)))
    neg_ok = True
    for c in GYROID_POINTS.values():
        out = [x.value for x in sphere_chern_numbers(gyroid, c, 0.3)]
        inw = [x.value for x in sphere_chern_numbers(gyroid, c, 0.3, orientation=-1)]
        neg_ok &= inw == [-x for x in out]
    ok = max(diffs) <= 1e-9 and neg_ok
    record(10, ok, f"max change under rephasing {max(diffs):.1e}; inward charges are negations: {neg_ok}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-rN"]))
