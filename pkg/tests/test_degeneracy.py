import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bandtop.errors import AmbiguousMultiplicity
from bandtop.linalg import random_unitary
from bandtop.models import HamiltonianFamily, make_gyroid, make_spin_family, negate, torus_distance
from bandtop.degeneracy import (DegeneratePoint, adjacent_gaps, classify_multiplicity, find_degeneracies,
                                locus_dimension_probe, refine_seed, scan_gaps)

PI = np.pi


def test_classify_multiplicity_examples():
    assert classify_multiplicity([-1, -1, -1, 3]) == (3, 1)
    assert classify_multiplicity([0, 1e-9, 2, 2 + 1e-8]) == (2, 2)
    assert classify_multiplicity([0.0]) == (1,)
    with pytest.raises(AmbiguousMultiplicity, match="refine further"):
        classify_multiplicity([0, 1e-5])
    with pytest.raises(ValueError):
        classify_multiplicity([1, 0])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 3), min_size=1, max_size=4), st.integers(0, 2**31))
def test_classify_recovers_planted_pattern(pattern, seed):
    rng = np.random.default_rng(seed)
    levels = np.cumsum(rng.uniform(0.01, 1.0, size=len(pattern)))
    values = np.concatenate([np.full(g, v) + rng.uniform(0, 1e-9, g) for g, v in zip(pattern, levels)])
    assert classify_multiplicity(np.sort(values)) == tuple(pattern)


def test_point_labels():
    p = DegeneratePoint(np.zeros(3), (3, 1), 0.0, np.array([-1, -1, -1, 3.0]))
    assert p.type_label() == "(A2,A0)"
    assert p.singularity_type == (2, 0)
    assert p.degenerate_gaps == [0, 1]
    assert [list(g) for g in p.groups] == [[0, 1, 2], [3]]
    assert adjacent_gaps(p.values).tolist() == [0, 0, 4]


def test_gyroid_points(gyroid_scan):
    locs = {(0, 0, 0): (3, 1), (PI, PI, PI): (1, 3), (PI / 2,) * 3: (2, 2), (3 * PI / 2,) * 3: (2, 2)}
    assert len(gyroid_scan.points) == 4 and not gyroid_scan.curves
    for loc, pat in locs.items():
        hit = [p for p in gyroid_scan.points if torus_distance(p.location, loc) < 1e-6]
        assert len(hit) == 1 and hit[0].pattern == pat
        assert hit[0].residual_gap < 1e-8 and hit[0].locus_dim == 0


def test_negated_gyroid_reverses_patterns():
    scan = find_degeneracies(negate(make_gyroid()))
    pats = {tuple(np.round(p.location, 4)): p.pattern for p in scan.points}
    assert pats[(0.0, 0.0, 0.0)] == (1, 3)
    assert pats[tuple(np.round((PI,) * 3, 4))] == (3, 1)


def test_honeycomb_points(honeycomb_scan):
    pts = honeycomb_scan.points
    assert len(pts) == 2
    for w in [(2 * PI / 3, 4 * PI / 3), (4 * PI / 3, 2 * PI / 3)]:
        assert min(torus_distance(p.location, w) for p in pts) < 1e-6


def test_diamond_curves(diamond_scan):
    assert not diamond_scan.points and diamond_scan.curves
    assert all(s.locus_dim >= 1 for c in diamond_scan.curves for s in c.samples)
    assert all(c.covers_circle(a) for c in diamond_scan.curves for a in range(3))


@pytest.mark.parametrize("s", [0.5, 1, 1.5])
def test_spin_chart_single_point(s):
    scan = find_degeneracies(make_spin_family(s), N=16)
    assert len(scan.points) == 1
    p = scan.points[0]
    assert np.linalg.norm(p.location) < 1e-6
    assert p.pattern == (int(2 * s + 1),)


def test_two_close_points_are_separated():
    # H = (x^2 - a^2) sz + y sx + z sy has Weyl points at x = +-a
    a = 0.03
    sx = np.array([[0, 1], [1, 0]], complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1.0, -1.0]).astype(complex)

    def ev(k):
        x, y, z = (k[..., i, None, None] for i in range(3))
        return (x * x - a * a) * sz + y * sx + z * sy

    fam = HamiltonianFamily("pair", 3, 2, ev, periodic=False)
    scan = find_degeneracies(fam, N=16)
    xs = sorted(p.location[0] for p in scan.points)
    assert len(xs) == 2
    np.testing.assert_allclose(xs, [-a, a], atol=1e-6)


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 2**31))
def test_search_invariant_under_unitary_conjugation(seed):
    u = random_unitary(4, np.random.default_rng(seed))
    g = make_gyroid()
    conj = HamiltonianFamily("Gu", 3, 4, lambda k: u.conj().T @ g(k) @ u)
    pats = sorted(p.pattern for p in find_degeneracies(conj, N=24).points)
    assert pats == sorted([(3, 1), (1, 3), (2, 2), (2, 2)])


def test_scan_and_refine_seed():
    fam = make_spin_family(0.5)
    cands = scan_gaps(fam, N=12, threshold=0.2)
    assert cands and all(0 in c.gap_indices for c in cands)
    p = refine_seed(fam, cands[0].location + 0.01, 0, 0.05, 1e-10, periodic=False)
    assert np.linalg.norm(p.location) < 1e-6


def test_locus_probe_flags_curve(diamond):
    p0 = DegeneratePoint(np.array([PI, 0.3, 0.3 + PI]), (2,), 0.0, np.zeros(2))
    assert locus_dimension_probe(diamond, p0) >= 1
    q = DegeneratePoint(np.zeros(3), (2,), 0.0, np.zeros(2), periodic=False)
    assert locus_dimension_probe(make_spin_family(0.5), q) == 0
