import json

import numpy as np
import pytest

from bandtop.analysis import (Ball, ConstraintReport, LocalSummary, SliceProfile, check_global,
                              default_balls, deformation_generic, flip_chirality, is_double_crossing,
                              mutate_chi, mutate_phantom_jump, mutate_trs_pairing, slice_profile,
                              track_deformation, trs_pairing_2d)
from bandtop.degeneracy import DegeneratePoint, find_degeneracies
from bandtop.errors import GenericityError, ModelError, NoValidSlicing
from bandtop.localmodel import classify_point, local_charges
from bandtop.models import HamiltonianFamily, constant_family, make_gyroid, make_spin_family

PI = np.pi
SX = np.array([[0, 1], [1, 0]], complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


def weyl_pair():
    """Two Weyl points at (0, 0, pi/2) and (0, 0, 3pi/2), no time reversal."""
    def ev(k):
        a, b, c = (k[..., i, None, None] for i in range(3))
        return np.sin(a) * SX + np.sin(b) * SY + (np.cos(a) + np.cos(b) + np.cos(c) - 2) * SZ
    return HamiltonianFamily("weyl-pair", 3, 2, ev)


@pytest.fixture(scope="module")
def weyl():
    fam = weyl_pair()
    return fam, find_degeneracies(fam, N=32)


def test_weyl_pair_profile(weyl):
    fam, scan = weyl
    assert sorted(round(p.location[2] / (PI / 2)) for p in scan.points) == [1, 3]
    prof = slice_profile(fam, 2, scan)
    assert prof.chi == [(0, 0), (-1, 1)]
    assert prof.jumps == [(1, -1), (-1, 1)]
    assert not prof.trs
    models = [classify_point(fam, p, others=scan.points) for p in scan.points]
    rep = check_global(prof, models)
    assert rep.passed
    assert rep.status("6") == "inapplicable" and rep.status("C3") == "pass" and rep.status("5") == "pass"
    for p in scan.points:
        assert prof.jump_at(p.location[2]) == local_charges(fam, p, others=scan.points)


def test_weyl_pair_needs_shear_along_x(weyl):
    fam, scan = weyl
    with pytest.raises(GenericityError, match="shear"):
        slice_profile(fam, 0, scan)


def test_single_unit_jump_violates_c3(weyl):
    fam, scan = weyl
    prof = slice_profile(fam, 2, scan)
    one = SliceProfile(2, 2, prof.critical[:1], [(prof.critical[0].t, prof.critical[0].t + 2 * PI)],
                       [(0, 0)], [(0, 0)], [(1, -1)])
    assert "C3" in check_global(one).failed


def test_gyroid_profiles_match_on_axes(gyroid_profiles):
    table = [(-1, 0, 1, 0), (0, -1, 0, 1), (0, 1, 0, -1), (1, 0, -1, 0)]
    for prof in gyroid_profiles:
        assert prof.chi == table and prof.chi_check == table
        assert prof.jumps == [(-2, 0, 2, 0), (1, -1, -1, 1), (0, 2, 0, -2), (1, -1, -1, 1)]
        assert prof.chi_at(0.3) == table[0] and prof.interval_index(4.0) == 2
        with pytest.raises(ValueError):
            prof.interval_index(prof.critical[2].t)


def test_profile_json_round_trip(gyroid_profiles):
    prof = gyroid_profiles[0]
    back = SliceProfile.from_dict(json.loads(json.dumps(prof.to_dict())))
    assert back.chi == prof.chi and back.jumps == prof.jumps and back.trs
    assert [c.t for c in back.critical] == pytest.approx(prof.critical_params)


def test_gyroid_constraints_and_mutations(gyroid_profiles, gyroid_models):
    prof = gyroid_profiles[2]
    rep = check_global(prof, gyroid_models)
    assert rep.passed and rep.status("5") == "pass"
    assert check_global(mutate_phantom_jump(prof), gyroid_models).failed == ["4"]
    assert check_global(mutate_trs_pairing(prof), gyroid_models).failed == ["6"]
    for j in range(len(gyroid_models)):
        models = list(gyroid_models)
        models[j] = flip_chirality(models[j])
        assert check_global(prof, models).failed == ["5"]


def test_other_corruptions_caught(gyroid_profiles):
    prof = gyroid_profiles[1]
    assert "2" in check_global(mutate_chi(prof, {(0, 0): 5})).failed
    bad = SliceProfile.from_dict(prof.to_dict())
    bad.chi_check = [(9, 9, 9, 9)] + bad.chi_check[1:]
    assert "1" in check_global(bad).failed
    odd = SliceProfile.from_dict(prof.to_dict())
    odd.jumps = [(-1, 1, 0, 0)] + odd.jumps[1:]
    assert "7" in check_global(odd).failed


def test_constraint_report_round_trip(gyroid_profiles, gyroid_models):
    rep = check_global(gyroid_profiles[0], gyroid_models)
    back = ConstraintReport.from_dict(json.loads(json.dumps(rep.to_dict())))
    assert back.passed and [c.clause for c in back.checks] == [c.clause for c in rep.checks]
    summ = [LocalSummary.of(json.loads(json.dumps(LocalSummary.of(m).to_dict()))) for m in gyroid_models]
    assert check_global(gyroid_profiles[0], summ).passed


def test_c1_flags_weyl_point_on_trs_plane(gyroid_profiles):
    fake = LocalSummary((0.0, 1.0, 1.0), (2, 1, 1), (None,), (), None, None)
    assert "C1" in check_global(gyroid_profiles[0], [fake]).failed


def test_diamond_refuses_slicing(diamond, diamond_scan):
    for ax in range(3):
        with pytest.raises(NoValidSlicing, match="no slicing"):
            slice_profile(diamond, ax, diamond_scan)


def test_slice_profile_argument_errors(honeycomb):
    with pytest.raises(ModelError):
        slice_profile(honeycomb, 0)
    with pytest.raises(ModelError):
        slice_profile(make_gyroid(), 3, find_degeneracies(make_spin_family(0.5), N=8))


def test_deformation_trace(deformation_trace, gyroid_scan):
    tr = deformation_trace
    assert tr.lambdas == [0.0, 0.005, 0.01] and not tr.used_fallback and tr.trs_preserved
    assert tr.counts(0) == [1, 1, 1, 1]
    assert tr.counts(-1) == [4, 2, 4, 2]
    assert tr.conserved and not deformation_generic(tr)
    for st in tr.steps[1:]:
        assert all(is_double_crossing(p) for p in st.points)
        # charges of the split points add up to the ball charge
        start = 0
        for pts, ball in zip(st.ball_points, st.ball_charges):
            pcs = st.point_charges[start:start + len(pts)]
            start += len(pts)
            assert tuple(np.sum(pcs, axis=0)) == ball


def test_ball_helpers(gyroid_scan):
    balls = default_balls(make_gyroid(), gyroid_scan.points)
    assert all(b.r == pytest.approx(0.3) for b in balls)
    b = Ball((0.0, 0.0, 0.0), 0.3)
    assert b.contains((0.1, -0.2, 0.29)) and not b.contains((0.1, -0.2, 0.29), margin=0.05)
    assert is_double_crossing(DegeneratePoint(np.zeros(3), (1, 2, 1), 0, np.zeros(4)))
    assert not is_double_crossing(DegeneratePoint(np.zeros(3), (2, 2), 0, np.zeros(4)))


def test_trivial_perturbation_keeps_points(gyroid_scan):
    g = make_gyroid()
    tr = track_deformation(g, constant_family(np.zeros((4, 4)), 3), (0.0, 0.01),
                           balls=default_balls(g, gyroid_scan.points)[:1], N_ball=21, point_charges=False)
    assert tr.counts(-1) == [1] and tr.conserved
    with pytest.raises(ValueError):
        track_deformation(g, constant_family(np.zeros((4, 4)), 3), (0.01,))


def test_trs_pairing_2d(honeycomb, honeycomb_scan):
    models = [classify_point(honeycomb, p, others=honeycomb_scan.points) for p in honeycomb_scan.points]
    pairs = trs_pairing_2d(models)
    assert len(pairs) == 2
    assert all(a == tuple(-x for x in b) for _, _, a, b in pairs)


def test_fallback_perturbation_used_when_default_is_degenerate(monkeypatch, gyroid_scan):
    import bandtop.analysis as an
    from bandtop.analysis import track_default_deformation
    # a zero default leaves the triple points intact, which is not a generic split
    monkeypatch.setattr(an, "DEFAULT_DELTA", (0.0, 0.0, 0.0))
    tr = track_default_deformation(make_gyroid(), (0.0, 0.01), base_scan=gyroid_scan, N_ball=41,
                                   point_charges=False)
    assert tr.used_fallback and tr.conserved
    assert any("fallback" in n for n in tr.notes)
    assert tr.perturbation == "tree(0.25, 0.35, -0.15)"
