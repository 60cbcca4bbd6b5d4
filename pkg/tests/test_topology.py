import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bandtop.errors import DegeneracyError, ModelError
from bandtop.linalg import random_unitary
from bandtop.models import HamiltonianFamily, constant_family, make_gyroid, make_honeycomb, make_spin_family, wrap
from bandtop.topology import (berry_phase, chern_on_slice, chern_on_sphere, circle_loop, cube_faces,
                              polygon_loop, slice_axes, slice_chern_numbers, sphere_chern_numbers)

SX = np.array([[0, 1], [1, 0]], complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


def qwz(m, u=None):
    """Two-band Chern insulator sin kx sx + sin ky sy + (m + cos kx + cos ky) sz."""
    def ev(k):
        a, b = k[..., 0, None, None], k[..., 1, None, None]
        h = np.sin(a) * SX + np.sin(b) * SY + (m + np.cos(a) + np.cos(b)) * SZ
        return h if u is None else u.conj().T @ h @ u
    return HamiltonianFamily(f"qwz{m}", 2, 2, ev)


@pytest.mark.parametrize("m, want", [(-3, 0), (-1, -1), (1, 1), (3, 0)])
def test_qwz_chern_numbers(m, want):
    res = slice_chern_numbers(qwz(m), None)
    assert [r.value for r in res] == [want, -want]
    assert all(r.reliable for r in res)


def test_constant_family_has_zero_chern():
    c = constant_family(np.diag([0.0, 1.0, 2.0]), 3)
    assert [r.value for r in slice_chern_numbers(c, 0, 0.3, N=8)] == [0, 0, 0]


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([-1.0, 1.0, 2.5]))
def test_chern_invariant_under_constant_unitary(seed, m):
    u = random_unitary(2, np.random.default_rng(seed))
    a = [r.value for r in slice_chern_numbers(qwz(m), None)]
    b = [r.value for r in slice_chern_numbers(qwz(m, u), None)]
    assert a == b


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31))
def test_slice_chern_gauge_invariant(seed):
    g = make_gyroid()
    a = slice_chern_numbers(g, 1, 2.0)
    b = slice_chern_numbers(g, 1, 2.0, gauge_seed=seed)
    assert max(abs(x.raw - y.raw) for x, y in zip(a, b)) < 1e-9


def test_slice_through_degeneracy_raises():
    with pytest.raises(DegeneracyError) as exc:
        slice_chern_numbers(make_honeycomb(), None, N=48)
    assert exc.value.location is not None


def test_slice_axes_cyclic():
    assert slice_axes(3, 0) == (1, 2)
    assert slice_axes(3, 1) == (2, 0)
    assert slice_axes(3, 2) == (0, 1)


def test_gyroid_slice_values_between_critical_planes():
    g = make_gyroid()
    assert [r.value for r in slice_chern_numbers(g, 2, 0.7)] == [-1, 0, 1, 0]
    assert chern_on_slice(g, 0, 5.0, 0).value == 1


@pytest.mark.parametrize("s", [0.5, 1, 1.5])
def test_spin_sphere_charges_and_orientation(s):
    f = make_spin_family(s)
    out = [r.value for r in sphere_chern_numbers(f, np.zeros(3), 0.5)]
    inw = [r.value for r in sphere_chern_numbers(f, np.zeros(3), 0.5, orientation=-1)]
    assert out == [int(2 * (-s + j)) for j in range(f.k)]
    assert inw == [-x for x in out]


def test_sphere_charge_zero_away_from_degeneracy():
    f = make_spin_family(0.5)
    assert chern_on_sphere(f, (0.6, 0.6, 0.6), 0.2, 0).value == 0


def test_sphere_errors():
    with pytest.raises(ModelError):
        sphere_chern_numbers(make_honeycomb(), (0, 0), 0.1)
    with pytest.raises(ValueError):
        sphere_chern_numbers(make_spin_family(0.5), (0, 0, 0), 0.1, orientation=2)
    with pytest.raises(ModelError, match="out of range"):
        sphere_chern_numbers(make_spin_family(0.5), (0, 0, 0), 0.1, bands=[5])


def test_cube_faces_cover_boundary():
    faces = cube_faces((0, 0, 0), 1.0, 4)
    pts = np.concatenate([f.reshape(-1, 3) for f in faces])
    assert np.allclose(np.max(np.abs(pts), axis=1), 1.0)
    assert len(faces) == 6


@pytest.mark.parametrize("h", [0.0, 0.1, 0.3])
def test_berry_phase_is_half_solid_angle(h):
    f = make_spin_family(0.5)
    r = 0.2
    omega = 2 * np.pi * (1 - h / np.hypot(h, r))
    for band, sign in ((0, -1), (1, 1)):
        ph = berry_phase(f, circle_loop((0, 0, h), r, band)).phase
        assert abs(wrap(ph - sign * omega / 2 + np.pi) - np.pi) < 1e-5


def test_honeycomb_berry_phase_and_trivial_loop():
    hc = make_honeycomb()
    res = berry_phase(hc, circle_loop((2 * np.pi / 3, 4 * np.pi / 3), 0.1, 0))
    assert abs(abs(res.phase) - np.pi) < 1e-4
    triv = berry_phase(hc, circle_loop((1.0, 1.0), 0.1, 0))
    assert abs(triv.phase) < 1e-6


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31))
def test_berry_phase_gauge_invariant(seed):
    f = make_spin_family(1)
    loop = circle_loop((0, 0, 0.15), 0.3, 2)
    a, b = berry_phase(f, loop), berry_phase(f, loop, gauge_seed=seed)
    assert abs(wrap(a.phase - b.phase + np.pi) - np.pi) < 1e-9


def test_polygon_loop_matches_square_flux():
    # a square around the Dirac point encloses it just like the circle
    c = np.array([2 * np.pi / 3, 4 * np.pi / 3])
    sq = c + 0.1 * np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]])
    res = berry_phase(make_honeycomb(), polygon_loop(sq, 0))
    assert abs(abs(res.phase) - np.pi) < 1e-4


def test_loop_through_degeneracy_raises():
    with pytest.raises(DegeneracyError):
        berry_phase(make_spin_family(0.5), circle_loop((0.2, 0, 0), 0.2, 0))


def test_loop_needs_points():
    with pytest.raises(ValueError):
        circle_loop((0, 0), 0.1, 0, n=4)
