import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bandtop.errors import ModelError
from bandtop.linalg import (eigh, eigh_batch, fix_phase, hermitian, jacobi_eigh, overlap, projector,
                            random_hermitian, random_unitary)

seeds = st.integers(0, 2**32 - 1)
sizes = st.integers(1, 6)


def test_hermitian_rejects_non_square_and_non_hermitian():
    with pytest.raises(ModelError):
        hermitian(np.zeros((2, 3)))
    with pytest.raises(ModelError, match="not Hermitian"):
        hermitian([[0, 1], [0, 0]])


def test_pauli_y_eigenpairs():
    sy = np.array([[0, -1j], [1j, 0]])
    for method in ("lapack", "jacobi"):
        e = eigh(sy, method=method)
        np.testing.assert_allclose(e.values, [-1, 1], atol=1e-14)
        assert e.residual(sy) < 1e-13


@settings(max_examples=40, deadline=None)
@given(seeds, sizes)
def test_jacobi_agrees_with_lapack(seed, k):
    h = random_hermitian(k, np.random.default_rng(seed))
    a, b = jacobi_eigh(h), eigh(h)
    np.testing.assert_allclose(a.values, b.values, atol=1e-11)
    assert a.residual(h) < 1e-10
    gram = a.vectors.conj().T @ a.vectors
    np.testing.assert_allclose(gram, np.eye(k), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds, sizes)
def test_fix_phase_pivot_is_real_positive_and_idempotent(seed, k):
    rng = np.random.default_rng(seed)
    v = random_unitary(k, rng)
    f = fix_phase(v)
    g = fix_phase(f * np.exp(1j * rng.uniform(0, 6.3, size=k)))
    np.testing.assert_allclose(f, g, atol=1e-12)
    pivots = f[np.argmax(np.abs(f) > 1e-8 * np.abs(f).max(axis=0), axis=0), np.arange(k)]
    assert np.all(np.abs(pivots.imag) < 1e-12) and np.all(pivots.real > 0)


def test_repeated_eigenvalues_give_orthonormal_basis():
    h = np.diag([1.0, 1.0, 2.0]).astype(complex)
    u = random_unitary(3, np.random.default_rng(0))
    h = u @ h @ u.conj().T
    e = jacobi_eigh(h)
    np.testing.assert_allclose(e.values, [1, 1, 2], atol=1e-12)
    np.testing.assert_allclose(e.vectors.conj().T @ e.vectors, np.eye(3), atol=1e-12)


def test_eigh_batch_matches_single():
    rng = np.random.default_rng(3)
    hs = np.stack([random_hermitian(4, rng) for _ in range(5)])
    w, v = eigh_batch(hs)
    for j in range(5):
        e = eigh(hs[j])
        np.testing.assert_allclose(w[j], e.values, atol=1e-12)
        np.testing.assert_allclose(v[j], e.vectors, atol=1e-10)


def test_unknown_method():
    with pytest.raises(ValueError):
        eigh(np.eye(2), method="qr")


def test_overlap_and_projector():
    e0, e1 = np.array([1, 0j]), np.array([0, 1j])
    assert overlap(e1, e1) == pytest.approx(1)
    assert overlap(np.array([1j, 0]), e0) == pytest.approx(-1j)
    with pytest.raises(ValueError):
        overlap(e0, np.zeros(3))
    p = projector([e0])
    np.testing.assert_allclose(p, np.diag([1, 0]))
    with pytest.raises(ValueError, match="orthonormal"):
        projector([e0, e0])


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(1, 5))
def test_random_unitary_is_unitary(seed, k):
    u = random_unitary(k, np.random.default_rng(seed))
    np.testing.assert_allclose(u.conj().T @ u, np.eye(k), atol=1e-12)
