"""Dense Hermitian linear algebra for small matrices.

The eigenvector phase convention used throughout the package is fixed here:
the first component of each eigenvector whose modulus exceeds
``PHASE_TOL`` times the largest modulus is made real and positive.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ModelError

HERMITIAN_TOL = 1e-12
ORTHONORMAL_TOL = 1e-10
PHASE_TOL = 1e-8


def hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return `a` as a complex (k, k) array after checking Hermiticity."""
    h = np.array(a, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] < 1:
        raise ModelError(f"expected a square matrix, got shape {h.shape}")
    dev = np.max(np.abs(h - h.conj().T))
    if dev > tol:
        raise ModelError(f"matrix is not Hermitian (max |H - H^dagger| = {dev:.3e})")
    return h


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues with eigenvectors stored as columns."""

    values: np.ndarray
    vectors: np.ndarray

    def residual(self, h) -> float:
        h = np.asarray(h)
        return float(np.max(np.linalg.norm(h @ self.vectors - self.vectors * self.values, axis=0)))


def fix_phase(vectors: np.ndarray) -> np.ndarray:
    """Apply the phase convention to the column vectors of a (..., k, n) array."""
    v = np.array(vectors, dtype=complex)
    mod = np.abs(v)
    big = mod > PHASE_TOL * mod.max(axis=-2, keepdims=True)
    first = np.argmax(big, axis=-2)[..., None, :]
    pivot = np.take_along_axis(v, first, axis=-2)
    return v * (np.abs(pivot) / pivot)


def _jacobi_rotation(a, p, q):
    apq = a[p, q]
    mag = abs(apq)
    phase = apq / mag
    tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
    t = 1.0 / (abs(tau) + np.sqrt(1.0 + tau * tau))
    if tau < 0:
        t = -t
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    # columns p, q of the unitary: [[c, s*phase], [-s*conj(phase), c]]
    return np.array([[c, s * phase], [-s * np.conj(phase), c]])


def jacobi_eigh(h, tol: float = 1e-15, max_sweeps: int = 60) -> EigenDecomposition:
    """Cyclic Jacobi eigensolver for a complex Hermitian matrix.

    Sweeps over all off-diagonal pairs until the off-diagonal Frobenius norm
    drops below ``tol * ||H||_F``.

    Raises
    ------
    ConvergenceError
        If ``max_sweeps`` sweeps do not reach the tolerance.
    """
    a = hermitian(h, tol=max(HERMITIAN_TOL, 1e-12 * (1 + np.abs(h).max())))
    a = 0.5 * (a + a.conj().T)
    k = a.shape[0]
    v = np.eye(k, dtype=complex)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    off = 0.0
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a - np.diag(np.diag(a))) ** 2))
        if off <= tol * scale:
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                if abs(a[p, q]) <= 1e-300:
                    continue
                j = _jacobi_rotation(a, p, q)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ j
                a[idx, :] = j.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ j
    else:
        off = np.sqrt(np.sum(np.abs(a - np.diag(np.diag(a))) ** 2))
        if off > tol * scale * 1e3:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {off:.3e})"
            )
    values = np.real(np.diag(a))
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(values[order], fix_phase(v[:, order]))


def eigh(h, method: str = "lapack") -> EigenDecomposition:
    """Eigendecomposition of one Hermitian matrix with the package phase convention.

    ``method="lapack"`` uses :func:`numpy.linalg.eigh`; ``method="jacobi"``
    uses :func:`jacobi_eigh`. Both return ascending values.
    """
    if method == "jacobi":
        return jacobi_eigh(h)
    if method != "lapack":
        raise ValueError(f"unknown method {method!r}")
    a = hermitian(h, tol=max(HERMITIAN_TOL, 1e-12 * (1 + np.abs(np.asarray(h)).max())))
    w, v = np.linalg.eigh(a)
    return EigenDecomposition(w, fix_phase(v))


def eigh_batch(hs) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised eigendecomposition of a stack of Hermitian matrices.

    No Hermiticity check is made; the stack is assumed to come from a
    validated family. Returns ``(values, vectors)`` with shapes ``(..., k)``
    and ``(..., k, k)``.
    """
    w, v = np.linalg.eigh(np.asarray(hs))
    return w, fix_phase(v)


def eigvals_batch(hs) -> np.ndarray:
    return np.linalg.eigvalsh(np.asarray(hs))


def overlap(u, v) -> complex:
    """Inner product <u, v>, conjugate-linear in the first argument."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    return complex(np.vdot(u, v))


def projector(vectors) -> np.ndarray:
    """Orthogonal projector onto the span of orthonormal vectors.

    `vectors` is a sequence of k-vectors (or a (k, n) array of columns).
    """
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        vs = vectors.astype(complex)
    else:
        vs = np.column_stack([np.asarray(x, dtype=complex) for x in vectors])
    gram = vs.conj().T @ vs
    dev = np.max(np.abs(gram - np.eye(gram.shape[0])))
    if dev > ORTHONORMAL_TOL:
        raise ValueError(f"vectors are not orthonormal (max |G - I| = {dev:.3e})")
    return vs @ vs.conj().T


def random_unitary(k: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(k: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    return 0.5 * (z + z.conj().T)
