"""Local models of isolated degeneracies.

Near a degenerate point ``k0`` each eigenvalue group is described to first
order by the projected derivatives ``M_a = P dH/dk_a P`` (trace removed).
A group is of spin type when ``sum_a x_a M_a`` has the spectrum of a spin-s
generator ``c(x) (-s, ..., s)`` for every direction; its chirality is the
sign of the linear map from directions to spin generators, and fixes the
local charges ``eps * 2m`` of the group's bands.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .degeneracy import DegeneratePoint, classify_multiplicity
from .errors import InconsistencyError, ModelError, NumericalError
from .models import HamiltonianFamily, derivative, restrict, torus_distance
from .topology import sphere_chern_numbers

DEFAULT_RADIUS = 0.3
EXACT_TOL = 1e-6
FD_TOL = 1e-3
EQUATORIAL_TOL = 1e-8


# --------------------------------------------------------------------------
# first-order data


@dataclass(frozen=True)
class ProjectedFirstOrder:
    """Projected first-order data of one eigenvalue group.

    Attributes
    ----------
    block : int
        Index of the group in the point's multiplicity pattern.
    bands : tuple of int
        Band indices spanned by the group.
    a : ndarray, shape (d,)
        Trace part per axis (the affine shift ``a . x`` of the whole group).
    M : ndarray, shape (d, g, g)
        Traceless projected derivatives.
    basis : ndarray, shape (k, g)
        Orthonormal basis of the degenerate eigenspace used for projection.
    exact : bool
        Whether exact derivatives were available.
    """

    block: int
    bands: tuple
    a: np.ndarray
    M: np.ndarray
    basis: np.ndarray
    exact: bool

    @property
    def size(self) -> int:
        return self.M.shape[-1]

    def linear(self, x) -> np.ndarray:
        """``sum_a x_a M_a`` for directions ``x`` of shape (..., d)."""
        return np.tensordot(np.asarray(x, float), self.M, axes=([-1], [0]))


def canonical_basis(vectors) -> np.ndarray:
    """Deterministic orthonormal basis of the span of the columns of `vectors`.

    Standard basis vectors are projected onto the span in index order and
    Gram-Schmidt orthonormalised; the result is the identity when the span
    is the whole space.
    """
    v = np.asarray(vectors, dtype=complex)
    k, g = v.shape
    proj = v @ v.conj().T
    out = []
    for j in range(k):
        w = proj[:, j].copy()
        for u in out:
            w -= np.vdot(u, w) * u
        n = np.linalg.norm(w)
        if n > 1e-6:
            out.append(w / n)
        if len(out) == g:
            break
    return np.column_stack(out)


def _point_location(point):
    return np.asarray(point.location if isinstance(point, DegeneratePoint) else point, float)


def _pattern(family, point):
    if isinstance(point, DegeneratePoint):
        return point.pattern
    return classify_multiplicity(np.linalg.eigvalsh(family(np.asarray(point, float))))


def projected_first_order(family: HamiltonianFamily, point, block: int,
                          h: float = 1e-5) -> ProjectedFirstOrder:
    """First-order data of eigenvalue group `block` at a degenerate point.

    `point` is a :class:`DegeneratePoint` (its pattern is used) or a bare
    location (the pattern is recomputed).
    """
    if isinstance(point, DegeneratePoint) and point.locus_dim != 0:
        raise ModelError("local models need an isolated point; this locus has dimension >= 1")
    k0 = _point_location(point)
    pattern = _pattern(family, point)
    if not 0 <= block < len(pattern):
        raise ModelError(f"block {block} out of range for pattern {pattern}")
    start = sum(pattern[:block])
    bands = tuple(range(start, start + pattern[block]))
    _, v = np.linalg.eigh(family(k0))
    basis = canonical_basis(v[:, list(bands)])
    g = len(bands)
    M = np.empty((family.d, g, g), dtype=complex)
    a = np.empty(family.d)
    for ax in range(family.d):
        m = basis.conj().T @ derivative(family, k0, ax, h=h) @ basis
        m = 0.5 * (m + m.conj().T)
        a[ax] = np.trace(m).real / g
        M[ax] = m - a[ax] * np.eye(g)
    return ProjectedFirstOrder(block, bands, a, M, basis, family.has_exact_derivative)


# --------------------------------------------------------------------------
# spin-type test


@dataclass(frozen=True)
class SpinTest:
    """Outcome of the eigenvalue-pattern test.

    `spin` is None for a block that is not of spin type; `direction` is
    then the worst sampled direction.
    """

    spin: Optional[Fraction]
    residual: float
    c_min: float
    direction: Optional[np.ndarray] = None

    @property
    def is_spin_type(self) -> bool:
        return self.spin is not None


def _directions(n, d, rng):
    x = rng.standard_normal((n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def spin_pattern_test(pfo: ProjectedFirstOrder, samples: int = 64, tol: Optional[float] = None,
                      seed: int = 0) -> SpinTest:
    """Test whether the first-order data has the spectrum of a spin-s generator.

    For each of `samples` random unit directions the eigenvalues of
    ``M(x)`` are fitted by ``c(x) (-s, ..., s)`` with ``s = (g-1)/2``. The
    residual is the largest deviation relative to ``c(x) s``. The block is
    of spin type when the residual is at most `tol` and every ``c(x) > 0``.
    """
    if samples < 50:
        raise ValueError("use at least 50 sample directions")
    g = pfo.size
    s = Fraction(g - 1, 2)
    if g == 1:
        return SpinTest(s, 0.0, np.inf)
    tol = (EXACT_TOL if pfo.exact else FD_TOL) if tol is None else tol
    xs = _directions(samples, pfo.M.shape[0], np.random.default_rng(seed))
    lam = np.linalg.eigvalsh(pfo.linear(xs))
    p = np.arange(g) - float(s)
    c = lam @ p / (p @ p)
    scale = float(np.max(np.abs(pfo.M))) or 1.0
    worst = int(np.argmin(c))
    if c[worst] <= 1e-8 * scale:
        return SpinTest(None, np.inf, float(c[worst]), xs[worst])
    dev = np.max(np.abs(lam - c[:, None] * p), axis=1) / (c * float(s))
    i = int(np.argmax(dev))
    res = float(dev[i])
    if res > tol:
        return SpinTest(None, res, float(c.min()), xs[i])
    return SpinTest(s, res, float(c.min()))


# --------------------------------------------------------------------------
# charges and chirality


def _separation(center, others, periodic):
    c = np.asarray(center, float)
    best = np.inf
    for o in others:
        o = _point_location(o)
        dist = torus_distance(c, o) if periodic else float(np.linalg.norm(c - o))
        if dist > 1e-9:
            best = min(best, dist)
    return best


def default_radius(family: HamiltonianFamily, point, others: Sequence = ()) -> float:
    """``DEFAULT_RADIUS`` shrunk so that no other listed point lies within 2r."""
    sep = _separation(_point_location(point), others, family.periodic)
    return float(min(DEFAULT_RADIUS, 0.45 * sep))


def local_charges(family: HamiltonianFamily, point, r: Optional[float] = None, N: int = 32,
                  others: Sequence = (), orientation: int = 1, **kwargs) -> tuple:
    """Local Chern charges of all bands on a cube surface around `point`.

    `others` lists further degenerate points; none may lie within ``2r``.
    With ``r=None`` the radius is chosen to satisfy this.
    """
    c = _point_location(point)
    if r is None:
        r = default_radius(family, point, others)
    elif _separation(c, others, family.periodic) <= 2 * r:
        raise ModelError(f"another degeneracy lies within 2r = {2 * r:g} of {np.round(c, 6).tolist()}; "
                         "use a smaller radius")
    res = sphere_chern_numbers(family, c, r, N, orientation=orientation, **kwargs)
    bad = [x.band for x in res if not x.reliable]
    if bad:
        raise NumericalError(f"unreliable sphere charges for bands {bad} at {np.round(c, 6).tolist()}")
    return tuple(x.value for x in res)


def chirality(charges: Sequence[int], bands: Sequence[int], spin) -> int:
    """Chirality of a spin-type block from the charges of its bands.

    ``eps = -(charge of the lowest band) / (2s)``; every band of the block
    must then carry ``eps * 2m``.
    """
    s = Fraction(spin)
    if s <= 0:
        raise ValueError("chirality is defined for blocks with s > 0")
    q = [int(charges[b]) for b in bands]
    ratio = Fraction(-q[0]) / (2 * s)
    if ratio not in (1, -1):
        raise InconsistencyError(f"lowest-band charge {q[0]} is not +-2s for s = {s}; "
                                 "block is misclassified or the sphere encloses more than one point")
    eps = int(ratio)
    expected = [int(eps * 2 * (-s + j)) for j in range(len(q))]
    if q != expected:
        raise InconsistencyError(f"block charges {q} differ from eps*2m = {expected}")
    return eps


def generator_chirality(pfo: ProjectedFirstOrder) -> float:
    """det L of the spin-type map, computed from a unitary invariant.

    For ``M_a = sum_b L_ab U S_b U^dagger`` one has
    ``tr(M_x [M_y, M_z]) = i det(L) s(s+1)(2s+1)/3``, whatever the basis of
    the degenerate eigenspace, so no alignment of the basis is required.
    """
    if pfo.M.shape[0] != 3:
        raise ModelError("generator chirality needs three first-order matrices")
    g = pfo.size
    s = (g - 1) / 2
    if g < 2:
        raise ValueError("generator chirality is defined for blocks with s > 0")
    mx, my, mz = pfo.M
    t = np.trace(mx @ (my @ mz - mz @ my))
    return float((t / (1j * s * (s + 1) * (2 * s + 1) / 3)).real)


# --------------------------------------------------------------------------
# two dimensions


@dataclass(frozen=True)
class EquatorialResult:
    """Chirality of an equatorial 2d spin-1/2 model.

    `L` maps the coordinates (x, y) to the (S_x, S_y) coefficients and
    `sz` holds the (vanishing) S_z coefficients.
    """

    chirality: int
    L: np.ndarray
    sz: np.ndarray


def equatorial_chirality_2d(family: HamiltonianFamily, point, block: Optional[int] = None,
                            tol: float = EQUATORIAL_TOL) -> EquatorialResult:
    """Chirality of a two-band crossing in a two-parameter family.

    The degenerate eigenspace is expressed in its canonical basis (the
    identity when it is the whole space), the traceless first-order data is
    expanded in the Pauli halves ``sigma / 2`` of that basis and ``sign det``
    of the in-plane part is returned. A nonzero S_z part means the point is
    not equatorial.

    Unlike the three-dimensional chirality this sign depends on the
    reference generators: swapping the two basis states turns
    ``(sigma_x, sigma_y)`` into ``(sigma_x, -sigma_y)``. The ascending
    Zeeman basis of :func:`~bandtop.models.spin_matrices` is such a swap,
    so the z=0 chart of ``make_spin_family(1/2)`` has chirality -1 here.
    """
    if family.d != 2:
        raise ModelError(f"equatorial chirality needs d=2, got d={family.d}")
    pattern = _pattern(family, point)
    if block is None:
        blocks = [j for j, g in enumerate(pattern) if g > 1]
        if len(blocks) != 1:
            raise ModelError(f"expected exactly one degenerate group, pattern {pattern}")
        block = blocks[0]
    pfo = projected_first_order(family, point, block)
    if pfo.size != 2:
        raise ModelError(f"equatorial chirality needs a group of size 2, got {pfo.size}")
    sx = np.array([[0, 1], [1, 0]]) / 2
    sy = np.array([[0, -1j], [1j, 0]]) / 2
    sz = np.array([[1, 0], [0, -1]]) / 2
    coef = np.array([[np.trace(m @ s).real / 0.5 for s in (sx, sy, sz)] for m in pfo.M])
    L, z = coef[:, :2], coef[:, 2]
    if np.max(np.abs(z)) > tol:
        raise ModelError(f"point is not equatorial: S_z coefficients {z.tolist()}")
    det = float(np.linalg.det(L))
    if abs(det) <= 1e-12 * max(1.0, float(np.max(np.abs(L))) ** 2):
        raise NumericalError("in-plane first-order map is singular; chirality undefined")
    return EquatorialResult(int(np.sign(det)), L, z)


# --------------------------------------------------------------------------
# transverse disks through degenerate curves


def tangent_direction(family: HamiltonianFamily, point, h: float = 1e-5):
    """Tangent of a two-band degenerate curve and the smallest nonzero singular value.

    The tangent spans the directions along which the first-order data of
    the size-2 group vanishes. Its sign is fixed by making the first
    component above 1e-6 in modulus positive.
    """
    pattern = _pattern(family, point)
    blocks = [j for j, g in enumerate(pattern) if g == 2]
    if len(blocks) != 1:
        raise ModelError(f"expected exactly one two-band group, pattern {pattern}")
    pfo = projected_first_order(family, point, blocks[0], h=h)
    pauli = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.array([[1, 0], [0, -1]])]
    coef = np.array([[np.trace(m @ p).real / 2 for p in pauli] for m in pfo.M])
    _, sv, vt = np.linalg.svd(coef.T)
    t = vt[-1]
    first = np.flatnonzero(np.abs(t) > 1e-6)[0]
    return (t if t[first] > 0 else -t), float(sv[-2])


def normal_frame(t) -> np.ndarray:
    """Right-handed orthonormal pair (n1, n2) with ``n1 x n2 = t``."""
    t = np.asarray(t, float)
    t = t / np.linalg.norm(t)
    e = np.eye(3)[int(np.argmin(np.abs(t)))]
    n1 = e - (e @ t) * t
    n1 /= np.linalg.norm(n1)
    n2 = np.cross(t, n1)
    return np.stack([n1, n2])


def transverse_chirality(family: HamiltonianFamily, point, frame: Optional[np.ndarray] = None,
                         box: float = 0.1) -> EquatorialResult:
    """Equatorial chirality on the normal disk through a point of a degenerate curve.

    Passing the same `frame` at two points makes their chiralities comparable.
    """
    loc = _point_location(point)
    if frame is None:
        frame = normal_frame(tangent_direction(family, loc)[0])
    disk = restrict(family, loc, frame, box=box, name=f"{family.name}|disk")
    return equatorial_chirality_2d(disk, np.zeros(2))


# --------------------------------------------------------------------------
# complete local models


@dataclass(frozen=True)
class BlockModel:
    """Classification of one eigenvalue group."""

    block: int
    bands: tuple
    spin: Optional[Fraction]
    residual: float
    chirality: Optional[int]
    det_L: Optional[float]
    a: np.ndarray

    @property
    def spin_label(self) -> str:
        return "not-spin-type" if self.spin is None else str(self.spin)


@dataclass(frozen=True)
class LocalModel:
    """Local model of an isolated degenerate point."""

    point: DegeneratePoint
    blocks: tuple
    charges: Optional[tuple]
    radius: Optional[float]
    notes: tuple = field(default_factory=tuple)

    @property
    def spin_type(self) -> tuple:
        return tuple(b.spin for b in self.blocks)

    @property
    def chiralities(self) -> tuple:
        """Chiralities of the blocks with s > 0, in energy order."""
        return tuple(b.chirality for b in self.blocks if b.spin is not None and b.spin > 0)

    @property
    def residual(self) -> float:
        return max((b.residual for b in self.blocks), default=0.0)

    def expected_charges(self) -> Optional[tuple]:
        """``eps * 2m`` per band when every block is of spin type."""
        out = []
        for b in self.blocks:
            if b.spin is None:
                return None
            if b.spin == 0:
                out.append(0)
                continue
            out.extend(int(b.chirality * 2 * (-b.spin + j)) for j in range(len(b.bands)))
        return tuple(out)


def classify_point(family: HamiltonianFamily, point: DegeneratePoint, r: Optional[float] = None,
                   N: int = 32, others: Sequence = (), samples: int = 64, tol: Optional[float] = None,
                   seed: int = 0) -> LocalModel:
    """Spin type, chirality and local charges at an isolated degenerate point.

    In three dimensions the chirality of each spin-type block comes from the
    sphere charges; when exact derivatives exist the sign of the generator
    determinant is required to agree. In two dimensions there is no
    enclosing surface, so size-2 blocks get the equatorial chirality and
    `charges` is None.
    """
    if point.locus_dim != 0:
        raise ModelError("local models need an isolated point; this locus has dimension >= 1")
    notes = []
    pfos = [projected_first_order(family, point, j) for j in range(len(point.pattern))]
    tests = [spin_pattern_test(p, samples, tol, seed) for p in pfos]
    charges, radius = None, None
    if family.d == 3:
        radius = default_radius(family, point, others) if r is None else r
        charges = local_charges(family, point, radius, N, others=others)
        if sum(charges) != 0:
            raise InconsistencyError(f"band charges {charges} do not sum to zero")
    blocks = []
    for p, t in zip(pfos, tests):
        eps, det = None, None
        if t.is_spin_type and t.spin > 0:
            if family.d == 3:
                eps = chirality(charges, p.bands, t.spin)
                det = generator_chirality(p)
                if p.exact and int(np.sign(det)) != eps:
                    raise InconsistencyError(
                        f"block {p.block}: charge chirality {eps} but generator determinant {det:.6g}")
            elif family.d == 2 and p.size == 2:
                eq = equatorial_chirality_2d(family, point, p.block)
                eps, det = eq.chirality, float(np.linalg.det(eq.L))
        elif not t.is_spin_type:
            notes.append(f"block {p.block} is not of spin type (residual {t.residual:.3g})")
        blocks.append(BlockModel(p.block, p.bands, t.spin, t.residual, eps, det, p.a))
    return LocalModel(point, tuple(blocks), charges, radius, tuple(notes))
