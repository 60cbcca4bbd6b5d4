"""Berry phases along loops and Chern numbers of bands over closed surfaces.

Chern numbers use the link-variable (plaquette) method: each plaquette
contributes the argument of the product of the four normalised overlaps
around it, traversed counterclockwise with respect to the surface
orientation. The sum over a closed surface divided by 2*pi is an integer by
construction. The sign convention is fixed so that the lower band of
``x . sigma / 2`` carries charge -1 on an outward oriented sphere, i.e. band
``m`` of a spin-s model carries ``2m``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConvergenceError, DegeneracyError, ModelError
from .linalg import eigh_batch
from .models import TWO_PI, HamiltonianFamily

GAP_TOL = 1e-6
DEFAULT_GRID = 32
MAX_GRID = 256


@dataclass(frozen=True)
class ChernResult:
    """Integer Chern number with its numerical certificate."""

    value: int
    raw: float
    max_plaquette_phase: float
    grid: int
    reliable: bool
    band: int

    def __int__(self):
        return self.value


@dataclass(frozen=True)
class BerryPhaseResult:
    """Berry phase of one band along a closed loop.

    `phase` is the principal value in (-pi, pi]. `unwound` is the sum of the
    individual link phases in the package's eigenvector gauge; it agrees with
    `phase` modulo 2*pi but its 2*pi winding depends on that gauge.
    """

    phase: float
    unwound: float
    band: int
    points: int
    note: str = ""


def _principal(x):
    """Map angles into (-pi, pi]."""
    y = np.mod(np.asarray(x, float) + np.pi, TWO_PI) - np.pi
    return np.where(y <= -np.pi, np.pi, y)


def _gauge_scramble(vectors, rng):
    phases = np.exp(1j * rng.uniform(0, TWO_PI, size=vectors.shape[:-2] + (1, vectors.shape[-1])))
    return vectors * phases


def band_vectors(family: HamiltonianFamily, points, bands: Sequence[int],
                 gap_tol: float = GAP_TOL, gauge_rng=None):
    """Eigenvectors of selected bands at a stack of points.

    Raises DegeneracyError naming the worst point if any selected band comes
    within `gap_tol` of a neighbour.
    """
    pts = np.asarray(points, dtype=float)
    w, v = eigh_batch(family(pts))
    k = family.k
    for b in bands:
        if not 0 <= b < k:
            raise ModelError(f"band {b} out of range 0..{k - 1}")
    gaps = np.full(w.shape, np.inf)
    if k > 1:
        d = np.diff(w, axis=-1)
        gaps[..., :-1] = d
        gaps[..., 1:] = np.minimum(gaps[..., 1:], d)
    sel = gaps[..., list(bands)]
    worst = np.unravel_index(np.argmin(sel), sel.shape)
    if sel[worst] <= gap_tol:
        loc = pts[worst[:-1]]
        raise DegeneracyError(
            f"band {bands[worst[-1]]} is degenerate (gap {sel[worst]:.2e}) near "
            f"k = {np.round(loc, 6).tolist()}",
            location=loc, gap=float(sel[worst]))
    vec = v[..., :, list(bands)]
    if gauge_rng is not None:
        vec = _gauge_scramble(vec, gauge_rng)
    return vec, w


def _links(a, b):
    z = np.sum(a.conj() * b, axis=-1)
    return z / np.abs(z)


def _plaquette_phases(u):
    """Plaquette phases for an open grid of vectors u[i, j, :]."""
    u00, u10 = u[:-1, :-1], u[1:, :-1]
    u11, u01 = u[1:, 1:], u[:-1, 1:]
    prod = _links(u00, u10) * _links(u10, u11) * _links(u11, u01) * _links(u01, u00)
    return np.angle(prod)


def _integer_result(phases, band, grid):
    raw = float(np.sum(phases) / TWO_PI)
    value = int(np.rint(raw))
    max_phase = float(np.max(np.abs(phases))) if phases.size else 0.0
    reliable = abs(raw - value) <= 1e-6 and max_phase < np.pi
    return ChernResult(value, raw, max_phase, grid, reliable, band)


def _adaptive(compute, n, max_n, max_phase):
    while True:
        results = compute(n)
        worst = max(r.max_plaquette_phase for r in results)
        if worst < max_phase or n * 2 > max_n:
            return results
        n *= 2


# --------------------------------------------------------------------------
# slices of a 3-torus (or the whole 2-torus)


def slice_axes(d: int, axis: Optional[int]):
    """In-slice coordinate axes, ordered so the slice normal is +e_axis."""
    if d == 2 and axis is None:
        return (0, 1)
    if d != 3 or axis is None or not 0 <= axis < 3:
        raise ModelError(f"slicing needs d=3 and an axis in 0..2 (or d=2 and axis=None), got d={d}, axis={axis}")
    return ((axis + 1) % 3, (axis + 2) % 3)


def slice_points(d: int, axis: Optional[int], t: float, n: int) -> np.ndarray:
    """Periodic n x n grid of points on the slice torus."""
    b, c = slice_axes(d, axis)
    g = np.arange(n) * (TWO_PI / n)
    pts = np.zeros((n, n, d))
    pts[..., b] = g[:, None]
    pts[..., c] = g[None, :]
    if axis is not None:
        pts[..., axis] = t
    return pts


def _slice_compute(family, axis, t, bands, gap_tol, gauge_seed):
    def compute(n):
        if not family.periodic:
            raise ModelError(f"{family.name} is not periodic; slices need a torus family")
        pts = slice_points(family.d, axis, t, n)
        rng = None if gauge_seed is None else np.random.default_rng(gauge_seed)
        # evaluate the interior grid once; closing row/column reuse the same vectors
        vec, _ = band_vectors(family, pts, bands, gap_tol, rng)
        vec = np.concatenate([vec, vec[:1]], axis=0)
        vec = np.concatenate([vec, vec[:, :1]], axis=1)
        return [_integer_result(_plaquette_phases(vec[..., i]), b, n) for i, b in enumerate(bands)]
    return compute


def slice_chern_numbers(family: HamiltonianFamily, axis: Optional[int], t: float = 0.0,
                        N: int = DEFAULT_GRID, max_N: int = MAX_GRID,
                        max_phase: float = np.pi / 2, gap_tol: float = GAP_TOL,
                        gauge_seed=None, bands=None) -> list:
    """Chern numbers of bands over the 2-torus slice ``k[axis] = t``.

    For d=3 the slice is parametrised by the two other axes in cyclic order,
    so its orientation has normal +e_axis. For d=2 pass ``axis=None`` to use
    the whole torus. The grid is doubled until every plaquette phase is below
    `max_phase` or `max_N` is reached.
    """
    bands = list(range(family.k)) if bands is None else list(bands)
    return _adaptive(_slice_compute(family, axis, t, bands, gap_tol, gauge_seed), N, max_N, max_phase)


def chern_on_slice(family: HamiltonianFamily, axis: Optional[int], t: float, band: int,
                   N: int = DEFAULT_GRID, **kwargs) -> ChernResult:
    """Chern number of one band on the slice ``k[axis] = t``."""
    return slice_chern_numbers(family, axis, t, N, bands=[band], **kwargs)[0]


# --------------------------------------------------------------------------
# closed cube surfaces


def cube_faces(center, r: float, n: int):
    """Grids on the six faces of the cube of half-width r, outward oriented.

    Returns an array of shape (6, n+1, n+1, 3). Points on shared edges are
    bitwise identical between faces.
    """
    c = np.asarray(center, dtype=float)
    off = np.linspace(-r, r, n + 1)
    faces = []
    for a in range(3):
        for s in (1, -1):
            b, cc = (a + 1) % 3, (a + 2) % 3
            if s < 0:
                b, cc = cc, b
            pts = np.empty((n + 1, n + 1, 3))
            pts[..., a] = c[a] + (off[-1] if s > 0 else off[0])
            pts[..., b] = c[b] + off[:, None]
            pts[..., cc] = c[cc] + off[None, :]
            faces.append(pts)
    return np.stack(faces)


def sphere_chern_numbers(family: HamiltonianFamily, center, r: float, N: int = DEFAULT_GRID,
                         orientation: int = 1, max_N: int = MAX_GRID,
                         max_phase: float = np.pi / 2, gap_tol: float = GAP_TOL,
                         gauge_seed=None, bands=None) -> list:
    """Chern numbers of bands over the boundary of a cube around `center`.

    The cube boundary (half-width `r`) stands in for a small sphere; with
    ``orientation=1`` the normal points outward. ``orientation=-1`` returns
    the exact negation.
    """
    if family.d != 3:
        raise ModelError(f"closed-surface charges need d=3, got d={family.d}")
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    bands = list(range(family.k)) if bands is None else list(bands)

    def compute(n):
        pts = cube_faces(center, r, n)
        rng = None if gauge_seed is None else np.random.default_rng(gauge_seed)
        vec, _ = band_vectors(family, pts, bands, gap_tol, rng)
        out = []
        for i, b in enumerate(bands):
            ph = np.stack([_plaquette_phases(vec[f][..., i]) for f in range(6)])
            res = _integer_result(ph, b, n)
            if orientation < 0:
                res = ChernResult(-res.value, -res.raw, res.max_plaquette_phase, n, res.reliable, b)
            out.append(res)
        return out

    return _adaptive(compute, N, max_N, max_phase)


def chern_on_sphere(family: HamiltonianFamily, center, r: float, band: int,
                    N: int = DEFAULT_GRID, **kwargs) -> ChernResult:
    """Local charge of one band: its Chern number over a small closed surface."""
    return sphere_chern_numbers(family, center, r, N, bands=[band], **kwargs)[0]


# --------------------------------------------------------------------------
# loops and Berry phases


@dataclass(frozen=True)
class LoopPath:
    """A closed loop ``s -> curve(s)``, s in [0, 1), carrying one band."""

    curve: Callable
    band: int
    n: int = 64

    def __post_init__(self):
        if self.n < 8:
            raise ValueError(f"a loop needs at least 8 points, got {self.n}")

    def points(self, n: Optional[int] = None) -> np.ndarray:
        n = self.n if n is None else n
        return np.asarray(self.curve(np.arange(n) / n), dtype=float)


def circle_loop(center, radius: float, band: int, plane=(0, 1), n: int = 64) -> LoopPath:
    """Counterclockwise circle in the coordinate plane `plane` around `center`."""
    c = np.asarray(center, dtype=float)
    a, b = plane

    def curve(s):
        pts = np.repeat(c[None, :], len(s), axis=0)
        pts[:, a] += radius * np.cos(TWO_PI * s)
        pts[:, b] += radius * np.sin(TWO_PI * s)
        return pts

    return LoopPath(curve, band, n)


def polygon_loop(vertices, band: int, n: Optional[int] = None) -> LoopPath:
    """Closed polygon through `vertices` (straight segments in coordinates)."""
    v = np.asarray(vertices, dtype=float)
    m = len(v)
    seg = np.roll(v, -1, axis=0) - v

    def curve(s):
        x = np.asarray(s) * m
        i = np.minimum(np.floor(x).astype(int), m - 1)
        return v[i] + (x - i)[:, None] * seg[i]

    return LoopPath(curve, band, n if n is not None else max(8, 8 * m))


def _loop_phase(family, loop, n, gap_tol, gauge_rng):
    pts = loop.points(n)
    vec, _ = band_vectors(family, pts, [loop.band], gap_tol, gauge_rng)
    u = vec[..., 0]
    z = np.sum(u.conj() * np.roll(u, -1, axis=0), axis=-1)
    if np.min(np.abs(z)) < 1e-3:
        return None
    links = np.angle(z)
    prod = np.prod(z / np.abs(z))
    return float(_principal(np.angle(prod))), float(np.sum(links))


def berry_phase(family: HamiltonianFamily, loop: LoopPath, tol: float = 1e-6,
                max_points: int = 1 << 17, gap_tol: float = GAP_TOL,
                gauge_seed=None) -> BerryPhaseResult:
    """Berry phase of ``loop.band`` along a closed loop.

    Uses the discrete Wilson loop ``arg prod_j <u_j, u_{j+1}>`` and doubles
    the number of loop points until two successive values agree within `tol`.
    The sign makes the phase equal to the enclosed curvature flux in the
    Chern convention of this module.
    """
    rng = None if gauge_seed is None else np.random.default_rng(gauge_seed)
    n = loop.n
    prev = None
    while n <= max_points:
        cur = _loop_phase(family, loop, n, gap_tol, rng)
        if cur is not None and prev is not None:
            if abs(_principal(cur[0] - prev[0])) <= tol:
                return BerryPhaseResult(cur[0], cur[1], loop.band, n,
                                        note=f"converged at {n} points")
        prev = cur
        n *= 2
    raise ConvergenceError(
        f"Berry phase did not converge to {tol:g} with {max_points} loop points "
        f"(loop too close to a degeneracy?)")
