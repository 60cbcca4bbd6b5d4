"""Locating band degeneracies.

The search works on the adjacent gaps ``g_i(k) = lambda_{i+1}(k) - lambda_i(k)``:
a grid scan flags cells where some gap is small (or where a gap has a local
minimum steep enough to hide a conical touching inside the cell), the flagged
cells are clustered, and each cluster is refined by Nelder-Mead minimisation
of the relevant gap. Refined points are grouped into an ordered multiplicity
pattern and probed for whether the degenerate locus through them is an
isolated point or extends along a curve.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage, optimize

from .errors import AmbiguousMultiplicity
from .linalg import eigvals_batch
from .models import TWO_PI, HamiltonianFamily, torus_delta, wrap

GROUP_TOL = 1e-6
SPLIT_TOL = 1e-4
REFINE_TOL = 1e-8
DEDUP_TOL = 1e-5


# --------------------------------------------------------------------------
# data


@dataclass(frozen=True)
class DegeneracyCandidate:
    """A connected cluster of grid cells with a small gap."""

    location: np.ndarray
    min_gap: float
    gap_indices: tuple
    cells: np.ndarray
    seeds: tuple
    spacing: float

    @property
    def extent(self) -> float:
        if len(self.cells) < 2:
            return 0.0
        return float(np.max(np.ptp(self.cells, axis=0)))


@dataclass(frozen=True)
class DegeneratePoint:
    """A refined degenerate point.

    `pattern` lists eigenvalue group sizes in ascending energy order; a group
    of size g is an A_{g-1} singularity. `locus_dim` is 0 for an isolated
    point and 1 when the degenerate locus through the point is at least
    one-dimensional.
    """

    location: np.ndarray
    pattern: tuple
    residual_gap: float
    values: np.ndarray
    locus_dim: int = 0
    exact: bool = True
    periodic: bool = True

    @property
    def singularity_type(self) -> tuple:
        return tuple(g - 1 for g in self.pattern)

    @property
    def groups(self) -> list:
        """Band index ranges of the eigenvalue groups."""
        out, start = [], 0
        for g in self.pattern:
            out.append(range(start, start + g))
            start += g
        return out

    @property
    def degenerate_gaps(self) -> list:
        return [i for grp in self.groups for i in list(grp)[:-1]]

    def type_label(self) -> str:
        return "(" + ",".join(f"A{a}" for a in self.singularity_type) + ")"


@dataclass
class CurveLocus:
    """A degenerate locus of dimension >= 1, reported by samples only."""

    samples: list
    cells: np.ndarray
    spacing: float

    def covers_circle(self, axis: int) -> bool:
        """Whether the projection of the locus onto `axis` is the whole circle."""
        return _coverage(self.cells[:, axis], self.spacing) >= TWO_PI - 1e-12

    def projection_intervals(self, axis: int) -> list:
        return _intervals(self.cells[:, axis], self.spacing)


@dataclass
class DegeneracyScan:
    """Everything found by :func:`find_degeneracies`."""

    points: list = field(default_factory=list)
    curves: list = field(default_factory=list)
    near: list = field(default_factory=list)
    grid: int = 0

    @property
    def isolated(self) -> list:
        return [p for p in self.points if p.locus_dim == 0]


# --------------------------------------------------------------------------
# gaps and patterns


def adjacent_gaps(values) -> np.ndarray:
    return np.diff(np.asarray(values, dtype=float), axis=-1)


def classify_multiplicity(values, group_tol: float = GROUP_TOL, split_tol: float = SPLIT_TOL) -> tuple:
    """Group ascending eigenvalues into an ordered multiplicity pattern.

    Consecutive values closer than `group_tol` share a group; values at least
    `split_tol` apart start a new one. Anything in between is ambiguous.

    >>> classify_multiplicity([-1, -1, -1, 3])
    (3, 1)
    """
    v = np.asarray(values, dtype=float)
    if np.any(np.diff(v) < -1e-12):
        raise ValueError("values must be ascending")
    sizes = [1]
    for i, gap in enumerate(np.diff(v)):
        if gap <= group_tol:
            sizes[-1] += 1
        elif gap >= split_tol:
            sizes.append(1)
        else:
            raise AmbiguousMultiplicity(
                f"gap {gap:.2e} between eigenvalues {i} and {i + 1} lies between the merge "
                f"tolerance {group_tol:g} and the split tolerance {split_tol:g}; refine further")
    return tuple(sizes)


def _pattern_residual(values, pattern):
    start, worst = 0, 0.0
    for g in pattern:
        if g > 1:
            worst = max(worst, float(values[start + g - 1] - values[start]))
        start += g
    return worst


# --------------------------------------------------------------------------
# scanning


def _grid_axes(family, N, box, periodic):
    lo, hi = box
    if periodic:
        return [lo[a] + (hi[a] - lo[a]) * np.arange(N) / N for a in range(family.d)]
    return [np.linspace(lo[a], hi[a], N) for a in range(family.d)]


def _eigvals_on_grid(family, axes, chunk=1 << 16):
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    flat = mesh.reshape(-1, family.d)
    out = np.empty((flat.shape[0], family.k))
    for s in range(0, flat.shape[0], chunk):
        out[s:s + chunk] = eigvals_batch(family(flat[s:s + chunk]))
    return mesh, out.reshape(mesh.shape[:-1] + (family.k,))


def _label_periodic(mask, periodic):
    structure = np.ones((3,) * mask.ndim, dtype=bool)
    labels, n = ndimage.label(mask, structure=structure)
    if not periodic or n == 0:
        return labels, n
    parent = list(range(n + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    # cells on opposite faces are neighbours, including diagonal offsets
    for ax in range(mask.ndim):
        first = np.take(labels, 0, axis=ax)
        last = np.take(labels, -1, axis=ax)
        for shift in _offsets(first.ndim):
            shifted = first
            for sub_ax, sft in enumerate(shift):
                shifted = np.roll(shifted, sft, axis=sub_ax)
            both = (last > 0) & (shifted > 0)
            for a, b in zip(last[both], shifted[both]):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(n + 1)])
    uniq = {r: i for i, r in enumerate(sorted(set(roots[1:])), start=1)}
    remap = np.array([0] + [uniq[r] for r in roots[1:]])
    return remap[labels], len(uniq)


def _offsets(ndim):
    if ndim == 0:
        return [()]
    grids = np.stack(np.meshgrid(*([[-1, 0, 1]] * ndim), indexing="ij"), -1).reshape(-1, ndim)
    return [tuple(int(x) for x in row) for row in grids]


def _circular_mean(x):
    ang = np.angle(np.mean(np.exp(1j * x), axis=0))
    return wrap(ang)


def _farthest_points(pts, m, periodic):
    if len(pts) <= m:
        return list(range(len(pts)))
    chosen = [0]
    d = _dist(pts, pts[0], periodic)
    while len(chosen) < m:
        i = int(np.argmax(d))
        chosen.append(i)
        d = np.minimum(d, _dist(pts, pts[i], periodic))
    return chosen


def _dist(pts, p, periodic):
    diff = torus_delta(pts, p) if periodic else pts - p
    return np.linalg.norm(diff, axis=-1)


def scan_gaps(family: HamiltonianFamily, N: int = 48, threshold: float = 0.05, box=None,
              local_minima: bool = True, max_seeds: int = 24) -> list:
    """Grid scan for small gaps, clustered into candidates.

    Parameters
    ----------
    N : int
        Grid points per axis (periodic grid on the torus, inclusive grid on a box).
    threshold : float
        Cells where the smallest adjacent gap is below this are flagged.
    box : pair of arrays, optional
        Restrict the scan to ``[lo, hi]``; such a scan is never periodic.
    local_minima : bool
        Also flag local minima of each gap that are smaller than the rise to
        their neighbours, i.e. where a cone could reach zero inside the cell.
    """
    periodic = family.periodic and box is None
    box = family.domain() if box is None else (np.asarray(box[0], float), np.asarray(box[1], float))
    axes = _grid_axes(family, N, box, periodic)
    spacing = float(max(a[1] - a[0] for a in axes))
    mesh, vals = _eigvals_on_grid(family, axes)
    if family.k < 2:
        return []
    gaps = adjacent_gaps(vals)
    mask_i = gaps < threshold
    mode = "wrap" if periodic else "nearest"
    minima = np.zeros_like(mask_i)
    for i in range(family.k - 1):
        g = gaps[..., i]
        minima[..., i] = g <= ndimage.minimum_filter(g, size=3, mode=mode)
        if local_minima:
            rise = ndimage.maximum_filter(g, size=3, mode=mode) - g
            mask_i[..., i] |= minima[..., i] & (g <= rise)
    mask = np.any(mask_i, axis=-1)
    labels, n = _label_periodic(mask, periodic)
    out = []
    for lab in range(1, n + 1):
        sel = labels == lab
        cells = mesh[sel]
        cg = gaps[sel]
        cm = mask_i[sel]
        cmin = minima[sel]
        idx = tuple(int(i) for i in range(family.k - 1) if np.any(cm[:, i]))
        loc = _circular_mean(cells) if periodic else cells.mean(axis=0)
        # seeds: grid-level local minima of each small gap, thinned out
        # along extended clusters
        seeds = []
        for i in idx:
            rows = np.flatnonzero(cm[:, i] & cmin[:, i])
            if rows.size == 0:
                rows = np.flatnonzero(cm[:, i])
                rows = rows[[int(np.argmin(cg[rows, i]))]]
            order = rows[np.argsort(cg[rows, i], kind="stable")]
            picks = _farthest_points(cells[order], max_seeds, periodic)
            seeds.extend((cells[order][p], i) for p in picks)
        out.append(DegeneracyCandidate(loc, float(cg.min()), idx, cells, tuple(seeds), spacing))
    out.sort(key=lambda c: tuple(np.round(c.location, 9)))
    return out


# --------------------------------------------------------------------------
# refinement


def _gap_fn(family, index):
    def f(x):
        return float(np.diff(np.linalg.eigvalsh(family(x)))[index])
    return f


def _nelder_mead(f, x0, step, restarts=8):
    x = np.asarray(x0, dtype=float)
    fx = f(x)
    d = len(x)
    for _ in range(restarts):
        simplex = np.vstack([x, x + step * np.eye(d)])
        res = optimize.minimize(f, x, method="Nelder-Mead",
                                options=dict(initial_simplex=simplex, xatol=1e-14, fatol=1e-16,
                                             maxfev=2000 * d))
        moved = np.linalg.norm(res.x - x)
        prev = fx
        if res.fun <= fx:
            x, fx = res.x, res.fun
        # stop at a zero, or at a positive minimum that restarts no longer improve
        if fx < 1e-13 or fx > 0.9 * prev:
            break
        step = max(min(step, 4 * moved), 1e-9) / 4
    return x, fx


def refine_seed(family: HamiltonianFamily, seed, gap_index: int, step: float,
                tol: float = REFINE_TOL, periodic: Optional[bool] = None) -> DegeneratePoint:
    """Minimise one adjacent gap from `seed` and classify the result."""
    periodic = family.periodic if periodic is None else periodic
    x, gx = _nelder_mead(_gap_fn(family, gap_index), seed, step)
    loc = wrap(x) if periodic else x
    vals = np.linalg.eigvalsh(family(loc))
    exact = gx <= tol
    try:
        pattern = classify_multiplicity(vals)
    except AmbiguousMultiplicity:
        if exact:
            raise
        pattern = classify_multiplicity(vals, group_tol=SPLIT_TOL, split_tol=SPLIT_TOL)
    return DegeneratePoint(loc, pattern, _pattern_residual(vals, pattern), vals,
                           exact=bool(exact), periodic=family.periodic)


def refine(family: HamiltonianFamily, candidate: DegeneracyCandidate,
           tol: float = REFINE_TOL) -> DegeneratePoint:
    """Refine a scan candidate to a degenerate point.

    Compact clusters start from their centroid; extended ones from their
    lowest-gap cell. The gap minimised is the smallest one in the cluster.
    A result whose gap stays above `tol` is returned with ``exact=False``.
    """
    gi = candidate.gap_indices[0] if candidate.gap_indices else 0
    best_gap = np.inf
    for i in candidate.gap_indices:
        g = min(_gap_fn(family, i)(s) for s, j in candidate.seeds if j == i)
        if g < best_gap:
            best_gap, gi = g, i
    if candidate.extent <= 3 * candidate.spacing:
        x0 = candidate.location
    else:
        x0 = min((s for s, j in candidate.seeds if j == gi), key=_gap_fn(family, gi))
    return refine_seed(family, x0, gi, candidate.spacing / 2, tol)


# --------------------------------------------------------------------------
# locus dimension


def _gap_min_fn(family, indices):
    idx = list(indices)

    def f(x):
        return float(np.min(np.diff(np.linalg.eigvalsh(family(x)))[idx]))
    return f


def locus_dimension_probe(family: HamiltonianFamily, point: DegeneratePoint, r_probe: float = 0.05,
                          floor: float = 1e-6, grid: int = 9) -> int:
    """0 if the degeneracy through `point` is isolated, 1 if it reaches the probe cube.

    The relevant gaps are minimised over each of the six faces of the cube of
    half-width `r_probe` around the point. The point is isolated when every
    face minimum exceeds ``max(10 * residual_gap, floor)``.
    """
    idx = point.degenerate_gaps
    if not idx:
        return 0
    f = _gap_min_fn(family, idx)
    c = np.asarray(point.location, dtype=float)
    limit = max(10 * point.residual_gap, floor)
    off = np.linspace(-r_probe, r_probe, grid)
    d = family.d
    for a in range(d):
        others = [b for b in range(d) if b != a]
        for s in (1.0, -1.0):
            mesh = np.stack(np.meshgrid(*([off] * len(others)), indexing="ij"), -1).reshape(-1, len(others))
            pts = np.repeat(c[None, :], len(mesh), axis=0)
            pts[:, a] += s * r_probe
            pts[:, others] += mesh
            vals = eigvals_batch(family(pts))
            g = np.min(adjacent_gaps(vals)[:, idx], axis=-1)
            best = float(g.min())
            if best <= limit:
                return 1
            if not others:
                continue
            # a face minimum can only hide below the limit where the gap could
            # fall that far within one grid cell
            gface = g.reshape((grid,) * len(others))
            rise = max(float(np.max(np.abs(np.diff(gface, axis=ax)))) for ax in range(gface.ndim))
            if best - 2 * rise > limit:
                continue

            def face(u, a=a, s=s, others=others):
                p = c.copy()
                p[a] += s * r_probe
                p[others] += np.clip(u, -r_probe, r_probe)
                return f(p) + float(np.sum(np.abs(u - np.clip(u, -r_probe, r_probe))))

            for j in np.argsort(g)[:2]:
                _, val = _nelder_mead(face, mesh[j], (off[1] - off[0]) / 2, restarts=3)
                if val <= limit:
                    return 1
    return 0


# --------------------------------------------------------------------------
# the full search


def _dedupe(points, periodic, tol=DEDUP_TOL):
    out = []
    for p in sorted(points, key=lambda q: q.residual_gap):
        if all(_dist(np.asarray([p.location]), q.location, periodic)[0] > tol for q in out):
            out.append(p)
    return out


def _coarse(family, seed, gi, step):
    res = optimize.minimize(_gap_fn(family, gi), seed, method="Nelder-Mead",
                            options=dict(initial_simplex=np.vstack([seed, seed + step * np.eye(len(seed))]),
                                         xatol=step * 1e-4, fatol=1e-12, maxfev=400 * len(seed)))
    return res.x


def _refine_candidates(family, cands, tol, periodic):
    # a short first pass merges seeds heading for the same minimum
    found, near = [], []
    for c in cands:
        reps = []
        for seed, gi in c.seeds:
            x = _coarse(family, np.asarray(seed, float), gi, c.spacing / 2)
            if any(gj == gi and _dist(np.asarray([x]), y, periodic)[0] < 1e-3 * c.spacing
                   for y, gj in reps):
                continue
            reps.append((x, gi))
        for x, gi in reps:
            p = refine_seed(family, x, gi, 1e-2 * c.spacing, tol, periodic=periodic)
            (found if p.exact else near).append(p)
    return found, near


def _in_box(x, box, margin=0.0):
    lo, hi = box
    return bool(np.all(x >= lo - margin) and np.all(x <= hi + margin))


def find_degeneracies(family: HamiltonianFamily, N: int = 48, threshold: float = 0.05, box=None,
                      tol: float = REFINE_TOL, zoom_levels: int = 3, max_seeds: int = 24,
                      r_probe: float = 0.05) -> DegeneracyScan:
    """Scan, refine, zoom and classify all degeneracies of a family.

    After the grid scan, every isolated point found is re-scanned on a finer
    local grid to catch nearby companions that shared a coarse cell.
    Points whose locus extends (diamond-type circles) are collected into
    :class:`CurveLocus` objects instead.
    """
    periodic = family.periodic and box is None
    dom = family.domain() if box is None else (np.asarray(box[0], float), np.asarray(box[1], float))
    cands = scan_gaps(family, N, threshold, box=box, max_seeds=max_seeds)
    spacing = cands[0].spacing if cands else float(np.max(dom[1] - dom[0]) / N)

    per_cand = []
    near = []
    for c in cands:
        f, nr = _refine_candidates(family, [c], tol, periodic)
        if not periodic:
            f = [p for p in f if _in_box(p.location, dom, spacing)]
        per_cand.append((c, _dedupe(f, periodic)))
        near.extend(nr)

    points, curves = [], []
    for c, pts in per_cand:
        probed = []
        for p in pts:
            dim = locus_dimension_probe(family, p, min(r_probe, c.spacing))
            probed.append(_with(p, locus_dim=dim))
        iso = [p for p in probed if p.locus_dim == 0]
        ext = [p for p in probed if p.locus_dim > 0]
        if ext:
            curves.append(CurveLocus(ext, c.cells, c.spacing))
        points.extend(iso)

    points = _dedupe(points, periodic)
    # zoom around isolated points for companions hidden within one coarse cell
    h = spacing
    frontier = list(points)
    for _ in range(zoom_levels):
        new = []
        for p in frontier:
            half = 1.5 * h
            sub = (p.location - half, p.location + half)
            subc = scan_gaps(family, 13, threshold * (2 * half / 12) / h, box=sub, max_seeds=8)
            f, _ = _refine_candidates(family, subc, tol, periodic)
            for q in f:
                if periodic:
                    q = _with(q, location=wrap(q.location))
                elif not _in_box(q.location, dom, spacing):
                    continue
                if all(_dist(np.asarray([q.location]), r.location, periodic)[0] > DEDUP_TOL
                       for r in points + new):
                    new.append(q)
        if not new:
            break
        for q in new:
            points.append(q)
        frontier = new
        h = 2 * 1.5 * h / 12

    # re-probe with radii that respect the separation between points
    final = []
    for p in points:
        others = [q for q in points if q is not p]
        sep = min((_dist(np.asarray([p.location]), q.location, periodic)[0] for q in others),
                  default=np.inf)
        rp = min(r_probe, 0.4 * sep)
        dim = locus_dimension_probe(family, p, rp)
        if dim:
            curves.append(CurveLocus([_with(p, locus_dim=1)], np.asarray([p.location]), rp))
        else:
            final.append(_with(p, locus_dim=0))
    final.sort(key=lambda q: tuple(np.round(q.location, 7)))
    return DegeneracyScan(final, curves, _dedupe(near, periodic), N)


def _with(p: DegeneratePoint, **changes) -> DegeneratePoint:
    data = dict(location=p.location, pattern=p.pattern, residual_gap=p.residual_gap,
                values=p.values, locus_dim=p.locus_dim, exact=p.exact, periodic=p.periodic)
    data.update(changes)
    return DegeneratePoint(**data)


# --------------------------------------------------------------------------
# projections of cell sets onto a circle


def _intervals(coords, spacing):
    """Merged arcs [a, b] (b may exceed 2*pi) covered by cells of width `spacing`."""
    x = np.sort(wrap(np.asarray(coords, float)))
    if x.size == 0:
        return []
    half = spacing / 2 + 1e-12
    arcs = []
    for v in x:
        a, b = v - half, v + half
        if arcs and a <= arcs[-1][1]:
            arcs[-1][1] = max(arcs[-1][1], b)
        else:
            arcs.append([a, b])
    if len(arcs) > 1 and arcs[-1][1] - TWO_PI >= arcs[0][0]:
        arcs[0][0] = arcs[-1][0] - TWO_PI
        arcs[0][1] = max(arcs[0][1], arcs[-1][1] - TWO_PI)
        arcs.pop()
    return [(float(a), float(b)) for a, b in arcs]


def _coverage(coords, spacing):
    return float(min(TWO_PI, sum(b - a for a, b in _intervals(coords, spacing))))
