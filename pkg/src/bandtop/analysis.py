"""Slicing step functions, global constraints and deformation tracking.

Slicing a 3-torus family along an axis gives, for every band, the Chern
number ``chi_i(t)`` of the slice ``k[axis] = t``. It is an integer step
function that only jumps where the slice meets the degenerate locus, and
each jump equals the local charge enclosed between the two slices.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .degeneracy import DegeneratePoint, DegeneracyScan, find_degeneracies
from .errors import (AmbiguousMultiplicity, BandtopError, DegeneracyError, GenericityError,
                     ModelError, NoValidSlicing, NumericalError)
from .localmodel import LocalModel, local_charges, normal_frame, tangent_direction, transverse_chirality
from .models import (TWO_PI, HamiltonianFamily, deform, gyroid_tree_perturbation, torus_distance,
                     wrap)
from .parallel import pmap
from .topology import slice_chern_numbers, sphere_chern_numbers

GENERICITY_TOL = 1e-3
SLICE_MAX_N = 128
DEFAULT_DELTA = (0.3, -0.2, 0.1)
FALLBACK_DELTA = (0.25, 0.35, -0.15)


# --------------------------------------------------------------------------
# slice profiles


@dataclass(frozen=True)
class CriticalValue:
    """Projection of one degenerate component onto the slicing axis.

    Isolated points give ``lo == hi``; curve-like loci give an interval.
    """

    lo: float
    hi: float
    locations: tuple = ()

    @property
    def t(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def is_interval(self) -> bool:
        return self.hi > self.lo


@dataclass
class SliceProfile:
    """Step functions ``chi_i`` along one axis.

    ``intervals[j]`` runs from critical value j to critical value j+1 (the
    last one wraps past 2*pi). ``jumps[j]`` is the change of chi across
    critical value j. ``chi_check`` holds the second sample per interval.
    """

    axis: int
    k: int
    critical: list
    intervals: list
    chi: list
    chi_check: list
    jumps: list
    trs: bool = False
    family: str = ""
    notes: list = field(default_factory=list)

    @property
    def critical_params(self) -> list:
        return [c.t for c in self.critical]

    def interval_index(self, t: float) -> int:
        """Index of the open interval containing ``t``; raises on a critical value."""
        t = float(wrap(t))
        for j, (a, b) in enumerate(self.intervals):
            for tt in (t, t + TWO_PI):
                if a < tt < b:
                    return j
        raise ValueError(f"t = {t:.6g} is a critical value")

    def chi_at(self, t: float) -> tuple:
        return self.chi[self.interval_index(t)]

    def jump_at(self, t: float, tol: float = 1e-6) -> tuple:
        for c, j in zip(self.critical, self.jumps):
            if _circle_dist(c.t, t) <= tol + 0.5 * (c.hi - c.lo):
                return j
        return (0,) * self.k

    def to_dict(self) -> dict:
        return dict(axis=self.axis, k=self.k, trs=self.trs, family=self.family,
                    critical=[dict(lo=c.lo, hi=c.hi, locations=[list(map(float, x)) for x in c.locations])
                              for c in self.critical],
                    intervals=[list(iv) for iv in self.intervals],
                    chi=[list(c) for c in self.chi], chi_check=[list(c) for c in self.chi_check],
                    jumps=[list(j) for j in self.jumps], notes=list(self.notes))

    @classmethod
    def from_dict(cls, d: dict) -> "SliceProfile":
        crit = [CriticalValue(float(c["lo"]), float(c["hi"]), tuple(tuple(x) for x in c.get("locations", ())))
                for c in d["critical"]]
        return cls(int(d["axis"]), int(d["k"]), crit, [tuple(iv) for iv in d["intervals"]],
                   [tuple(int(x) for x in c) for c in d["chi"]],
                   [tuple(int(x) for x in c) for c in d["chi_check"]],
                   [tuple(int(x) for x in j) for j in d["jumps"]],
                   bool(d.get("trs", False)), d.get("family", ""), list(d.get("notes", [])))

    def table(self) -> list:
        """Rows ``(lo, hi, chi_1, ..., chi_k)`` per interval."""
        return [(a, b) + tuple(c) for (a, b), c in zip(self.intervals, self.chi)]


def _circle_dist(a, b):
    d = abs(float(wrap(a)) - float(wrap(b)))
    return min(d, TWO_PI - d)


def _critical_values(scan: DegeneracyScan, axis: int) -> list:
    items = []
    for p in scan.points:
        t = float(wrap(p.location[axis]))
        items.append(CriticalValue(t, t, (tuple(p.location),)))
    for c in scan.curves:
        if c.covers_circle(axis):
            raise NoValidSlicing(
                f"the degenerate curve through {np.round(c.samples[0].location, 4).tolist()} projects "
                f"onto the whole circle along axis {axis}; every slice meets it, so there is no slicing")
        for lo, hi in c.projection_intervals(axis):
            items.append(CriticalValue(float(lo), float(hi), tuple(tuple(s.location) for s in c.samples)))
    items.sort(key=lambda c: c.lo)
    return items


def _check_generic(items, tol):
    n = len(items)
    for j in range(n):
        a, b = items[j], items[(j + 1) % n]
        if n == 1:
            break
        gap = b.lo - a.hi if j + 1 < n else b.lo + TWO_PI - a.hi
        if gap <= tol:
            raise GenericityError(
                f"degenerate components at t = {a.t:.6g} and t = {b.t:.6g} project within {tol:g} of each "
                "other; apply a shear (a diffeomorphism isotopic to the identity) before slicing")


def _intervals(items):
    if not items:
        return [(0.0, TWO_PI)]
    n = len(items)
    return [(items[j].hi, items[j + 1].lo if j + 1 < n else items[0].lo + TWO_PI) for j in range(n)]


def slice_profile(family: HamiltonianFamily, axis: int, scan: Optional[DegeneracyScan] = None,
                  N: int = 32, max_N: int = SLICE_MAX_N, genericity_tol: float = GENERICITY_TOL,
                  gauge_seed=None, rescan: bool = True) -> SliceProfile:
    """Step functions chi_i with critical values and jumps along `axis`.

    Each interval is sampled at its midpoint and at its quarter point; when
    the two disagree a degeneracy was missed, so the slab is rescanned and
    the profile rebuilt once.
    """
    if family.d != 3:
        raise ModelError(f"slicing needs d=3, got d={family.d}")
    if not 0 <= axis < 3:
        raise ModelError(f"axis must be 0, 1 or 2, got {axis}")
    scan = find_degeneracies(family) if scan is None else scan
    items = _critical_values(scan, axis)
    _check_generic(items, genericity_tol)
    ivs = _intervals(items)

    def sample(t):
        res = slice_chern_numbers(family, axis, float(wrap(t)), N, max_N=max_N, gauge_seed=gauge_seed)
        bad = [r.band for r in res if not r.reliable]
        if bad:
            raise NumericalError(f"slice chern numbers at t = {t:.6g} unreliable for bands {bad}")
        return tuple(r.value for r in res)

    ts = [t for a, b in ivs for t in (0.5 * (a + b), a + 0.25 * (b - a))]
    vals = pmap(sample, ts)
    chi, check = vals[0::2], vals[1::2]
    bad = [j for j in range(len(ivs)) if chi[j] != check[j]]
    if bad and rescan:
        extra = []
        for j in bad:
            a, b = ivs[j]
            lo = np.zeros(3)
            hi = np.full(3, TWO_PI)
            lo[axis], hi[axis] = a, b
            sub = find_degeneracies(family, N=32, box=(lo, hi))
            extra.extend(p for p in sub.points
                         if all(torus_distance(p.location, q.location) > 1e-5 for q in scan.points))
        if extra:
            merged = DegeneracyScan(scan.points + extra, scan.curves, scan.near, scan.grid)
            return slice_profile(family, axis, merged, N, max_N, genericity_tol, gauge_seed, rescan=False)
    if bad:
        raise NumericalError(f"chi is not constant on intervals {bad} and no missed degeneracy was found")
    n = len(items)
    jumps = [tuple(int(x) for x in np.subtract(chi[j], chi[j - 1])) for j in range(n)]
    return SliceProfile(axis, family.k, items, ivs, list(chi), list(check), jumps,
                        family.has_symmetry("trs"), family.name)


# --------------------------------------------------------------------------
# global constraints


@dataclass(frozen=True)
class ClauseCheck:
    clause: str
    description: str
    status: str
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return dict(clause=self.clause, description=self.description, status=self.status,
                    witness=_jsonable(self.witness))


@dataclass
class ConstraintReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    @property
    def failed(self) -> list:
        return [c.clause for c in self.checks if c.status == "fail"]

    def status(self, clause: str) -> str:
        for c in self.checks:
            if c.clause == clause:
                return c.status
        raise KeyError(clause)

    def to_dict(self) -> dict:
        return dict(passed=self.passed, checks=[c.to_dict() for c in self.checks])

    @classmethod
    def from_dict(cls, d: dict) -> "ConstraintReport":
        return cls([ClauseCheck(c["clause"], c["description"], c["status"], c.get("witness", {}))
                    for c in d["checks"]])


@dataclass(frozen=True)
class LocalSummary:
    """The part of a local model the constraint checker uses."""

    location: tuple
    pattern: tuple
    spins: tuple
    chiralities: tuple
    charges: Optional[tuple]
    expected: Optional[tuple]

    @classmethod
    def of(cls, lm) -> "LocalSummary":
        if isinstance(lm, LocalSummary):
            return lm
        if isinstance(lm, dict):
            spins = tuple(None if s is None else _frac(s) for s in lm["spins"])
            return cls(tuple(lm["location"]), tuple(lm["pattern"]), spins, tuple(lm["chiralities"]),
                       None if lm.get("charges") is None else tuple(lm["charges"]),
                       None if lm.get("expected") is None else tuple(lm["expected"]))
        return cls(tuple(float(x) for x in lm.point.location), tuple(lm.point.pattern), lm.spin_type,
                   tuple(b.chirality for b in lm.blocks), lm.charges, lm.expected_charges())

    def to_dict(self) -> dict:
        return dict(location=list(self.location), pattern=list(self.pattern),
                    spins=[None if s is None else str(s) for s in self.spins],
                    chiralities=list(self.chiralities),
                    charges=None if self.charges is None else list(self.charges),
                    expected=None if self.expected is None else list(self.expected))


def _frac(s):
    from fractions import Fraction
    return Fraction(s)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return x


def _on_trs_plane(t, tol=1e-6):
    return _circle_dist(t, 0.0) <= tol or _circle_dist(t, np.pi) <= tol


def check_global(profile: SliceProfile, local_models: Sequence = (), trs: Optional[bool] = None,
                 match_tol: float = 1e-6) -> ConstraintReport:
    """Evaluate the global constraint clauses on a slice profile.

    Clauses (1)-(5) always apply; (6), (7) and the corollaries C1, C2 only
    when the family has time-reversal symmetry. Clause (5) compares the
    stored jump at each critical value with the spin-type prediction
    ``eps * 2m`` (or the raw sphere charges for non-spin-type blocks) of
    the local models projecting there; critical values without a local
    model are not checked. Jump-based clauses use the stored jumps and
    chi-based clauses the stored chi, so corrupted data is caught where it
    was corrupted.
    """
    trs = profile.trs if trs is None else trs
    lms = [LocalSummary.of(m) for m in local_models]
    checks = []
    k = profile.k

    # (1)
    bad = [j for j, (a, b) in enumerate(zip(profile.chi, profile.chi_check))
           if a != b or not all(float(x).is_integer() for x in a)]
    checks.append(ClauseCheck("1", "chi_i are integer and constant on each interval",
                              "fail" if bad else "pass", {"intervals": bad}))
    # (2)
    bad = [j for j, c in enumerate(profile.chi) if sum(c) != 0]
    checks.append(ClauseCheck("2", "sum_i chi_i = 0 on every interval", "fail" if bad else "pass",
                              {"intervals": bad, "sums": [sum(profile.chi[j]) for j in bad]}))
    # (3)
    bad = [profile.critical[j].t for j, jp in enumerate(profile.jumps) if sum(jp) != 0]
    checks.append(ClauseCheck("3", "sum_i j_i = 0 at every critical value", "fail" if bad else "pass",
                              {"critical_values": bad}))
    # (4)
    totals = [sum(jp[i] for jp in profile.jumps) for i in range(k)]
    bad = [i for i in range(k) if totals[i] != 0]
    checks.append(ClauseCheck("4", "sum of jumps over the circle vanishes for every band",
                              "fail" if bad else "pass", {"bands": bad, "totals": totals}))
    # (5)
    compared, bad = [], []
    for c, jp in zip(profile.critical, profile.jumps):
        here = [m for m in lms if _circle_dist(m.location[profile.axis], c.t) <= match_tol + 0.5 * (c.hi - c.lo)]
        if not here:
            continue
        preds = [m.expected if m.expected is not None else m.charges for m in here]
        if any(p is None for p in preds):
            continue
        pred = tuple(int(x) for x in np.sum(preds, axis=0))
        compared.append(c.t)
        if pred != tuple(jp):
            bad.append({"t": c.t, "jump": list(jp), "local_model": list(pred)})
    status = "inapplicable" if not compared else ("fail" if bad else "pass")
    checks.append(ClauseCheck("5", "jumps equal the local-model charges eps*2m", status,
                              {"checked": compared, "mismatches": bad}))
    if trs:
        # (6)
        bad = []
        for (a, b), c in zip(profile.intervals, profile.chi):
            mid = 0.5 * (a + b)
            other = profile.chi_at(-mid)
            if tuple(-x for x in other) != tuple(c):
                bad.append({"t": float(wrap(mid)), "chi": list(c), "chi(-t)": list(other)})
        checks.append(ClauseCheck("6", "chi_i(t) = -chi_i(-t)", "fail" if bad else "pass",
                                  {"violations": bad}))
        # (7)
        bad = [{"t": c.t, "jump": list(jp)} for c, jp in zip(profile.critical, profile.jumps)
               if _on_trs_plane(c.t) and any(x % 2 for x in jp)]
        checks.append(ClauseCheck("7", "jumps at t = 0 and t = pi are even (chi antisymmetric around them "
                                       "is covered by clause 6)", "fail" if bad else "pass",
                                  {"violations": bad}))
        # C1
        bad = []
        for m in lms:
            if not _on_trs_plane(m.location[profile.axis]):
                continue
            doubles = [g for g in m.pattern if g == 2]
            halves = [str(s) for s in m.spins if s is not None and (2 * s) % 2 == 1]
            if doubles or halves:
                bad.append({"location": list(m.location), "pattern": list(m.pattern), "half_spins": halves})
        checks.append(ClauseCheck("C1", "no Weyl point and no half-integer spin on the t = 0, pi slices",
                                  "fail" if bad else "pass", {"violations": bad}))
        # C2
        bad = []
        for c, jp in zip(profile.critical, profile.jumps):
            if _on_trs_plane(c.t):
                continue
            mirror = profile.jump_at(-c.t, tol=match_tol + 0.5 * (c.hi - c.lo))
            if tuple(mirror) != tuple(jp):
                bad.append({"t": c.t, "jump": list(jp), "jump(-t)": list(mirror)})
        checks.append(ClauseCheck("C2", "every jump at t is matched by the same jump at -t",
                                  "fail" if bad else "pass", {"violations": bad}))
    else:
        for cl, desc in (("6", "chi_i(t) = -chi_i(-t)"), ("7", "jumps at t = 0 and t = pi are even"),
                         ("C1", "no Weyl point on the t = 0, pi slices"),
                         ("C2", "jumps paired between t and -t")):
            checks.append(ClauseCheck(cl, desc, "inapplicable", {"reason": "no time-reversal symmetry"}))
    if k == 2:
        odd = [c.t for c, jp in zip(profile.critical, profile.jumps) if abs(jp[0]) == 1]
        status = "fail" if len(odd) == 1 else "pass"
        checks.append(ClauseCheck("C3", "a two-band family cannot have a single Weyl point", status,
                                  {"unit_jumps": odd}))
    return ConstraintReport(checks)


# --------------------------------------------------------------------------
# corrupt-and-detect mutations


def mutate_phantom_jump(profile: SliceProfile, bands=(0, 1), t: float = 0.4) -> SliceProfile:
    """Insert a phantom jump pair at both ``t`` and ``-t`` without touching chi.

    Band ``bands[0]`` jumps by +1 and ``bands[1]`` by -1 at each of the two
    parameters, so every jump still sums to zero and the pair is mirrored;
    only the per-band total around the circle is broken.
    """
    up, down = bands
    new = [CriticalValue(float(wrap(s)), float(wrap(s))) for s in (t, -t)]
    items = list(profile.critical)
    jumps = list(profile.jumps)
    for c in new:
        e = [0] * profile.k
        e[up], e[down] = 1, -1
        items.append(c)
        jumps.append(tuple(e))
    order = sorted(range(len(items)), key=lambda j: items[j].lo)
    items = [items[j] for j in order]
    jumps = [jumps[j] for j in order]
    ivs = _intervals(items)
    chi = [profile.chi_at(0.5 * (a + b)) for a, b in ivs]
    return replace(profile, critical=items, intervals=ivs, chi=chi, chi_check=list(chi), jumps=jumps,
                   notes=profile.notes + [f"mutation: phantom jump pair on bands {up}, {down} at +-{t:g}"])


def mutate_chi(profile: SliceProfile, changes: dict) -> SliceProfile:
    """Overwrite chi values: ``changes[(interval, band)] = value`` (both samples)."""
    chi = [list(c) for c in profile.chi]
    for (j, i), v in changes.items():
        chi[j][i] = int(v)
    chi = [tuple(c) for c in chi]
    return replace(profile, chi=chi, chi_check=list(chi),
                   notes=profile.notes + [f"mutation: chi overwritten at {sorted(changes)}"])


def mutate_trs_pairing(profile: SliceProfile) -> SliceProfile:
    """Make chi_1 equal (not opposite) on the first interval and its mirror.

    chi_1 is set to +1 on the first interval and on the interval containing
    the negatives of its points, and chi_3 on the first interval is moved to
    keep the band sum at zero, so only the time-reversal clause can notice.
    """
    j = 0
    a, b = profile.intervals[j]
    jm = profile.interval_index(-0.5 * (a + b))
    delta = 1 - profile.chi[j][0]
    changes = {(j, 0): 1, (jm, 0): 1, (j, 2): profile.chi[j][2] - delta}
    if profile.chi[jm][0] != 1:
        raise ValueError("mutation expects chi_1 = 1 on the mirror interval")
    return mutate_chi(profile, changes)


def flip_chirality(model) -> LocalSummary:
    """A local summary with every chirality and charge negated."""
    m = LocalSummary.of(model)
    neg = lambda xs: None if xs is None else tuple(-x if x is not None else None for x in xs)
    return replace(m, chiralities=neg(m.chiralities), charges=neg(m.charges), expected=neg(m.expected))


# --------------------------------------------------------------------------
# deformations


@dataclass(frozen=True)
class Ball:
    """Closed cube of half-width r around a center (the enclosing surface is its boundary)."""

    center: tuple
    r: float

    def contains(self, x, margin: float = 0.0) -> bool:
        return bool(np.all(np.abs(np.asarray(x) - np.asarray(self.center)) <= self.r - margin))


@dataclass
class DeformationStep:
    lam: float
    points: list
    point_charges: list
    ball_points: list
    ball_charges: list
    trs: bool


@dataclass
class DeformationTrace:
    perturbation: str
    lambdas: list
    balls: list
    steps: list
    trs_preserved: bool
    used_fallback: bool = False
    notes: list = field(default_factory=list)

    @property
    def ball_charges(self) -> list:
        """``ball_charges[b][s]``: band charges of ball b at step s."""
        return [[st.ball_charges[b] for st in self.steps] for b in range(len(self.balls))]

    @property
    def conserved(self) -> bool:
        return all(len(set(row)) == 1 for row in self.ball_charges)

    def counts(self, step: int = -1) -> list:
        return [len(p) for p in self.steps[step].ball_points]


def default_balls(family: HamiltonianFamily, points: Sequence[DegeneratePoint], r: float = 0.3) -> list:
    """One ball per point, shrunk to stay clear of the others."""
    out = []
    for p in points:
        seps = [torus_distance(p.location, q.location) for q in points if q is not p]
        out.append(Ball(tuple(float(x) for x in p.location), float(min(r, 0.45 * min(seps, default=np.inf)))))
    return out


def is_double_crossing(p: DegeneratePoint) -> bool:
    """A single two-band crossing (one group of size 2, the rest simple)."""
    return sorted(p.pattern, reverse=True)[:2] == [2, 1] or p.pattern == (2,)


def _scan_ball(fam, ball, N):
    c = np.asarray(ball.center)
    scan = find_degeneracies(fam, N=N, box=(c - ball.r, c + ball.r))
    spacing = 2 * ball.r / (N - 1)
    for p in scan.points + [s for cv in scan.curves for s in cv.samples]:
        if not ball.contains(p.location, margin=2 * spacing):
            raise DegeneracyError(
                f"degeneracy at {np.round(p.location, 6).tolist()} is within {2 * spacing:.3g} of the "
                f"boundary of the ball around {np.round(c, 4).tolist()}; use a larger ball",
                location=p.location)
    if scan.curves:
        raise NumericalError(f"curve-like degenerate locus inside ball around {np.round(c, 4).tolist()}")
    return scan.points


def track_deformation(base: HamiltonianFamily, perturbation: HamiltonianFamily,
                      lambdas: Sequence[float] = (0.0, 0.005, 0.01), balls: Optional[Sequence[Ball]] = None,
                      N_ball: int = 41, sphere_N: int = 32, base_scan: Optional[DegeneracyScan] = None,
                      point_charges: bool = True) -> DeformationTrace:
    """Follow the degeneracies of ``base + lam * perturbation`` inside fixed balls.

    For each lambda the degeneracies inside every ball are located and
    classified, and each band's total charge on the ball's boundary is
    computed. The balls default to small cubes around the degeneracies of
    the base family.
    """
    lambdas = [float(x) for x in lambdas]
    if not lambdas or lambdas[0] != 0.0:
        raise ValueError("lambda grid must start at 0")
    if balls is None:
        scan = find_degeneracies(base) if base_scan is None else base_scan
        balls = default_balls(base, scan.points)
    balls = list(balls)
    steps = []
    trs_all = True
    for lam in lambdas:
        fam = deform(base, perturbation, lam)
        trs = fam.has_symmetry("trs")
        trs_all &= trs or not base.has_symmetry("trs")

        def one(ball, fam=fam):
            pts = _scan_ball(fam, ball, N_ball)
            charges = sphere_chern_numbers(fam, ball.center, ball.r, sphere_N)
            if not all(c.reliable for c in charges):
                raise NumericalError(f"unreliable ball charges around {ball.center}")
            pc = []
            if point_charges:
                for p in pts:
                    pc.append(local_charges(fam, p, None, sphere_N, others=pts))
            return pts, tuple(c.value for c in charges), pc

        res = pmap(one, balls)
        allpts = [p for r in res for p in r[0]]
        steps.append(DeformationStep(lam, allpts, [q for r in res for q in r[2]],
                                     [r[0] for r in res], [r[1] for r in res], trs))
    return DeformationTrace(perturbation.name, lambdas, balls, steps, trs_all)


def deformation_generic(trace: DeformationTrace, plane_tol: float = 1e-6) -> list:
    """Reasons the last step of a trace is not a generic split (empty when fine).

    A point counts as lying on a t = 0 or pi slice when a coordinate is
    within `plane_tol` of 0 or pi, which is well above the refinement
    accuracy of the point itself.
    """
    reasons = []
    last = trace.steps[-1]
    for p in last.points:
        if max(p.pattern) > 2:
            reasons.append(f"group of size {max(p.pattern)} survives at {np.round(p.location, 6).tolist()}")
        if trace.trs_preserved:
            for ax in range(3):
                if _on_trs_plane(p.location[ax], plane_tol):
                    reasons.append(f"point {np.round(p.location, 6).tolist()} lies on a t = 0 or pi slice")
    return reasons


def track_default_deformation(base: HamiltonianFamily, lambdas: Sequence[float] = (0.0, 0.005, 0.01),
                              base_scan: Optional[DegeneracyScan] = None, **kwargs) -> DeformationTrace:
    """Tree-weight deformation with ``DEFAULT_DELTA``, falling back to ``FALLBACK_DELTA``.

    The fallback is used when the default split is not generic (a
    multiple crossing survives, a point sits on a t = 0 or pi slice, or the
    search cannot separate the split points).
    """
    if base_scan is None:
        base_scan = find_degeneracies(base)
    reasons = []
    for delta, fallback in ((DEFAULT_DELTA, False), (FALLBACK_DELTA, True)):
        try:
            tr = track_deformation(base, gyroid_tree_perturbation(delta), lambdas, base_scan=base_scan, **kwargs)
        except (GenericityError, AmbiguousMultiplicity, DegeneracyError) as exc:
            reasons.append(f"delta={delta}: {exc}")
            continue
        why = deformation_generic(tr)
        if why:
            reasons.append(f"delta={delta}: " + "; ".join(why))
            continue
        tr.used_fallback = fallback
        tr.notes.extend(reasons)
        if fallback:
            tr.notes.append(f"default perturbation delta={DEFAULT_DELTA} was not generic; "
                            f"used fallback delta={FALLBACK_DELTA}")
        return tr
    raise GenericityError("neither the default nor the fallback perturbation splits generically: "
                          + " | ".join(reasons))


# --------------------------------------------------------------------------
# two-dimensional and curve checks


@dataclass(frozen=True)
class TransversePair:
    location: tuple
    partner: tuple
    chirality: int
    partner_chirality: int

    @property
    def opposite(self) -> bool:
        return self.chirality == -self.partner_chirality


def transverse_pairs(family: HamiltonianFamily, scan: DegeneracyScan, n: int = 10,
                     min_singular: float = 0.05) -> list:
    """Transverse-disk chiralities at ``k`` and ``-k`` for smooth points of degenerate curves."""
    if family.d != 3:
        raise ModelError("transverse disks need d=3")
    out = []
    for c in scan.curves:
        for s in c.samples:
            if len(out) >= n:
                return out
            k = np.asarray(s.location)
            mk = wrap(-k)
            try:
                t, sv = tangent_direction(family, k)
                _, sv2 = tangent_direction(family, mk)
            except BandtopError:
                continue
            if min(sv, sv2) < min_singular:
                continue
            frame = normal_frame(t)
            a = transverse_chirality(family, k, frame).chirality
            b = transverse_chirality(family, mk, frame).chirality
            out.append(TransversePair(tuple(k), tuple(mk), a, b))
    return out


def trs_pairing_2d(models: Sequence[LocalModel]) -> list:
    """For each 2d point with a partner at -k: (k, -k, eps(k), eps(-k))."""
    out = []
    for m in models:
        k = m.point.location
        for o in models:
            if o is m:
                continue
            if torus_distance(o.point.location, wrap(-k)) <= 1e-6:
                out.append((tuple(k), tuple(o.point.location), m.chiralities, o.chiralities))
    return out
