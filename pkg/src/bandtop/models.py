"""Hamiltonian families over tori, the graph model zoo, and model files.

A family is a vectorised evaluator mapping momenta of shape ``(..., d)`` to
Hermitian matrices of shape ``(..., k, k)``. Periodic families live on the
torus ``[0, 2*pi)^d``; chart families (the spin models) live on a box in R^d.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ModelError

TWO_PI = 2.0 * np.pi
SYMMETRY_TOL = 1e-10
SYMMETRY_SAMPLES = 100


def wrap(k):
    """Reduce momenta into [0, 2*pi)."""
    w = np.mod(np.asarray(k, dtype=float), TWO_PI)
    return np.where(w >= TWO_PI, 0.0, w)


def torus_delta(a, b):
    """Componentwise signed difference a - b reduced into [-pi, pi)."""
    return np.mod(np.asarray(a, float) - np.asarray(b, float) + np.pi, TWO_PI) - np.pi


def torus_distance(a, b) -> float:
    return float(np.linalg.norm(torus_delta(a, b)))


def momentum(coords) -> np.ndarray:
    """A point on the torus, normalised into [0, 2*pi)."""
    c = np.atleast_1d(np.asarray(coords, dtype=float))
    if c.ndim != 1 or c.size < 1:
        raise ModelError(f"momentum needs a flat coordinate list, got shape {c.shape}")
    return wrap(c)


# --------------------------------------------------------------------------
# symmetries


@dataclass(frozen=True)
class SymmetryDeclaration:
    """A declared symmetry of a family.

    ``kind="trs"`` is the time reversal ``H(-k) = conj(H(k))``.
    ``kind="shifted-negation"`` is ``H(k + shift) = U^dagger (-H(k)) U``.
    """

    kind: str
    shift: Optional[tuple] = None
    unitary: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("trs", "shifted-negation"):
            raise ModelError(f"unknown symmetry kind {self.kind!r}")
        if self.kind == "shifted-negation":
            if self.shift is None or self.unitary is None:
                raise ModelError("shifted-negation needs a shift vector and a unitary")
            u = np.asarray(self.unitary, dtype=complex)
            if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > 1e-10:
                raise ModelError("shifted-negation matrix is not unitary")

    @classmethod
    def trs(cls) -> "SymmetryDeclaration":
        return cls("trs")

    @classmethod
    def shifted_negation(cls, shift, unitary) -> "SymmetryDeclaration":
        return cls("shifted-negation", tuple(float(s) for s in shift), np.asarray(unitary, complex))

    def violation(self, family: "HamiltonianFamily", points) -> np.ndarray:
        """Per-point max-abs violation of the symmetry contract."""
        pts = np.asarray(points, dtype=float)
        h = family(pts)
        if self.kind == "trs":
            lhs = family(-pts)
            rhs = h.conj()
        else:
            shift = np.asarray(self.shift, dtype=float)
            if shift.size != family.d:
                raise ModelError(f"shift has {shift.size} components, family has d={family.d}")
            u = np.asarray(self.unitary, dtype=complex)
            if u.shape != (family.k, family.k):
                raise ModelError(f"unitary is {u.shape}, family has k={family.k}")
            lhs = family(pts + shift)
            rhs = u.conj().T @ (-h) @ u
        return np.max(np.abs(lhs - rhs), axis=(-2, -1))

    def to_dict(self) -> dict:
        if self.kind == "trs":
            return {"kind": "trs"}
        u = np.asarray(self.unitary, dtype=complex)
        return {
            "kind": self.kind,
            "shift": list(self.shift),
            "unitary_re": u.real.tolist(),
            "unitary_im": u.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SymmetryDeclaration":
        kind = data.get("kind")
        if kind == "trs":
            return cls.trs()
        if kind == "shifted-negation":
            try:
                u = np.asarray(data["unitary_re"], float) + 1j * np.asarray(
                    data.get("unitary_im", np.zeros_like(data["unitary_re"])), float
                )
                return cls.shifted_negation(data["shift"], u)
            except KeyError as exc:
                raise ModelError(f"shifted-negation symmetry is missing field {exc}") from None
        raise ModelError(f"unknown symmetry kind {kind!r}")


@dataclass(frozen=True)
class SymmetryCheck:
    passed: bool
    max_violation: float
    worst_point: np.ndarray


def _sample_points(family, samples, rng):
    if np.ndim(samples) == 0:
        rng = np.random.default_rng(0) if rng is None else rng
        lo, hi = family.domain()
        return rng.uniform(lo, hi, size=(int(samples), family.d))
    return np.asarray(samples, dtype=float).reshape(-1, family.d)


def check_symmetry(family, decl: SymmetryDeclaration, samples=SYMMETRY_SAMPLES,
                   rng=None, tol: float = SYMMETRY_TOL) -> SymmetryCheck:
    """Test a symmetry declaration by sampling.

    `samples` is either a number of uniformly drawn points (seeded, so the
    result is reproducible) or an explicit ``(n, d)`` array of points.
    """
    pts = _sample_points(family, samples, rng)
    v = decl.violation(family, pts)
    i = int(np.argmax(v))
    return SymmetryCheck(bool(v[i] <= tol), float(v[i]), pts[i])


# --------------------------------------------------------------------------
# families


class HamiltonianFamily:
    """A smooth map from the torus (or a chart of R^d) to k x k Hermitian matrices.

    Parameters
    ----------
    name : str
    d, k : int
        Base dimension and number of bands.
    evaluator : callable
        Vectorised map ``(..., d) -> (..., k, k)``.
    symmetries : sequence of SymmetryDeclaration
        Each one is verified on 100 seeded random points at construction.
    periodic : bool
        True for torus families (period 2*pi in each coordinate).
    derivative : callable, optional
        Exact partial derivative ``(points, axis) -> (..., k, k)``.
    box : pair of arrays, optional
        Default search domain for chart families.
    """

    def __init__(self, name: str, d: int, k: int, evaluator: Callable,
                 symmetries: Sequence[SymmetryDeclaration] = (), periodic: bool = True,
                 derivative: Optional[Callable] = None, box=None, verify: bool = True):
        if d < 1 or k < 1:
            raise ModelError(f"need d >= 1 and k >= 1, got d={d}, k={k}")
        self.name = name
        self.d = int(d)
        self.k = int(k)
        self._evaluator = evaluator
        self._derivative = derivative
        self.periodic = bool(periodic)
        if box is None:
            box = (np.zeros(d), np.full(d, TWO_PI)) if periodic else (-np.ones(d), np.ones(d))
        self.box = (np.asarray(box[0], float), np.asarray(box[1], float))
        self.symmetries = tuple(symmetries)
        if verify:
            self._verify()

    def _verify(self):
        rng = np.random.default_rng(12345)
        pts = _sample_points(self, 16, rng)
        h = self(pts)
        if h.shape != (16, self.k, self.k):
            raise ModelError(f"{self.name}: evaluator returned shape {h.shape[1:]}, expected k={self.k}")
        dev = np.max(np.abs(h - np.swapaxes(h, -1, -2).conj()))
        if dev > 1e-12 * (1 + np.max(np.abs(h))):
            raise ModelError(f"{self.name}: evaluator output is not Hermitian (deviation {dev:.3e})")
        for decl in self.symmetries:
            chk = check_symmetry(self, decl, SYMMETRY_SAMPLES, np.random.default_rng(0))
            if not chk.passed:
                raise ModelError(
                    f"{self.name}: declared {decl.kind} symmetry fails "
                    f"(violation {chk.max_violation:.3e} at k={np.round(chk.worst_point, 6).tolist()})"
                )

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1:] != (self.d,):
            raise ModelError(f"{self.name}: expected points with last axis {self.d}, got {pts.shape}")
        return self._evaluator(pts)

    def __repr__(self):
        return f"HamiltonianFamily({self.name!r}, d={self.d}, k={self.k})"

    @property
    def has_exact_derivative(self) -> bool:
        return self._derivative is not None

    def exact_derivative(self, points, axis: int) -> np.ndarray:
        if self._derivative is None:
            raise ModelError(f"{self.name} has no exact derivative")
        return self._derivative(np.asarray(points, dtype=float), axis)

    def domain(self):
        return self.box

    def has_symmetry(self, kind: str) -> bool:
        return any(s.kind == kind for s in self.symmetries)

    def symmetry(self, kind: str) -> Optional[SymmetryDeclaration]:
        for s in self.symmetries:
            if s.kind == kind:
                return s
        return None


def derivative(family: HamiltonianFamily, point, axis: int, h: float = 1e-5,
               exact: Optional[bool] = None) -> np.ndarray:
    """Partial derivative of the family along one axis at one point.

    Uses the family's exact derivative when it has one (unless
    ``exact=False``); otherwise a central difference with step `h`,
    re-Hermitised by averaging with its adjoint.
    """
    p = np.asarray(point, dtype=float)
    if exact is None:
        exact = family.has_exact_derivative
    if exact:
        return family.exact_derivative(p, axis)
    if not 0 < h <= 1e-3:
        raise ValueError(f"step h must satisfy 0 < h <= 1e-3, got {h}")
    e = np.zeros(family.d)
    e[axis] = h
    dh = (family(p + e) - family(p - e)) / (2 * h)
    return 0.5 * (dh + np.swapaxes(dh, -1, -2).conj())


# --------------------------------------------------------------------------
# term models


@dataclass(frozen=True)
class Term:
    """Contribution ``coeff * exp(i n.k)`` to matrix entry (i, j)."""

    i: int
    j: int
    coeff: complex
    n: tuple

    def partner_key(self):
        return (self.j, self.i, tuple(-x for x in self.n))


def _complete_terms(terms, k, d):
    agg: dict = {}
    for t in terms:
        if not (0 <= t.i < k and 0 <= t.j < k):
            raise ModelError(f"term {_fmt_term(t)} has an index outside 0..{k - 1}")
        if len(t.n) != d:
            raise ModelError(f"term {_fmt_term(t)} has n of length {len(t.n)}, expected d={d}")
        key = (t.i, t.j, tuple(int(x) for x in t.n))
        agg[key] = agg.get(key, 0) + complex(t.coeff)
    out = dict(agg)
    for (i, j, n), c in agg.items():
        pk = (j, i, tuple(-x for x in n))
        if pk == (i, j, n):
            if abs(c.imag) > 1e-15 * (1 + abs(c)):
                raise ModelError(
                    f"term {_fmt_term(Term(i, j, c, n))} is a diagonal constant with "
                    f"non-real coefficient; the model cannot be Hermitian"
                )
            out[(i, j, n)] = complex(c.real, 0.0)
        elif pk in agg:
            if abs(agg[pk] - np.conj(c)) > 1e-12 * (1 + abs(c)):
                raise ModelError(
                    f"term {_fmt_term(Term(i, j, c, n))} and its conjugate partner "
                    f"{_fmt_term(Term(*pk[:2], agg[pk], pk[2]))} are not complex conjugates; "
                    f"the model is not Hermitian"
                )
        else:
            out[pk] = np.conj(c)
    return [Term(i, j, c, n) for (i, j, n), c in sorted(out.items(), key=lambda kv: kv[0])]


def _fmt_term(t: Term) -> str:
    c = complex(t.coeff)
    return f"(i={t.i}, j={t.j}, c={c.real:g}{c.imag:+g}j, n={list(t.n)})"


class BlochTermModel:
    """Tight-binding family given as a list of Fourier terms.

    Every term ``(i, j, c, n)`` contributes ``c * exp(i n.k)`` to entry
    ``(i, j)``. Missing conjugate partners ``(j, i, conj(c), -n)`` are added;
    a present partner with the wrong coefficient is an error.
    """

    def __init__(self, name: str, d: int, k: int, terms, symmetries=()):
        self.name = name
        self.d = int(d)
        self.k = int(k)
        raw = [t if isinstance(t, Term) else Term(int(t[0]), int(t[1]), complex(t[2]), tuple(t[3]))
               for t in terms]
        self.terms = _complete_terms(raw, self.k, self.d)
        self.symmetries = tuple(symmetries)
        self._idx = np.array([(t.i, t.j) for t in self.terms], dtype=int).reshape(-1, 2)
        self._c = np.array([t.coeff for t in self.terms], dtype=complex)
        self._n = np.array([t.n for t in self.terms], dtype=float).reshape(-1, self.d)
        flat = np.zeros((len(self.terms), self.k * self.k), dtype=complex)
        if len(self.terms):
            flat[np.arange(len(self.terms)), self._idx[:, 0] * self.k + self._idx[:, 1]] = self._c
        self._flat = flat

    def evaluate(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        ph = np.exp(1j * (pts @ self._n.T))
        return (ph @ self._flat).reshape(pts.shape[:-1] + (self.k, self.k))

    def evaluate_derivative(self, points, axis: int) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        ph = 1j * self._n[:, axis] * np.exp(1j * (pts @ self._n.T))
        return (ph @ self._flat).reshape(pts.shape[:-1] + (self.k, self.k))

    def family(self) -> HamiltonianFamily:
        return HamiltonianFamily(self.name, self.d, self.k, self.evaluate, self.symmetries,
                                 periodic=True, derivative=self.evaluate_derivative)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "d": self.d,
            "k": self.k,
            "terms": [
                {"i": t.i, "j": t.j, "re": complex(t.coeff).real, "im": complex(t.coeff).imag,
                 "n": list(t.n)}
                for t in self.terms
            ],
            "symmetries": [s.to_dict() for s in self.symmetries],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BlochTermModel":
        for key in ("d", "k", "terms"):
            if key not in data:
                raise ModelError(f"model file is missing required field {key!r}")
        terms = []
        for pos, t in enumerate(data["terms"]):
            try:
                terms.append(Term(int(t["i"]), int(t["j"]), complex(float(t.get("re", 0.0)),
                                                                    float(t.get("im", 0.0))),
                                  tuple(int(x) for x in t["n"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise ModelError(f"terms[{pos}] is malformed: {exc}") from None
        syms = [SymmetryDeclaration.from_dict(s) for s in data.get("symmetries", [])]
        return cls(data.get("name", "model"), int(data["d"]), int(data["k"]), terms, syms)


def loads_model(text: str) -> BlochTermModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"model file is not valid JSON: {exc}") from None
    return BlochTermModel.from_dict(data)


def load_model(path) -> HamiltonianFamily:
    """Read a JSON model file and return its (verified) family."""
    return loads_model(Path(path).read_text()).family()


def dumps_model(model: BlochTermModel) -> str:
    return json.dumps(model.to_dict(), indent=2)


# --------------------------------------------------------------------------
# spin models


def _as_spin(s) -> Fraction:
    f = Fraction(s).limit_denominator(1000) if not isinstance(s, str) else Fraction(s)
    if f < 0 or (2 * f).denominator != 1:
        raise ModelError(f"spin must be a non-negative half-integer, got {s}")
    return f


def spin_matrices(s):
    """Spin-s matrices (S_x, S_y, S_z) in the Zeeman basis.

    S_z = diag(-s, ..., s) ascending; S_x is real and S_y purely imaginary.
    """
    sf = _as_spin(s)
    dim = int(2 * sf + 1)
    m = np.array([float(-sf + j) for j in range(dim)])
    # raising operator S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>
    sp = np.zeros((dim, dim))
    for j in range(dim - 1):
        sp[j + 1, j] = np.sqrt(float(sf * (sf + 1)) - m[j] * (m[j] + 1))
    sx = (sp + sp.T) / 2
    sy = (sp - sp.T) / 2j
    sz = np.diag(m)
    return sx.astype(complex), sy, sz.astype(complex)


def make_spin_family(s, box: float = 1.0) -> HamiltonianFamily:
    """The chart family H(x) = x S_x + y S_y + z S_z on the box [-box, box]^3."""
    sf = _as_spin(s)
    mats = np.stack(spin_matrices(sf))

    def evaluator(x):
        return np.tensordot(x, mats, axes=([-1], [0]))

    def deriv(x, axis):
        return np.broadcast_to(mats[axis], x.shape[:-1] + mats.shape[1:]).copy()

    return HamiltonianFamily(f"spin-{sf}", 3, mats.shape[1], evaluator, periodic=False,
                             derivative=deriv, box=(-box * np.ones(3), box * np.ones(3)))


# --------------------------------------------------------------------------
# graph zoo


def _unit(d, l, sign=1):
    n = [0] * d
    n[l] = sign
    return tuple(n)


def petal_model(n: int) -> BlochTermModel:
    if n < 1:
        raise ModelError("petal graph needs n >= 1")
    terms = [(0, 0, 1.0, _unit(n, l)) for l in range(n)]
    return BlochTermModel(f"P{n}", n, 1, terms, [SymmetryDeclaration.trs()])


def digraph_model(n: int) -> BlochTermModel:
    if n < 1:
        raise ModelError("digraph needs n >= 1")
    terms = [(0, 1, 1.0, (0,) * n)] + [(0, 1, 1.0, _unit(n, l)) for l in range(n)]
    return BlochTermModel(f"D{n}", n, 2, terms, [SymmetryDeclaration.trs()])


GYROID_SHIFT = (np.pi, np.pi, np.pi)
GYROID_U = np.diag([-1.0, 1.0, 1.0, 1.0]).astype(complex)
GYROID_TREE_EDGES = ((0, 1), (0, 2), (0, 3))


def gyroid_model() -> BlochTermModel:
    terms = [(0, 1, 1.0, (0, 0, 0)), (0, 2, 1.0, (0, 0, 0)), (0, 3, 1.0, (0, 0, 0)),
             (1, 2, 1.0, (1, 0, 0)), (1, 3, 1.0, (0, -1, 0)), (2, 3, 1.0, (0, 0, 1))]
    syms = [SymmetryDeclaration.trs(),
            SymmetryDeclaration.shifted_negation(GYROID_SHIFT, GYROID_U)]
    return BlochTermModel("G", 3, 4, terms, syms)


def make_petal(n: int) -> HamiltonianFamily:
    return petal_model(n).family()


def make_digraph(n: int) -> HamiltonianFamily:
    return digraph_model(n).family()


def make_gyroid() -> HamiltonianFamily:
    return gyroid_model().family()


def make_honeycomb() -> HamiltonianFamily:
    return make_digraph(2)


def make_diamond() -> HamiltonianFamily:
    return make_digraph(3)


def constant_family(matrix, d: int, name: str = "const", periodic: bool = True) -> HamiltonianFamily:
    """A k-independent family; TRS is declared when the matrix is real."""
    m = np.asarray(matrix, dtype=complex)
    k = m.shape[0]

    def evaluator(x):
        return np.broadcast_to(m, x.shape[:-1] + (k, k)).copy()

    def deriv(x, axis):
        return np.zeros(x.shape[:-1] + (k, k), dtype=complex)

    syms = [SymmetryDeclaration.trs()] if np.allclose(m.imag, 0) else []
    return HamiltonianFamily(name, d, k, evaluator, syms, periodic=periodic, derivative=deriv)


def gyroid_tree_perturbation(delta=(0.3, -0.2, 0.1)) -> HamiltonianFamily:
    """Constant perturbation changing the three spanning-tree weights by `delta`."""
    m = np.zeros((4, 4))
    for (i, j), dv in zip(GYROID_TREE_EDGES, delta):
        m[i, j] = m[j, i] = dv
    return constant_family(m, 3, name=f"tree{tuple(float(x) for x in delta)}")


# --------------------------------------------------------------------------
# combinators


def _revalidated(name, d, k, evaluator, candidates, periodic, derivative, box):
    probe = HamiltonianFamily(name, d, k, evaluator, (), periodic, derivative, box, verify=True)
    kept = [c for c in candidates
            if check_symmetry(probe, c, SYMMETRY_SAMPLES, np.random.default_rng(0)).passed]
    return HamiltonianFamily(name, d, k, evaluator, kept, periodic, derivative, box, verify=False)


def deform(base: HamiltonianFamily, perturbation: HamiltonianFamily, lam: float) -> HamiltonianFamily:
    """The family ``H + lam * H1``.

    Symmetry declarations of `base` are re-verified and only the ones that
    still hold are kept.
    """
    if (base.d, base.k) != (perturbation.d, perturbation.k):
        raise ModelError(
            f"dimension mismatch: base (d={base.d}, k={base.k}) vs "
            f"perturbation (d={perturbation.d}, k={perturbation.k})"
        )
    lam = float(lam)

    def evaluator(x):
        return base(x) + lam * perturbation(x)

    deriv = None
    if base.has_exact_derivative and perturbation.has_exact_derivative:
        def deriv(x, axis):
            return base.exact_derivative(x, axis) + lam * perturbation.exact_derivative(x, axis)

    return _revalidated(f"{base.name}+{lam:g}*{perturbation.name}", base.d, base.k, evaluator,
                        base.symmetries, base.periodic, deriv, base.box)


def negate(family: HamiltonianFamily) -> HamiltonianFamily:
    """The family ``-H``; symmetries are re-verified."""
    deriv = None
    if family.has_exact_derivative:
        def deriv(x, axis):
            return -family.exact_derivative(x, axis)

    return _revalidated(f"-{family.name}", family.d, family.k, lambda x: -family(x),
                        family.symmetries, family.periodic, deriv, family.box)


def restrict(family: HamiltonianFamily, origin, directions, box: float = 1.0,
             name: Optional[str] = None) -> HamiltonianFamily:
    """Chart family ``x -> H(origin + sum_i x_i directions[i])``.

    Used for transverse disks through a degenerate curve and for 2d slices
    of the spin models.
    """
    o = np.asarray(origin, dtype=float)
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    m = dirs.shape[0]

    def evaluator(x):
        return family(o + x @ dirs)

    deriv = None
    if family.has_exact_derivative:
        def deriv(x, axis):
            p = o + x @ dirs
            out = np.zeros(p.shape[:-1] + (family.k, family.k), dtype=complex)
            for a in range(family.d):
                if dirs[axis, a] != 0.0:
                    out += dirs[axis, a] * family.exact_derivative(p, a)
            return out

    return HamiltonianFamily(name or f"{family.name}|restricted", m, family.k, evaluator,
                             periodic=False, derivative=deriv,
                             box=(-box * np.ones(m), box * np.ones(m)))


ZOO = {
    "gyroid": make_gyroid,
    "honeycomb": make_honeycomb,
    "diamond": make_diamond,
}


def resolve_model(selector: str, spin=None) -> HamiltonianFamily:
    """Map a command-line model selector to a family.

    Accepted forms: ``gyroid``, ``honeycomb``, ``diamond``, ``petal:N``,
    ``digraph:N``, ``spin`` (with `spin`), or a path to a JSON model file.
    """
    sel = selector.strip()
    low = sel.lower()
    if low in ZOO:
        return ZOO[low]()
    if low == "spin":
        return make_spin_family(spin if spin is not None else Fraction(1, 2))
    for prefix, maker in (("petal:", make_petal), ("digraph:", make_digraph)):
        if low.startswith(prefix):
            try:
                n = int(low[len(prefix):])
            except ValueError:
                raise ModelError(f"bad model selector {selector!r}") from None
            return maker(n)
    path = Path(sel)
    if path.exists():
        return load_model(path)
    raise ModelError(f"unknown model {selector!r} (not a zoo name and no such file)")
