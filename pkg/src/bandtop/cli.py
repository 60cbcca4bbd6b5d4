"""Command-line front end.

Exit codes: 0 all checks pass, 1 a constraint clause fails, 2 bad model or
input, 3 numerical failure (non-convergence, unresolvable degeneracy).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (Ball, check_global, slice_profile, track_default_deformation,
                       track_deformation)
from .degeneracy import find_degeneracies
from .errors import BandtopError, ModelError, NumericalError
from .localmodel import classify_point
from .models import gyroid_tree_perturbation, load_model, resolve_model, torus_distance
from .plotting import chi_svg
from .report import (AXIS_NAMES, analyze, audit, dumps, local_model_dict, model_dict, point_dict)
from .topology import berry_phase, circle_loop, polygon_loop

EXIT_OK, EXIT_CONSTRAINT, EXIT_MODEL, EXIT_NUMERICAL = 0, 1, 2, 3

_LITERAL = re.compile(r"^([+-]?)(\d*\.?\d*(?:[eE][+-]?\d+)?)\*?(pi)?(?:/(\d+(?:\.\d*)?))?$")


def parse_scalar(text: str) -> float:
    """Parse ``1.5``, ``pi``, ``-pi/2``, ``2pi/3`` or ``2*pi/3``."""
    t = text.strip().lower().replace(" ", "")
    m = _LITERAL.match(t)
    if not m or (not m.group(2) and not m.group(3)):
        raise ModelError(f"cannot parse momentum literal {text!r}")
    sign, num, pi, den = m.groups()
    value = float(num) if num else 1.0
    if pi:
        value *= np.pi
    if den:
        value /= float(den)
    return -value if sign == "-" else value


def parse_momentum(text: str, d: int | None = None) -> np.ndarray:
    """Comma-separated momentum literal, e.g. ``2pi/3,4pi/3``."""
    vals = np.array([parse_scalar(p) for p in text.split(",")])
    if d is not None and len(vals) != d:
        raise ModelError(f"expected {d} coordinates, got {len(vals)} in {text!r}")
    return vals


def _axis(text: str) -> int:
    t = text.strip().lower()
    if t in AXIS_NAMES:
        return AXIS_NAMES.index(t)
    if t in ("0", "1", "2"):
        return int(t)
    raise ModelError(f"axis must be x, y, z or 0, 1, 2, got {text!r}")


def _family(args):
    spin = None if args.s is None else Fraction(args.s)
    return resolve_model(args.model, spin=spin)


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# --------------------------------------------------------------------------
# commands


def cmd_analyze(args) -> int:
    fam = _family(args)
    rep = analyze(fam, grid=args.grid, threshold=args.threshold, sphere_r=args.sphere_r, tol=args.tol,
                  seed=args.seed, chern_grid=args.chern_grid)
    if args.format == "csv":
        rows = [(i, *p["location"], "".join(map(str, p["pattern"])), p["locus_dim"])
                for i, p in enumerate(rep["degeneracies"]["points"])]
        _emit(args, _csv(rows, ["point"] + [f"k{a + 1}" for a in range(fam.d)] + ["pattern", "locus_dim"]))
    else:
        _emit(args, dumps(rep) + "\n")
    if args.plot and rep["slices"]:
        from .analysis import SliceProfile
        first = next(iter(rep["slices"].values()))
        Path(args.plot).write_text(chi_svg(SliceProfile.from_dict(first)))
    return EXIT_OK if rep["status"]["passed"] else EXIT_CONSTRAINT


def cmd_slice(args) -> int:
    fam = _family(args)
    ax = _axis(args.axis)
    scan = find_degeneracies(fam, N=args.grid, threshold=args.threshold, tol=args.tol)
    prof = slice_profile(fam, ax, scan, N=args.chern_grid, gauge_seed=args.seed)
    rep = check_global(prof)
    if args.format == "csv":
        rows = []
        for j, ((a, b), c) in enumerate(zip(prof.intervals, prof.chi)):
            rows.append((f"t{j + 1}", f"{a:.12g}", f"{b:.12g}", *c))
        _emit(args, _csv(rows, ["t_interval", "t_lo", "t_hi"] + [f"chi_{i + 1}" for i in range(fam.k)]))
    else:
        _emit(args, dumps(dict(model=model_dict(fam), profile=prof.to_dict(),
                               constraints=rep.to_dict())) + "\n")
    if args.plot:
        Path(args.plot).write_text(chi_svg(prof))
    return EXIT_OK if rep.passed else EXIT_CONSTRAINT


def cmd_local(args) -> int:
    fam = _family(args)
    scan = find_degeneracies(fam, N=args.grid, threshold=args.threshold, tol=args.tol)
    points = scan.points
    if args.point:
        target = parse_momentum(args.point, fam.d)
        dist = [torus_distance(p.location, target) if fam.periodic else float(np.linalg.norm(p.location - target))
                for p in points]
        if not dist or min(dist) > 1e-3:
            raise ModelError(f"no isolated degeneracy within 1e-3 of {args.point}")
        points = [points[int(np.argmin(dist))]]
    seed = 0 if args.seed is None else args.seed
    models = [classify_point(fam, p, r=args.sphere_r, N=args.chern_grid, others=scan.points, seed=seed)
              for p in points]
    out = [dict(point=point_dict(m.point), **local_model_dict(m)) for m in models]
    if args.format == "csv":
        rows = [(i, *m.point.location, "".join(map(str, m.point.pattern)),
                 " ".join(b.spin_label for b in m.blocks),
                 " ".join(str(c) for c in m.chiralities),
                 "" if m.charges is None else " ".join(map(str, m.charges)))
                for i, m in enumerate(models)]
        _emit(args, _csv(rows, ["point"] + [f"k{a + 1}" for a in range(fam.d)]
                         + ["pattern", "spins", "chiralities", "charges"]))
    else:
        _emit(args, dumps(dict(model=model_dict(fam), local_models=out)) + "\n")
    return EXIT_OK


def cmd_berry(args) -> int:
    fam = _family(args)
    if args.loop == "circle":
        if args.center is None or args.r is None:
            raise ModelError("a circle loop needs --center and --r")
        center = parse_momentum(args.center, fam.d)
        plane = tuple(int(x) for x in args.plane.split(","))
        loop = circle_loop(center, args.r, args.band, plane=plane, n=args.points)
        desc = dict(kind="circle", center=center.tolist(), radius=args.r, plane=list(plane))
    else:
        if not args.vertices:
            raise ModelError("a polygon loop needs --vertices 'k1,k2;k1,k2;...'")
        verts = np.array([parse_momentum(v, fam.d) for v in args.vertices.split(";")])
        loop = polygon_loop(verts, args.band, n=max(args.points, 8 * len(verts)))
        desc = dict(kind="polygon", vertices=verts.tolist())
    res = berry_phase(fam, loop, gauge_seed=args.seed)
    out = dict(model=model_dict(fam), loop=desc, band=args.band, phase=res.phase,
               abs_phase=abs(res.phase), unwound=res.unwound, points=res.points, note=res.note)
    if args.format == "csv":
        _emit(args, _csv([(args.band, res.phase, res.unwound, res.points)],
                         ["band", "phase", "unwound", "points"]))
    else:
        _emit(args, dumps(out) + "\n")
    return EXIT_OK


def _lambdas(args):
    if args.lambdas:
        return [parse_scalar(x) for x in args.lambdas.split(",")]
    lam = args.lam
    return [0.0, lam / 2, lam]


def cmd_deform(args) -> int:
    fam = _family(args)
    lams = _lambdas(args)
    balls = None
    if args.ball:
        balls = []
        for item in args.ball:
            c, _, r = item.partition(":")
            balls.append(Ball(tuple(parse_momentum(c, fam.d)), float(r or 0.3)))
    if args.perturbation:
        pert = load_model(args.perturbation)
        trace = track_deformation(fam, pert, lams, balls=balls)
    elif args.delta:
        pert = gyroid_tree_perturbation(tuple(parse_scalar(x) for x in args.delta.split(",")))
        trace = track_deformation(fam, pert, lams, balls=balls)
    else:
        if fam.k != 4 or fam.d != 3:
            raise ModelError("the default perturbation is defined for the Gyroid only; pass --perturbation FILE")
        trace = track_default_deformation(fam, lams, balls=balls)
    out = dict(model=model_dict(fam), perturbation=trace.perturbation, lambdas=trace.lambdas,
               trs_preserved=trace.trs_preserved, used_fallback=trace.used_fallback, notes=trace.notes,
               balls=[dict(center=list(b.center), r=b.r) for b in trace.balls],
               steps=[dict(lam=st.lam, trs=st.trs,
                           balls=[dict(points=[point_dict(p) for p in pts], charges=list(ch))
                                  for pts, ch in zip(st.ball_points, st.ball_charges)],
                           point_charges=[list(c) for c in st.point_charges])
                      for st in trace.steps],
               conserved=trace.conserved)
    if args.format == "csv":
        rows = []
        for st in trace.steps:
            for b, (pts, ch) in enumerate(zip(st.ball_points, st.ball_charges)):
                rows.append((st.lam, b, len(pts), " ".join(map(str, ch))))
        _emit(args, _csv(rows, ["lambda", "ball", "points", "charges"]))
    else:
        _emit(args, dumps(out) + "\n")
    return EXIT_OK if trace.conserved else EXIT_CONSTRAINT


def cmd_check(args) -> int:
    data = json.loads(Path(args.report).read_text())
    res = audit(data)
    _emit(args, dumps(res) + "\n")
    return EXIT_OK if res["passed"] else EXIT_CONSTRAINT


# --------------------------------------------------------------------------
# parser


def _common(p, model=True):
    if model:
        p.add_argument("model", help="gyroid | honeycomb | diamond | petal:N | digraph:N | spin | model.json")
        p.add_argument("--s", help="spin for the 'spin' model, e.g. 1 or 3/2")
    p.add_argument("--grid", type=int, default=48, help="scan grid points per axis (default 48)")
    p.add_argument("--threshold", type=float, default=0.05, help="scan gap threshold (default 0.05)")
    p.add_argument("--chern-grid", type=int, default=32, help="plaquettes per slice/face side (default 32)")
    p.add_argument("--sphere-r", type=float, default=None, help="local-charge cube half-width")
    p.add_argument("--tol", type=float, default=1e-8, help="refinement gap tolerance (default 1e-8)")
    p.add_argument("--seed", type=int, default=None, help="seed for gauge scrambling and direction sampling")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--plot", help="write an SVG plot of chi_i to this file")
    p.add_argument("--out", help="write output to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bandtop", description="Band degeneracies and their topology.")
    ap.add_argument("--version", action="version", version=f"bandtop {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="full pipeline with constraint report")
    _common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("slice", help="step functions chi_i along one axis")
    _common(p)
    p.add_argument("--axis", default="z")
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("local", help="local models of degenerate points")
    _common(p)
    p.add_argument("--point", help="momentum literal of one point, e.g. 'pi/2,pi/2,pi/2'")
    p.set_defaults(func=cmd_local)

    p = sub.add_parser("berry", help="Berry phase along a loop")
    _common(p)
    p.add_argument("--loop", choices=("circle", "polygon"), default="circle")
    p.add_argument("--center")
    p.add_argument("--r", type=float)
    p.add_argument("--plane", default="0,1", help="coordinate plane of a circle (default 0,1)")
    p.add_argument("--vertices", help="polygon vertices 'k1,k2;k1,k2;...'")
    p.add_argument("--band", type=int, default=0)
    p.add_argument("--points", type=int, default=64, help="initial loop points")
    p.set_defaults(func=cmd_berry)

    p = sub.add_parser("deform", help="track degeneracies and ball charges along a deformation")
    _common(p)
    p.add_argument("--lambda", dest="lam", type=float, default=0.01, help="final lambda (grid 0, L/2, L)")
    p.add_argument("--lambdas", help="explicit comma-separated lambda grid starting at 0")
    p.add_argument("--delta", help="tree-weight changes for the Gyroid, e.g. 0.3,-0.2,0.1")
    p.add_argument("--perturbation", help="perturbation as a model JSON file")
    p.add_argument("--ball", action="append", help="ball 'k1,k2,k3:r' (repeatable)")
    p.set_defaults(func=cmd_deform)

    p = sub.add_parser("check", help="re-audit the constraints stored in a report")
    p.add_argument("report")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ModelError, FileNotFoundError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"bandtop: input error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (NumericalError, BandtopError) as exc:
        print(f"bandtop: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
