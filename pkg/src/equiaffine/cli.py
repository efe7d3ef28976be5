"""Command line entry point ``equidist``.

Exit codes: 0 success, 1 computational error, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import experiments, io, levels, moduli, tropical
from .errors import EquidistError, InvalidDomain, InvalidGrid, PointOutside
from .estimate import check_interior, estimate_mc, estimate_quadrature, field

QUICK_SAMPLES = 10_000
QUICK_GRID = (101, 101)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text, k=None, what="value"):
    try:
        vals = [float(s) for s in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse {what} {text!r}") from None
    if k is not None and len(vals) != k:
        raise UsageError(f"{what} needs {k} comma separated numbers")
    if not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{what} must be finite")
    return vals


def _grid(text):
    try:
        nx, ny = (int(s) for s in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"grid must look like NXxNY, got {text!r}") from None
    if nx < 8 or ny < 8:
        raise UsageError("grid must be at least 8x8")
    return nx, ny


def _positive(x, name):
    if not x > 0:
        raise UsageError(f"{name} must be positive")
    return x


def _domain(spec):
    try:
        return io.load_domain(spec)
    except InvalidDomain as exc:
        raise UsageError(str(exc)) from None


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser():
    p = _Parser(prog="equidist", description="Equi-affine distance of convex planar domains.")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: EQUIDIST_THREADS or 1); never changes results")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", help="estimate the distance at one point")
    e.add_argument("--domain", required=True, help="preset name, JSON text or JSON file")
    e.add_argument("--point", required=True)
    e.add_argument("--h", type=float, default=1.0)
    e.add_argument("--samples", type=int, default=100_000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--integrator", choices=["mc", "quad"], default="mc")
    e.add_argument("--ymax", type=float, default=100.0)
    e.add_argument("--nodes", default="64,64,64", help="quadrature nodes nx,ny,ntheta")
    e.add_argument("--literal-def", action="store_true")
    e.add_argument("--quick", action="store_true")
    e.add_argument("--out")

    t = sub.add_parser("tropical", help="tropical distance series for one lattice")
    t.add_argument("--domain", required=True)
    t.add_argument("--moduli", required=True, help="x,y,theta")
    t.add_argument("--point", required=True)
    t.add_argument("--out")

    f = sub.add_parser("field", help="estimate on a grid and write CSV")
    f.add_argument("--domain", required=True)
    f.add_argument("--h", type=float, default=1.0)
    f.add_argument("--bbox", help="xmin,xmax,ymin,ymax (default: domain bounds)")
    f.add_argument("--grid", default="101x101")
    f.add_argument("--samples", type=int, default=10_000)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--literal-def", action="store_true")
    f.add_argument("--quick", action="store_true")
    f.add_argument("--out")

    lv = sub.add_parser("levels", help="extract level curves from a field CSV")
    lv.add_argument("--field", required=True)
    lv.add_argument("--levels", required=True)
    lv.add_argument("--out")
    lv.add_argument("--svg")

    x = sub.add_parser("experiment", help="run a scripted study")
    x.add_argument("name", choices=sorted(experiments.EXPERIMENTS))
    x.add_argument("--samples", type=int)
    x.add_argument("--seed", type=int)
    x.add_argument("--h", type=float, default=1.0)
    x.add_argument("--grid")
    x.add_argument("--levels", help="levels for 'hyperbola', level count for 'ellipse-probe'")
    x.add_argument("--domain")
    x.add_argument("--bbox")
    x.add_argument("--cases", type=int, default=100)
    x.add_argument("--quick", action="store_true")
    x.add_argument("--out")
    return p


def cmd_eval(a, workers):
    dom = _domain(a.domain)
    p = _floats(a.point, 2, "point")
    _positive(a.h, "h")
    n = QUICK_SAMPLES if a.quick else _positive(a.samples, "samples")
    try:
        check_interior(dom, p)
    except PointOutside as exc:
        raise UsageError(str(exc)) from None
    if a.integrator == "quad":
        nx, ny, nt = (int(v) for v in _floats(a.nodes, 3, "nodes"))
        est = estimate_quadrature(dom, p, a.h, a.ymax, nx, ny, nt, a.literal_def, workers)
    else:
        est = estimate_mc(dom, p, a.h, n, a.seed, a.literal_def, workers)
    doc = {"schema": io.SCHEMA, **est.to_json(), "h": a.h, "seed": a.seed,
           "literal_def": a.literal_def}
    _emit(io.dumps(doc), a.out)


def cmd_tropical(a, workers):
    dom = _domain(a.domain)
    x, y, th = _floats(a.moduli, 3, "moduli")
    try:
        mp = moduli.ModuliPoint(x, y, th)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    p = _floats(a.point, 2, "point")
    lat = moduli.lattice_at(mp)
    tv = tropical.eval(dom, lat, p)
    doc = {"schema": io.SCHEMA, "value": tv.value,
           "argmin": [int(c) for c in tv.argmin.coeffs],
           "vector": [float(v) for v in tv.argmin.ambient],
           "certified_radius": tv.certified_radius}
    _emit(io.dumps(doc), a.out)


def cmd_field(a, workers):
    dom = _domain(a.domain)
    _positive(a.h, "h")
    if a.quick:
        n, (nx, ny) = QUICK_SAMPLES, QUICK_GRID
    else:
        n, (nx, ny) = _positive(a.samples, "samples"), _grid(a.grid)
    bbox = _floats(a.bbox, 4, "bbox") if a.bbox else None
    if bbox is None and not dom.bounded:
        raise UsageError("--bbox is required for unbounded domains")
    if bbox is not None and not (bbox[0] < bbox[1] and bbox[2] < bbox[3]):
        raise UsageError("bbox must satisfy xmin < xmax and ymin < ymax")
    f = field(dom, a.h, bbox, nx, ny, n, a.seed, 1, workers, a.literal_def)
    _emit(io.field_to_csv(f), a.out)


def cmd_levels(a, workers):
    try:
        f = io.read_field(a.field)
    except OSError as exc:
        raise UsageError(f"cannot read field: {exc}") from None
    except InvalidGrid as exc:
        raise UsageError(str(exc)) from None
    ts = _floats(a.levels, None, "levels")
    if any(t <= 0 for t in ts):
        raise UsageError("levels must be positive")
    entries = []
    for t in ts:
        cs = levels.marching_squares(f, t)
        closed = [c for c in cs if c.closed]
        met = None
        if closed:
            main = max(closed, key=lambda c: levels.contour_area_centroid(c)[0])
            met = levels.metrics(main)
        entries.append((t, cs, met))
    _emit(io.dumps(io.levels_document(entries)), a.out)
    if a.svg:
        with open(a.svg, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(io.levels_svg(entries, f.bbox))


EXPERIMENT_QUICK = {
    "disk-check": {"n": QUICK_SAMPLES},
    "quadrant-check": {"n": QUICK_SAMPLES},
    "hyperbola": {"n": 1000, "grid": (61, 61)},
    "ellipse-probe": {"n": 1000, "grid": (61, 61)},
    "invariance": {"n": 1000, "n_cases": 20},
}


def cmd_experiment(a, workers):
    name = a.name
    kw = {"workers": workers}
    if a.quick:
        kw.update(EXPERIMENT_QUICK[name])
    if a.samples is not None:
        kw["n"] = _positive(a.samples, "samples")
    if a.seed is not None:
        kw["seed"] = a.seed
    if name not in ("disk-check",):
        kw["h"] = _positive(a.h, "h")
    if a.grid and name in ("hyperbola", "ellipse-probe"):
        kw["grid"] = _grid(a.grid)
    if a.domain and name in ("hyperbola", "ellipse-probe"):
        kw["domain"] = _domain(a.domain)
    if a.bbox and name == "hyperbola":
        kw["bbox"] = tuple(_floats(a.bbox, 4, "bbox"))
    if a.levels and name == "hyperbola":
        kw["levels_"] = _floats(a.levels, None, "levels")
    if a.levels and name == "ellipse-probe":
        kw["n_levels"] = int(_floats(a.levels, 1, "levels")[0])
    if name == "invariance" and not a.quick:
        kw["n_cases"] = a.cases
    try:
        rep = experiments.EXPERIMENTS[name](**kw)
    except ValueError as exc:
        if isinstance(exc, EquidistError):
            raise
        raise UsageError(str(exc)) from None
    _emit(io.dumps(rep.to_json()), a.out)


COMMANDS = {"eval": cmd_eval, "tropical": cmd_tropical, "field": cmd_field,
            "levels": cmd_levels, "experiment": cmd_experiment}


def main(argv=None) -> int:
    try:
        a = build_parser().parse_args(argv)
        if a.threads is not None and a.threads < 1:
            raise UsageError("--threads must be at least 1")
        COMMANDS[a.command](a, a.threads)
    except UsageError as exc:
        print(f"equidist: error: {exc}", file=sys.stderr)
        return 2
    except EquidistError as exc:
        print(f"equidist: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
