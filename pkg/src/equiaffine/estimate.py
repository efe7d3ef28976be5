"""Equi-affine distance: Hölder averages of the tropical distance series over
the moduli space of unit-covolume lattices.

By default the average is the normalised Hölder mean
``(E[F^h])^(1/h)``. ``literal=True`` instead applies the constant 6/pi^2
outside the power against the raw measure of mass pi^2/6; the two agree
for h = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _parallel, kernels, moduli
from .errors import EmptyInput, PointOutside, TooManyFlagged, UnboundedDomain
from .geometry import ConvexDomain
from .tropical import values_over_lattices

FLAG_LIMIT = 1e-3
RAW_MASS = math.pi**2 / 6
POINT_CHUNK = 64


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n: int
    method: str
    flagged: int = 0

    @property
    def reliable(self) -> bool:
        return self.flagged <= FLAG_LIMIT * max(self.n, 1)

    def to_json(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "n": self.n,
                "method": self.method, "flagged": self.flagged}


def holder_mean(values, weights=None, h: float = 1.0) -> float:
    """``(sum w v^h)^(1/h)`` with weights normalised to one."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise EmptyInput("no values to average")
    if h <= 0:
        raise ValueError("h must be positive")
    w = np.full(v.size, 1.0 / v.size) if weights is None else np.asarray(weights, dtype=float)
    return float(np.dot(w, v**h) ** (1.0 / h))


def _finish(mean_pow, se_pow, h: float, literal: bool):
    """Map the mean of F^h and its standard error to the estimate scale."""
    scale = (6 / math.pi**2) * RAW_MASS ** (1.0 / h) if literal else 1.0
    mean_pow = np.asarray(mean_pow, dtype=float)
    value = scale * mean_pow ** (1.0 / h)
    with np.errstate(divide="ignore", invalid="ignore"):
        deriv = np.where(mean_pow > 0, scale / h * mean_pow ** (1.0 / h - 1.0), 0.0)
    err = deriv * se_pow
    if value.ndim == 0:
        return float(value), float(err)
    return value, err


def estimate_from_values(values, h: float = 1.0, literal: bool = False, strict: bool = True,
                         flags=None) -> Estimate:
    """MC estimate from per-lattice values of F; NaN or flagged entries are dropped."""
    values = np.asarray(values, dtype=float)
    bad = ~np.isfinite(values)
    if flags is not None:
        bad |= np.asarray(flags) != kernels.OK
    n = values.size
    nflag = int(bad.sum())
    if strict and nflag > FLAG_LIMIT * n:
        raise TooManyFlagged(f"{nflag} of {n} lattices flagged as not admissible")
    good = values[~bad] ** h
    if good.size == 0:
        raise EmptyInput("no admissible samples")
    mean = float(good.mean())
    se = float(good.std(ddof=1) / math.sqrt(good.size)) if good.size > 1 else math.inf
    value, stderr = _finish(mean, se, h, literal)
    return Estimate(value, stderr, n, "MC", nflag)


def mc_bases(n: int, seed: int, transform=None) -> np.ndarray:
    """Shared lattice sample set; ``transform`` A maps each lattice to A^T Lambda."""
    b = moduli.sample_bases(n, seed)
    if transform is not None:
        b = b @ np.asarray(transform, dtype=float)
    return b


def estimate_mc(domain: ConvexDomain, p, h: float = 1.0, n: int = 100_000, seed: int = 0,
                literal: bool = False, workers=None, transform=None, bases=None,
                strict: bool = True) -> Estimate:
    if h <= 0:
        raise ValueError("h must be positive")
    if bases is None:
        bases = mc_bases(n, seed, transform)
    vals, flags = values_over_lattices(domain, p, bases, workers)
    return estimate_from_values(vals, h, literal, strict, flags)


def estimate_quadrature(domain: ConvexDomain, p, h: float = 1.0, y_max: float = 100.0,
                        nx: int = 64, ny: int = 64, ntheta: int = 64, literal: bool = False,
                        workers=None) -> Estimate:
    """Deterministic estimate; the cusp beyond ``y_max`` is bounded, not sampled.

    ``stderr`` holds the worst-case effect of the omitted cusp.
    """
    if not domain.bounded:
        raise UnboundedDomain("quadrature integrator needs a bounded domain")
    if h <= 0:
        raise ValueError("h must be positive")
    grid = moduli.quadrature_grid(y_max, nx, ny, ntheta)
    vals, flags = values_over_lattices(domain, p, grid.bases(), workers)
    S = float(np.dot(grid.weight, vals**h))
    T = moduli.tail_bound(domain.circumradius_about(p), h, y_max)
    lo, _ = _finish(S, 0.0, h, literal)
    hi, _ = _finish(S + T, 0.0, h, literal)
    return Estimate(lo, hi - lo, len(grid), "Quadrature", int((flags != kernels.OK).sum()))


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Values on a regular grid; ``values[j, i]`` sits at ``(xs[i], ys[j])``.

    NaN marks exterior nodes. ``blocks`` optionally holds the same field
    computed on disjoint sample blocks (for noise estimates).
    """

    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    h: float = 1.0
    seed: int = 0
    n: int = 0
    stderr: np.ndarray | None = None
    blocks: tuple = dc_field(default=())

    @property
    def bbox(self):
        return (float(self.xs[0]), float(self.xs[-1]), float(self.ys[0]), float(self.ys[-1]))

    @property
    def nx(self) -> int:
        return len(self.xs)

    @property
    def ny(self) -> int:
        return len(self.ys)


def grid_points(bbox, nx: int, ny: int):
    xmin, xmax, ymin, ymax = (float(b) for b in bbox)
    return np.linspace(xmin, xmax, nx), np.linspace(ymin, ymax, ny)


def field_from_bases(domain: ConvexDomain, bases, h: float, bbox, nx: int, ny: int,
                     nblocks: int = 1, workers=None, literal: bool = False, seed: int = 0) -> ScalarField:
    if nx < 8 or ny < 8:
        raise ValueError("field resolution must be at least 8x8")
    xs, ys = grid_points(bbox, nx, ny)
    X, Y = np.meshgrid(xs, ys)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    sd = domain.signed_distance(pts)
    inside = sd >= -1e-9
    ip = np.ascontiguousarray(pts[inside])
    dists = np.maximum(sd[inside], 0.0)
    kd = domain.kernel()
    bases = np.ascontiguousarray(bases, dtype=float)
    red, _, rflags = kernels.reduce_bases(bases)
    if np.any(rflags != kernels.OK):
        raise ValueError("degenerate lattice in sample set")

    def run(span):
        lo, hi = span
        return kernels.power_sums(kd.kind, kd.verts, kd.rays, kd.center, kd.smat,
                                  ip[lo:hi], dists[lo:hi], red, float(h), int(nblocks))

    parts = _parallel.ordered_map(run, _parallel.chunks(len(ip), POINT_CHUNK), workers)
    if parts:
        sums, sumsq, counts, flagged = (np.concatenate([p[k] for p in parts]) for k in range(4))
    else:
        sums = sumsq = np.zeros((0, nblocks))
        counts = np.zeros((0, nblocks), dtype=np.int64)
        flagged = np.zeros(0, dtype=np.int64)
    n = len(bases)
    if np.any(flagged > FLAG_LIMIT * n):
        raise TooManyFlagged(f"up to {int(flagged.max())} of {n} lattices flagged at a grid node")

    def assemble(s, sq, c):
        cnt = np.maximum(c, 1)
        mean = s / cnt
        var = np.maximum(sq / cnt - mean**2, 0.0) * cnt / np.maximum(cnt - 1, 1)
        se = np.sqrt(var / cnt)
        val, err = _finish(mean, se, h, literal)
        full_v = np.full(len(pts), np.nan)
        full_e = np.full(len(pts), np.nan)
        full_v[inside] = val
        full_e[inside] = err
        return full_v.reshape(ny, nx), full_e.reshape(ny, nx)

    values, stderr = assemble(sums.sum(axis=1), sumsq.sum(axis=1), counts.sum(axis=1))
    blocks = ()
    if nblocks > 1:
        blocks = tuple(assemble(sums[:, b], sumsq[:, b], counts[:, b])[0] for b in range(nblocks))
    return ScalarField(xs, ys, values, float(h), int(seed), n, stderr, blocks)


def field(domain: ConvexDomain, h: float = 1.0, bbox=None, nx: int = 101, ny: int = 101,
          n: int = 10_000, seed: int = 0, nblocks: int = 1, workers=None,
          literal: bool = False) -> ScalarField:
    """Estimate on a grid with one shared lattice sample set for every node."""
    if bbox is None:
        bbox = default_bbox(domain)
    return field_from_bases(domain, mc_bases(n, seed), h, bbox, nx, ny, nblocks, workers,
                            literal, seed)


def default_bbox(domain: ConvexDomain):
    if not domain.bounded:
        raise UnboundedDomain("an explicit bounding box is required for unbounded domains")
    e = np.eye(2)
    return (-domain.support(-e[0]), domain.support(e[0]), -domain.support(-e[1]), domain.support(e[1]))


def check_interior(domain: ConvexDomain, p):
    if domain.boundary_distance(p) <= 0:
        raise PointOutside("point lies on the boundary")
