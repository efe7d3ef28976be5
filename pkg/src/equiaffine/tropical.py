"""Tropical distance series F(p) = min over nonzero lattice covectors of
c_lam + lam . p, evaluated by certified enumeration.

For an interior point at distance d from the boundary every covector
satisfies c_lam + lam . p >= |lam| d, so once a candidate value V is known
only covectors with |lam| <= V / d can do better.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _parallel, kernels
from .errors import DegenerateBasis, EquidistError, NotAdmissible, RegionTooLarge
from .geometry import ConvexDomain
from .lattice import Lattice, LatticeVector

SAMPLE_CHUNK = 8192


@dataclass(frozen=True, eq=False)
class TropicalValue:
    value: float
    argmin: LatticeVector
    certified_radius: float


def _raise_for(flag: int):
    if flag == kernels.NOT_ADMISSIBLE:
        raise NotAdmissible("no lattice covector with finite coefficient found within the search cap")
    if flag == kernels.REGION_TOO_LARGE:
        raise RegionTooLarge("certified search region too large")
    if flag == kernels.DEGENERATE:
        raise DegenerateBasis("degenerate lattice basis")


def eval(domain: ConvexDomain, lat: Lattice, p) -> TropicalValue:  # noqa: A001
    p = np.asarray(p, dtype=float).reshape(2)
    d = domain.boundary_distance(p)
    red, U, flags = kernels.reduce_bases(lat.basis[None])
    _raise_for(int(flags[0]))
    kd = domain.kernel()
    vals, coeffs, radii, flags = kernels.tropical_min(kd.kind, kd.verts, kd.rays, kd.center, kd.smat,
                                                      p, d, red, U)
    _raise_for(int(flags[0]))
    m, n = int(coeffs[0, 0]), int(coeffs[0, 1])
    return TropicalValue(float(vals[0]), lat.vector(m, n), float(radii[0]))


def eval_batch(domain: ConvexDomain, lat: Lattice, points) -> list:
    """Elementwise ``eval``; failing points yield their exception instance."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    red, U, flags = kernels.reduce_bases(lat.basis[None])
    _raise_for(int(flags[0]))
    kd = domain.kernel()
    out = []
    for p in points:
        try:
            d = domain.boundary_distance(p)
            vals, coeffs, radii, fl = kernels.tropical_min(kd.kind, kd.verts, kd.rays, kd.center,
                                                           kd.smat, p, d, red, U)
            _raise_for(int(fl[0]))
            out.append(TropicalValue(float(vals[0]), lat.vector(int(coeffs[0, 0]), int(coeffs[0, 1])),
                                     float(radii[0])))
        except EquidistError as exc:
            out.append(exc)
    return out


def values_over_lattices(domain: ConvexDomain, p, bases, workers=None):
    """F at one point for every lattice in ``bases`` (n, 2, 2).

    Returns (values, flags); flagged entries hold NaN. Output does not depend
    on ``workers``.
    """
    p = np.asarray(p, dtype=float).reshape(2)
    d = domain.boundary_distance(p)
    kd = domain.kernel()
    bases = np.ascontiguousarray(bases, dtype=float)

    def run(span):
        lo, hi = span
        red, U, rflags = kernels.reduce_bases(bases[lo:hi])
        vals, _, _, flags = kernels.tropical_min(kd.kind, kd.verts, kd.rays, kd.center, kd.smat,
                                                 p, d, red, U)
        flags = np.where(rflags != kernels.OK, rflags, flags)
        return vals, flags

    parts = _parallel.ordered_map(run, _parallel.chunks(len(bases), SAMPLE_CHUNK), workers)
    if not parts:
        return np.zeros(0), np.zeros(0, dtype=np.int64)
    vals = np.concatenate([a for a, _ in parts])
    flags = np.concatenate([b for _, b in parts])
    return vals, flags
