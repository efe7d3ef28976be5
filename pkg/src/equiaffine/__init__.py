"""Equi-affine distance of convex planar domains.

The tropical distance series of a domain for a unimodular lattice,
averaged over the space of such lattices, gives an affine invariant
distance to the boundary. This package evaluates it, samples it on grids
and studies its level curves.
"""

from . import geometry, kernels, lattice, levels, moduli
from .errors import *  # noqa: F401,F403
from .estimate import (Estimate, ScalarField, estimate_mc, estimate_quadrature, field,
                       holder_mean)
from .geometry import Ellipse, Polygon, UnboundedPolygon, disk, quadrant, square
from .lattice import Lattice, LatticeVector, shortest_vector
from .moduli import ModuliPoint, quadrature_grid, tail_bound
from .tropical import TropicalValue

__version__ = "0.1.0"

__all__ = [
    "geometry", "kernels", "lattice", "levels", "moduli",
    "Estimate", "ScalarField", "estimate_mc", "estimate_quadrature", "field", "holder_mean",
    "Ellipse", "Polygon", "UnboundedPolygon", "disk", "quadrant", "square",
    "Lattice", "LatticeVector", "shortest_vector",
    "ModuliPoint", "quadrature_grid", "tail_bound", "TropicalValue",
]
