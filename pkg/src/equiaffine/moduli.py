"""The space of unit-covolume lattices, SL2(Z)\\SL2(R).

A lattice is parametrised by a point ``x + iy`` of the modular fundamental
domain and a rotation angle ``theta`` in ``[0, pi)``. The invariant measure
is normalised to total mass one; in the coordinates ``t = arcsin x`` and
``u = sqrt(1 - x^2) / y`` it is uniform on ``[-pi/6, pi/6] x (0, 1] x [0, pi)``,
which gives both the exact sampler and the quadrature grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateBasis, InvalidGrid, UnboundedDomain
from .lattice import Lattice

CHUNK = 4096
T_HALF = math.pi / 6


@dataclass(frozen=True)
class ModuliPoint:
    x: float
    y: float
    theta: float

    def __post_init__(self):
        if abs(self.x) > 0.5 + 1e-12 or self.x * self.x + self.y * self.y < 1 - 1e-12:
            raise ValueError(f"({self.x}, {self.y}) is outside the fundamental domain")
        if not 0.0 <= self.theta < math.pi:
            raise ValueError("theta must lie in [0, pi)")


@dataclass(frozen=True)
class WeightedNode:
    point: ModuliPoint
    weight: float


def bases_at(x, y, theta) -> np.ndarray:
    """Stacked bases (n, 2, 2), rows b1 = R(theta)(1/sqrt y, 0) and
    b2 = R(theta)(x/sqrt y, sqrt y)."""
    x, y, theta = (np.asarray(a, dtype=float) for a in np.broadcast_arrays(x, y, theta))
    sy = np.sqrt(y)
    c, s = np.cos(theta), np.sin(theta)
    out = np.empty(x.shape + (2, 2))
    a1 = 1.0 / sy
    a2, a3 = x / sy, sy
    out[..., 0, 0] = c * a1
    out[..., 0, 1] = s * a1
    out[..., 1, 0] = c * a2 - s * a3
    out[..., 1, 1] = s * a2 + c * a3
    return out


def lattice_at(mp: ModuliPoint) -> Lattice:
    b = bases_at(mp.x, mp.y, mp.theta)
    return Lattice.unchecked(b[0], b[1])


def moduli_from_draws(t, u, theta):
    """Map (t, u, theta) in [-pi/6, pi/6] x (0, 1] x [0, pi) to (x, y, theta)."""
    x = np.sin(t)
    y = np.sqrt(1.0 - x * x) / u
    return x, y, theta


def _chunk_uniforms(seed: int, chunk: int) -> np.ndarray:
    # one Philox stream per chunk: key = seed, counter high word = chunk index
    bitgen = np.random.Philox(key=int(seed) & (2**64 - 1), counter=[0, 0, 0, int(chunk)])
    return np.random.Generator(bitgen).random((CHUNK, 3))


def sample_arrays(n: int, seed: int, start: int = 0):
    """Draws ``start .. start + n - 1`` of the stream for ``seed``.

    Draw ``i`` is a pure function of ``(seed, i)``.
    """
    if n <= 0:
        return np.zeros(0), np.zeros(0), np.zeros(0)
    first, last = start // CHUNK, (start + n - 1) // CHUNK
    r = np.concatenate([_chunk_uniforms(seed, c) for c in range(first, last + 1)])
    r = r[start - first * CHUNK: start - first * CHUNK + n]
    t = -T_HALF + 2 * T_HALF * r[:, 0]
    u = 1.0 - r[:, 1]
    theta = math.pi * r[:, 2]
    return moduli_from_draws(t, u, theta)


def sample(seed: int, index: int = 0) -> ModuliPoint:
    x, y, th = sample_arrays(1, seed, index)
    return ModuliPoint(float(x[0]), float(y[0]), float(th[0]))


def sample_bases(n: int, seed: int, start: int = 0) -> np.ndarray:
    return bases_at(*sample_arrays(n, seed, start))


def tail_fraction(y_max: float) -> float:
    """Normalised mass of the cusp region y > y_max (y_max >= 1)."""
    return 3.0 / (math.pi * y_max)


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    weight: np.ndarray
    y_max: float

    def __len__(self):
        return len(self.weight)

    def bases(self) -> np.ndarray:
        return bases_at(self.x, self.y, self.theta)

    def nodes(self):
        for x, y, th, w in zip(self.x, self.y, self.theta, self.weight):
            yield WeightedNode(ModuliPoint(float(x), float(y), float(th)), float(w))


def quadrature_grid(y_max: float, nx: int, ny: int, ntheta: int) -> QuadratureGrid:
    """Midpoint tensor grid over the fundamental domain truncated at ``y_max``.

    Columns are uniform in ``arcsin x``; heights are geometric in ``y`` with
    nodes at the centre of mass of each cell. Weights are exact cell masses
    and add up to ``1 - tail_fraction(y_max)``.
    """
    if not (y_max > 1 and min(nx, ny, ntheta) >= 2):
        raise InvalidGrid("need y_max > 1 and at least two nodes per axis")
    tedges = np.linspace(-T_HALF, T_HALF, nx + 1)
    tmid = 0.5 * (tedges[:-1] + tedges[1:])
    # exact column masses: (3/pi) [dt - d(sin t) / y_max]
    col_mass = 3.0 / math.pi * (np.diff(tedges) - np.diff(np.sin(tedges)) / y_max)
    umin = np.cos(tmid) / y_max
    k = np.arange(ny + 1) / ny
    uedges = umin[:, None] ** (1.0 - k[None, :])
    du = np.diff(uedges, axis=1)
    umid = 0.5 * (uedges[:, :-1] + uedges[:, 1:])
    w = du / du.sum(axis=1, keepdims=True) * col_mass[:, None]
    ys = np.cos(tmid)[:, None] / umid
    xs = np.broadcast_to(np.sin(tmid)[:, None], ys.shape)
    th = (np.arange(ntheta) + 0.5) * math.pi / ntheta
    X = np.repeat(xs.reshape(-1), ntheta)
    Y = np.repeat(ys.reshape(-1), ntheta)
    W = np.repeat(w.reshape(-1), ntheta) / ntheta
    T = np.tile(th, xs.size)
    return QuadratureGrid(X, Y, T, W, float(y_max))


def tail_bound(R_about_p: float, h: float, y_max: float) -> float:
    """Upper bound on the cusp contribution y > y_max to the mean of F^h when
    the domain has circumradius ``R_about_p`` about the evaluation point."""
    if math.isinf(R_about_p):
        raise UnboundedDomain("cusp tail bound needs a bounded domain")
    if not (h > 0 and y_max > 1):
        raise ValueError("need h > 0 and y_max > 1")
    a = h / 2 + 1
    return 3.0 / math.pi * R_about_p**h * y_max ** (-a) / a


def _xy_theta(c1, c2):
    n1 = c1 @ c1
    y = 1.0 / n1
    x = float(c1 @ c2) / n1
    theta = math.atan2(c1[1], c1[0]) % math.pi
    if theta >= math.pi - 1e-15:
        theta = 0.0
    return x, y, theta


def reduce_to_fundamental(basis) -> ModuliPoint:
    """Moduli coordinates of the lattice spanned by the rows of ``basis``."""
    basis = np.asarray(basis, dtype=float).reshape(2, 2)
    det = float(np.linalg.det(basis))
    if abs(abs(det) - 1.0) > 1e-9:
        raise DegenerateBasis(f"determinant {det!r} is not +-1")
    red, _, flags = kernels.reduce_bases(basis[None])
    if flags[0] != kernels.OK:
        raise DegenerateBasis("degenerate basis")
    c1, c2 = red[0, 0], red[0, 1]
    if c1[0] * c2[1] - c1[1] * c2[0] < 0:
        c2 = -c2
    # boundary points of the fundamental domain have several reduced bases;
    # pick the smallest angle, then x = +1/2 over x = -1/2
    best = None
    for a, b in ((c1, c2), (c2, -c1), (c1, c2 - c1), (c1, c2 + c1), (c2, -c1 + c2), (c2, -c1 - c2)):
        x, y, th = _xy_theta(a, b)
        if abs(x) > 0.5 + 1e-12 or x * x + y * y < 1 - 1e-9:
            continue
        key = (round(th, 12), -round(x, 12))
        if best is None or key < best[0]:
            best = (key, (x, y, th))
    x, y, th = best[1]
    x = min(max(x, -0.5), 0.5)
    y = max(y, math.sqrt(max(1.0 - x * x, 0.0)))
    return ModuliPoint(x, y, th)
