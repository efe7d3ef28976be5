"""Planar lattices of co-area one: reduction, shortest vectors, enumeration."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateBasis, RegionTooLarge

COAREA_TOL = 1e-9
MAX_BOX = 10**8


def tie_key(m: int, n: int):
    """Deterministic order for equally good lattice vectors."""
    positive = m > 0 or (m == 0 and n > 0)
    return (abs(n), abs(m), 0 if positive else 1, m, n)


@dataclass(frozen=True, eq=False)
class Lattice:
    """Lattice spanned by the rows ``b1``, ``b2``."""

    b1: np.ndarray
    b2: np.ndarray

    def __init__(self, b1, b2, *, check: bool = True):
        b1 = np.asarray(b1, dtype=float).reshape(2).copy()
        b2 = np.asarray(b2, dtype=float).reshape(2).copy()
        det = b1[0] * b2[1] - b1[1] * b2[0]
        if abs(det) < 1e-12:
            raise DegenerateBasis("basis vectors are linearly dependent")
        if check and abs(abs(det) - 1.0) > COAREA_TOL:
            raise DegenerateBasis(f"co-area {abs(det)!r} differs from one")
        b1.setflags(write=False)
        b2.setflags(write=False)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "b2", b2)

    @classmethod
    def unchecked(cls, b1, b2) -> "Lattice":
        """Lattice of arbitrary nonzero co-area (used by transformed tests)."""
        return cls(b1, b2, check=False)

    @classmethod
    def from_basis(cls, basis, check: bool = True) -> "Lattice":
        basis = np.asarray(basis, dtype=float).reshape(2, 2)
        return cls(basis[0], basis[1], check=check)

    @property
    def basis(self) -> np.ndarray:
        return np.stack([self.b1, self.b2])

    @property
    def covolume(self) -> float:
        return abs(float(np.linalg.det(self.basis)))

    def transform(self, A) -> "Lattice":
        """Image lattice ``A Lambda`` (vectors mapped by ``A``)."""
        A = np.asarray(A, dtype=float).reshape(2, 2)
        return Lattice.unchecked(A @ self.b1, A @ self.b2)

    def vector(self, m: int, n: int) -> "LatticeVector":
        return LatticeVector((int(m), int(n)), m * self.b1 + n * self.b2)


@dataclass(frozen=True, eq=False)
class LatticeVector:
    coeffs: tuple
    ambient: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.hypot(*self.ambient))


def reduce_with_transform(lat: Lattice):
    """Reduced basis (as a Lattice) and the integer matrix U with
    reduced rows = U @ input rows."""
    red, U, flags = kernels.reduce_bases(lat.basis[None, :, :])
    if flags[0] != kernels.OK:
        raise DegenerateBasis("basis determinant below 1e-12")
    return Lattice.unchecked(red[0, 0], red[0, 1]), U[0].astype(int)


def reduce(lat: Lattice) -> Lattice:
    return reduce_with_transform(lat)[0]


def shortest_vector(lat: Lattice) -> LatticeVector:
    red, U = reduce_with_transform(lat)
    best = None
    for a, b in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)):
        m = a * U[0, 0] + b * U[1, 0]
        n = a * U[0, 1] + b * U[1, 1]
        v = lat.vector(m, n)
        cand = (v.norm, tie_key(m, n))
        if best is None or cand[0] < best[0][0] * (1 - 1e-12) or (
            cand[0] <= best[0][0] * (1 + 1e-12) and cand[1] < best[0][1]
        ):
            best = (cand, v)
    return best[1]


def _ball_rows(red: Lattice, radius: float):
    """Reduced-basis coefficients of all nonzero vectors with norm <= radius."""
    c1, c2 = red.b1, red.b2
    n1sq, n2sq, g = c1 @ c1, c2 @ c2, c1 @ c2
    box = (2 * math.floor(radius * math.sqrt(n2sq)) + 1) * (2 * math.floor(radius * math.sqrt(n1sq)) + 1)
    if box > MAX_BOX:
        raise RegionTooLarge(f"coefficient box of {box} points exceeds {MAX_BOX}")
    rs = radius * (1 + 1e-12)
    nmax = math.floor(radius * math.sqrt(n1sq) + 1e-9)
    out = []
    for n in range(-nmax, nmax + 1):
        b = 2 * n * g
        c = n * n * n2sq - rs * rs
        disc = b * b - 4 * n1sq * c
        if disc < 0:
            continue
        sq = math.sqrt(disc)
        lo = math.ceil((-b - sq) / (2 * n1sq) - 1e-9)
        hi = math.floor((-b + sq) / (2 * n1sq) + 1e-9)
        for m in range(lo, hi + 1):
            if m or n:
                out.append((m, n))
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def enumerate_ball(lat: Lattice, radius: float) -> list:
    """All nonzero lattice vectors of norm at most ``radius``, sorted by norm
    then by input coefficients."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    red, U = reduce_with_transform(lat)
    rc = _ball_rows(red, radius)
    if len(rc) == 0:
        return []
    coeffs = rc @ U
    vecs = coeffs @ lat.basis
    norms = np.hypot(vecs[:, 0], vecs[:, 1])
    keep = norms <= radius * (1 + 1e-12)
    coeffs, vecs, norms = coeffs[keep], vecs[keep], norms[keep]
    order = np.lexsort((coeffs[:, 1], coeffs[:, 0], norms))
    return [LatticeVector((int(coeffs[i, 0]), int(coeffs[i, 1])), vecs[i]) for i in order]


def in_cone(v, cone, tol: float = 1e-12) -> bool:
    a, b = (np.asarray(x, dtype=float) for x in cone)
    if a[0] * b[1] - a[1] * b[0] < 0:
        a, b = b, a
    v = np.asarray(v, dtype=float)
    scale = tol * np.hypot(*v)
    return bool(a[0] * v[1] - a[1] * v[0] >= -scale * np.hypot(*a)
                and v[0] * b[1] - v[1] * b[0] >= -scale * np.hypot(*b))


def enumerate_cone(lat: Lattice, cone, radius: float) -> list:
    """``enumerate_ball`` restricted to the closed cone spanned by two rays."""
    a, b = (np.asarray(x, dtype=float) for x in cone)
    cr = a[0] * b[1] - a[1] * b[0]
    if abs(cr) <= 1e-12 * np.hypot(*a) * np.hypot(*b):
        raise ValueError("cone must be salient with non-parallel rays")
    return [v for v in enumerate_ball(lat, radius) if in_cone(v.ambient, (a, b))]
