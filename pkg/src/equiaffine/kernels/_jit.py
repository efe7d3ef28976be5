"""numba kernels: lattice reduction and certified tropical minimisation.

A lattice enters as a 2x2 array whose rows are basis vectors. Every
routine reports integer coefficients relative to the *input* basis.
"""

import math

import numpy as np
from numba import njit

OK = 0
NOT_ADMISSIBLE = 1
REGION_TOO_LARGE = 2
DEGENERATE = 3

BOUNDARY_TOL = 1e-9
TIE_TOL = 1e-12
MAX_ROWS = 50_000_000
CONE_DOUBLINGS = 20

_SMALL = np.array([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1], [1, -1], [-1, 1]],
                  dtype=np.int64)


@njit(cache=True, nogil=True)
def gauss_reduce(b1x, b1y, b2x, b2y):
    """Lagrange-Gauss reduction; returns c1, c2, U, flag with [c1; c2] = U [b1; b2]."""
    u00, u01, u10, u11 = 1, 0, 0, 1
    n1 = b1x * b1x + b1y * b1y
    n2 = b2x * b2x + b2y * b2y
    det = abs(b1x * b2y - b1y * b2x)
    if det < 1e-12 or n1 == 0.0 or n2 == 0.0:
        return b1x, b1y, b2x, b2y, u00, u01, u10, u11, DEGENERATE
    for _ in range(1000):
        if n2 < n1:
            b1x, b1y, b2x, b2y = b2x, b2y, b1x, b1y
            n1, n2 = n2, n1
            u00, u01, u10, u11 = u10, u11, u00, u01
        mu = math.floor((b1x * b2x + b1y * b2y) / n1 + 0.5)
        if mu == 0.0:
            break
        k = np.int64(mu)
        b2x -= mu * b1x
        b2y -= mu * b1y
        u10 -= k * u00
        u11 -= k * u01
        n2 = b2x * b2x + b2y * b2y
        if n2 >= n1:
            break
    return b1x, b1y, b2x, b2y, u00, u01, u10, u11, OK


@njit(cache=True, nogil=True)
def reduce_bases(bases):
    n = bases.shape[0]
    red = np.empty((n, 2, 2))
    umat = np.empty((n, 2, 2), dtype=np.int64)
    flags = np.zeros(n, dtype=np.int64)
    for i in range(n):
        r = gauss_reduce(bases[i, 0, 0], bases[i, 0, 1], bases[i, 1, 0], bases[i, 1, 1])
        red[i, 0, 0] = r[0]
        red[i, 0, 1] = r[1]
        red[i, 1, 0] = r[2]
        red[i, 1, 1] = r[3]
        umat[i, 0, 0] = r[4]
        umat[i, 0, 1] = r[5]
        umat[i, 1, 0] = r[6]
        umat[i, 1, 1] = r[7]
        flags[i] = r[8]
    return red, umat, flags


@njit(cache=True, nogil=True, inline="always")
def tropical_term(kind, verts, rays, cx, cy, s00, s01, s11, px, py, lx, ly):
    """``c_lam + lam . p`` for one covector; ``inf`` outside the polar cone."""
    if kind == 1:
        q = lx * (s00 * lx + s01 * ly) + ly * (s01 * lx + s11 * ly)
        return lx * (px - cx) + ly * (py - cy) + math.sqrt(max(q, 0.0))
    for j in range(rays.shape[0]):
        rx = rays[j, 0]
        ry = rays[j, 1]
        dot = lx * rx + ly * ry
        if dot < -1e-12 * math.sqrt((lx * lx + ly * ly) * (rx * rx + ry * ry)):
            return math.inf
    best = -math.inf
    for j in range(verts.shape[0]):
        v = lx * (px - verts[j, 0]) + ly * (py - verts[j, 1])
        if v > best:
            best = v
    return best


@njit(cache=True, nogil=True, inline="always")
def key_less(m1, n1, m2, n2):
    """Tie order on input coefficients: small |n|, then small |m|, then the
    positive orientation, then plain lexicographic."""
    a1, a2 = abs(n1), abs(n2)
    if a1 != a2:
        return a1 < a2
    a1, a2 = abs(m1), abs(m2)
    if a1 != a2:
        return a1 < a2
    p1 = m1 > 0 or (m1 == 0 and n1 > 0)
    p2 = m2 > 0 or (m2 == 0 and n2 > 0)
    if p1 != p2:
        return p1
    if m1 != m2:
        return m1 < m2
    return n1 < n2


@njit(cache=True, nogil=True, inline="always")
def _better(f, mi, ni, best, bm, bn):
    if f == math.inf:
        return False
    if best == math.inf:
        return True
    tol = TIE_TOL * max(1.0, abs(best))
    if f < best - tol:
        return True
    if f <= best + tol:
        return key_less(mi, ni, bm, bn)
    return False


@njit(cache=True, nogil=True, inline="always")
def _quad_interval(a, b, c, lo, hi):
    """Intersect [lo, hi] with {m : a m^2 + b m + c <= 0}, a > 0."""
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return 1.0, 0.0
    sq = math.sqrt(disc)
    r1 = (-b - sq) / (2.0 * a)
    r2 = (-b + sq) / (2.0 * a)
    return max(lo, r1), min(hi, r2)


@njit(cache=True, nogil=True, inline="always")
def _lin_interval(a, rhs, lo, hi):
    """Intersect [lo, hi] with {m : a m <= rhs}."""
    if a > 0.0:
        return lo, min(hi, rhs / a)
    if a < 0.0:
        return max(lo, rhs / a), hi
    if rhs < 0.0:
        return 1.0, 0.0
    return lo, hi


@njit(cache=True, nogil=True)
def _scan(kind, verts, rays, cx, cy, s00, s01, s11, t00, t01, t11, px, py, d,
          c1x, c1y, c2x, c2y, u00, u01, u10, u11, V, R, best, bm, bn, shrink):
    """Visit rows n = 0, +-1, ... of the reduced basis inside the certified
    region and keep the best term. With ``shrink`` the region tightens as
    ``V`` improves (R = V / d)."""
    n1sq = c1x * c1x + c1y * c1y
    n1 = math.sqrt(n1sq)
    g12 = c1x * c2x + c1y * c2y
    n2sq = c2x * c2x + c2y * c2y
    wx = px - cx
    wy = py - cy
    k = 0
    while True:
        if k > R * n1 + 1e-9:
            break
        if k > MAX_ROWS:
            return best, bm, bn, R, REGION_TOO_LARGE
        for sgn in (1, -1):
            if k == 0 and sgn == -1:
                continue
            n = sgn * k
            Vs = V * (1.0 + 1e-12) + 1e-300
            Rs = R * (1.0 + 1e-12)
            lo, hi = _quad_interval(n1sq, 2.0 * n * g12, n * n * n2sq - Rs * Rs, -math.inf, math.inf)
            if lo > hi:
                continue
            if kind == 1:
                if V < math.inf:
                    qa = c1x * (t00 * c1x + t01 * c1y) + c1y * (t01 * c1x + t11 * c1y)
                    if qa > 0.0:
                        tb = c1x * (t00 * c2x + t01 * c2y) + c1y * (t01 * c2x + t11 * c2y)
                        qc = c2x * (t00 * c2x + t01 * c2y) + c2y * (t01 * c2x + t11 * c2y)
                        w1 = c1x * wx + c1y * wy
                        w2 = c2x * wx + c2y * wy
                        lo, hi = _quad_interval(
                            qa, 2.0 * (n * tb + Vs * w1), n * n * qc + 2.0 * n * Vs * w2 - Vs * Vs, lo, hi)
            else:
                for j in range(rays.shape[0]):
                    rx = rays[j, 0]
                    ry = rays[j, 1]
                    slack = 1e-12 * math.sqrt(rx * rx + ry * ry) * Rs
                    lo, hi = _lin_interval(-(c1x * rx + c1y * ry), n * (c2x * rx + c2y * ry) + slack, lo, hi)
                if V < math.inf:
                    for j in range(verts.shape[0]):
                        ax = px - verts[j, 0]
                        ay = py - verts[j, 1]
                        lo, hi = _lin_interval(c1x * ax + c1y * ay, Vs - n * (c2x * ax + c2y * ay), lo, hi)
            if lo > hi + 2e-9:
                continue
            m0 = math.ceil(lo - 1e-9)
            m1 = math.floor(hi + 1e-9)
            if m1 - m0 > MAX_ROWS:
                return best, bm, bn, R, REGION_TOO_LARGE
            for mm in range(np.int64(m0), np.int64(m1) + 1):
                if mm == 0 and n == 0:
                    continue
                lx = mm * c1x + n * c2x
                ly = mm * c1y + n * c2y
                f = tropical_term(kind, verts, rays, cx, cy, s00, s01, s11, px, py, lx, ly)
                mi = mm * u00 + n * u10
                ni = mm * u01 + n * u11
                if _better(f, mi, ni, best, bm, bn):
                    best = f
                    bm = mi
                    bn = ni
                    if shrink and best < V:
                        V = best
                        R = V / d
        k += 1
    return best, bm, bn, R, OK


@njit(cache=True, nogil=True)
def min_one(kind, verts, rays, cx, cy, s00, s01, s11, t00, t01, t11, px, py, d,
            c1x, c1y, c2x, c2y, u00, u01, u10, u11):
    """Certified minimum of the tropical series for one reduced lattice.

    Returns (value, m, n, certified_radius, flag)."""
    best = math.inf
    bm = 0
    bn = 0
    for i in range(_SMALL.shape[0]):
        a = _SMALL[i, 0]
        b = _SMALL[i, 1]
        f = tropical_term(kind, verts, rays, cx, cy, s00, s01, s11, px, py,
                          a * c1x + b * c2x, a * c1y + b * c2y)
        mi = a * u00 + b * u10
        ni = a * u01 + b * u11
        if _better(f, mi, ni, best, bm, bn):
            best = f
            bm = mi
            bn = ni
    if d <= BOUNDARY_TOL:
        return 0.0, bm, bn, 0.0, OK
    n1 = math.sqrt(c1x * c1x + c1y * c1y)
    if best == math.inf:
        r = n1
        for _ in range(CONE_DOUBLINGS):
            r *= 2.0
            best, bm, bn, _r, flag = _scan(kind, verts, rays, cx, cy, s00, s01, s11, t00, t01, t11,
                                           px, py, d, c1x, c1y, c2x, c2y, u00, u01, u10, u11,
                                           math.inf, r, best, bm, bn, False)
            if flag != OK:
                return math.nan, 0, 0, r, flag
            if best < math.inf:
                break
        if best == math.inf:
            return math.nan, 0, 0, r, NOT_ADMISSIBLE
    best, bm, bn, R, flag = _scan(kind, verts, rays, cx, cy, s00, s01, s11, t00, t01, t11,
                                  px, py, d, c1x, c1y, c2x, c2y, u00, u01, u10, u11,
                                  best, best / d, best, bm, bn, True)
    if flag != OK:
        return math.nan, 0, 0, R, flag
    return best, bm, bn, R, OK


@njit(cache=True, nogil=True)
def _tmat(kind, cx, cy, smat, px, py):
    if kind != 1:
        return 0.0, 0.0, 0.0
    wx = px - cx
    wy = py - cy
    return smat[0, 0] - wx * wx, smat[0, 1] - wx * wy, smat[1, 1] - wy * wy


@njit(cache=True, nogil=True)
def tropical_min(kind, verts, rays, center, smat, p, d, red, umat):
    """Per-lattice minimum at one point over a batch of reduced lattices."""
    n = red.shape[0]
    values = np.empty(n)
    coeffs = np.empty((n, 2), dtype=np.int64)
    radii = np.empty(n)
    flags = np.empty(n, dtype=np.int64)
    cx, cy = center[0], center[1]
    px, py = p[0], p[1]
    t00, t01, t11 = _tmat(kind, cx, cy, smat, px, py)
    for i in range(n):
        r = min_one(kind, verts, rays, cx, cy, smat[0, 0], smat[0, 1], smat[1, 1], t00, t01, t11,
                    px, py, d, red[i, 0, 0], red[i, 0, 1], red[i, 1, 0], red[i, 1, 1],
                    umat[i, 0, 0], umat[i, 0, 1], umat[i, 1, 0], umat[i, 1, 1])
        values[i] = r[0]
        coeffs[i, 0] = r[1]
        coeffs[i, 1] = r[2]
        radii[i] = r[3]
        flags[i] = r[4]
    return values, coeffs, radii, flags


@njit(cache=True, nogil=True)
def power_sums(kind, verts, rays, center, smat, points, dists, red, h, nblocks):
    """Block sums of F^h and F^(2h) over a shared lattice sample set, per point.

    Flagged lattices are skipped and counted."""
    npts = points.shape[0]
    n = red.shape[0]
    sums = np.zeros((npts, nblocks))
    sumsq = np.zeros((npts, nblocks))
    counts = np.zeros((npts, nblocks), dtype=np.int64)
    flagged = np.zeros(npts, dtype=np.int64)
    cx, cy = center[0], center[1]
    bsize = (n + nblocks - 1) // nblocks
    for j in range(npts):
        px, py = points[j, 0], points[j, 1]
        d = dists[j]
        if d <= BOUNDARY_TOL:
            for i in range(n):
                counts[j, i // bsize] += 1
            continue
        t00, t01, t11 = _tmat(kind, cx, cy, smat, px, py)
        for i in range(n):
            r = min_one(kind, verts, rays, cx, cy, smat[0, 0], smat[0, 1], smat[1, 1], t00, t01, t11,
                        px, py, d, red[i, 0, 0], red[i, 0, 1], red[i, 1, 0], red[i, 1, 1],
                        0, 0, 0, 0)
            if r[4] != OK:
                flagged[j] += 1
                continue
            b = i // bsize
            v = r[0] ** h
            sums[j, b] += v
            sumsq[j, b] += v * v
            counts[j, b] += 1
    return sums, sumsq, counts, flagged
