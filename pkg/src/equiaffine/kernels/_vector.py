"""Pure-numpy kernels, vectorised across lattices.

Same contracts as the numba kernels; used when numba is unavailable or
disabled through ``EQUIDIST_DISABLE_NUMBA``.
"""

import numpy as np

OK = 0
NOT_ADMISSIBLE = 1
REGION_TOO_LARGE = 2
DEGENERATE = 3

BOUNDARY_TOL = 1e-9
TIE_TOL = 1e-12
MAX_ROWS = 50_000_000
CONE_DOUBLINGS = 20

_SMALL = np.array([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1], [1, -1], [-1, 1]])


def reduce_bases(bases):
    bases = np.asarray(bases, dtype=float)
    n = len(bases)
    b1 = bases[:, 0].copy()
    b2 = bases[:, 1].copy()
    U = np.zeros((n, 2, 2), dtype=np.int64)
    U[:, 0, 0] = U[:, 1, 1] = 1
    flags = np.zeros(n, dtype=np.int64)
    det = np.abs(b1[:, 0] * b2[:, 1] - b1[:, 1] * b2[:, 0])
    n1 = np.einsum("ij,ij->i", b1, b1)
    n2 = np.einsum("ij,ij->i", b2, b2)
    bad = (det < 1e-12) | (n1 == 0) | (n2 == 0)
    flags[bad] = DEGENERATE
    active = ~bad
    for _ in range(1000):
        if not active.any():
            break
        sw = active & (n2 < n1)
        b1[sw], b2[sw] = b2[sw].copy(), b1[sw].copy()
        n1[sw], n2[sw] = n2[sw].copy(), n1[sw].copy()
        U[sw] = U[sw][:, ::-1]
        with np.errstate(invalid="ignore", divide="ignore"):
            mu = np.floor(np.einsum("ij,ij->i", b1, b2) / n1 + 0.5)
        mu = np.where(active, mu, 0.0)
        done = active & (mu == 0)
        step = active & ~done
        b2[step] -= mu[step, None] * b1[step]
        k = mu.astype(np.int64)
        U[step, 1] -= k[step, None] * U[step, 0]
        n2 = np.einsum("ij,ij->i", b2, b2)
        done |= step & (n2 >= n1)
        active &= ~done
    red = np.stack([b1, b2], axis=1)
    return red, U, flags


def tropical_term(kind, verts, rays, center, smat, p, lx, ly):
    lx = np.asarray(lx, dtype=float)
    ly = np.asarray(ly, dtype=float)
    if kind == 1:
        q = lx * (smat[0, 0] * lx + smat[0, 1] * ly) + ly * (smat[0, 1] * lx + smat[1, 1] * ly)
        return lx * (p[0] - center[0]) + ly * (p[1] - center[1]) + np.sqrt(np.maximum(q, 0.0))
    w = p[None, :] - verts
    f = np.max(lx[..., None] * w[:, 0] + ly[..., None] * w[:, 1], axis=-1)
    if len(rays):
        ln = np.hypot(lx, ly)
        for r in rays:
            dot = lx * r[0] + ly * r[1]
            f = np.where(dot < -1e-12 * ln * np.hypot(*r), np.inf, f)
    return f


def key_less(m1, n1, m2, n2):
    a1, a2 = np.abs(n1), np.abs(n2)
    b1, b2 = np.abs(m1), np.abs(m2)
    p1 = (m1 > 0) | ((m1 == 0) & (n1 > 0))
    p2 = (m2 > 0) | ((m2 == 0) & (n2 > 0))
    return np.where(a1 != a2, a1 < a2,
                    np.where(b1 != b2, b1 < b2,
                             np.where(p1 != p2, p1,
                                      np.where(m1 != m2, m1 < m2, n1 < n2))))


def _better(f, mi, ni, best, bm, bn):
    finite = np.isfinite(f)
    first = finite & ~np.isfinite(best)
    tol = TIE_TOL * np.maximum(1.0, np.where(np.isfinite(best), np.abs(best), 1.0))
    with np.errstate(invalid="ignore"):
        strict = f < best - tol
        tie = (f <= best + tol) & ~strict & key_less(mi, ni, bm, bn)
    return first | (finite & (strict | tie))


def _quad(a, b, c, lo, hi):
    disc = b * b - 4.0 * a * c
    ok = disc >= 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        r1 = (-b - sq) / (2.0 * a)
        r2 = (-b + sq) / (2.0 * a)
    lo = np.where(ok, np.maximum(lo, r1), 1.0)
    hi = np.where(ok, np.minimum(hi, r2), 0.0)
    return lo, hi


def _lin(a, rhs, lo, hi):
    with np.errstate(invalid="ignore", divide="ignore"):
        q = rhs / a
    lo = np.where(a < 0, np.maximum(lo, q), lo)
    hi = np.where(a > 0, np.minimum(hi, q), hi)
    empty = (a == 0) & (rhs < 0)
    return np.where(empty, 1.0, lo), np.where(empty, 0.0, hi)


def _scan(kind, verts, rays, center, smat, tm, p, d, c1, c2, U, V, R, best, bm, bn, shrink):
    """Row scan over the certified region for all lattices at once."""
    n1sq = np.einsum("ij,ij->i", c1, c1)
    n1 = np.sqrt(n1sq)
    g12 = np.einsum("ij,ij->i", c1, c2)
    n2sq = np.einsum("ij,ij->i", c2, c2)
    w = p - center
    flags = np.zeros(len(c1), dtype=np.int64)
    k = 0
    while True:
        live = k <= R * n1 + 1e-9
        if not live.any():
            break
        if k > MAX_ROWS:
            flags[live] = REGION_TOO_LARGE
            break
        for n in ((0,) if k == 0 else (k, -k)):
            idx = np.nonzero(live & (flags == OK))[0]
            if len(idx) == 0:
                continue
            a1, a2 = c1[idx], c2[idx]
            Vs = V[idx] * (1.0 + 1e-12) + 1e-300
            Rs = R[idx] * (1.0 + 1e-12)
            lo = np.full(len(idx), -np.inf)
            hi = np.full(len(idx), np.inf)
            lo, hi = _quad(n1sq[idx], 2.0 * n * g12[idx], n * n * n2sq[idx] - Rs * Rs, lo, hi)
            fin = np.isfinite(Vs)
            if kind == 1:
                qa = np.einsum("ij,jk,ik->i", a1, tm, a1)
                tb = np.einsum("ij,jk,ik->i", a1, tm, a2)
                qc = np.einsum("ij,jk,ik->i", a2, tm, a2)
                use = fin & (qa > 0)
                if use.any():
                    Vz = np.where(use, Vs, 0.0)
                    l2, h2 = _quad(np.where(use, qa, 1.0), 2.0 * (n * tb + Vz * (a1 @ w)),
                                   n * n * qc + 2.0 * n * Vz * (a2 @ w) - Vz * Vz, lo, hi)
                    lo = np.where(use, l2, lo)
                    hi = np.where(use, h2, hi)
            else:
                for r in rays:
                    slack = 1e-12 * np.hypot(*r) * Rs
                    lo, hi = _lin(-(a1 @ r), n * (a2 @ r) + slack, lo, hi)
                if fin.any():
                    for v in verts:
                        av = p - v
                        l2, h2 = _lin(a1 @ av, np.where(fin, Vs, 0.0) - n * (a2 @ av), lo, hi)
                        lo = np.where(fin, l2, lo)
                        hi = np.where(fin, h2, hi)
            keep = lo <= hi + 2e-9
            m0 = np.ceil(lo - 1e-9)
            m1 = np.floor(hi + 1e-9)
            width = np.where(keep, m1 - m0, -1.0)
            big = width > MAX_ROWS
            if big.any():
                flags[idx[big]] = REGION_TOO_LARGE
                width[big] = -1.0
            if width.max(initial=-1.0) < 0:
                continue
            rows = np.nonzero(width >= 0)[0]
            cnt = width[rows].astype(np.int64) + 1
            starts = np.ceil(lo[rows] - 1e-9).astype(np.int64)
            # batches of whole rows, flattened to (lattice, m) pairs
            csum = np.cumsum(cnt)
            cuts = np.searchsorted(csum, np.arange(PAIR_BATCH, csum[-1], PAIR_BATCH)) + 1
            bounds = np.unique(np.r_[0, np.minimum(cuts, len(rows)), len(rows)])
            for a, b in zip(bounds[:-1], bounds[1:]):
                _row_update(kind, verts, rays, center, smat, p, d, n, c1, c2, U,
                            idx[rows[a:b]], starts[a:b], cnt[a:b], V, R, best, bm, bn, shrink)
        k += 1
    return best, bm, bn, R, flags


PAIR_BATCH = 1 << 20


def _row_update(kind, verts, rays, center, smat, p, d, n, c1, c2, U, s, start, cnt,
                V, R, best, bm, bn, shrink):
    g = np.repeat(np.arange(len(s)), cnt)
    first = np.cumsum(cnt) - cnt
    mm = start[g] + (np.arange(len(g)) - first[g])
    if n == 0:
        nz = mm != 0
        g, mm = g[nz], mm[nz]
    if len(g) == 0:
        return
    t = s[g]
    lx = mm * c1[t, 0] + n * c2[t, 0]
    ly = mm * c1[t, 1] + n * c2[t, 1]
    f = tropical_term(kind, verts, rays, center, smat, p, lx, ly)
    mi = mm * U[t, 0, 0] + n * U[t, 1, 0]
    ni = mm * U[t, 0, 1] + n * U[t, 1, 1]
    fmin = np.full(len(s), np.inf)
    np.minimum.at(fmin, g, f)
    tol = TIE_TOL * np.maximum(1.0, np.where(np.isfinite(fmin), np.abs(fmin), 1.0))
    cand = np.nonzero(np.isfinite(f) & (f <= fmin[g] + tol[g]))[0]
    if len(cand) == 0:
        return
    pos = (mi[cand] > 0) | ((mi[cand] == 0) & (ni[cand] > 0))
    order = np.lexsort((ni[cand], mi[cand], ~pos, np.abs(mi[cand]), np.abs(ni[cand]), g[cand]))
    c = cand[order]
    head = np.r_[True, g[c][1:] != g[c][:-1]]
    c = c[head]
    u0 = s[g[c]]
    upd = _better(f[c], mi[c], ni[c], best[u0], bm[u0], bn[u0])
    u = u0[upd]
    best[u] = f[c][upd]
    bm[u] = mi[c][upd]
    bn[u] = ni[c][upd]
    if shrink:
        V[u] = np.minimum(V[u], best[u])
        R[u] = V[u] / d


def tropical_min(kind, verts, rays, center, smat, p, d, red, umat):
    red = np.asarray(red, dtype=float)
    n = len(red)
    p = np.asarray(p, dtype=float)
    c1, c2 = red[:, 0], red[:, 1]
    U = np.asarray(umat, dtype=np.int64)
    best = np.full(n, np.inf)
    bm = np.zeros(n, dtype=np.int64)
    bn = np.zeros(n, dtype=np.int64)
    for a, b in _SMALL:
        lam = a * c1 + b * c2
        f = tropical_term(kind, verts, rays, center, smat, p, lam[:, 0], lam[:, 1])
        mi = a * U[:, 0, 0] + b * U[:, 1, 0]
        ni = a * U[:, 0, 1] + b * U[:, 1, 1]
        upd = _better(f, mi, ni, best, bm, bn)
        best[upd], bm[upd], bn[upd] = f[upd], mi[upd], ni[upd]
    if d <= BOUNDARY_TOL:
        return np.zeros(n), np.stack([bm, bn], axis=1), np.zeros(n), np.zeros(n, dtype=np.int64)
    tm = np.zeros((2, 2))
    if kind == 1:
        w = p - center
        tm = smat - np.outer(w, w)
    flags = np.zeros(n, dtype=np.int64)
    n1 = np.linalg.norm(c1, axis=1)
    radii = np.zeros(n)
    todo = ~np.isfinite(best)
    r = n1.copy()
    for _ in range(CONE_DOUBLINGS):
        if not todo.any():
            break
        r[todo] *= 2.0
        t = np.nonzero(todo)[0]
        b, mm, nn, _r, fl = _scan(kind, verts, rays, center, smat, tm, p, d, c1[t], c2[t], U[t],
                                  np.full(len(t), np.inf), r[t].copy(), best[t].copy(),
                                  bm[t].copy(), bn[t].copy(), False)
        best[t], bm[t], bn[t] = b, mm, nn
        flags[t[fl != OK]] = fl[fl != OK]
        todo &= ~np.isfinite(best) & (flags == OK)
    flags[todo] = NOT_ADMISSIBLE
    go = np.nonzero(flags == OK)[0]
    if len(go):
        V = best[go].copy()
        b, mm, nn, R, fl = _scan(kind, verts, rays, center, smat, tm, p, d, c1[go], c2[go], U[go],
                                 V, V / d, best[go].copy(), bm[go].copy(), bn[go].copy(), True)
        best[go], bm[go], bn[go], radii[go] = b, mm, nn, R
        flags[go] = fl
    bad = flags != OK
    best[bad] = np.nan
    bm[bad] = bn[bad] = 0
    return best, np.stack([bm, bn], axis=1), radii, flags


def power_sums(kind, verts, rays, center, smat, points, dists, red, h, nblocks):
    npts = len(points)
    n = len(red)
    sums = np.zeros((npts, nblocks))
    sumsq = np.zeros((npts, nblocks))
    counts = np.zeros((npts, nblocks), dtype=np.int64)
    flagged = np.zeros(npts, dtype=np.int64)
    bsize = (n + nblocks - 1) // nblocks
    block = np.arange(n) // bsize
    U = np.zeros((n, 2, 2), dtype=np.int64)
    for j in range(npts):
        if dists[j] <= BOUNDARY_TOL:
            counts[j] = np.bincount(block, minlength=nblocks)
            continue
        vals, _, _, fl = tropical_min(kind, verts, rays, center, smat, points[j], dists[j], red, U)
        ok = fl == OK
        flagged[j] = int((~ok).sum())
        v = np.where(ok, vals, 0.0) ** h
        sums[j] = np.bincount(block, weights=v, minlength=nblocks)
        sumsq[j] = np.bincount(block, weights=v * v, minlength=nblocks)
        counts[j] = np.bincount(block, weights=ok, minlength=nblocks).astype(np.int64)
    return sums, sumsq, counts, flagged
