"""Level curves of scalar fields and the contour analytics used to judge them:
area, centroid, class normalisation, Hausdorff distance, polar duals,
Mahler products, conic fits and deviation from a hyperbola.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import (CenterOutside, DegenerateFit, EmptyField, FrameSingular, NonConvex,
                     OpenContour)

ELLIPSE, HYPERBOLA, DEGENERATE = "Ellipse", "Hyperbola", "Degenerate"


@dataclass(frozen=True, eq=False)
class Contour:
    points: np.ndarray
    closed: bool
    level: float = 0.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "points", pts)
        if self.closed and len(pts) < 3:
            raise ValueError("a closed contour needs at least 3 points")
        if not self.closed and len(pts) < 2:
            raise ValueError("an open contour needs at least 2 points")

    def __len__(self):
        return len(self.points)

    def segments(self):
        p = self.points
        q = np.roll(p, -1, axis=0) if self.closed else p[1:]
        return (p if self.closed else p[:-1]), q

    def is_simple(self, tol: float = 1e-12) -> bool:
        """Pairwise test that no two non-adjacent segments cross."""
        a, b = self.segments()
        m = len(a)
        d = b - a

        def orient(p, q, r):
            return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - \
                   (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

        for i in range(m):
            j = np.arange(i + 2, m)
            if self.closed and i == 0:
                j = j[j != m - 1]
            if j.size == 0:
                continue
            o1 = orient(a[i], b[i], a[j])
            o2 = orient(a[i], b[i], b[j])
            o3 = orient(a[j], b[j], a[i][None])
            o4 = orient(a[j], b[j], b[i][None])
            scale = tol * (np.hypot(*d[i]) * np.hypot(d[j, 0], d[j, 1]) + 1e-300)
            hit = (o1 * o2 < -scale) & (o3 * o4 < -scale)
            if hit.any():
                return False
        return True


@dataclass(frozen=True)
class ContourMetrics:
    area: float
    centroid: tuple
    mahler: float
    conic_class: str
    conic_residual: float

    def to_json(self) -> dict:
        return {"area": self.area, "centroid": list(self.centroid), "mahler": self.mahler,
                "conic_class": self.conic_class, "conic_residual": self.conic_residual}


# marching squares ---------------------------------------------------------

# edges of a cell: 0 bottom, 1 right, 2 top, 3 left; corners 0 bl, 1 br, 2 tr, 3 tl
_SEGS = {
    1: [(0, 3)], 2: [(0, 1)], 3: [(1, 3)], 4: [(1, 2)], 6: [(0, 2)], 7: [(2, 3)],
    8: [(2, 3)], 9: [(0, 2)], 11: [(1, 2)], 12: [(1, 3)], 13: [(0, 1)], 14: [(0, 3)],
}


def _unpack(field):
    if hasattr(field, "values"):
        return np.asarray(field.xs, float), np.asarray(field.ys, float), np.asarray(field.values, float)
    xs, ys, v = field
    return np.asarray(xs, float), np.asarray(ys, float), np.asarray(v, float)


def marching_squares(field, t: float) -> list:
    """Level-``t`` contours of a field given as a ScalarField or ``(xs, ys, values)``
    with ``values[j, i]`` at ``(xs[i], ys[j])``.

    Cells touching a NaN are skipped, so chains end at the NaN boundary.
    Saddle cells are split by the average of their four corners.
    """
    xs, ys, v = _unpack(field)
    ny, nx = v.shape
    if nx < 2 or ny < 2:
        return []
    fin = np.isfinite(v)
    above = np.where(fin, v >= t, False)
    cell_ok = fin[:-1, :-1] & fin[:-1, 1:] & fin[1:, 1:] & fin[1:, :-1]
    case = (above[:-1, :-1] * 1 + above[:-1, 1:] * 2 + above[1:, 1:] * 4 + above[1:, :-1] * 8)
    case = np.where(cell_ok, case, 0)
    js, is_ = np.nonzero((case != 0) & (case != 15))

    nh = nx * ny  # horizontal edge (i, j) -> j * nx + i; vertical edges offset by nh

    def edge_id(i, j, e):
        if e == 0:
            return j * nx + i
        if e == 2:
            return (j + 1) * nx + i
        if e == 3:
            return nh + j * nx + i
        return nh + j * nx + i + 1

    def edge_point(eid):
        if eid < nh:
            j, i = divmod(eid, nx)
            a, b = v[j, i], v[j, i + 1]
            s = (t - a) / (b - a)
            return xs[i] + s * (xs[i + 1] - xs[i]), ys[j]
        j, i = divmod(eid - nh, nx)
        a, b = v[j, i], v[j + 1, i]
        s = (t - a) / (b - a)
        return xs[i], ys[j] + s * (ys[j + 1] - ys[j])

    adj: dict = {}

    def link(p, q):
        adj.setdefault(p, []).append(q)
        adj.setdefault(q, []).append(p)

    for j, i in zip(js.tolist(), is_.tolist()):
        c = int(case[j, i])
        if c in (5, 10):
            centre_up = 0.25 * (v[j, i] + v[j, i + 1] + v[j + 1, i + 1] + v[j + 1, i]) >= t
            if (c == 5) == centre_up:
                segs = [(0, 1), (2, 3)]
            else:
                segs = [(0, 3), (1, 2)]
        else:
            segs = _SEGS[c]
        for e1, e2 in segs:
            link(edge_id(i, j, e1), edge_id(i, j, e2))

    seen = set()
    out = []

    def walk(start):
        chain = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [q for q in adj[cur] if q != prev and q not in seen]
            if not nxt:
                # closes back onto the start?
                closed = len(chain) > 2 and start in adj[cur] and cur != start
                return chain, closed
            prev, cur = cur, nxt[0]
            seen.add(cur)
            chain.append(cur)

    for k in sorted(adj):
        if k not in seen and len(adj[k]) == 1:
            chain, _ = walk(k)
            out.append(Contour([edge_point(e) for e in chain], False, t))
    for k in sorted(adj):
        if k not in seen:
            chain, closed = walk(k)
            pts = np.array([edge_point(e) for e in chain])
            if closed and len(pts) >= 3:
                if _signed_area(pts) < 0:
                    pts = pts[::-1]
                out.append(Contour(pts, True, t))
            elif len(pts) >= 2:
                out.append(Contour(pts, False, t))
    return out


# areas and normalisation --------------------------------------------------

def _signed_area(p):
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _require_closed(c: Contour):
    if not c.closed:
        raise OpenContour("operation needs a closed contour")


def contour_area_centroid(c: Contour):
    _require_closed(c)
    p = c.points
    q = np.roll(p, -1, axis=0)
    cross = p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]
    a = 0.5 * cross.sum()
    if a == 0:
        raise OpenContour("contour encloses no area")
    cx = ((p[:, 0] + q[:, 0]) * cross).sum() / (6 * a)
    cy = ((p[:, 1] + q[:, 1]) * cross).sum() / (6 * a)
    return abs(float(a)), (float(cx), float(cy))


def normalize_class(c: Contour) -> Contour:
    """Representative of the class up to translation and homothety.

    Closed: centroid at the origin and unit area. Open: chord midpoint at the
    origin and unit chord length.
    """
    if c.closed:
        a, ctr = contour_area_centroid(c)
        return Contour((c.points - np.array(ctr)) / math.sqrt(a), True, c.level)
    p0, p1 = c.points[0], c.points[-1]
    chord = float(np.hypot(*(p1 - p0)))
    if chord == 0:
        raise DegenerateFit("open contour with zero chord")
    return Contour((c.points - 0.5 * (p0 + p1)) / chord, False, c.level)


def _densify(c: Contour, step: float) -> np.ndarray:
    a, b = c.segments()
    out = []
    for p, q in zip(a, b):
        k = max(1, int(math.ceil(np.hypot(*(q - p)) / step)))
        s = np.arange(k)[:, None] / k
        out.append(p + s * (q - p))
    if not c.closed:
        out.append(c.points[-1:])
    return np.concatenate(out)


def _dist_to_polyline(pts, c: Contour) -> np.ndarray:
    a, b = c.segments()
    d = b - a
    dd = np.maximum((d * d).sum(axis=1), 1e-300)
    best = np.full(len(pts), np.inf)
    for lo in range(0, len(pts), 2048):
        p = pts[lo:lo + 2048, None, :]
        s = np.clip(((p - a) * d).sum(axis=2) / dd, 0.0, 1.0)
        r = p - (a + s[..., None] * d)
        best[lo:lo + 2048] = np.sqrt((r * r).sum(axis=2)).min(axis=1)
    return best


def hausdorff(a: Contour, b: Contour, samples: int = 4000) -> float:
    """Symmetric Hausdorff distance between two polylines; each is densified
    and measured against the exact segments of the other."""
    ext = np.ptp(np.concatenate([a.points, b.points]), axis=0).max()
    step = max(ext, 1e-300) / samples
    da = _dist_to_polyline(_densify(a, step), b).max()
    db = _dist_to_polyline(_densify(b, step), a).max()
    return float(max(da, db))


# polar duals and Mahler products ------------------------------------------

def _clean(p, tol=1e-12):
    """Drop repeated vertices of a closed polygon and orient it CCW."""
    scale = max(np.ptp(p, axis=0).max(), 1e-300)
    q = np.roll(p, -1, axis=0)
    keep = np.hypot(*(q - p).T) > tol * scale
    p = p[keep]
    if _signed_area(p) < 0:
        p = p[::-1]
    return p


def polar_dual(poly: Contour, center=(0.0, 0.0)) -> Contour:
    """Dual polygon about ``center``: the edge n.(p - center) = d gives the
    vertex center + n / d."""
    _require_closed(poly)
    c = np.asarray(center, dtype=float)
    p = _clean(poly.points)
    q = np.roll(p, -1, axis=0)
    e = q - p
    n = np.stack([e[:, 1], -e[:, 0]], axis=1)
    d = (n * (p - c)).sum(axis=1)
    if np.any(d <= 0):
        raise CenterOutside("center is not strictly inside the polygon")
    return Contour(c + n / d[:, None], True, poly.level)


def convexity_defect(poly: Contour) -> float:
    """Most negative turn of the (CCW) polygon relative to its edge lengths;
    zero for convex polygons."""
    p = _clean(poly.points)
    e = np.roll(p, -1, axis=0) - p
    f = np.roll(e, -1, axis=0)
    cross = e[:, 0] * f[:, 1] - e[:, 1] * f[:, 0]
    norm = np.hypot(*e.T) * np.hypot(*f.T)
    return float(max(0.0, -(cross / np.maximum(norm, 1e-300)).min()))


def _dual_area(p, c):
    q = np.roll(p, -1, axis=0)
    e = q - p
    d = e[:, 1] * (p[:, 0] - c[0]) - e[:, 0] * (p[:, 1] - c[1])
    if np.any(d <= 0):
        return math.inf
    # dual vertices n_i / d_i; area by the shoelace formula
    n = np.stack([e[:, 1], -e[:, 0]], axis=1) / d[:, None]
    return abs(_signed_area(n))


def santalo_point(poly: Contour, tol: float = 1e-8):
    p = _clean(poly.points)
    _, c0 = contour_area_centroid(Contour(p, True))
    scale = np.ptp(p, axis=0).max()
    res = minimize(lambda c: _dual_area(p, c), np.array(c0), method="Nelder-Mead",
                   options={"xatol": tol * scale, "fatol": 1e-14, "maxiter": 4000,
                            "initial_simplex": np.array(c0) + 0.05 * scale * np.array(
                                [[0, 0], [1, 0], [0, 1]])})
    return (float(res.x[0]), float(res.x[1])), float(res.fun)


def mahler(poly: Contour, mode: str = "centroid", tol: float = 1e-9) -> float:
    """area(K) * area(K°) with K° taken about the centroid or the Santalo point."""
    _require_closed(poly)
    if convexity_defect(poly) > tol:
        raise NonConvex("contour is not convex")
    p = _clean(poly.points)
    area, ctr = contour_area_centroid(Contour(p, True))
    mode = mode.lower()
    if mode == "centroid":
        return area * _dual_area(p, ctr)
    if mode in ("santalo", "santaló"):
        return area * santalo_point(Contour(p, True))[1]
    raise ValueError(f"unknown mode {mode!r}")


def convex_hull(c: Contour) -> Contour:
    from scipy.spatial import ConvexHull

    hull = ConvexHull(c.points)
    return Contour(c.points[hull.vertices], True, c.level)


# conics and hyperbolas -----------------------------------------------------

def fit_conic(points):
    """Algebraic least squares conic A x^2 + B xy + C y^2 + D x + E y + F = 0.

    Points are centred and scaled to unit RMS radius before the SVD; the
    coefficients returned refer to the original coordinates and have unit
    norm. Residual is the RMS algebraic distance in the normalised frame.
    """
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(p) < 6:
        raise DegenerateFit("need at least 6 points")
    mu = p.mean(axis=0)
    q = p - mu
    s = math.sqrt((q * q).sum(axis=1).mean())
    if s == 0 or np.linalg.svd(q, compute_uv=False)[-1] <= 1e-12 * s * math.sqrt(len(p)):
        raise DegenerateFit("points are collinear")
    x, y = (q / s).T
    D = np.stack([x * x, x * y, y * y, x, y, np.ones_like(x)], axis=1)
    _, sv, vt = np.linalg.svd(D, full_matrices=False)
    a, b, c, d, e, f = vt[-1]
    residual = float(sv[-1] / math.sqrt(len(p)))
    quad = a * a + b * b + c * c
    disc = b * b - 4 * a * c
    if quad < 1e-24 or abs(disc) <= 1e-9 * quad:
        cls = DEGENERATE
    else:
        cls = ELLIPSE if disc < 0 else HYPERBOLA
    # back to original coordinates: X = mu + s x
    mx, my = mu
    A, B, C = a / s**2, b / s**2, c / s**2
    Dx, Ey = d / s, e / s
    coef = np.array([
        A, B, C,
        Dx - 2 * A * mx - B * my,
        Ey - 2 * C * my - B * mx,
        f + A * mx * mx + B * mx * my + C * my * my - Dx * mx - Ey * my,
    ])
    coef /= np.linalg.norm(coef)
    if coef[np.argmax(np.abs(coef))] < 0:
        coef = -coef
    return coef, cls, residual


def hyperbola_deviation(c, frame, origin=(0.0, 0.0)) -> float:
    """Coefficient of variation of x*y after mapping the contour into the
    asymptote frame ``q = frame @ (p - origin)``."""
    frame = np.asarray(frame, dtype=float).reshape(2, 2)
    if abs(np.linalg.det(frame)) < 1e-12 * max(np.abs(frame).max() ** 2, 1e-300):
        raise FrameSingular("asymptote frame is singular")
    pts = c.points if isinstance(c, Contour) else np.asarray(c, dtype=float).reshape(-1, 2)
    q = (pts - np.asarray(origin, dtype=float)) @ frame.T
    prod = q[:, 0] * q[:, 1]
    m = prod.mean()
    if m == 0:
        return math.inf
    return float(prod.std() / abs(m))


def max_locus(field):
    """Grid argmax refined by a quadratic fit on the 3x3 neighbourhood."""
    xs, ys, v = _unpack(field)
    if not np.isfinite(v).any():
        raise EmptyField("field has no finite values")
    j, i = np.unravel_index(np.nanargmax(v), v.shape)
    best = (float(xs[i]), float(ys[j])), float(v[j, i])
    if not (0 < i < len(xs) - 1 and 0 < j < len(ys) - 1):
        return best
    patch = v[j - 1:j + 2, i - 1:i + 2]
    if not np.isfinite(patch).all():
        return best
    hx = 0.5 * (xs[i + 1] - xs[i - 1])
    hy = 0.5 * (ys[j + 1] - ys[j - 1])
    gx, gy = np.meshgrid([-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0])
    gx, gy, z = gx.ravel(), gy.ravel(), patch.ravel()
    M = np.stack([np.ones(9), gx, gy, gx * gx, gx * gy, gy * gy], axis=1)
    c0, cx, cy, cxx, cxy, cyy = np.linalg.lstsq(M, z, rcond=None)[0]
    H = np.array([[2 * cxx, cxy], [cxy, 2 * cyy]])
    if np.linalg.det(H) <= 0 or H[0, 0] >= 0:
        return best
    s = np.linalg.solve(H, [-cx, -cy])
    if np.abs(s).max() > 1.0:
        return best
    val = c0 + cx * s[0] + cy * s[1] + cxx * s[0] ** 2 + cxy * s[0] * s[1] + cyy * s[1] ** 2
    return (float(xs[i] + s[0] * hx), float(ys[j] + s[1] * hy)), float(val)


def metrics(c: Contour) -> ContourMetrics:
    """Metrics of a closed contour; Mahler is taken on the convex hull when the
    contour is only convex up to noise."""
    area, ctr = contour_area_centroid(c)
    try:
        m = mahler(c)
    except NonConvex:
        m = mahler(convex_hull(c))
    try:
        _, cls, res = fit_conic(c.points)
    except DegenerateFit:
        cls, res = DEGENERATE, math.nan
    return ContourMetrics(area, ctr, m, cls, res)
