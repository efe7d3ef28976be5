"""Convex planar domains: polygons, ellipses and unbounded polygons.

Points and directions are plain length-2 float arrays (anything
``np.asarray`` accepts). Support values live in the extended reals and use
IEEE ``inf`` for the unbounded case.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidDomain, NotConvex, PointOutside, SingularMatrix

MERGE_TOL = 1e-12
OUTSIDE_TOL = 1e-9

POLYHEDRAL = 0
ELLIPTIC = 1


class Location(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    EXTERIOR = "exterior"


class KernelDomain(NamedTuple):
    """Flat array view of a domain consumed by the compiled kernels."""

    kind: int
    verts: np.ndarray  # (k, 2), empty for ellipses
    rays: np.ndarray  # (r, 2), r in {0, 2}
    center: np.ndarray  # (2,)
    smat: np.ndarray  # (2, 2) inverse form for ellipses


def _vec(p) -> np.ndarray:
    a = np.asarray(p, dtype=float).reshape(2)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite point {p!r}")
    return a


def _cross(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def _segment_distance(p, a, b) -> np.ndarray:
    """Distance from points p (n, 2) to segment [a, b]."""
    ab = b - a
    ap = p - a
    denom = float(ab @ ab)
    t = np.clip((ap @ ab) / denom, 0.0, 1.0) if denom > 0 else np.zeros(len(p))
    proj = a + t[:, None] * ab
    return np.hypot(*(p - proj).T)


def _ray_distance(p, a, r) -> np.ndarray:
    ap = p - a
    t = np.maximum((ap @ r) / float(r @ r), 0.0)
    proj = a + t[:, None] * r
    return np.hypot(*(p - proj).T)


def _clean_chain(verts: np.ndarray, closed: bool) -> np.ndarray:
    """Drop repeated vertices and merge collinear triples."""
    out = []
    for v in verts:
        if out and np.linalg.norm(v - out[-1]) <= MERGE_TOL:
            continue
        out.append(v)
    if closed and len(out) > 1 and np.linalg.norm(out[0] - out[-1]) <= MERGE_TOL:
        out.pop()
    changed = True
    while changed and len(out) >= 3:
        changed = False
        n = len(out)
        idx = range(n) if closed else range(1, n - 1)
        for i in idx:
            a, b, c = out[i - 1], out[i], out[(i + 1) % n]
            scale = max(np.linalg.norm(b - a) * np.linalg.norm(c - b), MERGE_TOL)
            if abs(_cross(b - a, c - b)) <= MERGE_TOL * scale and (b - a) @ (c - b) > 0:
                del out[i]
                changed = True
                break
    return np.array(out, dtype=float).reshape(-1, 2)


class ConvexDomain:
    """Common interface; concrete domains are frozen dataclasses."""

    bounded = True

    def support(self, d) -> float:
        raise NotImplementedError

    def tropical_coefficient(self, lam) -> float:
        """``sup`` of ``-lam . p`` over the domain, i.e. ``support(-lam)``."""
        return self.support(-_vec(lam))

    def signed_distance(self, pts) -> np.ndarray:
        """Distance to the boundary, positive inside and negative outside."""
        raise NotImplementedError

    def contains(self, p, tol: float = 1e-9) -> Location:
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        s = float(self.signed_distance(np.atleast_2d(_vec(p)))[0])
        if s > tol:
            return Location.INTERIOR
        if s >= -tol:
            return Location.BOUNDARY
        return Location.EXTERIOR

    def boundary_distance(self, p) -> float:
        s = float(self.signed_distance(np.atleast_2d(_vec(p)))[0])
        if s < -OUTSIDE_TOL:
            raise PointOutside(f"point {tuple(_vec(p).tolist())} lies outside the domain")
        return max(s, 0.0)

    def polar_cone(self):
        """Directions with finite support: ``None`` for the whole plane,
        otherwise the two extreme rays of the closed cone."""
        return None

    def circumradius_about(self, p) -> float:
        raise NotImplementedError

    def apply_linear(self, A) -> "ConvexDomain":
        raise NotImplementedError

    def translate(self, v) -> "ConvexDomain":
        raise NotImplementedError

    def scale(self, r: float) -> "ConvexDomain":
        return self.apply_linear(np.eye(2) * float(r))

    def kernel(self) -> KernelDomain:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


def _check_linear(A) -> np.ndarray:
    A = np.asarray(A, dtype=float).reshape(2, 2)
    if abs(np.linalg.det(A)) < 1e-12:
        raise SingularMatrix("linear map is singular")
    return A


@dataclass(frozen=True, eq=False)
class Polygon(ConvexDomain):
    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(v)):
            raise InvalidDomain("non-finite vertex")
        if len(v) >= 3 and _shoelace(v) < 0:
            v = v[::-1]
        v = _clean_chain(v, closed=True)
        if len(v) < 3 or _shoelace(v) <= MERGE_TOL:
            raise InvalidDomain("polygon has empty interior")
        n = len(v)
        for i in range(n):
            e1 = v[(i + 1) % n] - v[i]
            e2 = v[(i + 2) % n] - v[(i + 1) % n]
            scale = MERGE_TOL * np.linalg.norm(e1) * np.linalg.norm(e2)
            cr = _cross(e1, e2)
            # a collinear backtrack is a spike, not a straight vertex
            if cr < -scale or (abs(cr) <= scale and e1 @ e2 < 0):
                raise NotConvex("polygon vertices are not in convex position")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def support(self, d) -> float:
        return float(np.max(self.vertices @ _vec(d)))

    def edges(self):
        v = self.vertices
        return v, np.roll(v, -1, axis=0)

    def signed_distance(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        a, b = self.edges()
        e = b - a
        nrm = np.stack([e[:, 1], -e[:, 0]], axis=1)
        nrm /= np.linalg.norm(nrm, axis=1)[:, None]
        # inner distance to each supporting line
        inner = np.einsum("ek,pek->pe", nrm, a[None, :, :] - pts[:, None, :])
        depth = inner.min(axis=1)
        out = depth < 0
        if np.any(out):
            q = pts[out]
            dist = np.min([_segment_distance(q, a[i], b[i]) for i in range(len(a))], axis=0)
            depth = depth.copy()
            depth[out] = -dist
        return depth

    def circumradius_about(self, p) -> float:
        return float(np.max(np.linalg.norm(self.vertices - _vec(p), axis=1)))

    def apply_linear(self, A) -> "Polygon":
        A = _check_linear(A)
        return Polygon(self.vertices @ A.T)

    def translate(self, v) -> "Polygon":
        return Polygon(self.vertices + _vec(v))

    def area(self) -> float:
        return _shoelace(self.vertices)

    def kernel(self) -> KernelDomain:
        return KernelDomain(POLYHEDRAL, np.ascontiguousarray(self.vertices), np.zeros((0, 2)),
                            np.zeros(2), np.zeros((2, 2)))

    def to_json(self) -> dict:
        return {"type": "polygon", "vertices": self.vertices.tolist()}


def _shoelace(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


@dataclass(frozen=True, eq=False)
class Ellipse(ConvexDomain):
    """``{p : (p - center)^T form (p - center) <= 1}``."""

    center: np.ndarray
    form: np.ndarray

    def __post_init__(self):
        c = _vec(self.center)
        M = np.asarray(self.form, dtype=float).reshape(2, 2)
        if not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(1.0, np.abs(M).max())):
            raise InvalidDomain("ellipse form must be symmetric")
        M = 0.5 * (M + M.T)
        if M[0, 0] <= 0 or np.linalg.det(M) <= 0:
            raise InvalidDomain("ellipse form must be positive definite")
        for a in (c, M):
            a.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "form", M)

    @classmethod
    def from_area_pi_form(cls, a: float, b: float, c: float) -> "Ellipse":
        """Origin-centred ellipse ``a x^2 + b xy + c y^2 <= 1`` with ``4ac - b^2 = 4``."""
        if a <= 0 or c <= 0 or abs(4 * a * c - b * b - 4) > 1e-9:
            raise InvalidDomain("need a, c > 0 and 4ac - b^2 = 4")
        return cls(np.zeros(2), np.array([[a, b / 2], [b / 2, c]]))

    @property
    def inverse_form(self) -> np.ndarray:
        return np.linalg.inv(self.form)

    def support(self, d) -> float:
        d = _vec(d)
        return float(d @ self.center + math.sqrt(d @ self.inverse_form @ d))

    def _boundary_map(self) -> np.ndarray:
        # boundary = center + G u, |u| = 1, with G G^T = form^{-1}
        return np.linalg.cholesky(self.inverse_form)

    def signed_distance(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        G = self._boundary_map()
        q = pts - self.center
        # coarse scan then Newton on the angle
        ts = np.linspace(0.0, 2 * np.pi, 64, endpoint=False)
        circle = np.stack([np.cos(ts), np.sin(ts)], axis=1) @ G.T
        d2 = ((q[:, None, :] - circle[None, :, :]) ** 2).sum(axis=2)
        t = ts[np.argmin(d2, axis=1)]
        for _ in range(60):
            c, s = np.cos(t), np.sin(t)
            b = np.stack([c, s], axis=1) @ G.T
            db = np.stack([-s, c], axis=1) @ G.T
            ddb = -b
            r = b - q
            g1 = np.einsum("ij,ij->i", r, db)
            g2 = np.einsum("ij,ij->i", db, db) + np.einsum("ij,ij->i", r, ddb)
            step = np.where(g2 > 0, g1 / np.where(g2 > 0, g2, 1.0), 0.05 * np.sign(g1))
            step = np.clip(step, -0.5, 0.5)
            t = t - step
            if np.all(np.abs(step) < 1e-14):
                break
        b = np.stack([np.cos(t), np.sin(t)], axis=1) @ G.T
        dist = np.linalg.norm(b - q, axis=1)
        inside = np.einsum("ij,jk,ik->i", q, self.form, q) <= 1.0
        return np.where(inside, dist, -dist)

    def circumradius_about(self, p) -> float:
        # farthest boundary point: maximise |G u - q| over the unit circle
        G = self._boundary_map()
        q = _vec(p) - self.center
        ts = np.linspace(0.0, 2 * np.pi, 4096, endpoint=False)
        pts = np.stack([np.cos(ts), np.sin(ts)], axis=1) @ G.T
        i = int(np.argmax(np.linalg.norm(pts - q, axis=1)))
        from scipy.optimize import minimize_scalar

        step = ts[1] - ts[0]
        res = minimize_scalar(
            lambda t: -np.linalg.norm(G @ [np.cos(t), np.sin(t)] - q),
            bounds=(ts[i] - step, ts[i] + step), method="bounded", options={"xatol": 1e-12},
        )
        return float(max(-res.fun, np.linalg.norm(pts[i] - q)))

    def apply_linear(self, A) -> "Ellipse":
        A = _check_linear(A)
        Ai = np.linalg.inv(A)
        return Ellipse(A @ self.center, Ai.T @ self.form @ Ai)

    def translate(self, v) -> "Ellipse":
        return Ellipse(self.center + _vec(v), self.form)

    def area(self) -> float:
        return math.pi / math.sqrt(np.linalg.det(self.form))

    def kernel(self) -> KernelDomain:
        return KernelDomain(ELLIPTIC, np.zeros((0, 2)), np.zeros((0, 2)),
                            np.array(self.center, dtype=float), np.array(self.inverse_form))

    def to_json(self) -> dict:
        return {"type": "ellipse", "center": self.center.tolist(), "form": self.form.tolist()}


@dataclass(frozen=True, eq=False)
class UnboundedPolygon(ConvexDomain):
    """Region bounded by a convex vertex chain and two recession rays.

    Stored with the boundary traversed counter-clockwise: in from infinity
    along ``ray_in`` to ``vertices[0]``, along the chain, then out along
    ``ray_out``. Either orientation is accepted on input.
    """

    ray_in: np.ndarray
    vertices: np.ndarray
    ray_out: np.ndarray

    bounded = False

    def __post_init__(self):
        rin, rout = _vec(self.ray_in), _vec(self.ray_out)
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        if len(v) == 0 or not np.all(np.isfinite(v)):
            raise InvalidDomain("need at least one finite vertex")
        if np.linalg.norm(rin) == 0 or np.linalg.norm(rout) == 0:
            raise InvalidDomain("zero recession ray")
        if abs(_cross(rin, rout)) <= 1e-12 * np.linalg.norm(rin) * np.linalg.norm(rout):
            raise InvalidDomain("recession rays are parallel or opposite; domain would contain a line")
        v = _clean_chain(v, closed=False)
        # as given, the same region traversed backwards, then the other
        # assignment of rays to chain ends
        for a, chain, b in ((rin, v, rout), (rout, v[::-1], rin), (rout, v, rin), (rin, v[::-1], rout)):
            if _chain_convex(a, chain, b):
                rin, v, rout = a, chain.copy(), b
                break
        else:
            raise NotConvex("vertex chain and rays do not bound a convex region")
        for a in (rin, rout, v):
            a.setflags(write=False)
        object.__setattr__(self, "ray_in", rin)
        object.__setattr__(self, "ray_out", rout)
        object.__setattr__(self, "vertices", v)

    def support(self, d) -> float:
        d = _vec(d)
        if d @ self.ray_in > 0 or d @ self.ray_out > 0:
            return math.inf
        return float(np.max(self.vertices @ d))

    def polar_cone(self):
        # d . ray <= 0 for both rays; extreme rays are the inner normals
        rin, rout = self.ray_in, self.ray_out
        a = np.array([-rin[1], rin[0]])
        b = np.array([rout[1], -rout[0]])
        # orient each normal so it is nonpositive against the other ray
        if a @ rout > 0:
            a = -a
        if b @ rin > 0:
            b = -b
        return a / np.linalg.norm(a), b / np.linalg.norm(b)

    def _lines(self):
        """Boundary pieces as (anchor, direction, is_ray) with inner normals."""
        v = self.vertices
        pieces = [(v[0], -self.ray_in)]
        for i in range(len(v) - 1):
            pieces.append((v[i], v[i + 1] - v[i]))
        pieces.append((v[-1], self.ray_out))
        return pieces

    def signed_distance(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        inner = []
        for a, e in self._lines():
            n = np.array([-e[1], e[0]]) / np.linalg.norm(e)
            inner.append((pts - a) @ n)
        depth = np.min(inner, axis=0)
        out = depth < 0
        if np.any(out):
            q = pts[out]
            v = self.vertices
            ds = [_ray_distance(q, v[0], self.ray_in), _ray_distance(q, v[-1], self.ray_out)]
            ds += [_segment_distance(q, v[i], v[i + 1]) for i in range(len(v) - 1)]
            depth = depth.copy()
            depth[out] = -np.min(ds, axis=0)
        return depth

    def circumradius_about(self, p) -> float:
        return math.inf

    def apply_linear(self, A) -> "UnboundedPolygon":
        A = _check_linear(A)
        return UnboundedPolygon(A @ self.ray_in, self.vertices @ A.T, A @ self.ray_out)

    def translate(self, v) -> "UnboundedPolygon":
        return UnboundedPolygon(self.ray_in, self.vertices + _vec(v), self.ray_out)

    def asymptote_frame(self):
        """Affine frame (matrix, origin) sending the asymptotes to the axes."""
        rin, rout = self.ray_in, self.ray_out
        a0, a1 = self.vertices[0], self.vertices[-1]
        # a0 + s rin = a1 + u rout
        s, _ = np.linalg.solve(np.column_stack([rin, -rout]), a1 - a0)
        origin = a0 + s * rin
        F = np.linalg.inv(np.column_stack([rin, rout]))
        return F, origin

    def kernel(self) -> KernelDomain:
        return KernelDomain(POLYHEDRAL, np.ascontiguousarray(self.vertices),
                            np.array([self.ray_in, self.ray_out]), np.zeros(2), np.zeros((2, 2)))

    def to_json(self) -> dict:
        return {"type": "unbounded", "ray_in": self.ray_in.tolist(),
                "vertices": self.vertices.tolist(), "ray_out": self.ray_out.tolist()}


def _chain_convex(rin, v, rout) -> bool:
    dirs = [-rin] + [v[i + 1] - v[i] for i in range(len(v) - 1)] + [rout]
    turn = 0.0
    for a, b in zip(dirs[:-1], dirs[1:]):
        c = _cross(a, b)
        if c < -MERGE_TOL * np.linalg.norm(a) * np.linalg.norm(b):
            return False
        turn += math.atan2(c, float(a @ b))
    return turn < math.pi - 1e-12


def support(domain: ConvexDomain, d) -> float:
    return domain.support(d)


def tropical_coefficient(domain: ConvexDomain, lam) -> float:
    return domain.tropical_coefficient(lam)


def boundary_distance(domain: ConvexDomain, p) -> float:
    return domain.boundary_distance(p)


def contains(domain: ConvexDomain, p, tol: float = 1e-9) -> Location:
    return domain.contains(p, tol)


def polar_cone(domain: ConvexDomain):
    return domain.polar_cone()


def apply_linear(domain: ConvexDomain, A) -> ConvexDomain:
    return domain.apply_linear(A)


def circumradius_about(domain: ConvexDomain, p) -> float:
    return domain.circumradius_about(p)


def square(half: float = 1.0) -> Polygon:
    h = float(half)
    return Polygon([[-h, -h], [h, -h], [h, h], [-h, h]])


def disk(radius: float = 1.0) -> Ellipse:
    return Ellipse(np.zeros(2), np.eye(2) / radius**2)


def quadrant() -> UnboundedPolygon:
    return UnboundedPolygon([1.0, 0.0], [[0.0, 0.0]], [0.0, 1.0])


PRESETS = {"square": square, "disk": disk, "quadrant": quadrant}


def domain_from_json(obj) -> ConvexDomain:
    """Build a domain from a preset name or the JSON mapping form."""
    if isinstance(obj, str):
        try:
            return PRESETS[obj]()
        except KeyError:
            raise InvalidDomain(f"unknown preset {obj!r}") from None
    kind = obj.get("type")
    if kind == "polygon":
        return Polygon(obj["vertices"])
    if kind == "ellipse":
        return Ellipse(obj["center"], obj["form"])
    if kind == "unbounded":
        return UnboundedPolygon(obj["ray_in"], obj["vertices"], obj["ray_out"])
    raise InvalidDomain(f"unknown domain type {kind!r}")
