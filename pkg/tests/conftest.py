import math

import numpy as np
import pytest

from equiaffine import geometry
from equiaffine.geometry import Ellipse, Polygon, UnboundedPolygon


def naive_tropical(domain, basis, p, box=200):
    """Brute force min of c_lam + lam.p over |m|, |n| <= box, written against
    the domain definitions directly (no kernel code)."""
    m, n = np.meshgrid(np.arange(-box, box + 1), np.arange(-box, box + 1))
    m, n = m.ravel(), n.ravel()
    nz = (m != 0) | (n != 0)
    m, n = m[nz], n[nz]
    lam = m[:, None] * basis[0] + n[:, None] * basis[1]
    p = np.asarray(p, dtype=float)
    if isinstance(domain, Ellipse):
        S = np.linalg.inv(domain.form)
        c = -lam @ domain.center + np.sqrt(np.einsum("ij,jk,ik->i", lam, S, lam))
    else:
        c = np.max(-lam @ domain.vertices.T, axis=1)
        if isinstance(domain, UnboundedPolygon):
            for r in (domain.ray_in, domain.ray_out):
                c = np.where(lam @ r < -1e-12 * np.hypot(*r) * np.hypot(lam[:, 0], lam[:, 1]), np.inf, c)
    return float(np.min(c + lam @ p))


def random_polygon(rng, kmin=3, kmax=8):
    from scipy.spatial import ConvexHull

    k = int(rng.integers(kmin, kmax + 1))
    while True:
        ang = np.sort(rng.uniform(0, 2 * np.pi, k))
        if np.max(np.diff(np.r_[ang, ang[0] + 2 * np.pi])) < 0.9 * np.pi:
            break
    r = rng.uniform(0.6, 1.6, k)
    pts = np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)
    return Polygon(pts[ConvexHull(pts).vertices] + rng.uniform(-0.5, 0.5, 2))


def random_ellipse(rng):
    a, b = rng.uniform(0.4, 2.5, 2)
    c = rng.uniform(-0.5, 0.5) * math.sqrt(a * b)
    return Ellipse(rng.uniform(-0.5, 0.5, 2), [[a, c], [c, b]])


def random_interior(rng, dom, dmin=0.0):
    if isinstance(dom, Ellipse):
        ctr = dom.center
    elif isinstance(dom, Polygon):
        ctr = dom.vertices.mean(axis=0)
    else:
        ctr = dom.vertices.mean(axis=0) + dom.ray_in + dom.ray_out
    for _ in range(10000):
        q = ctr + rng.uniform(-2, 2, 2)
        if dom.signed_distance(q[None])[0] > max(dmin, 1e-6):
            return q
    raise RuntimeError("no interior point found")


def random_sl2(rng, lo=-3.0, hi=3.0):
    while True:
        A = rng.uniform(lo, hi, (2, 2))
        det = np.linalg.det(A)
        if det > 0.2:
            return A / math.sqrt(det)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def presets():
    return {"square": geometry.square(), "disk": geometry.disk(), "quadrant": geometry.quadrant()}


# acceptance lines, one per criterion, echoed after the run
RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
