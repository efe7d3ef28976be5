import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from skimage import measure

from equiaffine import levels as Lv
from equiaffine.errors import (CenterOutside, DegenerateFit, EmptyField, FrameSingular, NonConvex,
                               OpenContour)
from equiaffine.levels import Contour

from conftest import random_sl2


def radial(n, lo=-2.0, hi=2.0):
    xs = np.linspace(lo, hi, n)
    X, Y = np.meshgrid(xs, xs)
    return xs, xs, X * X + Y * Y


def ngon(n, r=1.0, c=(0, 0), phase=0.0):
    t = phase + 2 * np.pi * np.arange(n) / n
    return Contour(np.c_[c[0] + r * np.cos(t), c[1] + r * np.sin(t)], True)


SQUARE = Contour([[-1, -1], [1, -1], [1, 1], [-1, 1]], True)
TRI = Contour([[1, 0], [0, 1], [-1, -1]], True)


def test_circle_contour():
    cs = Lv.marching_squares(radial(401), 1.0)
    assert len(cs) == 1 and cs[0].closed
    a, ctr = Lv.contour_area_centroid(cs[0])
    assert a == pytest.approx(math.pi, abs=0.01)
    assert np.allclose(ctr, 0, atol=1e-9)
    assert cs[0].is_simple()
    assert Lv._signed_area(cs[0].points) > 0


def test_area_error_is_second_order():
    errs = [abs(Lv.contour_area_centroid(Lv.marching_squares(radial(n), 1.0)[0])[0] - math.pi)
            for n in (101, 201, 401)]
    assert errs[0] > errs[1] > errs[2]
    rate = math.log(errs[0] / errs[2]) / math.log(4)
    assert rate == pytest.approx(2, abs=0.3)


def test_linear_field_and_empty():
    xs = np.linspace(0, 1, 21)
    X, _ = np.meshgrid(xs, xs)
    cs = Lv.marching_squares((xs, xs, X), 0.5)
    assert len(cs) == 1 and not cs[0].closed
    assert np.allclose(cs[0].points[:, 0], 0.5)
    assert np.ptp(cs[0].points[:, 1]) == pytest.approx(1)
    assert Lv.marching_squares(radial(21), 100.0) == []


def test_nan_cells_end_chains():
    xs, ys, v = radial(81)
    X, _ = np.meshgrid(xs, ys)
    v = np.where(X < 0, np.nan, v)
    cs = Lv.marching_squares((xs, ys, v), 1.0)
    assert len(cs) == 1 and not cs[0].closed
    assert np.all(cs[0].points[:, 0] >= 0)


def _chain_len(p, closed):
    d = np.diff(np.vstack([p, p[:1]]) if closed else p, axis=0)
    return np.hypot(*d.T).sum()


def test_against_skimage(rng):
    # smooth random field; both tracers interpolate the same edges
    xs = np.linspace(-3, 3, 121)
    X, Y = np.meshgrid(xs, xs)
    v = np.zeros_like(X)
    for _ in range(6):
        c = rng.uniform(-3, 3, 2)
        v += rng.uniform(0.5, 1.5) * np.exp(-((X - c[0]) ** 2 + (Y - c[1]) ** 2) / rng.uniform(0.5, 2))
    for t in np.quantile(v, [0.3, 0.6, 0.85]):
        ours = Lv.marching_squares((xs, xs, v), t)
        ref = measure.find_contours(v, t)
        h = xs[1] - xs[0]
        ref = [np.c_[xs[0] + r[:, 1] * h, xs[0] + r[:, 0] * h] for r in ref]
        assert sum(len(c) for c in ours) == pytest.approx(sum(len(r) for r in ref), rel=0.02)
        L1 = sum(_chain_len(c.points, c.closed) for c in ours)
        L2 = sum(_chain_len(r, np.allclose(r[0], r[-1])) for r in ref)
        assert L1 == pytest.approx(L2, rel=1e-3)
        pts = np.vstack([c.points for c in ours])
        allref = np.vstack(ref)
        d = np.min(np.hypot(pts[:, None, 0] - allref[None, :, 0], pts[:, None, 1] - allref[None, :, 1]), 1)
        assert d.max() < 1e-9


def test_area_centroid_examples():
    a, c = Lv.contour_area_centroid(Contour([[0, 0], [1, 0], [1, 1], [0, 1]], True))
    assert a == pytest.approx(1) and c == pytest.approx((0.5, 0.5))
    a, c = Lv.contour_area_centroid(Contour([[0, 0], [1, 0], [0, 1]], True))
    assert a == pytest.approx(0.5) and c == pytest.approx((1 / 3, 1 / 3))
    a2, _ = Lv.contour_area_centroid(Contour([[0, 1], [1, 0], [0, 0]], True))
    assert a2 == pytest.approx(0.5)
    with pytest.raises(OpenContour):
        Lv.contour_area_centroid(Contour([[0, 0], [1, 1]], False))
    with pytest.raises(ValueError):
        Contour([[0, 0], [1, 1]], True)


def test_normalize():
    n = Lv.normalize_class(ngon(200, 3.0, (2, -1)))
    a, c = Lv.contour_area_centroid(n)
    assert a == pytest.approx(1, abs=1e-12) and np.allclose(c, 0, atol=1e-12)
    assert np.allclose(Lv.normalize_class(n).points, n.points, atol=1e-12)
    base = Contour(np.random.default_rng(0).normal(size=(7, 2)), True)
    base = Lv.convex_hull(base)
    moved = Contour(2.7 * base.points + np.array([5, -3]), True)
    assert np.allclose(Lv.normalize_class(moved).points, Lv.normalize_class(base).points, atol=1e-12)
    o = Lv.normalize_class(Contour([[1, 1], [2, 2], [3, 1]], False))
    assert np.allclose(o.points, [[-0.5, 0], [0, 0.5], [0.5, 0]])


def _brute_hausdorff(a, b, n=10_000):
    def dense(c):
        p, q = c.segments()
        L = np.hypot(*(q - p).T)
        s = np.sort(np.random.default_rng(1).uniform(0, L.sum(), n))
        k = np.searchsorted(np.cumsum(L), s, side="right").clip(0, len(L) - 1)
        off = s - np.r_[0, np.cumsum(L)[:-1]][k]
        return p[k] + (off / L[k])[:, None] * (q - p)[k]
    A, B = dense(a), dense(b)
    d = np.hypot(A[:, None, 0] - B[None, :, 0], A[:, None, 1] - B[None, :, 1])
    return max(d.min(1).max(), d.min(0).max())


def test_hausdorff():
    c = Lv.normalize_class(ngon(256))
    assert Lv.hausdorff(c, c) < 1e-14
    rot = Lv.normalize_class(ngon(256, phase=0.7))
    r = math.sqrt(1 / math.pi)
    assert Lv.hausdorff(c, rot) <= r * (1 - math.cos(math.pi / 256)) + 1e-12
    sq = Lv.normalize_class(SQUARE)
    got = Lv.hausdorff(c, sq)
    assert got == pytest.approx(_brute_hausdorff(c, sq), abs=2e-3)
    # analytic: square corner at sqrt(2)/2 from the centre, circle radius 1/sqrt(pi)
    assert got == pytest.approx(math.sqrt(0.5) - math.sqrt(1 / math.pi), abs=1e-3)
    assert Lv.hausdorff(sq, c) == got


def test_polar_dual_examples():
    d = Lv.polar_dual(SQUARE)
    assert {tuple(np.round(p, 12)) for p in d.points} == {(1, 0), (0, 1), (-1, 0), (0, -1)}
    d2 = Lv.polar_dual(Contour(3 * SQUARE.points, True))
    assert np.allclose(d2.points, d.points / 3)
    dt = Lv.polar_dual(TRI)
    assert len(dt) == 3
    assert Lv.contour_area_centroid(TRI)[0] * Lv.contour_area_centroid(dt)[0] == pytest.approx(6.75)
    # brute-force dual: {y : y.x <= 1 for x in K}, area by sampling
    g = np.random.default_rng(2).uniform(-3, 3, size=(400_000, 2))
    inside = np.all(g @ TRI.points.T <= 1, axis=1)
    assert inside.mean() * 36 == pytest.approx(4.5, rel=0.02)
    with pytest.raises(CenterOutside):
        Lv.polar_dual(SQUARE, (2, 0))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_polar_dual_involution(seed):
    rng = np.random.default_rng(seed)
    k = Lv.convex_hull(Contour(rng.normal(size=(12, 2)), True))
    _, c = Lv.contour_area_centroid(k)
    dd = Lv.polar_dual(Lv.polar_dual(k, c), c)
    a = Lv._clean(k.points)
    b = dd.points
    assert len(a) == len(b)
    d = np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])
    assert d.min(1).max() < 1e-8


def test_mahler_examples():
    assert Lv.mahler(SQUARE) == pytest.approx(8)
    assert Lv.mahler(ngon(256)) == pytest.approx(math.pi**2, abs=0.01)
    assert Lv.mahler(TRI) == pytest.approx(6.75)
    assert Lv.mahler(TRI, "santalo") == pytest.approx(6.75, abs=1e-9)
    pt, _ = Lv.santalo_point(TRI)
    assert np.allclose(pt, 0, atol=1e-6)
    with pytest.raises(NonConvex):
        Lv.mahler(Contour([[0, 0], [2, 0], [1, 0.3], [2, 2], [0, 2]], True))
    with pytest.raises(ValueError):
        Lv.mahler(SQUARE, "median")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_mahler_sl2_invariant_and_bounded(seed):
    rng = np.random.default_rng(seed)
    k = Lv.convex_hull(Contour(rng.normal(size=(15, 2)), True))
    A = random_sl2(rng)
    m = Lv.mahler(k)
    assert Lv.mahler(Contour(k.points @ A.T, True)) == pytest.approx(m, abs=1e-6)
    assert m <= math.pi**2 + 0.01
    e = Contour(ngon(300).points @ A.T + rng.normal(size=2), True)
    assert Lv.mahler(e) == pytest.approx(math.pi**2, abs=0.01)


def test_fit_conic_examples():
    t = np.linspace(0, 2 * np.pi, 50, endpoint=False)
    coef, cls, res = Lv.fit_conic(np.c_[2 * np.cos(t), np.sin(t)])
    assert cls == Lv.ELLIPSE and res < 1e-9
    assert np.allclose(coef / coef[2], [0.25, 0, 1, 0, 0, -1], atol=1e-9)
    x = np.linspace(0.2, 5, 40)
    coef, cls, res = Lv.fit_conic(np.c_[x, 1 / x])
    assert cls == Lv.HYPERBOLA and res < 1e-9
    assert np.allclose(coef / coef[1], [0, 1, 0, 0, 0, -1], atol=1e-8)
    # five points fix a conic, so six "generic" points are taken on a random one
    r3 = np.random.default_rng(3)
    t6 = r3.uniform(0, 2 * np.pi, 6)
    pts = np.c_[np.cos(t6), np.sin(t6)] @ r3.normal(size=(2, 2)).T + r3.normal(size=2)
    coef, _, res = Lv.fit_conic(pts)
    assert res < 1e-10
    X, Y = pts.T
    assert np.abs(np.c_[X * X, X * Y, Y * Y, X, Y, np.ones(6)] @ coef).max() < 1e-9
    with pytest.raises(DegenerateFit):
        Lv.fit_conic(pts[:5])
    with pytest.raises(DegenerateFit):
        Lv.fit_conic(np.c_[x, 2 * x + 1])


def test_hyperbola_deviation():
    x = np.linspace(0.5, 8, 200)
    I = np.eye(2)
    assert Lv.hyperbola_deviation(Contour(np.c_[x, 4 / x], False), I) < 1e-12
    # radial multiplicative noise scales x*y by (1+e)^2
    e = 0.01 * np.random.default_rng(4).standard_normal(len(x))
    noisy = np.c_[x, 4 / x] * (1 + e)[:, None]
    expect = np.std((1 + e) ** 2) / np.mean((1 + e) ** 2)
    got = Lv.hyperbola_deviation(noisy, I)
    assert got == pytest.approx(expect, rel=1e-9)
    assert got == pytest.approx(0.02, abs=0.006)
    s = np.linspace(0.5, 1.5, 101)
    seg = Lv.hyperbola_deviation(np.c_[s, 2 - s], I)
    prod = s * (2 - s)
    assert seg == pytest.approx(prod.std() / prod.mean(), rel=1e-12)
    for sc in (0.3, 2.0, 7.0):
        sq = noisy @ np.diag([sc, 1 / sc])
        assert Lv.hyperbola_deviation(sq, I) == pytest.approx(got, abs=1e-12)
    with pytest.raises(FrameSingular):
        Lv.hyperbola_deviation(noisy, [[1, 1], [2, 2]])


def test_max_locus():
    xs = np.linspace(-1, 1, 41)
    X, Y = np.meshgrid(xs, xs)
    x0, y0 = 0.213, -0.377
    v = 2 - (X - x0) ** 2 - 3 * (Y - y0) ** 2
    (px, py), val = Lv.max_locus((xs, xs, v))
    h = xs[1] - xs[0]
    assert abs(px - x0) < 1e-3 * h and abs(py - y0) < 1e-3 * h and val == pytest.approx(2)
    with pytest.raises(EmptyField):
        Lv.max_locus((xs, xs, np.full_like(v, np.nan)))


def test_metrics_and_simple():
    m = Lv.metrics(ngon(100, 2))
    assert m.area > 0 and m.conic_class == Lv.ELLIPSE
    assert m.mahler <= math.pi**2 + 0.05
    assert set(m.to_json()) == {"area", "centroid", "mahler", "conic_class", "conic_residual"}
    bow = Contour([[0, 0], [1, 1], [1, 0], [0, 1]], True)
    assert not bow.is_simple() and SQUARE.is_simple()
