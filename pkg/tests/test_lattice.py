import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from equiaffine import lattice as L
from equiaffine.errors import DegenerateBasis, RegionTooLarge
from equiaffine.lattice import Lattice
from equiaffine.moduli import ModuliPoint, lattice_at, sample_bases

Z2 = Lattice([1, 0], [0, 1])


def coeff_set(vs):
    return {tuple(v.coeffs) for v in vs}


def test_reduce_examples():
    r = L.reduce(Lattice([1, 0], [5, 1]))
    assert {tuple(np.abs(r.b1)), tuple(np.abs(r.b2))} == {(1.0, 0.0), (0.0, 1.0)}
    r = L.reduce(Lattice([1, 0], [0.5, 1]))
    assert np.allclose(r.b1, [1, 0]) and np.allclose(np.abs(r.b2), [0.5, 1])
    r = L.reduce(Lattice([2, 0], [0, 0.5]))
    assert np.allclose(np.abs(r.b1), [0, 0.5])


def test_rejects():
    with pytest.raises(DegenerateBasis):
        Lattice([1, 0], [2, 0])
    with pytest.raises(DegenerateBasis):
        Lattice([2, 0], [0, 1])
    assert Lattice.unchecked([2, 0], [0, 1]).covolume == pytest.approx(2)


def test_shortest_examples():
    v = L.shortest_vector(Z2)
    assert v.norm == 1 and v.coeffs == (1, 0)
    hexa = lattice_at(ModuliPoint(0.5, math.sqrt(3) / 2, 0.0))
    v = L.shortest_vector(hexa)
    # brute force over |m|, |n| <= 50
    m, n = np.meshgrid(np.arange(-50, 51), np.arange(-50, 51))
    pts = m.ravel()[:, None] * hexa.b1 + n.ravel()[:, None] * hexa.b2
    nrm = np.hypot(*pts.T)
    assert v.norm == pytest.approx(nrm[nrm > 0].min(), abs=1e-12)
    assert v.norm == pytest.approx((2 / math.sqrt(3)) ** 0.5, abs=1e-12)
    v = L.shortest_vector(lattice_at(ModuliPoint(0, 4, 0)))
    assert v.norm == pytest.approx(0.5)


def test_enumerate_ball_examples():
    assert coeff_set(L.enumerate_ball(Z2, 1)) == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    assert len(L.enumerate_ball(Z2, 1.5)) == 8
    z4 = lattice_at(ModuliPoint(0, 4, 0))
    got = L.enumerate_ball(z4, 0.6)
    assert sorted(tuple(np.round(v.ambient, 12)) for v in got) == [(-0.5, 0.0), (0.5, 0.0)]
    norms = [v.norm for v in L.enumerate_ball(Z2, 3)]
    assert norms == sorted(norms)


def test_enumerate_cone_examples():
    assert coeff_set(L.enumerate_cone(Z2, ([1, 0], [0, 1]), 1)) == {(1, 0), (0, 1)}
    assert coeff_set(L.enumerate_cone(Z2, ([1, 1], [1, -1]), 1.1)) == {(1, 0)}
    z4 = lattice_at(ModuliPoint(0, 4, 0))
    got = L.enumerate_cone(z4, ([0, 1], [1, 0]), 0.6)
    assert [tuple(np.round(v.ambient, 12)) for v in got] == [(0.5, 0.0)]


def test_region_guard():
    thin = lattice_at(ModuliPoint(0, 1e6, 0))
    with pytest.raises(RegionTooLarge):
        L.enumerate_ball(thin, 1e5)


def _naive_ball(lat, radius, box=100):
    m, n = np.meshgrid(np.arange(-box, box + 1), np.arange(-box, box + 1))
    m, n = m.ravel(), n.ravel()
    v = m[:, None] * lat.b1 + n[:, None] * lat.b2
    keep = (np.hypot(*v.T) <= radius * (1 + 1e-12)) & ((m != 0) | (n != 0))
    return set(zip(m[keep].tolist(), n[keep].tolist()))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.3, 4.0))
def test_ball_matches_naive(seed, radius):
    b = sample_bases(1, seed)[0]
    # a skewed input basis so the reduction matters
    lat = Lattice(b[0], b[1] + 3 * b[0])
    if L.shortest_vector(lat).norm < 0.08:
        return
    assert coeff_set(L.enumerate_ball(lat, radius)) == _naive_ball(lat, radius)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(-6, 6), st.integers(-6, 6))
def test_reduce_is_unimodular_change(seed, k, j):
    b = sample_bases(1, seed)[0]
    lat = Lattice(b[0] + k * b[1], b[1] + j * (b[0] + k * b[1]))
    red, U = L.reduce_with_transform(lat)
    assert abs(round(np.linalg.det(U))) == 1
    assert np.allclose(U @ lat.basis, red.basis, atol=1e-9)
    n1, n2 = np.hypot(*red.b1), np.hypot(*red.b2)
    assert n1 <= n2 * (1 + 1e-12)
    assert abs(red.b1 @ red.b2) <= n1 * n1 / 2 * (1 + 1e-9)


def test_shortest_is_minimal_and_minkowski():
    bases = sample_bases(1000, 5)
    for b in bases:
        lat = Lattice(b[0], b[1])
        s = L.shortest_vector(lat)
        assert s.norm**2 <= 2 / math.sqrt(3) + 1e-9
        near = L.enumerate_ball(lat, s.norm * 1.5 + 1e-9)
        assert all(v.norm >= s.norm * (1 - 1e-12) for v in near)
        assert np.allclose(s.ambient, s.coeffs[0] * lat.b1 + s.coeffs[1] * lat.b2, atol=1e-12)
