import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from equiaffine import geometry, tropical
from equiaffine import lattice as L
from equiaffine.errors import PointOutside
from equiaffine.geometry import Polygon, UnboundedPolygon
from equiaffine.lattice import Lattice
from equiaffine.moduli import sample_bases

from conftest import naive_tropical, random_ellipse, random_interior, random_polygon, random_sl2

Z2 = Lattice([1, 0], [0, 1])


def test_examples(presets):
    v = tropical.eval(presets["square"], Z2, (0, 0))
    assert v.value == 1 and v.argmin.coeffs == (1, 0)
    assert tropical.eval(presets["square"], Z2, (1, 0.3)).value == 0
    v = tropical.eval(presets["quadrant"], Z2, (2, 3))
    assert v.value == 2 and v.argmin.coeffs == (1, 0)


def test_value_matches_argmin(rng):
    for _ in range(200):
        dom = random_polygon(rng) if rng.random() < 0.5 else random_ellipse(rng)
        b = sample_bases(1, int(rng.integers(1 << 30)))[0]
        lat = Lattice(b[0], b[1])
        p = random_interior(rng, dom)
        v = tropical.eval(dom, lat, p)
        lam = v.argmin.ambient
        assert v.value == pytest.approx(dom.tropical_coefficient(lam) + lam @ p, abs=1e-10)
        d = dom.boundary_distance(p)
        assert v.certified_radius == pytest.approx(v.value / d, rel=1e-9)


def test_certified_bound_holds(rng):
    # c_lam + lam.p >= |lam| d for every covector
    for _ in range(50):
        dom = random_polygon(rng) if rng.random() < 0.5 else random_ellipse(rng)
        p = random_interior(rng, dom)
        d = dom.boundary_distance(p)
        for lam in rng.normal(size=(50, 2)) * rng.uniform(0.1, 5):
            assert dom.tropical_coefficient(lam) + lam @ p >= np.hypot(*lam) * d - 1e-9


def test_naive_oracle_mixed(rng):
    doms = [random_polygon(rng) for _ in range(4)] + [random_ellipse(rng) for _ in range(3)] + [
        geometry.quadrant(), UnboundedPolygon([1, 0], [[0, 1], [2, 0]], [0, 1]),
        UnboundedPolygon([1, 0], [[0, 0]], [1, 1])]
    for dom in doms:
        for seed in range(8):
            b = sample_bases(1, seed + 100)[0]
            if np.hypot(*b[0]) < 0.5:  # keep the naive box adequate
                continue
            p = random_interior(rng, dom, 0.05)
            got = tropical.eval(dom, Lattice(b[0], b[1]), p).value
            assert got == pytest.approx(naive_tropical(dom, b, p, 120), abs=1e-9)


def test_batch(presets):
    pts = [(x, y) for x in (-0.5, 0, 0.5) for y in (-0.5, 0, 0.5)]
    out = tropical.eval_batch(presets["disk"], Z2, pts)
    vals = np.array([o.value for o in out]).reshape(3, 3)
    assert np.allclose(vals, vals[::-1, ::-1])
    one = tropical.eval_batch(presets["disk"], Z2, [(0.1, 0.2)])[0]
    assert one.value == tropical.eval(presets["disk"], Z2, (0.1, 0.2)).value
    mixed = tropical.eval_batch(presets["disk"], Z2, [(0, 0), (3, 0)])
    assert isinstance(mixed[1], PointOutside) and mixed[0].value == 1


def test_outside_raises(presets):
    with pytest.raises(PointOutside):
        tropical.eval(presets["square"], Z2, (2, 0))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_equivariance(seed):
    rng = np.random.default_rng(seed)
    dom = [random_polygon(rng), random_ellipse(rng), geometry.quadrant()][seed % 3]
    A = random_sl2(rng, -2, 2)
    b = sample_bases(1, seed)[0]
    lat = Lattice(b[0], b[1])
    p = random_interior(rng, dom, 0.02)
    lhs = tropical.eval(dom.apply_linear(A), lat, A @ p).value
    rhs = tropical.eval(dom, Lattice.from_basis(b @ A), p).value
    assert lhs == pytest.approx(rhs, abs=1e-9, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([0.5, 2.0, 5.0]))
def test_scaling(seed, r):
    rng = np.random.default_rng(seed)
    dom = random_polygon(rng) if seed % 2 else random_ellipse(rng)
    b = sample_bases(1, seed)[0]
    lat = Lattice(b[0], b[1])
    p = random_interior(rng, dom)
    assert tropical.eval(dom.scale(r), lat, r * p).value == pytest.approx(
        r * tropical.eval(dom, lat, p).value, abs=1e-10, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_monotone_in_domain(seed):
    rng = np.random.default_rng(seed)
    big = random_polygon(rng)
    v = big.vertices
    c = v.mean(axis=0)
    small = Polygon(c + 0.7 * (v - c))
    b = sample_bases(1, seed)[0]
    lat = Lattice(b[0], b[1])
    p = random_interior(rng, small)
    assert tropical.eval(small, lat, p).value <= tropical.eval(big, lat, p).value + 1e-10


def test_disk_center_is_shortest_length():
    for b in sample_bases(300, 9):
        lat = Lattice(b[0], b[1])
        assert tropical.eval(geometry.disk(), lat, (0, 0)).value == pytest.approx(
            L.shortest_vector(lat).norm, abs=1e-10)
