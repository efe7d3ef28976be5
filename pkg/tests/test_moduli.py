import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from equiaffine import lattice as L
from equiaffine import moduli as M
from equiaffine.errors import DegenerateBasis, InvalidGrid, UnboundedDomain
from equiaffine.moduli import ModuliPoint


def lattice_set(lat, r=3.0):
    vs = L.enumerate_ball(lat, r)
    return np.array(sorted((round(v.ambient[0], 9), round(v.ambient[1], 9)) for v in vs))


def test_lattice_at_examples():
    lat = M.lattice_at(ModuliPoint(0, 1, 0))
    assert np.allclose(lat.basis, np.eye(2))
    lat = M.lattice_at(ModuliPoint(0.5, 1, 0))
    assert np.allclose(lat.basis, [[1, 0], [0.5, 1]])
    rot = M.lattice_at(ModuliPoint(0, 1, math.pi / 2))
    assert np.array_equal(lattice_set(rot), lattice_set(M.lattice_at(ModuliPoint(0, 1, 0))))


def test_moduli_point_validation():
    with pytest.raises(ValueError):
        ModuliPoint(0.6, 2, 0)
    with pytest.raises(ValueError):
        ModuliPoint(0, 0.9, 0)
    with pytest.raises(ValueError):
        ModuliPoint(0, 1, math.pi)


def test_forced_draw_is_z2():
    x, y, th = M.moduli_from_draws(np.array([0.0]), np.array([1.0]), np.array([0.0]))
    assert (x[0], y[0], th[0]) == (0.0, 1.0, 0.0)


def test_sampler_is_indexed_stream():
    x, y, th = M.sample_arrays(10000, 7)
    x2, y2, th2 = M.sample_arrays(300, 7, start=4000)
    assert np.array_equal(x[4000:4300], x2) and np.array_equal(th[4000:4300], th2)
    p = M.sample(7, 5000)
    assert (p.x, p.y, p.theta) == (x[5000], y[5000], th[5000])
    assert not np.array_equal(M.sample_arrays(100, 8)[0], x[:100])
    assert np.all(np.abs(x) <= 0.5) and np.all(x * x + y * y >= 1 - 1e-12)
    assert np.all((th >= 0) & (th < math.pi))


def test_mean_inverse_y_matches_region_integral():
    # (3/pi) * int over the fundamental domain of y^-3
    v, _ = integrate.dblquad(lambda y, x: y**-3, -0.5, 0.5, lambda x: math.sqrt(1 - x * x),
                             lambda x: math.inf)
    ref = 3 / math.pi * v
    _, y, _ = M.sample_arrays(1_000_000, 3)
    inv = 1 / y
    assert abs(inv.mean() - ref) <= 4 * inv.std() / 1000
    assert ref == pytest.approx(3 / (2 * math.pi) * math.log(3), rel=1e-9)


def test_mean_root_inverse_y_near_reference():
    _, y, _ = M.sample_arrays(1_000_000, 11)
    assert y.__pow__(-0.5).mean() == pytest.approx(0.682, abs=0.002)


def test_x_histogram_chi_square():
    x, _, _ = M.sample_arrays(1_000_000, 1)
    edges = np.linspace(-0.5, 0.5, 51)
    obs, _ = np.histogram(x, edges)
    cdf = lambda t: (3 / math.pi) * np.arcsin(t)  # noqa: E731
    exp = np.diff(cdf(edges)) * len(x)
    chi2 = ((obs - exp) ** 2 / exp).sum()
    assert chi2 < stats.chi2.ppf(0.99, 49)


def test_quadrature_grid_weights():
    for y_max in (10.0, 50.0, 1000.0):
        g = M.quadrature_grid(y_max, 16, 16, 4)
        assert g.weight.sum() == pytest.approx(1 - M.tail_fraction(y_max), abs=1e-12)
        assert np.all(g.y <= y_max) and np.all(g.x**2 + g.y**2 >= 1 - 1e-12)
    g = M.quadrature_grid(50, 64, 64, 64)
    assert float(g.weight @ g.y**-0.5) == pytest.approx(0.682, abs=0.005)
    nodes = list(M.quadrature_grid(5, 2, 2, 2).nodes())
    assert len(nodes) == 8 and all(n.weight > 0 for n in nodes)
    with pytest.raises(InvalidGrid):
        M.quadrature_grid(1.0, 4, 4, 4)
    with pytest.raises(InvalidGrid):
        M.quadrature_grid(10, 1, 4, 4)


def test_quadrature_converges_to_region_integral():
    # integrand y^-1/2 on the truncated region, against direct 2-d quadrature
    y_max = 50.0
    v, _ = integrate.dblquad(lambda y, x: y**-2.5, -0.5, 0.5, lambda x: math.sqrt(1 - x * x),
                             lambda x: y_max, epsabs=1e-13)
    ref = 3 / math.pi * v
    g = M.quadrature_grid(y_max, 128, 512, 2)
    assert float(g.weight @ g.y**-0.5) == pytest.approx(ref, abs=1e-5)


def test_tail_bound():
    assert M.tail_bound(1, 1, 100) == pytest.approx(2 / math.pi * 1e-3)
    assert M.tail_bound(1, 1, 400) < M.tail_bound(1, 1, 100)
    assert M.tail_bound(1, 1, 1e12) < 1e-17
    with pytest.raises(UnboundedDomain):
        M.tail_bound(math.inf, 1, 10)


def test_reduce_to_fundamental_examples():
    p = M.reduce_to_fundamental(np.eye(2))
    assert (p.x, p.y, p.theta) == pytest.approx((0, 1, 0))
    p = M.reduce_to_fundamental([[1, 0], [2.5, 1]])
    assert (p.x, p.y, p.theta) == pytest.approx((0.5, 1, 0))
    c, s = math.cos(math.pi / 3), math.sin(math.pi / 3)
    p = M.reduce_to_fundamental([[c, s], [-s, c]])
    assert (p.x, p.y, p.theta) == pytest.approx((0, 1, math.pi / 3))
    with pytest.raises(DegenerateBasis):
        M.reduce_to_fundamental([[2, 0], [0, 1]])


def test_round_trip_and_shortest_length():
    x, y, th = M.sample_arrays(1000, 21)
    for xi, yi, ti in zip(x, y, th):
        mp = ModuliPoint(float(xi), float(yi), float(ti))
        lat = M.lattice_at(mp)
        assert abs(abs(np.linalg.det(lat.basis)) - 1) <= 1e-12
        assert L.shortest_vector(lat).norm == pytest.approx(yi**-0.5, abs=1e-10)
        if yi > 5:
            continue
        back = M.lattice_at(M.reduce_to_fundamental(lat.basis))
        assert np.allclose(lattice_set(back), lattice_set(lat), atol=1e-7)


@settings(max_examples=50, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(1.0, 20.0), st.floats(0, math.pi - 1e-9))
def test_theta_period(x, y, th):
    y = max(y, math.sqrt(1 - x * x))
    a = M.lattice_at(ModuliPoint(x, y, th))
    b = M.bases_at(x, y, th + math.pi)
    assert np.allclose(b, -a.basis, atol=1e-12)
