import math

import numpy as np
import pytest
from hypothesis import given, settings

from hypergon import borel, hyp3, moduli
from hypergon import gaussmap as gm
from hypergon.errors import ConvergenceError, DomainError
from hypergon.gaussmap import Configuration, Stability
from hypergon.hyp3 import BASEPOINT, HPoint
from hypergon.moduli import EPolygon, HPolygon

from conftest import seeds

EQUATOR = np.array([[math.cos(a), math.sin(a), 0.0] for a in 2 * math.pi * np.arange(3) / 3])
TETRAHEDRON = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / math.sqrt(3)


def based_points(c, poly_first_vertex):
    g = borel.inv2(hyp3.section(poly_first_vertex))
    return np.array([hyp3.act_boundary(g, u) for u in c.points])


def test_configuration_validation():
    c = Configuration([[0, 0, 2], [1, 0, 0]], [1, 2])
    assert np.allclose(c.points[0], (0, 0, 1))
    with pytest.raises(ValueError):
        Configuration([[0, 0, 1]], [1, 2])
    with pytest.raises(ValueError):
        Configuration([[0, 0, 1]], [-1])


def test_gauss_h_vertical_edge():
    c = gm.gauss_h(HPolygon((borel.BElem(math.exp(0.5)),)))
    assert c.points[0] == pytest.approx((0, 0, 1))
    assert c.boundary_points()[0].chart is None
    assert c.weights[0] == pytest.approx(1.0)
    with pytest.raises(DomainError):
        gm.gauss_h(HPolygon((borel.IDENTITY,)))


@given(seeds)
def test_gauss_h_equivariant(seed):
    rng = np.random.default_rng(seed)
    verts = HPolygon(borel.random_word(rng, 5)).vertices_X
    g = hyp3.random_sl2c(rng)
    moved = np.array([hyp3.act(g, v) for v in verts])
    left = gm.gauss_from_vertices(moved)
    right = gm.gauss_from_vertices(verts).moved(g)
    assert np.abs(left.points - right.points).max() < 1e-9
    assert np.allclose(left.weights, right.weights, atol=1e-9)


def test_classify_examples(rng):
    p, q, s = hyp3.random_boundary(rng).array, hyp3.random_boundary(rng).array, hyp3.random_boundary(rng).array
    assert gm.classify_stability(Configuration([p, q, s], [1, 1, 1])).kind is Stability.STABLE
    assert gm.classify_stability(Configuration([p, p, q, q], [1, 1, 1, 1])).kind is Stability.NICE_SEMISTABLE
    unstable = gm.classify_stability(Configuration([p, p, p, q], [1, 1, 1, 1]))
    assert unstable.kind is Stability.UNSTABLE and unstable.witness == (0, 1, 2)
    assert gm.classify_stability(Configuration([p, p, q, s], [1, 1, 1, 1])).kind is Stability.SEMISTABLE_NOT_NICE
    # points closer than the clustering angle count as one
    p2 = p + 1e-11 * np.cross(p, q)
    assert gm.classify_stability(Configuration([p, p2, q], [1, 1, 1])).kind is Stability.UNSTABLE


def test_contraction_map_limits(rng):
    c = gm.random_stable_configuration(rng, 5)
    z = hyp3.random_point(rng)
    t = 1e-8
    moved = gm.contraction_map(c, z, t)
    assert hyp3.dist(moved, z) <= t * c.total * (1 + 1e-6)
    eta = hyp3.random_boundary(rng)
    same = Configuration([eta.array] * 3, [0.5, 1.0, 0.25])
    assert hyp3.dist(gm.contraction_map(same, z), hyp3.geodesic_flow(z, eta, 1.75)) < 1e-12


@given(seeds)
def test_contraction_is_strict(seed):
    rng = np.random.default_rng(seed)
    c = gm.random_stable_configuration(rng, int(rng.integers(3, 7)))
    z1, z2 = hyp3.random_point(rng, 1.5), hyp3.random_point(rng, 1.5)
    assert hyp3.dist(gm.contraction_map(c, z1), gm.contraction_map(c, z2)) < hyp3.dist(z1, z2)


def test_fixed_point_rejects_semistable():
    c = Configuration([[0, 0, 1], [0, 0, -1]], [1, 1])
    with pytest.raises(DomainError, match="configuration not stable"):
        gm.fixed_point(c)


def test_fixed_point_budget_exhausted(rng):
    c = gm.random_stable_configuration(rng, 5)
    with pytest.raises(ConvergenceError) as info:
        gm.fixed_point(c, max_iter=2)
    assert info.value.residual > 0 and info.value.iterations == 2


def test_fixed_point_equator_symmetry():
    fp = gm.solve_fixed_point(Configuration(EQUATOR, [1, 1, 1]))
    assert abs(fp.point.to("ball").coords[2]) < 1e-9
    assert fp.residual < 1e-11


@given(seeds)
@settings(max_examples=25)
def test_fixed_point_closes_polygon(seed):
    rng = np.random.default_rng(seed)
    c = gm.random_stable_configuration(rng, int(rng.integers(3, 9)))
    poly, fp = gm.close_polygon(c)
    assert fp.residual < 1e-11
    assert fp.contraction_factor < 1
    assert fp.confined
    assert moduli.closure_residual(poly) < 1e-9
    assert np.allclose(poly.side_lengths, c.weights, atol=1e-9)
    # the Gauss image is c moved by the basing translation
    got = gm.gauss_h(poly).points
    assert np.abs(got - based_points(c, fp.point.X)).max() < 1e-8


def test_accelerated_solver_agrees(rng):
    c = gm.random_stable_configuration(rng, 6)
    a = gm.solve_fixed_point(c)
    b = gm.solve_fixed_point(c, accelerate=True)
    assert hyp3.dist(a.point, b.point) < 1e-10
    assert b.iterations <= a.iterations


def test_contraction_certificate(rng):
    c = gm.random_stable_configuration(rng, 5)
    x = gm.fixed_point(c)
    lip = gm.lipschitz_estimate(c, x, pairs=1000, rng=rng)
    assert 0 < lip < 1


def test_inverse_gauss_symmetric_triangle():
    poly = gm.inverse_gauss_h(Configuration(EQUATOR, [1, 1, 1]))
    assert np.allclose(poly.side_lengths, 1.0, atol=1e-9)
    assert moduli.closure_residual(poly) < 1e-9


@given(seeds)
@settings(max_examples=25)
def test_inverse_gauss_recovers_polygon(seed):
    rng = np.random.default_rng(seed)
    poly = HPolygon(borel.random_word(rng, int(rng.integers(3, 8)), scale=0.8, closed=True))
    back = gm.inverse_gauss_h(gm.gauss_h(poly))
    assert np.abs(back.vertices_X - poly.vertices_X).max() < 1e-8


def test_inverse_gauss_rejects_unstable():
    c = Configuration([[0, 0, 1], [0, 0, 1], [1, 0, 0]], [1, 1, 1])
    with pytest.raises(DomainError):
        gm.inverse_gauss_h(c)
    # weights outside the cone are never stable
    with pytest.raises(DomainError):
        gm.inverse_gauss_h(Configuration(EQUATOR, [1, 1, 2.1]))


def test_conformal_center_tetrahedron():
    x = gm.conformal_center(Configuration(TETRAHEDRON, [1, 1, 1, 1]))
    assert np.abs(x.to("ball").array).max() < 1e-12


@given(seeds)
def test_conformal_center_equivariant(seed):
    rng = np.random.default_rng(seed)
    c = gm.random_stable_configuration(rng, int(rng.integers(3, 7)))
    g = hyp3.random_sl2c(rng, 0.5)
    x = gm.conformal_center(c)
    y = gm.conformal_center(c.moved(g))
    assert hyp3.dist(y, hyp3.apply_isometry(g, x)) < 1e-8
    assert gm.gradient_norm(c, x) < 1e-10


def test_conformal_center_small_measures(rng):
    p, q, s = (hyp3.random_boundary(rng).array for _ in range(3))
    # two atoms always have one carrying at least half the mass
    with pytest.raises(DomainError):
        gm.conformal_center(Configuration([p, q], [1, 0.9]))
    c = Configuration([p, q, s], [1, 0.9, 0.8])
    res = gm.solve_conformal_center(c)
    assert res.gradient_norm < 1e-10
    assert gm.gradient_norm(c, res.point) < 1e-10


@given(seeds)
def test_busemann_average_gradient_matches_differences(seed):
    rng = np.random.default_rng(seed)
    c = gm.random_stable_configuration(rng, 4)
    v = hyp3.random_point(rng, 0.7, "ball").array
    s = 1 - v @ v
    analytic = gm.busemann_average_gradient(c, HPoint("ball", tuple(v)))
    errs = []
    for h in (1e-3, 5e-4):
        fd = np.array([(gm.busemann_average(c, HPoint("ball", tuple(v + h * e)))
                        - gm.busemann_average(c, HPoint("ball", tuple(v - h * e)))) / (2 * h) for e in np.eye(3)])
        errs.append(np.abs(s * s / 4 * fd - analytic).max())
    assert errs[1] < 1e-6
    # second order: halving h divides the error by about four
    assert errs[1] < 0.3 * errs[0] or errs[0] < 1e-10


def test_shrink_curve_basics(rng):
    c = gm.random_stable_configuration(rng, 5)
    one = gm.shrink_curve(c, [1.0])[0]
    assert hyp3.dist(one, gm.fixed_point(c)) < 1e-10
    rep = gm.shrink_limit_check(c)
    assert rep["monotone"] and rep["pass"]
    assert all(d > 0 for d in rep["distances"])
    with pytest.raises(ValueError):
        gm.shrink_curve(c, [0.0])


def test_shrink_curve_symmetric_plane():
    c = Configuration(EQUATOR, [1, 1, 1])
    center = gm.conformal_center(c)
    assert np.abs(center.to("ball").array).max() < 1e-12
    for x in gm.shrink_curve(c, [0.5, 0.05]):
        assert abs(x.to("ball").coords[2]) < 1e-9


def test_gauss_e_equilateral():
    tri = EPolygon([[1, 0, 0], [-0.5, math.sqrt(3) / 2, 0], [-0.5, -math.sqrt(3) / 2, 0]])
    c = gm.gauss_e(tri)
    assert np.allclose(np.linalg.norm(c.points, axis=1), 1)
    assert np.abs(c.points.sum(axis=0)).max() < 1e-15
    assert np.allclose(c.weights, 1)


@given(seeds)
def test_inverse_gauss_e(seed):
    rng = np.random.default_rng(seed)
    c = gm.random_stable_configuration(rng, int(rng.integers(3, 8)))
    poly = gm.inverse_gauss_e(c)
    assert moduli.euclidean_closure_residual(poly) < 1e-9
    assert np.allclose(poly.side_lengths, c.weights)
    # the image is c moved so that its conformal center is the origin
    g = borel.inv2(hyp3.section(gm.conformal_center(c).X))
    assert np.abs(gm.gauss_e(poly).points - c.moved(g).points).max() < 1e-9
    again = gm.inverse_gauss_e(gm.gauss_e(poly))
    assert np.abs(again.edges - poly.edges).max() < 1e-9


def test_inverse_gauss_e_balanced_is_identity():
    c = Configuration(TETRAHEDRON, [1, 1, 1, 1])
    assert np.abs(gm.inverse_gauss_e(c).edges - TETRAHEDRON).max() < 1e-12


def test_transfer_equilateral_and_walls():
    tri = EPolygon([[1, 0, 0], [-0.5, math.sqrt(3) / 2, 0], [-0.5, -math.sqrt(3) / 2, 0]])
    h = gm.transfer_e_to_h(tri)
    assert np.allclose(h.side_lengths, 1, atol=1e-9)
    assert moduli.closure_residual(h) < 1e-9
    square = EPolygon([[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]])
    with pytest.raises(DomainError, match="wall"):
        gm.transfer_e_to_h(square)
    with pytest.raises(DomainError, match="not closed"):
        gm.transfer_e_to_h(EPolygon([[1, 0, 0], [0, 1, 0], [0, 0, 1]]))


@given(seeds)
@settings(max_examples=20)
def test_transfer_round_trip(seed):
    rng = np.random.default_rng(seed)
    c = gm.random_stable_configuration(rng, int(rng.integers(3, 7)))
    e = gm.inverse_gauss_e(c)
    h = gm.transfer_e_to_h(e)
    assert np.allclose(h.side_lengths, e.side_lengths, atol=1e-9)
    back = gm.transfer_h_to_e(h)
    assert np.abs(gm.gauss_e(back).points - gm.gauss_e(e).points).max() < 1e-8


def test_images_of_closed_polygons_are_semistable(rng):
    for _ in range(20):
        poly = HPolygon(borel.random_word(rng, int(rng.integers(3, 8)), closed=True))
        assert gm.classify_stability(gm.gauss_h(poly)).kind is Stability.STABLE
    xi = hyp3.random_boundary(rng)
    verts = [BASEPOINT]
    for t in (0.7, 0.5, -0.9, -0.3):
        verts.append(hyp3.geodesic_flow(verts[-1], xi, t))
    degenerate = HPolygon.from_vertices(verts)
    assert gm.classify_stability(gm.gauss_h(degenerate)).kind is Stability.NICE_SEMISTABLE


def test_anderson_mixing_saves_iterations(rng):
    plain, fast = 0, 0
    for n in (3, 4, 5):
        c = gm.random_stable_configuration(rng, n)
        a = gm.solve_fixed_point(c)
        b = gm.solve_fixed_point(c, accelerate=True)
        assert hyp3.dist(a.point, b.point) < 1e-9
        plain, fast = plain + a.iterations, fast + b.iterations
    assert fast < 0.8 * plain
