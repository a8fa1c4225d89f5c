import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypergon import borel, hyp3, moduli
from hypergon.borel import BElem
from hypergon.moduli import EPolygon, HPolygon

from conftest import seeds


def partition_oracle(r, tol):
    """Brute force over all two-block partitions with both blocks of size > 1."""
    n = len(r)
    for size in range(2, n - 1):
        for idx in itertools.combinations(range(n), size):
            rest = [i for i in range(n) if i not in idx]
            if abs(sum(r[i] for i in idx) - sum(r[i] for i in rest)) <= tol:
                return True
    return False


def test_in_cone_examples():
    assert moduli.in_cone([1, 1, 1])
    assert not moduli.in_cone([1, 1, 1, 3.1])
    assert moduli.in_cone([1, 1, 2])


def test_on_wall_examples():
    assert moduli.on_wall([1, 1, 1]) == (False, None)
    hit, witness = moduli.on_wall([1, 1, 1, 1])
    assert hit and len(witness) == 2 and 0 in witness
    assert not moduli.on_wall([1, 1.1, 1.21, 1.331], 1e-9)[0]
    with pytest.raises(ValueError, match="enumeration limit"):
        moduli.on_wall(np.ones(25))


@given(st.lists(st.integers(1, 6), min_size=4, max_size=7))
def test_on_wall_matches_oracle_integers(r):
    hit, witness = moduli.on_wall(r)
    assert hit == partition_oracle(r, 1e-9)
    if hit:
        rest = [i for i in range(len(r)) if i not in witness]
        assert sum(r[i] for i in witness) == sum(r[i] for i in rest)
        assert 1 < len(witness) < len(r) - 1


def test_closure_residual_examples(rng):
    assert moduli.closure_residual(borel.random_word(rng, 5, closed=True)) < 1e-12
    assert moduli.closure_residual([BElem(math.exp(0.5))]) == pytest.approx(1.0, abs=1e-15)


@given(seeds)
def test_closure_residual_invariant_under_dressing(seed):
    rng = np.random.default_rng(seed)
    word = borel.random_word(rng, 4)
    k = hyp3.random_su2(rng)
    # dressing conjugates the product by an SU(2) element up to K, so the distance part is preserved
    new = borel.dressing(k, word)
    d0 = hyp3.hdist(borel.vertices_array(borel.word_array(word))[-1], hyp3.BASEPOINT_X)
    d1 = hyp3.hdist(borel.vertices_array(borel.word_array(new))[-1], hyp3.BASEPOINT_X)
    assert d1 == pytest.approx(d0, abs=1e-10)
    closed = borel.random_word(rng, 5, closed=True)
    assert moduli.closure_residual(borel.dressing(k, closed)) < 1e-10


@given(seeds)
def test_side_lengths_commute_with_dressing(seed):
    rng = np.random.default_rng(seed)
    word = borel.random_word(rng, 5)
    p, q = HPolygon(word), HPolygon(borel.dressing(hyp3.random_su2(rng), word))
    assert np.allclose(p.side_lengths, q.side_lengths, atol=1e-11)
    verts = p.vertices_X
    d = [hyp3.hdist(a, b) for a, b in zip(verts[:-1], verts[1:])]
    assert np.allclose(p.side_lengths, d, atol=1e-10)


def test_degenerate_examples(rng):
    diag = [BElem(math.exp(s)) for s in (0.3, -0.7, 0.2, 0.2)]
    assert moduli.is_degenerate(diag)
    assert not moduli.is_degenerate(borel.random_word(rng, 5, closed=True))
    # back and forth along one geodesic with unit steps
    xi = hyp3.random_boundary(rng)
    verts = [hyp3.BASEPOINT]
    for t in (1, 1, -1, -1):
        verts.append(hyp3.geodesic_flow(verts[-1], xi, t))
    poly = HPolygon.from_vertices(verts)
    assert np.allclose(poly.side_lengths, 1.0)
    assert moduli.is_degenerate(poly)
    assert moduli.closure_residual(poly) < 1e-12


def test_distance_to_geodesic(rng):
    p, q = hyp3.random_point(rng).X, hyp3.random_point(rng).X
    mid = hyp3.flow(p, hyp3.endpoint_raw(p, q), 0.3)
    assert moduli.distance_to_geodesic(mid, p, q) < 1e-12
    # the basepoint has distance asinh(1 / height) ... check against a vertical axis
    axis_p = hyp3.HPoint("half_space", (0, 0, 1)).X
    axis_q = hyp3.HPoint("half_space", (0, 0, 3)).X
    x = hyp3.HPoint("half_space", (2.0, 0, 1.0)).X
    assert moduli.distance_to_geodesic(x, axis_p, axis_q) == pytest.approx(math.asinh(2.0), abs=1e-12)


def test_euclidean_polygons(rng):
    tri = np.array([[1, 0, 0], [-0.5, math.sqrt(3) / 2, 0], [-0.5, -math.sqrt(3) / 2, 0]])
    assert moduli.euclidean_closure_residual(EPolygon(tri)) < 1e-15
    assert moduli.euclidean_closure_residual(EPolygon([[3, 4, 0]])) == 5.0
    e = rng.standard_normal((6, 3))
    assert moduli.euclidean_closure_residual(EPolygon(e)) == pytest.approx(np.linalg.norm(e.sum(axis=0)))
    with pytest.raises(ValueError):
        EPolygon([[0, 0, 0]])
