import math

import numpy as np
import pytest
from hypothesis import given
from scipy.linalg import expm

from hypergon import borel, hyp3
from hypergon.borel import B_BASIS, E, H, IDENTITY, K_BASIS, X, Y, BElem

from conftest import seeds


def random_traceless(rng):
    m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    return borel.traceless(m)


def random_k_vec(rng):
    return sum(c * v for c, v in zip(rng.standard_normal(3), K_BASIS))


def test_belem_validation_and_group_law(rng):
    with pytest.raises(ValueError):
        BElem(0.0)
    b1, b2 = borel.random_belem(rng), borel.random_belem(rng)
    assert np.allclose((b1 @ b2).matrix, b1.matrix @ b2.matrix)
    assert np.allclose((b1 @ b1.inverse()).matrix, np.eye(2))
    assert np.linalg.det(b1.matrix) == pytest.approx(1.0)


def test_pairing_examples(rng):
    assert borel.pairing(X, X) == 0.0
    assert borel.pairing(1j * H, H) == pytest.approx(4.0)
    u, v = random_traceless(rng), random_traceless(rng)
    g = hyp3.random_sl2c(rng)
    assert borel.pairing(borel.ad(g, u), borel.ad(g, v)) == pytest.approx(borel.pairing(u, v), abs=1e-10)
    assert borel.pairing(u, v) == pytest.approx(borel.pairing(v, u))


def test_k_and_b_isotropic_and_dual():
    kk = np.array([[borel.pairing(a, b) for b in K_BASIS] for a in K_BASIS])
    bb = np.array([[borel.pairing(a, b) for b in B_BASIS] for a in B_BASIS])
    kb = np.array([[borel.pairing(a, b) for b in B_BASIS] for a in K_BASIS])
    assert np.abs(kk).max() == 0.0
    assert np.abs(bb).max() == 0.0
    assert abs(np.linalg.det(kb)) > 0.1


@given(seeds)
def test_projections(seed):
    rng = np.random.default_rng(seed)
    u = random_traceless(rng)
    k, b = borel.project_k(u), borel.project_b(u)
    assert np.allclose(k + b, u, rtol=0, atol=1e-15)
    assert borel.in_k(k) and borel.in_b(b)
    assert np.allclose(borel.project_k(k), k) and np.allclose(borel.project_b(b), b)
    x = random_k_vec(rng)
    assert np.allclose(borel.project_k(x), x) and np.allclose(borel.project_b(x), 0)


def test_projection_of_e():
    k = borel.project_k(E)
    assert np.allclose(borel.project_b(k), 0)
    assert np.allclose(k + borel.project_b(E), E)


@given(seeds)
def test_expm_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    u = random_traceless(rng) * rng.choice([1e-8, 1e-3, 1.0])
    assert np.allclose(borel.expm_sl2(u), expm(u), atol=1e-12, rtol=1e-12)


def test_iwasawa_examples(rng):
    b, k = borel.iwasawa(np.eye(2))
    assert b == IDENTITY and np.allclose(k, np.eye(2))
    g = borel.random_belem(rng)
    b, k = borel.iwasawa(g.matrix)
    assert np.allclose(b.matrix, g.matrix, atol=1e-14) and np.allclose(k, np.eye(2), atol=1e-14)


def gram_schmidt_oracle(g):
    """Orthonormalize the second row of g, then solve for the triangular factor."""
    r2 = g[1] / np.linalg.norm(g[1])
    r1 = np.array([np.conj(r2[1]), -np.conj(r2[0])])
    k = np.array([r1, r2])
    return g @ k.conj().T, k


@given(seeds)
def test_iwasawa_random(seed):
    rng = np.random.default_rng(seed)
    g = hyp3.random_sl2c(rng, scale=2.0)
    b, k = borel.iwasawa(g)
    assert np.linalg.norm(b.matrix @ k - g) < 1e-12 * max(1.0, np.abs(g).max())
    assert np.allclose(k @ k.conj().T, np.eye(2), atol=1e-12)
    assert np.linalg.det(k) == pytest.approx(1.0, abs=1e-12)
    bo, ko = gram_schmidt_oracle(g)
    assert np.allclose(b.matrix, bo, atol=1e-11)
    assert np.allclose(k, ko, atol=1e-12)


@given(seeds)
def test_dressing_properties(seed):
    rng = np.random.default_rng(seed)
    word = borel.random_word(rng, 4)
    assert borel.dressing(np.eye(2), word) == pytest.approx(word) or all(
        np.allclose(a.matrix, b.matrix) for a, b in zip(borel.dressing(np.eye(2), word), word))
    k1, k2 = hyp3.random_su2(rng), hyp3.random_su2(rng)
    one = borel.word_array(borel.dressing(k1, borel.dressing(k2, word)))
    two = borel.word_array(borel.dressing(k1 @ k2, word))
    assert np.abs(one - two).max() < 1e-11 * max(1, np.abs(one).max())
    new = borel.dressing(k1, word)
    for a, b in zip(new, word):
        assert np.trace(a.matrix @ a.matrix.conj().T).real == pytest.approx(
            np.trace(b.matrix @ b.matrix.conj().T).real, rel=1e-12)
    # single letter: rho_B(k b)
    assert np.allclose(new[0].matrix, borel.iwasawa(k1 @ word[0].matrix)[0].matrix)


@given(seeds)
def test_dressing_rotates_vertices(seed):
    rng = np.random.default_rng(seed)
    word = borel.random_word(rng, 5)
    k = hyp3.random_su2(rng)
    left = borel.vertices_array(borel.word_array(borel.dressing(k, word)))
    right = np.array([hyp3.act(k, v) for v in borel.vertices_array(borel.word_array(word))])
    assert np.abs(left - right).max() < 1e-10 * max(1, np.abs(right).max())


def test_dressing_keeps_closed_words_closed(rng):
    word = borel.random_word(rng, 6, closed=True)
    new = borel.dressing(hyp3.random_su2(rng), word)
    prod = borel.prefix_products(borel.word_array(new))[-1]
    assert np.abs(prod - np.eye(2)).max() < 1e-11


@given(seeds)
def test_infinitesimal_dressing_matches_finite_difference(seed):
    rng = np.random.default_rng(seed)
    mats = borel.word_array(borel.random_word(rng, 4, scale=0.7))
    x = random_k_vec(rng)
    h = 1e-5
    fd = (borel.dressing_array(borel.expm_sl2(h * x), mats)
          - borel.dressing_array(borel.expm_sl2(-h * x), mats)) / (2 * h)
    xi = borel.infinitesimal_dressing(x, mats)
    assert np.abs(fd - xi).max() < 1e-7 * max(1, np.abs(xi).max())
    for m, t in zip(mats, xi):
        assert borel.in_b(borel.inv2(m) @ t, 1e-12 * max(1, np.abs(t).max()))
    assert np.abs(borel.infinitesimal_dressing(0 * x, mats)).max() == 0


def test_infinitesimal_dressing_single_letter():
    lam = 0.4
    b = expm(lam * H)
    xi = borel.infinitesimal_dressing(X, b[None])[0]
    # Ad_{b^-1} X = 1/2 [[0, e^{-2 lam}], [-e^{2 lam}, 0]]; for [[0, p], [q, 0]]
    # the b-part is [[0, p + conj(q)], [0, 0]], here [[0, -sinh(2 lam)], [0, 0]]
    want = b @ np.array([[0, -math.sinh(2 * lam)], [0, 0]])
    assert np.allclose(xi, want, atol=1e-14)


def test_phi_map_examples():
    verts = borel.phi_map([IDENTITY] * 3)
    assert all(hyp3.dist(v, hyp3.BASEPOINT) == 0 for v in verts)
    t = 0.8
    v = borel.phi_map([BElem(math.exp(t / 2))], "half_space")
    assert np.allclose(v[1].array, (0, 0, math.exp(t)))


@given(seeds)
def test_phi_round_trip(seed):
    rng = np.random.default_rng(seed)
    word = borel.random_word(rng, 5)
    back = borel.phi_inverse(borel.phi_map(word))
    assert np.abs(borel.word_array(back) - borel.word_array(word)).max() < 1e-11 * max(1, np.abs(borel.word_array(word)).max())
    closed = borel.random_word(rng, 5, closed=True)
    assert hyp3.dist(borel.phi_map(closed)[-1], hyp3.BASEPOINT) < 1e-10


def test_phi_inverse_requires_base():
    with pytest.raises(ValueError, match="polygon not based"):
        borel.phi_inverse([hyp3.HPoint("half_space", (0, 0, 2.0)), hyp3.BASEPOINT])


@given(seeds)
def test_translation_length(seed):
    rng = np.random.default_rng(seed)
    b = borel.random_belem(rng)
    d = hyp3.dist(hyp3.apply_isometry(b.matrix, hyp3.BASEPOINT), hyp3.BASEPOINT)
    assert borel.translation_length(b) == pytest.approx(d, abs=1e-11)
    tr = np.trace(b.matrix @ b.matrix.conj().T).real
    assert borel.translation_length(b) == pytest.approx(math.acosh(tr / 2), abs=1e-7)
    k = hyp3.random_su2(rng)
    assert borel.translation_length(borel.iwasawa(k @ b.matrix)[0]) == pytest.approx(borel.translation_length(b), abs=1e-11)


def test_translation_length_examples():
    assert borel.translation_length(IDENTITY) == 0.0
    assert borel.translation_length(BElem(math.exp(0.35))) == pytest.approx(0.7, abs=1e-15)
