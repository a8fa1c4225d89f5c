"""Bending flows and action-angle coordinates for polygons in hyperbolic space.

For a word ``b = (b_1, ..., b_n)`` write ``P_j = b_1 ... b_j``. The vertex
``x_{j+1} = P_j *`` has matrix ``P_j P_j^*``, so

    f_j(b) = tr(P_j P_j^*) = 2 cosh d(x_1, x_{j+1}),
    F_j(b) = i (P_j P_j^*)_0                        (traceless part),

and ``det F_j = f_j^2 / 4 - 1``. The flow of ``f_j`` dresses the first ``j``
letters by ``exp(t F_j)``, which rigidly rotates ``x_2, ..., x_j`` about the
geodesic through ``x_1`` and ``x_{j+1}`` and leaves everything else in place.

Index conventions (1-based, as vertex labels): the fan triangulation has the
diagonals ``(1, 3), ..., (1, n-1)``; ``l_i`` is the length of ``(1, i+2)`` and
is carried by ``f_{i+1}``; ``theta_i`` is the angle between the triangles
``(x_1, x_{i+1}, x_{i+2})`` and ``(x_1, x_{i+2}, x_{i+3})`` along ``(1, i+2)``.
Lengths are geometric distances, ``l = arccosh(f / 2)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import borel, hyp3, moduli
from .borel import I2
from .errors import DomainError
from .moduli import HPolygon

SLACK_TOL = 1e-9


# --------------------------------------------------------------------------
# Triangulations
# --------------------------------------------------------------------------

def diagonals_nonintersecting(d1: tuple[int, int], d2: tuple[int, int], n: int) -> bool:
    """Whether two chords of a convex ``n``-gon have disjoint interiors.

    Chords sharing an endpoint do not cross; a chord crosses itself.
    """
    a, b = sorted(d1)
    c, d = sorted(d2)
    for lo, hi in ((a, b), (c, d)):
        if not 1 <= lo < hi <= n:
            raise ValueError(f"chord {(lo, hi)} is not valid for n = {n}")
    if (a, b) == (c, d):
        return False
    return not (a < c < b < d or c < a < d < b)


@dataclass(frozen=True)
class Triangulation:
    """A set of pairwise non-crossing diagonals of the ``n``-gon."""

    n: int
    diagonals: tuple[tuple[int, int], ...]

    def __post_init__(self):
        diags = tuple(tuple(sorted(int(v) for v in d)) for d in self.diagonals)
        if len(diags) > self.n - 3:
            raise ValueError("too many diagonals")
        for i, j in diags:
            if not (1 <= i and i + 1 < j <= self.n) or (i, j) == (1, self.n):
                raise ValueError(f"({i}, {j}) is not a diagonal")
        for p in range(len(diags)):
            for q in range(p + 1, len(diags)):
                if not diagonals_nonintersecting(diags[p], diags[q], self.n):
                    raise ValueError(f"diagonals {diags[p]} and {diags[q]} cross")
        object.__setattr__(self, "diagonals", diags)

    @classmethod
    def fan(cls, n: int) -> "Triangulation":
        return cls(n, tuple((1, j) for j in range(3, n)))

    @property
    def is_fan(self) -> bool:
        return self.diagonals == Triangulation.fan(self.n).diagonals


@dataclass(frozen=True)
class ActionAngle:
    """Diagonal lengths ``l`` and dihedral angles ``theta`` for the fan."""

    l: tuple[float, ...]
    theta: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "l", tuple(float(v) for v in self.l))
        object.__setattr__(self, "theta", tuple(float(v) % (2 * math.pi) for v in self.theta))
        if len(self.l) != len(self.theta):
            raise ValueError("l and theta differ in length")


# --------------------------------------------------------------------------
# Hamiltonians and their fields
# --------------------------------------------------------------------------

def _product(mats: np.ndarray, i: int, j: int) -> np.ndarray:
    """``b_i ... b_{j-1}`` for vertex labels ``i < j`` (the letters between ``x_i`` and ``x_j``)."""
    if not 1 <= i <= j <= len(mats) + 1:
        raise ValueError(f"vertex labels ({i}, {j}) out of range")
    p = I2.copy()
    for m in mats[i - 1:j - 1]:
        p = p @ m
    return p


def f(word, i: int, j: int) -> float:
    """``tr(Q Q^*)`` for ``Q = b_i ... b_{j-1}``; equals ``2 cosh d(x_i, x_j)`` on ``B^n``."""
    q = _product(borel.word_array(word), i, j)
    return float(np.sum(np.abs(q) ** 2))


def fan_f(word, k: int) -> float:
    """``f_k = tr(P_k P_k^*)``."""
    return f(word, 1, k + 1)


def _gap(q: np.ndarray) -> float:
    """``tr(Q Q^*) - 2`` without cancellation."""
    b, _ = borel.iwasawa_matrices(q)
    a = b[0, 0].real
    return (a - 1.0 / a) ** 2 + abs(b[0, 1]) ** 2


def diag_length(word, i: int, j: int, doubled: bool = False) -> float:
    """Distance ``d(x_i, x_j) = arccosh(f / 2)``; ``doubled=True`` gives ``2 arccosh(f / 2)``."""
    q = _product(borel.word_array(word), i, j)
    length = 2.0 * math.asinh(0.5 * math.sqrt(_gap(q)))
    return 2.0 * length if doubled else length


def fan_lengths(word) -> np.ndarray:
    """``(l_1, ..., l_{n-3})``, the lengths of the fan diagonals."""
    mats = borel.word_array(word)
    return np.array([diag_length(mats, 1, k) for k in range(3, len(mats))])


def bend_field(word, j: int) -> np.ndarray:
    """``F_j = i (P_j P_j^*)_0``, an element of ``su(2)``."""
    p = _product(borel.word_array(word), 1, j + 1)
    return 1j * borel.traceless(p @ p.conj().T)


def su2_det(x: np.ndarray) -> float:
    """``det X = |x_00|^2 + |x_01|^2`` for ``X in su(2)``, a sum of squares without cancellation."""
    return float(abs(x[0, 0]) ** 2 + abs(x[0, 1]) ** 2)


def su2_exp(x: np.ndarray, t: float) -> np.ndarray:
    """``exp(t X)`` for ``X in su(2)``: ``cos(t s) I + sin(t s) X / s`` with ``s = sqrt(det X)``."""
    det = su2_det(x)
    if det <= 0.0:
        return I2.copy()
    s = math.sqrt(det)
    return math.cos(t * s) * I2 + (math.sin(t * s) / s) * x


def _normalizer(word, k: int) -> float:
    """``sqrt(f_k^2 / 4 - 1) = sqrt(det F_k)``, computed from the stable gap."""
    q = _product(borel.word_array(word), 1, k + 1)
    g = _gap(q)
    # f^2/4 - 1 = (f/2 - 1)(f/2 + 1) with f - 2 = g
    return math.sqrt(0.5 * g * (0.5 * g + 2.0))


def bend_period(word, k: int, normalized: bool = False, degenerate_tol: float = 1e-12) -> float:
    """Period of the flow of ``f_k`` on words: ``2 pi / sqrt(f_k^2/4 - 1)``, or ``2 pi``.

    A degenerate diagonal (``f_k - 2 <= degenerate_tol``) gives ``inf``.
    """
    if normalized:
        return 2.0 * math.pi
    s = _normalizer(word, k)
    if 0.5 * s * s <= degenerate_tol:
        return math.inf
    return 2.0 * math.pi / s


def bend_flow(word, k: int, t: float, normalized: bool = False, degenerate_tol: float = 1e-12):
    """Flow of ``f_k`` for time ``t``: dress ``(b_1, ..., b_k)`` by ``exp(t F_k)``.

    ``normalized=True`` uses ``F_k / sqrt(det F_k)``, whose flow has period
    ``2 pi`` and turns the moving vertices at angular speed 2. Returns a word
    in the same form (tuple of ``BElem`` or array) as the input.
    """
    as_array = isinstance(word, np.ndarray)
    mats = borel.word_array(word)
    if not 1 <= k <= len(mats):
        raise ValueError(f"flow index {k} out of range")
    x = bend_field(mats, k)
    if normalized:
        s = _normalizer(mats, k)
        if 0.5 * s * s <= degenerate_tol:
            raise DomainError("degenerate diagonal")
        x = x / s
    g = su2_exp(x, t)
    out = mats.copy()
    out[:k] = borel.dressing_array(g, mats[:k])
    return out if as_array else borel.as_word(out)


def word_distance(w1, w2) -> float:
    """Largest Frobenius distance between corresponding letters."""
    a, b = borel.word_array(w1), borel.word_array(w2)
    return float(np.max(np.linalg.norm(a - b, axis=(1, 2))))


def commuting_check(word, k1: int, k2: int, s: float, t: float, normalized: bool = True) -> float:
    """Distance between the words obtained by applying the two flows in either order."""
    mats = borel.word_array(word)
    one = bend_flow(bend_flow(mats, k2, t, normalized), k1, s, normalized)
    two = bend_flow(bend_flow(mats, k1, s, normalized), k2, t, normalized)
    return word_distance(one, two)


def torus_action(word, params: Sequence[float], order: Sequence[int] | None = None):
    """Apply the normalized flows of the fan lengths, ``params[i]`` for ``l_{i+1}``.

    ``order`` lists the positions of ``params`` in application order.
    """
    mats = borel.word_array(word)
    order = range(len(params)) if order is None else order
    for idx in order:
        mats = bend_flow(mats, idx + 2, params[idx], normalized=True)
    return mats


# --------------------------------------------------------------------------
# Dihedral angles
# --------------------------------------------------------------------------

def _direction(p: np.ndarray) -> np.ndarray:
    """Unit tangent at ``*`` of the geodesic toward the hyperboloid point ``p``."""
    v = p[1:]
    return v / np.linalg.norm(v)


def _perp(v: np.ndarray, u: np.ndarray) -> np.ndarray:
    w = v - (v @ u) * u
    return w / np.linalg.norm(w)


def fan_triangle_sides(word) -> list[tuple[float, float, float]]:
    """Side lengths ``(l_{i-1}, r_{i+1}, l_i)`` of the fan triangles, with ``l_0 = r_1``, ``l_{n-2} = r_n``."""
    mats = borel.word_array(word)
    n = len(mats)
    r = [borel.translation_length(m) for m in mats]
    chain = [r[0]] + [diag_length(mats, 1, k) for k in range(3, n)] + [r[-1]]
    return [(chain[i - 1], r[i], chain[i]) for i in range(1, n - 1)]


def _check_triangles(sides, tol: float) -> None:
    for idx, (a, b, c) in enumerate(sides, start=1):
        slack = min(b + c - a, a + c - b, a + b - c)
        if slack <= tol:
            raise DomainError(f"fan triangle {idx} is degenerate (slack {slack:.3e})")


def dihedral_angles(poly, triangulation: Triangulation | None = None,
                    tol: float = SLACK_TOL) -> np.ndarray:
    """Angles ``theta_i = pi - theta_hat_i`` in ``[0, 2 pi)`` along the fan diagonals.

    ``theta_hat_i`` is the angle from the triangle ``(x_1, x_{i+1}, x_{i+2})`` to
    ``(x_1, x_{i+2}, x_{i+3})``, right-handed about the diagonal oriented from
    ``x_1`` toward ``x_{i+2}``, read off from the unit tangents at ``x_1 = *``.
    """
    mats = borel.word_array(poly)
    n = len(mats)
    if triangulation is not None and not triangulation.is_fan:
        raise ValueError("dihedral angles are implemented for the fan triangulation")
    _check_triangles(fan_triangle_sides(mats), tol)
    verts = borel.vertices_array(mats)
    dirs = [None] + [_direction(v) for v in verts[1:n]]
    out = np.empty(n - 3)
    for i in range(1, n - 2):
        u = dirs[i + 1]
        v1 = _perp(dirs[i], u)
        v2 = _perp(dirs[i + 2], u)
        hat = math.atan2(float(u @ np.cross(v1, v2)), float(v1 @ v2))
        out[i - 1] = (math.pi - hat) % (2.0 * math.pi)
    return out


def action_angle(poly, tol: float = SLACK_TOL) -> ActionAngle:
    """Fan lengths and dihedral angles of a closed polygon."""
    return ActionAngle(tuple(fan_lengths(poly)), tuple(dihedral_angles(poly, tol=tol)))


# --------------------------------------------------------------------------
# Momentum polyhedron
# --------------------------------------------------------------------------

def _chain(r: np.ndarray, l: Sequence[float]):
    chain = np.concatenate(([r[0]], np.asarray(l, dtype=float), [r[-1]]))
    return [(chain[i - 1], r[i], chain[i]) for i in range(1, len(r) - 1)]


def polyhedron_slack(r, l) -> float:
    """Smallest slack among the ``3(n - 2)`` triangle inequalities (negative outside)."""
    r = moduli.as_weights(r)
    l = np.asarray(l, dtype=float).reshape(-1)
    if len(l) != len(r) - 3:
        raise ValueError("need n - 3 diagonal lengths")
    return min(min(b + c - a, a + c - b, a + b - c) for a, b, c in _chain(r, l))


def momentum_polyhedron_contains(r, l, tol: float = 0.0) -> bool:
    return polyhedron_slack(r, l) >= -tol


def polyhedron_box(r) -> np.ndarray:
    """Upper bounds ``min(r_1 + ... + r_{i+1}, r_{i+2} + ... + r_n)`` on each ``l_i``."""
    r = moduli.as_weights(r)
    n = len(r)
    cs = np.cumsum(r)
    return np.array([min(cs[i], cs[-1] - cs[i]) for i in range(1, n - 2)])


def sample_polyhedron(r, count: int, seed: int = 0, slack: float = SLACK_TOL,
                      batch: int = 4096, max_draws: int = 10_000_000) -> np.ndarray:
    """Uniform interior points of the momentum polyhedron by rejection from its box."""
    r = moduli.as_weights(r)
    box = polyhedron_box(r)
    rng = np.random.default_rng(seed)
    out: list[np.ndarray] = []
    drawn = 0
    while len(out) < count:
        if drawn >= max_draws:
            raise DomainError("momentum polyhedron has no interior points to sample")
        cand = rng.random((batch, len(box))) * box
        drawn += batch
        for l in cand:
            if polyhedron_slack(r, l) > slack:
                out.append(l)
                if len(out) == count:
                    break
    return np.array(out).reshape(count, len(box))


# --------------------------------------------------------------------------
# Reconstruction from action-angle data
# --------------------------------------------------------------------------

def _angle_at_apex(a: float, b: float, c: float) -> float:
    """Angle between the sides ``a`` and ``b`` of a triangle with opposite side ``c``."""
    num = math.cosh(a) * math.cosh(b) - math.cosh(c)
    cos = num / (math.sinh(a) * math.sinh(b))
    return math.acos(max(-1.0, min(1.0, cos)))


def reconstruct(r, aa: ActionAngle, tol: float = SLACK_TOL) -> HPolygon:
    """Closed based polygon with side lengths ``r`` and fan coordinates ``aa``.

    The triangles are fanned out from ``x_1 = *``: each is fixed by its angle at
    ``x_1`` and glued to the previous one along the shared diagonal at
    dihedral angle ``pi - theta_i``. The first vertex ``x_2`` lies toward
    ``oo`` and ``x_3`` in the half-plane spanned with ``+x``.
    """
    r = moduli.as_weights(r)
    n = len(r)
    if n < 3:
        raise ValueError("need at least three sides")
    l = np.asarray(aa.l, dtype=float)
    if polyhedron_slack(r, l) <= tol:
        raise DomainError("diagonal lengths are not interior to the momentum polyhedron")
    tri = _chain(r, l)
    alphas = [_angle_at_apex(a, c, b) for a, b, c in tri]
    dists = [r[0]] + list(l) + [r[-1]]
    dirs = [np.array([0.0, 0.0, 1.0])]
    dirs.append(math.cos(alphas[0]) * dirs[0] + math.sin(alphas[0]) * np.array([1.0, 0.0, 0.0]))
    for i in range(1, n - 2):
        u = dirs[i]
        v1 = _perp(dirs[i - 1], u)
        hat = math.pi - aa.theta[i - 1]
        w = math.cos(hat) * v1 + math.sin(hat) * np.cross(u, v1)
        dirs.append(math.cos(alphas[i]) * u + math.sin(alphas[i]) * w)
    verts = [hyp3.BASEPOINT_X]
    for s, d in zip(dists, dirs):
        verts.append(hyp3.on_sheet(math.sinh(s) * d))
    verts.append(hyp3.BASEPOINT_X)
    return HPolygon(borel.phi_inverse([hyp3.HPoint.from_hyperboloid(v) for v in verts]))


def diagonal_axis(word, k: int) -> tuple[hyp3.BoundaryPoint, hyp3.BoundaryPoint]:
    """Endpoints ``(p, q)`` of the geodesic through ``x_1`` and ``x_{k+1}``, oriented toward ``q``."""
    verts = borel.vertices_array(borel.word_array(word))
    a, b = verts[0], verts[k]
    return (hyp3.BoundaryPoint(tuple(hyp3.endpoint_raw(b, a))),
            hyp3.BoundaryPoint(tuple(hyp3.endpoint_raw(a, b))))


def rotation_angle(word_before, word_after, k: int, vertex: int) -> float:
    """Angle in ``(-pi, pi]`` by which ``x_vertex`` turned about the diagonal ``(1, k + 1)``.

    The diagonal starts at ``x_1 = *``, so an ``SU(2)`` element takes it to the
    vertical axis over ``0``, where rotations act on the horizontal coordinate.
    """
    _, q = diagonal_axis(word_before, k)
    rot = hyp3.rotation_to_infinity(q)

    def horizontal(word):
        x = borel.vertices_array(borel.word_array(word))[vertex - 1]
        hs = hyp3._from_hyperboloid("half_space", hyp3.act(rot, x))
        return complex(hs[0], hs[1])

    return cmath.phase(horizontal(word_after) / horizontal(word_before))


def length_field_rank(word, tol: float = 1e-8) -> tuple[int, list[float]]:
    """Numerical rank of the bending generators of ``l_1, ..., l_{n-3}`` at ``word``.

    Returns the rank and the singular values of the stacked tangent vectors.
    """
    mats = borel.word_array(word)
    n = len(mats)
    rows = []
    for k in range(2, n - 1):
        x = bend_field(mats, k) / _normalizer(mats, k)
        tangent = np.zeros_like(mats)
        tangent[:k] = borel.infinitesimal_dressing(x, mats[:k])
        flat = tangent.reshape(-1)
        rows.append(np.concatenate([flat.real, flat.imag]))
    if not rows:
        return 0, []
    sv = np.linalg.svd(np.array(rows), compute_uv=False)
    return int(np.sum(sv > tol * max(1.0, sv[0]))), sv.tolist()
