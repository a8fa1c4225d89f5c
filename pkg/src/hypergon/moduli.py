"""Polygon spaces: side lengths, the cone of realizable lengths, walls, closure."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import borel, hyp3
from .borel import BElem

MAX_WALL_N = 24


def as_weights(r: Sequence[float]) -> np.ndarray:
    r = np.asarray(r, dtype=float).reshape(-1)
    if len(r) < 1 or not np.all(r > 0):
        raise ValueError("side lengths must be positive")
    return r


@dataclass(frozen=True)
class HPolygon:
    """A based hyperbolic n-gon given by its word ``(b_1, ..., b_n)`` in ``B``."""

    word: tuple[BElem, ...]

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(self.word))

    @classmethod
    def from_matrices(cls, mats: np.ndarray) -> "HPolygon":
        return cls(borel.as_word(mats))

    @classmethod
    def from_vertices(cls, vertices: Sequence[hyp3.HPoint]) -> "HPolygon":
        return cls(borel.phi_inverse(vertices))

    def __len__(self) -> int:
        return len(self.word)

    @cached_property
    def matrices(self) -> np.ndarray:
        return borel.word_array(self.word)

    @cached_property
    def vertices_X(self) -> np.ndarray:
        """Hyperboloid coordinates of the ``n + 1`` vertices."""
        return borel.vertices_array(self.matrices)

    def vertices(self, model: str = "ball") -> list[hyp3.HPoint]:
        return [hyp3.HPoint.from_hyperboloid(v, model) for v in self.vertices_X]

    @property
    def side_lengths(self) -> np.ndarray:
        return np.array([borel.translation_length(b) for b in self.word])


@dataclass(frozen=True)
class EPolygon:
    """A Euclidean n-gon given by its edge vectors."""

    edges: np.ndarray

    def __post_init__(self):
        e = np.array(self.edges, dtype=float).reshape(-1, 3)
        if np.any(np.linalg.norm(e, axis=1) == 0):
            raise ValueError("edges must have positive length")
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def side_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.edges, axis=1)

    @property
    def vertices(self) -> np.ndarray:
        return np.vstack([np.zeros(3), np.cumsum(self.edges, axis=0)])


def in_cone(r: Sequence[float]) -> bool:
    """Closed triangle-inequality cone: each side at most the sum of the others."""
    r = as_weights(r)
    total = r.sum()
    return bool(np.all(r <= total - r))


def _subset_tables(r: np.ndarray):
    """Sums and sizes of all subsets of ``r[1:]`` (bit ``k`` <-> index ``k + 1``)."""
    sums = np.zeros(1)
    sizes = np.zeros(1, dtype=np.int8)
    for w in r[1:]:
        sums = np.concatenate([sums, sums + w])
        sizes = np.concatenate([sizes, sizes + 1])
    return sums, sizes


def on_wall(r: Sequence[float], tol: float = 1e-9) -> tuple[bool, tuple[int, ...] | None]:
    """Look for a balanced partition ``I | J`` with ``|I|, |J| > 1``.

    Returns ``(True, I)`` with ``I`` a tuple of 0-based indices containing
    index 0, or ``(False, None)``.
    """
    r = as_weights(r)
    n = len(r)
    if n > MAX_WALL_N:
        raise ValueError("enumeration limit")
    total = r.sum()
    sums, sizes = _subset_tables(r)
    # I always contains index 0
    in_i = sums + r[0]
    size_i = sizes.astype(int) + 1
    ok = (size_i > 1) & (n - size_i > 1) & (np.abs(2 * in_i - total) <= tol)
    hits = np.flatnonzero(ok)
    if len(hits) == 0:
        return False, None
    mask = int(hits[0])
    witness = (0,) + tuple(k + 1 for k in range(n - 1) if mask >> k & 1)
    return True, witness


def closure_residual(poly) -> float:
    """Distance of ``(b_1...b_n) *`` from ``*`` plus the non-``B`` part of the product."""
    mats = borel.word_array(poly)
    prod = borel.prefix_products(mats)[-1]
    b, _ = borel.iwasawa_matrices(prod)
    p = hyp3.on_sheet(hyp3.from_hermitian(prod @ prod.conj().T)[1:])
    return hyp3.hdist(p, hyp3.BASEPOINT_X) + float(np.linalg.norm(prod - b))


def distance_to_geodesic(x: np.ndarray, p: np.ndarray, q: np.ndarray) -> float:
    """Distance from ``x`` to the complete geodesic through ``p`` and ``q``."""
    b = hyp3.section(p)
    binv = borel.inv2(b)
    q0 = hyp3.act(binv, q)
    u = q0[1:] / np.linalg.norm(q0[1:])
    k = hyp3.rotation_to_infinity(hyp3.BoundaryPoint(tuple(u)))
    g = k @ binv
    hs = hyp3._from_hyperboloid("half_space", hyp3.act(g, x))
    # the geodesic is now the vertical axis; sinh(d) = |zeta| / height
    return float(np.arcsinh(np.hypot(hs[0], hs[1]) / hs[2]))


def is_degenerate(poly, tol: float = 1e-9) -> bool:
    """True when every vertex lies within ``tol`` of one geodesic."""
    pts = poly.vertices_X if isinstance(poly, HPolygon) else borel.vertices_array(borel.word_array(poly))
    m = len(pts)
    best, pair = -1.0, None
    for i in range(m):
        for j in range(i + 1, m):
            d = hyp3.hdist(pts[i], pts[j])
            if d > best:
                best, pair = d, (i, j)
    if pair is None or best <= tol:
        return True
    p, q = pts[pair[0]], pts[pair[1]]
    return all(distance_to_geodesic(x, p, q) <= tol for x in pts)


def euclidean_closure_residual(poly: EPolygon) -> float:
    return float(np.linalg.norm(poly.edges.sum(axis=0)))
