"""The group ``B`` of upper-triangular matrices, Iwasawa ``G = BK`` and dressing.

``B`` is the set of ``[[a, z], [0, 1/a]]`` with ``a > 0``; ``K = SU(2)``.
Lie algebra elements are traceless complex 2x2 arrays. The invariant pairing
is ``<u, v> = 2 Im tr(uv)``, for which ``su(2)`` and ``b`` are isotropic and
dually paired.

Words ``(b_1, ..., b_n)`` are accepted either as sequences of :class:`BElem`
or as complex arrays of shape ``(n, 2, 2)``; the array form is what the
numerical code works with, and may hold arbitrary ``SL(2, C)`` letters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import hyp3

I2 = np.eye(2, dtype=complex)

# Named elements of sl(2, C)
H = np.array([[1, 0], [0, -1]], dtype=complex)
E = np.array([[0, 1], [0, 0]], dtype=complex)
F = np.array([[0, 0], [1, 0]], dtype=complex)
X = 0.5 * np.array([[0, 1], [-1, 0]], dtype=complex)
Y = 0.5 * np.array([[0, 1j], [1j, 0]], dtype=complex)

K_BASIS = (X, Y, 0.5j * H)
B_BASIS = (E, 1j * E, 0.5 * H)
# Real basis of sl(2, C) viewed as a 6-dimensional real vector space.
SL2_BASIS = (H, 1j * H, E, 1j * E, F, 1j * F)


@dataclass(frozen=True)
class BElem:
    """``[[a, z], [0, 1/a]]`` with ``a > 0``."""

    a: float
    z: complex = 0j

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("BElem needs a > 0")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "z", complex(self.z))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.z], [0.0, 1.0 / self.a]], dtype=complex)

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "BElem":
        m = np.asarray(m, dtype=complex)
        if abs(m[1, 0]) > 1e-9 * (1 + np.abs(m).max()):
            raise ValueError("matrix is not upper triangular")
        return cls(m[0, 0].real, m[0, 1])

    def inverse(self) -> "BElem":
        return BElem(1.0 / self.a, -self.z)

    def __matmul__(self, other: "BElem") -> "BElem":
        return BElem(self.a * other.a, self.a * other.z + self.z / other.a)


IDENTITY = BElem(1.0)


def word_array(word) -> np.ndarray:
    """Coerce a word (``HPolygon``, sequence of ``BElem`` or array) to ``(n, 2, 2)``."""
    if hasattr(word, "word"):
        word = word.word
    if isinstance(word, np.ndarray):
        return np.asarray(word, dtype=complex).reshape(-1, 2, 2)
    word = list(word)
    if not word:
        return np.zeros((0, 2, 2), dtype=complex)
    if isinstance(word[0], BElem):
        return np.array([b.matrix for b in word])
    return np.asarray(word, dtype=complex).reshape(-1, 2, 2)


def as_word(mats: Iterable[np.ndarray]) -> tuple[BElem, ...]:
    return tuple(BElem.from_matrix(m) for m in mats)


def prefix_products(mats: np.ndarray) -> np.ndarray:
    """``P[i] = b_1 ... b_i`` for ``i = 0..n`` (``P[0] = I``)."""
    out = np.empty((len(mats) + 1, 2, 2), dtype=complex)
    out[0] = I2
    for i, m in enumerate(mats):
        out[i + 1] = out[i] @ m
    return out


def inv2(m: np.ndarray) -> np.ndarray:
    """Inverse of a determinant-one 2x2 matrix."""
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


# --------------------------------------------------------------------------
# Lie algebra
# --------------------------------------------------------------------------

def pairing(u: np.ndarray, v: np.ndarray) -> float:
    return 2.0 * float(np.trace(u @ v).imag)


def project_k(u: np.ndarray) -> np.ndarray:
    alpha, gamma = u[0, 0], u[1, 0]
    ia = 1j * alpha.imag
    return np.array([[ia, -np.conj(gamma)], [gamma, -ia]])


def project_b(u: np.ndarray) -> np.ndarray:
    return u - project_k(u)


def in_k(u: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.abs(u + u.conj().T).max() <= tol and abs(np.trace(u)) <= tol)


def in_b(u: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(abs(u[1, 0]) <= tol and abs(u[0, 0].imag) <= tol
                and abs(u[1, 1].imag) <= tol and abs(np.trace(u)) <= tol)


def ad(g: np.ndarray, u: np.ndarray) -> np.ndarray:
    return g @ u @ inv2(g)


def traceless(m: np.ndarray) -> np.ndarray:
    return m - 0.5 * np.trace(m) * I2


def expm_sl2(u: np.ndarray) -> np.ndarray:
    """Exponential of a traceless 2x2 matrix, using ``u^2 = -det(u) I``."""
    s = np.sqrt(complex(-np.linalg.det(u)))
    if abs(s) < 1e-6:
        s2 = s * s
        c = 1 + s2 / 2 + s2 * s2 / 24
        sh = 1 + s2 / 6 + s2 * s2 / 120
    else:
        c = np.cosh(s)
        sh = np.sinh(s) / s
    return c * I2 + sh * u


# --------------------------------------------------------------------------
# Group decomposition and the dressing action
# --------------------------------------------------------------------------

def iwasawa(g: np.ndarray) -> tuple[BElem, np.ndarray]:
    """Factor ``g = b k`` with ``b in B`` and ``k in SU(2)``."""
    b, k = iwasawa_matrices(np.asarray(g, dtype=complex))
    return BElem(b[0, 0].real, b[0, 1]), k


def iwasawa_matrices(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r, s = g[1, 0], g[1, 1]
    norm = math.sqrt(abs(r) ** 2 + abs(s) ** 2)
    # the second row of k is the normalized second row of g
    kr, ks = r / norm, s / norm
    k = np.array([[np.conj(ks), -np.conj(kr)], [kr, ks]])
    b = g @ k.conj().T
    b[1, 0] = 0.0
    b[0, 0] = 1.0 / norm
    b[1, 1] = norm
    return b, k


def dressing(k: np.ndarray, word) -> tuple[BElem, ...]:
    return as_word(dressing_array(np.asarray(k, dtype=complex), word_array(word)))


def dressing_array(k: np.ndarray, mats: np.ndarray) -> np.ndarray:
    """``b_i' = rho_B(rho_K(k b_1 ... b_{i-1}) b_i)``, evaluated left to right."""
    out = np.empty_like(mats)
    kk = k
    for i, m in enumerate(mats):
        b, kk = iwasawa_matrices(kk @ m)
        out[i] = b
    return out


def infinitesimal_dressing(x: np.ndarray, word) -> np.ndarray:
    """Tangent vectors ``xi_i = b_i rho_b(Ad_{b_i^-1} rho_k(Ad_{(b_1..b_{i-1})^-1} x))``."""
    mats = word_array(word)
    prefix = prefix_products(mats)
    out = np.empty_like(mats)
    for i, m in enumerate(mats):
        xk = project_k(ad(inv2(prefix[i]), x))
        out[i] = m @ project_b(ad(inv2(m), xk))
    return out


def translation_length(b) -> float:
    """Distance moved by the basepoint: ``arccosh(tr(b b^*) / 2)``."""
    if isinstance(b, BElem):
        a, z = b.a, b.z
    else:
        bb, _ = iwasawa_matrices(np.asarray(b, dtype=complex))
        a, z = bb[0, 0].real, bb[0, 1]
    # tr(b b^*) - 2 = (a - 1/a)^2 + |z|^2, kept exact for short translations
    gap = (a - 1.0 / a) ** 2 + abs(z) ** 2
    return 2.0 * math.asinh(0.5 * math.sqrt(gap))


# --------------------------------------------------------------------------
# Words and based polygons
# --------------------------------------------------------------------------

def vertices_array(mats: np.ndarray) -> np.ndarray:
    """Hyperboloid coordinates of ``(*, b_1 *, ..., b_1...b_n *)``."""
    prefix = prefix_products(mats)
    out = np.empty((len(prefix), 4))
    for i, p in enumerate(prefix):
        out[i] = hyp3.on_sheet(hyp3.from_hermitian(p @ p.conj().T)[1:])
    return out


def phi_map(word, model: str = "ball") -> list[hyp3.HPoint]:
    return [hyp3.HPoint.from_hyperboloid(v, model) for v in vertices_array(word_array(word))]


def phi_inverse(vertices: Sequence[hyp3.HPoint], tol: float = 1e-10) -> tuple[BElem, ...]:
    """Recover the word of a based polygon from its vertex list."""
    pts = [v.X for v in vertices]
    if hyp3.hdist(pts[0], hyp3.BASEPOINT_X) > tol:
        raise ValueError("polygon not based")
    sections = [hyp3.section(p) for p in pts]
    sections[0] = I2.copy()
    word = []
    for prev, cur in zip(sections[:-1], sections[1:]):
        word.append(BElem.from_matrix(inv2(prev) @ cur))
    return tuple(word)


def random_belem(rng: np.random.Generator, scale: float = 1.0) -> BElem:
    return BElem(math.exp(0.5 * scale * rng.standard_normal()),
                 scale * complex(rng.standard_normal(), rng.standard_normal()))


def random_word(rng: np.random.Generator, n: int, scale: float = 1.0,
                closed: bool = False) -> tuple[BElem, ...]:
    """Random word; ``closed=True`` picks the last letter so the product is ``I``."""
    if not closed:
        return tuple(random_belem(rng, scale) for _ in range(n))
    head = [random_belem(rng, scale) for _ in range(n - 1)]
    prod = IDENTITY
    for b in head:
        prod = prod @ b
    return tuple(head) + (prod.inverse(),)
