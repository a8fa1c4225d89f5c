"""Hyperbolic 3-space: models, isometries, geodesic flow and Busemann functions.

Points are carried in one of three models:

* ``half_space`` -- ``(x, y, z)`` with ``z > 0``, basepoint ``(0, 0, 1)``
* ``ball`` -- ``v`` with ``|v| < 1``, basepoint at the origin
* ``hyperboloid`` -- ``(t, x, y, z)`` with ``t^2 - x^2 - y^2 - z^2 = 1``

Internally every computation goes through the hyperboloid model, which is the
same thing as the space of positive Hermitian 2x2 matrices of determinant one:

    (t, x, y, z)  <->  [[t + z, x + iy], [x - iy, t - z]]

``SL(2, C)`` acts by ``H -> g H g^*`` and ``g`` sends the basepoint to the point
with matrix ``g g^*``. The boundary sphere is the set of rays of null Hermitian
matrices; the unit vector ``u`` corresponds to the null vector ``(1, u)``. The
chart ``C u {oo}`` used for the Moebius action is stereographic projection
from the north pole ``(0, 0, 1)``, which is the point ``oo`` of the half-space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MODELS = ("half_space", "ball", "hyperboloid")

BASEPOINT_X = np.array([1.0, 0.0, 0.0, 0.0])


# --------------------------------------------------------------------------
# Raw hyperboloid helpers (arrays in, arrays out)
# --------------------------------------------------------------------------

def minkowski(p: np.ndarray, q: np.ndarray) -> float:
    """Minkowski pairing with signature (-, +, +, +)."""
    return float(-p[0] * q[0] + p[1] * q[1] + p[2] * q[2] + p[3] * q[3])


def on_sheet(spatial: np.ndarray) -> np.ndarray:
    """Lift a spatial vector to the upper sheet of the hyperboloid."""
    spatial = np.asarray(spatial, dtype=float)
    return np.concatenate(([math.sqrt(1.0 + float(spatial @ spatial))], spatial))


def hdist(p: np.ndarray, q: np.ndarray) -> float:
    """Distance between two hyperboloid points.

    Two exact expressions for ``4 sinh^2(d/2)`` are available: the Minkowski
    chord ``<p - q, p - q>`` (time difference rewritten so nearby points keep
    full relative precision) and ``2(-<p, q> - 1)``. Each loses digits in a
    different regime, so the one with the smaller cancellation is used.
    """
    dv = p[1:] - q[1:]
    sv = p[1:] + q[1:]
    dt = float(dv @ sv) / (p[0] + q[0])
    dv2 = float(dv @ dv)
    chord2 = dv2 - dt * dt
    pq = float(p[1:] @ q[1:])
    m1 = p[0] * q[0] - pq - 1.0
    # magnitudes of the cancelling terms, relative to the result
    if 2.0 * m1 * (dv2 + dt * dt) > chord2 * (p[0] * q[0] + abs(pq) + 1.0) and m1 > 0.0:
        chord2 = 2.0 * m1
    if chord2 <= 0.0:
        return 0.0
    return 2.0 * math.asinh(0.5 * math.sqrt(chord2))


def hermitian(p: np.ndarray) -> np.ndarray:
    t, x, y, z = p
    return np.array([[t + z, x + 1j * y], [x - 1j * y, t - z]])


def from_hermitian(h: np.ndarray) -> np.ndarray:
    t = 0.5 * (h[0, 0].real + h[1, 1].real)
    z = 0.5 * (h[0, 0].real - h[1, 1].real)
    return np.array([t, h[0, 1].real, h[0, 1].imag, z])


def act(g: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Action of ``g in SL(2, C)`` on a hyperboloid point (renormalized)."""
    h = g @ hermitian(p) @ g.conj().T
    return on_sheet(from_hermitian(h)[1:])


def act_boundary(g: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Action of ``g`` on a unit vector of the boundary sphere."""
    h = g @ hermitian(np.concatenate(([1.0], u))) @ g.conj().T
    w = from_hermitian(h)
    v = w[1:] / w[0]
    return v / np.linalg.norm(v)


def spinor(u: np.ndarray) -> np.ndarray:
    """A vector ``s in C^2`` with ``s s^*`` proportional to the null matrix of ``u``."""
    h = hermitian(np.concatenate(([1.0], u)))
    j = 0 if h[0, 0].real >= h[1, 1].real else 1
    s = h[:, j] / math.sqrt(h[j, j].real)
    return s / np.linalg.norm(s)


def section(p: np.ndarray) -> np.ndarray:
    """The unique upper-triangular ``b`` (positive diagonal) with ``b * = p``."""
    t, x, y, z = p
    # H = b b^* = [[a^2 + |w|^2, w/a], [conj(w)/a, 1/a^2]] for b = [[a, w], [0, 1/a]]
    h22 = t - z if z <= 0.0 else (1.0 + x * x + y * y) / (t + z)
    a = 1.0 / math.sqrt(h22)
    w = (x + 1j * y) * a
    return np.array([[a, w], [0.0, 1.0 / a]], dtype=complex)


def flow(p: np.ndarray, u: np.ndarray, t: float) -> np.ndarray:
    """Geodesic flow for time ``t`` from ``p`` toward the boundary point ``u``."""
    null = np.concatenate(([1.0], u))
    s = -minkowski(p, null)
    q = math.exp(-t) * p + (math.sinh(t) / s) * null
    return on_sheet(q[1:])


def busemann_raw(p: np.ndarray, u: np.ndarray) -> float:
    return math.log(p[0] - float(p[1:] @ u))


# --------------------------------------------------------------------------
# Model conversions
# --------------------------------------------------------------------------

def _to_hyperboloid(model: str, c: np.ndarray) -> np.ndarray:
    if model == "hyperboloid":
        return on_sheet(c[1:])
    if model == "ball":
        n2 = float(c @ c)
        return on_sheet(2.0 * c / (1.0 - n2))
    if model == "half_space":
        x, y, z = c
        r2 = x * x + y * y
        return on_sheet(np.array([x / z, y / z, (z * z + r2 - 1.0) / (2.0 * z)]))
    raise ValueError(f"unknown model {model!r}")


def _from_hyperboloid(model: str, p: np.ndarray) -> np.ndarray:
    if model == "hyperboloid":
        return p.copy()
    if model == "ball":
        return p[1:] / (1.0 + p[0])
    if model == "half_space":
        t, x, y, z = p
        h22 = t - z if z <= 0.0 else (1.0 + x * x + y * y) / (t + z)
        zz = 1.0 / h22
        return np.array([x * zz, y * zz, zz])
    raise ValueError(f"unknown model {model!r}")


# --------------------------------------------------------------------------
# Public value types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HPoint:
    """A point of hyperbolic 3-space in a chosen model."""

    model: str
    coords: tuple[float, ...]

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        c = tuple(float(v) for v in self.coords)
        want = 4 if self.model == "hyperboloid" else 3
        if len(c) != want:
            raise ValueError(f"{self.model} points need {want} coordinates")
        if self.model == "half_space" and not c[2] > 0:
            raise ValueError("half-space point needs z > 0")
        if self.model == "ball" and not c[0] ** 2 + c[1] ** 2 + c[2] ** 2 < 1:
            raise ValueError("ball point needs |v| < 1")
        if self.model == "hyperboloid" and not c[0] > 0:
            raise ValueError("hyperboloid point must lie on the upper sheet")
        object.__setattr__(self, "coords", c)

    @classmethod
    def from_hyperboloid(cls, p: np.ndarray, model: str = "hyperboloid") -> "HPoint":
        return cls(model, tuple(_from_hyperboloid(model, np.asarray(p, dtype=float))))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords)

    @property
    def X(self) -> np.ndarray:
        """Hyperboloid coordinates."""
        return _to_hyperboloid(self.model, self.array)

    def to(self, model: str) -> "HPoint":
        return convert(self, model)


BASEPOINT = HPoint("half_space", (0.0, 0.0, 1.0))


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the sphere at infinity, stored as a unit 3-vector."""

    unit: tuple[float, float, float]

    def __post_init__(self):
        u = np.asarray(self.unit, dtype=float)
        norm = float(np.linalg.norm(u))
        if u.shape != (3,) or norm == 0.0:
            raise ValueError("boundary point needs a nonzero 3-vector")
        object.__setattr__(self, "unit", tuple(u / norm))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.unit)

    @property
    def chart(self) -> complex | None:
        """Stereographic coordinate in ``C``; ``None`` stands for infinity."""
        return to_chart(self.array)

    @classmethod
    def from_chart(cls, w: complex | None) -> "BoundaryPoint":
        return cls(tuple(from_chart(w)))


INFINITY = BoundaryPoint((0.0, 0.0, 1.0))


def to_chart(u: np.ndarray) -> complex | None:
    u1, u2, u3 = (float(v) for v in u)
    if u3 <= 0.0:
        return complex(u1, u2) / (1.0 - u3)
    d = complex(u1, -u2)
    if d == 0:
        return None
    return (1.0 + u3) / d


def from_chart(w: complex | None) -> np.ndarray:
    if w is None or not np.isfinite(abs(w)):
        return np.array([0.0, 0.0, 1.0])
    w = complex(w)
    m = abs(w) ** 2
    return np.array([2 * w.real, 2 * w.imag, m - 1.0]) / (m + 1.0)


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------

def convert(p: HPoint, target_model: str) -> HPoint:
    if target_model not in MODELS:
        raise ValueError(f"unknown model {target_model!r}")
    if p.model == target_model:
        return p
    return HPoint.from_hyperboloid(p.X, target_model)


def dist(p: HPoint, q: HPoint) -> float:
    return hdist(p.X, q.X)


def apply_isometry(g: np.ndarray, p: HPoint) -> HPoint:
    return HPoint.from_hyperboloid(act(np.asarray(g, dtype=complex), p.X), p.model)


def apply_boundary(g: np.ndarray, xi: BoundaryPoint) -> BoundaryPoint:
    return BoundaryPoint(tuple(act_boundary(np.asarray(g, dtype=complex), xi.array)))


def geodesic_flow(z: HPoint, xi: BoundaryPoint, t: float) -> HPoint:
    """Move ``z`` a signed distance ``t`` along the geodesic ray toward ``xi``."""
    return HPoint.from_hyperboloid(flow(z.X, xi.array, float(t)), z.model)


def busemann(x: HPoint, xi: BoundaryPoint) -> float:
    """Busemann function normalized to vanish at the basepoint."""
    return busemann_raw(x.X, xi.array)


def busemann_gradient(x: HPoint, xi: BoundaryPoint) -> np.ndarray:
    """Riemannian gradient of ``busemann(., xi)`` in ball-model coordinates.

    The hyperbolic length of the returned vector at ``x`` is one.
    """
    v = x.to("ball").array
    return ball_busemann_gradient(v, xi.array)


def ball_busemann_gradient(v: np.ndarray, u: np.ndarray) -> np.ndarray:
    s = 1.0 - float(v @ v)
    d = v - u
    euclid = 2.0 * d / float(d @ d) + 2.0 * v / s
    return 0.25 * s * s * euclid


def ideal_endpoint(x: HPoint, y: HPoint) -> BoundaryPoint:
    """Forward endpoint on the sphere at infinity of the ray from ``x`` through ``y``."""
    return BoundaryPoint(tuple(endpoint_raw(x.X, y.X)))


def endpoint_raw(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    b = section(p)
    binv = np.array([[b[1, 1], -b[0, 1]], [0.0, b[0, 0]]])
    q0 = act(binv, q)
    norm = float(np.linalg.norm(q0[1:]))
    if norm < 1e-14:
        raise ValueError("degenerate segment")
    return act_boundary(b, q0[1:] / norm)


def rotation_about_axis(p: BoundaryPoint, q: BoundaryPoint, angle: float) -> np.ndarray:
    """Elliptic element rotating by ``angle`` about the geodesic from ``p`` to ``q``.

    The rotation is right-handed with respect to the axis oriented toward ``q``.
    """
    up, uq = p.array, q.array
    if np.linalg.norm(up - uq) < 1e-12:
        raise ValueError("rotation axis needs distinct endpoints")
    m = np.column_stack([spinor(uq), spinor(up)])
    m = m / np.sqrt(np.linalg.det(m))
    half = 0.5 * float(angle)
    d = np.diag([np.exp(1j * half), np.exp(-1j * half)])
    return m @ d @ np.linalg.inv(m)


def rotation_to_infinity(xi: BoundaryPoint) -> np.ndarray:
    """An ``SU(2)`` element sending ``xi`` to the north pole (infinity)."""
    s = spinor(xi.array)
    kinv = np.array([[s[0], -np.conj(s[1])], [s[1], np.conj(s[0])]])
    return kinv.conj().T


def random_point(rng: np.random.Generator, scale: float = 1.0, model: str = "hyperboloid") -> HPoint:
    return HPoint.from_hyperboloid(on_sheet(scale * rng.standard_normal(3)), model)


def random_boundary(rng: np.random.Generator) -> BoundaryPoint:
    return BoundaryPoint(tuple(rng.standard_normal(3)))


def random_sl2c(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = scale * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    g = g + np.eye(2)
    return g / np.sqrt(np.linalg.det(g))


def random_su2(rng: np.random.Generator) -> np.ndarray:
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    a, b = complex(q[0], q[1]), complex(q[2], q[3])
    return np.array([[a, b], [-b.conjugate(), a.conjugate()]])


def points_array(points: Sequence[HPoint]) -> np.ndarray:
    return np.array([p.X for p in points])
