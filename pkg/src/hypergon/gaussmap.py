"""Gauss maps, stability of weighted configurations and the closing-up problem.

A polygon with vertices ``x_1, ..., x_{n+1}`` is sent to the ideal endpoints
of its edges, weighted by the side lengths. Going back, the configuration
``(r, xi)`` defines the map

    f(x) = phi_n o ... o phi_1 (x),   phi_i = geodesic flow for time r_i toward xi_i,

and for a stable configuration ``f`` is a strict contraction whose fixed point
is the first vertex of the unique polygon that closes up.

The contraction iteration runs on the spatial part ``x in R^3`` of the
hyperboloid (the time component is implied), where one flow step is

    x -> e^{-r} x + sinh(r) u / (x_0 - x . u).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import borel, hyp3, moduli
from .errors import ConvergenceError, DomainError
from .hyp3 import BoundaryPoint, HPoint
from .moduli import EPolygon, HPolygon

ANGULAR_TOL = 1e-9


@dataclass(frozen=True)
class Configuration:
    """Weighted points on the sphere at infinity, ``nu = sum r_i delta_{xi_i}``."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 3)
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms == 0):
            raise ValueError("boundary points need nonzero vectors")
        pts = pts / norms[:, None]
        w = moduli.as_weights(self.weights)
        if len(w) != len(pts):
            raise ValueError("points and weights differ in length")
        pts.setflags(write=False)
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_boundary(cls, points: Sequence[BoundaryPoint], weights) -> "Configuration":
        return cls(np.array([p.unit for p in points]), weights)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def boundary_points(self) -> list[BoundaryPoint]:
        return [BoundaryPoint(tuple(p)) for p in self.points]

    def scaled(self, t: float) -> "Configuration":
        return Configuration(self.points, t * self.weights)

    def moved(self, g: np.ndarray) -> "Configuration":
        """Push the measure forward by ``g in SL(2, C)``."""
        g = np.asarray(g, dtype=complex)
        return Configuration(np.array([hyp3.act_boundary(g, u) for u in self.points]), self.weights)


# --------------------------------------------------------------------------
# Forward Gauss maps
# --------------------------------------------------------------------------

def gauss_from_vertices(vertices_X: np.ndarray) -> Configuration:
    """Gauss configuration of the (unbased) polygon with these hyperboloid vertices."""
    pts, weights = [], []
    for p, q in zip(vertices_X[:-1], vertices_X[1:]):
        r = hyp3.hdist(p, q)
        if r == 0.0:
            raise DomainError("zero-length edge")
        pts.append(hyp3.endpoint_raw(p, q))
        weights.append(r)
    return Configuration(np.array(pts), np.array(weights))


def gauss_h(poly: HPolygon) -> Configuration:
    """Ideal endpoints of the forward extensions of the edges, weighted by length."""
    if not isinstance(poly, HPolygon):
        poly = HPolygon(borel.as_word(borel.word_array(poly)))
    cfg = gauss_from_vertices(poly.vertices_X)
    # side lengths from the letters are more accurate than vertex distances
    return Configuration(cfg.points, poly.side_lengths)


def gauss_e(poly: EPolygon) -> Configuration:
    """Edge directions weighted by edge lengths."""
    lengths = poly.side_lengths
    return Configuration(poly.edges / lengths[:, None], lengths)


# --------------------------------------------------------------------------
# Stability
# --------------------------------------------------------------------------

class Stability(str, enum.Enum):
    STABLE = "stable"
    NICE_SEMISTABLE = "nice_semistable"
    SEMISTABLE_NOT_NICE = "semistable_not_nice"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class StabilityClass:
    kind: Stability
    cluster_weights: tuple[float, ...]
    clusters: tuple[tuple[int, ...], ...]
    # the heaviest cluster when the configuration is not stable
    witness: tuple[int, ...] | None = None

    @property
    def stable(self) -> bool:
        return self.kind is Stability.STABLE


def clusters(points: np.ndarray, angular_tol: float = ANGULAR_TOL) -> list[list[int]]:
    """Group indices of points that agree up to ``angular_tol`` (single linkage)."""
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            # chord length 2 sin(angle / 2) is accurate for tiny angles
            chord = float(np.linalg.norm(points[i] - points[j]))
            if 2.0 * math.asin(min(1.0, 0.5 * chord)) <= angular_tol:
                parent[find(j)] = find(i)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def classify_stability(c: Configuration, angular_tol: float = ANGULAR_TOL,
                       weight_tol: float = 1e-12) -> StabilityClass:
    """Compare cluster weights with half the total weight.

    Equality with half the total (within ``weight_tol`` relative) is semistable;
    it is nice when the complement of the half-weight cluster is also one point.
    """
    groups = clusters(c.points, angular_tol)
    sums = [float(c.weights[g].sum()) for g in groups]
    half = 0.5 * c.total
    eps = weight_tol * c.total
    heavy = int(np.argmax(sums))
    if sums[heavy] < half - eps:
        kind = Stability.STABLE
    elif sums[heavy] > half + eps:
        kind = Stability.UNSTABLE
    elif len(groups) == 2:
        kind = Stability.NICE_SEMISTABLE
    else:
        kind = Stability.SEMISTABLE_NOT_NICE
    witness = None if kind is Stability.STABLE else tuple(groups[heavy])
    return StabilityClass(kind, tuple(sums), tuple(tuple(g) for g in groups), witness)


def require_stable(c: Configuration, angular_tol: float = ANGULAR_TOL) -> None:
    if not classify_stability(c, angular_tol).stable:
        raise DomainError("configuration not stable")


# --------------------------------------------------------------------------
# The contraction
# --------------------------------------------------------------------------

def _flows(c: Configuration, t: float = 1.0):
    """Per-edge constants ``(u, e^{-r}, sinh r)`` for the spatial flow step."""
    return [(tuple(u), math.exp(-t * r), math.sinh(t * r))
            for u, r in zip(c.points.tolist(), c.weights.tolist())]


def _apply(flows, x: tuple[float, float, float]) -> tuple[float, float, float]:
    x1, x2, x3 = x
    for (u1, u2, u3), e, sh in flows:
        x0 = math.sqrt(1.0 + x1 * x1 + x2 * x2 + x3 * x3)
        k = sh / (x0 - (x1 * u1 + x2 * u2 + x3 * u3))
        x1 = e * x1 + k * u1
        x2 = e * x2 + k * u2
        x3 = e * x3 + k * u3
    return x1, x2, x3


def _dist(x, y) -> float:
    return hyp3.hdist(hyp3.on_sheet(np.array(x)), hyp3.on_sheet(np.array(y)))


def contraction_map(c: Configuration, z: HPoint, t: float = 1.0) -> HPoint:
    """Flow ``z`` toward ``xi_1`` for ``t r_1``, then toward ``xi_2`` for ``t r_2``, and so on."""
    x = _apply(_flows(c, t), tuple(z.X[1:]))
    return HPoint.from_hyperboloid(hyp3.on_sheet(np.array(x)), z.model)


@dataclass
class FixedPoint:
    """Result of the fixed-point solve together with its diagnostics."""

    point: HPoint
    residual: float
    iterations: int
    contraction_factor: float
    busemann_high_water: list[float] = field(default_factory=list)
    confined: bool = True

    def report(self) -> dict:
        return {
            "residual": self.residual,
            "iterations": self.iterations,
            "contraction_factor": self.contraction_factor,
            "busemann_high_water": list(self.busemann_high_water),
            "confined": self.confined,
        }


def local_contraction_factor(c: Configuration, x: np.ndarray, t: float = 1.0,
                             h: float = 1e-6) -> float:
    """Operator norm of ``Df`` at a fixed point ``x``, in the hyperbolic metric.

    ``x`` is the spatial part of a hyperboloid point. The metric in these
    coordinates is ``G = I - x x^T / x_0^2``; at a fixed point ``Df`` maps the
    tangent space to itself so the norm is ``sqrt(max eig(G^-1 J^T G J))``.
    """
    flows = _flows(c, t)
    x = np.asarray(x, dtype=float)
    jac = np.empty((3, 3))
    for k in range(3):
        d = np.zeros(3)
        d[k] = h
        jac[:, k] = (np.array(_apply(flows, tuple(x + d))) - np.array(_apply(flows, tuple(x - d)))) / (2 * h)
    x0sq = 1.0 + float(x @ x)
    g = np.eye(3) - np.outer(x, x) / x0sq
    # Cholesky turns the generalized problem into an ordinary symmetric one
    ell = np.linalg.cholesky(g)
    m = ell.T @ jac @ np.linalg.inv(ell.T)
    return float(np.linalg.norm(m, 2))


def _busemann_levels(points: np.ndarray, x) -> np.ndarray:
    """``-b(x, xi_i)`` for each point: large when ``x`` is deep in the horoball at ``xi_i``."""
    xv = np.asarray(x)
    x0 = math.sqrt(1.0 + float(xv @ xv))
    return -np.log(x0 - points @ xv)


def solve_fixed_point(c: Configuration, t: float = 1.0, tol: float = 1e-11,
                      max_iter: int = 1_000_000, start: HPoint | None = None,
                      accelerate: bool = False, memory: int = 5,
                      check_stability: bool = True,
                      angular_tol: float = ANGULAR_TOL) -> FixedPoint:
    """Fixed point of the contraction for the weights ``t r``.

    Convergence is measured as the hyperbolic distance ``d(x, f(x))``. With
    ``accelerate=True`` the Picard step is replaced by an Anderson mixing step
    in the spatial chart whenever that lowers the residual.
    """
    if check_stability:
        require_stable(c, angular_tol)
    flows = _flows(c, t)
    x = (0.0, 0.0, 0.0) if start is None else tuple(start.X[1:])
    high = _busemann_levels(c.points, x)
    start_levels = high.copy()
    fx = _apply(flows, x)
    res = _dist(x, fx)
    hist_x: list[np.ndarray] = []
    hist_g: list[np.ndarray] = []
    it = 0
    while res >= tol:
        if it >= max_iter:
            raise ConvergenceError(f"fixed point not reached after {it} iterations "
                                   f"(residual {res:.3e})", residual=res, iterations=it)
        it += 1
        nxt = fx
        if accelerate:
            xa, ga = np.array(x), np.array(fx) - np.array(x)
            hist_x.append(xa)
            hist_g.append(ga)
            if len(hist_x) > memory + 1:
                hist_x.pop(0)
                hist_g.pop(0)
            if len(hist_x) > 1:
                dx = np.diff(np.array(hist_x), axis=0).T
                dg = np.diff(np.array(hist_g), axis=0).T
                gamma = np.linalg.lstsq(dg, ga, rcond=None)[0]
                cand = xa + ga - (dx + dg) @ gamma
                if np.all(np.isfinite(cand)):
                    fc = _apply(flows, tuple(cand))
                    rc = _dist(tuple(cand), fc)
                    if rc < res:
                        x, fx, res = tuple(cand), fc, rc
                        np.maximum(high, _busemann_levels(c.points, x), out=high)
                        continue
                # fall back to the plain step and restart the mixing history here
                del hist_x[:-1], hist_g[:-1]
        x = nxt
        fx = _apply(flows, x)
        res = _dist(x, fx)
        np.maximum(high, _busemann_levels(c.points, x), out=high)
    final = _busemann_levels(c.points, x)
    confined = bool(np.all(high <= np.maximum(start_levels, final) + t * c.total))
    point = HPoint.from_hyperboloid(hyp3.on_sheet(np.array(x)), "hyperboloid")
    return FixedPoint(point, res, it, local_contraction_factor(c, np.array(x), t),
                      high.tolist(), confined)


def fixed_point(c: Configuration, **kwargs) -> HPoint:
    """The first vertex ``x(r, xi)`` of the polygon that closes up."""
    return solve_fixed_point(c, **kwargs).point


def lipschitz_estimate(c: Configuration, center: HPoint, radius: float | None = None,
                       pairs: int = 1000, rng: np.random.Generator | None = None,
                       t: float = 1.0) -> float:
    """Largest ratio ``d(f(a), f(b)) / d(a, b)`` over random pairs near ``center``."""
    rng = np.random.default_rng(0) if rng is None else rng
    radius = t * c.total if radius is None else radius
    flows = _flows(c, t)
    b = hyp3.section(center.X)

    def sample():
        d = rng.standard_normal(3)
        d /= np.linalg.norm(d)
        s = radius * rng.random() ** (1.0 / 3.0)
        return tuple(hyp3.act(b, hyp3.on_sheet(math.sinh(s) * d))[1:])

    worst = 0.0
    for _ in range(pairs):
        p, q = sample(), sample()
        d0 = _dist(p, q)
        if d0 < 1e-8:
            continue
        worst = max(worst, _dist(_apply(flows, p), _apply(flows, q)) / d0)
    return worst


# --------------------------------------------------------------------------
# Inverse Gauss map
# --------------------------------------------------------------------------

def polygon_from_fixed_point(c: Configuration, x: HPoint) -> HPolygon:
    """Trace the polygon from ``x`` and move it rigidly so that it starts at ``*``."""
    verts = [x.X]
    for u, r in zip(c.points, c.weights):
        verts.append(hyp3.flow(verts[-1], u, float(r)))
    g = borel.inv2(hyp3.section(verts[0]))
    based = [hyp3.HPoint.from_hyperboloid(hyp3.act(g, v)) for v in verts]
    based[0] = hyp3.HPoint.from_hyperboloid(hyp3.BASEPOINT_X)
    return HPolygon(borel.phi_inverse(based))


def close_polygon(c: Configuration, **kwargs) -> tuple[HPolygon, FixedPoint]:
    """Inverse Gauss map together with the solver diagnostics."""
    fp = solve_fixed_point(c, **kwargs)
    return polygon_from_fixed_point(c, fp.point), fp


def inverse_gauss_h(c: Configuration, **kwargs) -> HPolygon:
    """The closed based polygon whose Gauss configuration is ``c`` up to basing."""
    return close_polygon(c, **kwargs)[0]


def basing_transform(poly_vertices_X: np.ndarray) -> np.ndarray:
    """The ``B`` element carrying the first vertex to ``*``."""
    return borel.inv2(hyp3.section(poly_vertices_X[0]))


# --------------------------------------------------------------------------
# Conformal center of mass
# --------------------------------------------------------------------------

def busemann_average(c: Configuration, x: HPoint) -> float:
    """``b_nu(x) = sum r_i b(x, xi_i)``."""
    p = x.X
    return float(c.weights @ np.log(p[0] - c.points @ p[1:]))


def busemann_average_gradient(c: Configuration, x: HPoint) -> np.ndarray:
    """Riemannian gradient of ``b_nu`` in ball coordinates (see ``busemann_gradient``)."""
    v = x.to("ball").array
    return sum(r * hyp3.ball_busemann_gradient(v, u) for u, r in zip(c.points, c.weights))


def gradient_norm(c: Configuration, x: HPoint) -> float:
    """Hyperbolic length of ``grad b_nu`` at ``x``."""
    v = x.to("ball").array
    return float(np.linalg.norm(busemann_average_gradient(c, x))) * 2.0 / (1.0 - float(v @ v))


@dataclass
class CenterResult:
    point: HPoint
    gradient_norm: float
    iterations: int


def solve_conformal_center(c: Configuration, tol: float = 1e-13, max_iter: int = 200,
                           accept: float = 1e-10,
                           angular_tol: float = ANGULAR_TOL) -> CenterResult:
    """Damped Newton iteration for the critical point of ``b_nu``.

    Every step recenters: the current point is moved to the ball origin, where
    the gradient of ``b_nu`` is ``-2 sum r_i xi_i`` and the Hessian is
    ``4 sum r_i (I - xi_i xi_i^T)`` (Euclidean ball coordinates). Steps are
    capped in length and halved until ``b_nu`` decreases. The iteration stops
    once the gradient is below ``tol * |r|`` or, when rounding stalls it, below
    ``accept``.
    """
    require_stable(c, angular_tol)
    w = c.weights
    x = hyp3.BASEPOINT_X.copy()
    gnorm = math.inf
    for it in range(max_iter + 1):
        b = hyp3.section(x)
        binv = borel.inv2(b)
        pts = np.array([hyp3.act_boundary(binv, u) for u in c.points])
        grad = -2.0 * (w @ pts)
        # hyperbolic length of the gradient at the origin is |grad| / 2
        gnorm = 0.5 * float(np.linalg.norm(grad))
        if gnorm < tol * max(1.0, float(w.sum())):
            break
        if it == max_iter:
            raise ConvergenceError(f"conformal center not reached (gradient {gnorm:.3e})",
                                   residual=gnorm, iterations=it)
        hess = 4.0 * (w.sum() * np.eye(3) - (pts.T * w) @ pts)
        try:
            step = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = -grad / (4.0 * w.sum())
        if float(step @ grad) >= 0:
            step = -grad / (4.0 * w.sum())
        norm = float(np.linalg.norm(step))
        if norm > 0.5:
            step *= 0.5 / norm

        # objective relative to the current point, which sits at the origin
        def objective(v):
            return float(w @ np.log(np.sum((pts - v) ** 2, axis=1) / (1.0 - v @ v)))

        lam = 1.0
        # short steps are in the quadratic regime, where objective differences
        # drop below rounding and a line search would only stall
        if norm > 1e-3:
            base = objective(np.zeros(3))
            while lam > 1e-12 and objective(lam * step) > base + 1e-4 * lam * float(step @ grad):
                lam *= 0.5
        v = lam * step
        if float(np.linalg.norm(v)) < 1e-15:
            if gnorm < accept:
                break
            raise ConvergenceError(f"conformal center stalled (gradient {gnorm:.3e})",
                                   residual=gnorm, iterations=it)
        x = hyp3.act(b, hyp3._to_hyperboloid("ball", v))
    return CenterResult(HPoint.from_hyperboloid(x, "hyperboloid"), gnorm, it)


def conformal_center(c: Configuration, **kwargs) -> HPoint:
    """The unique critical point ``C(nu)`` of ``b_nu`` for a stable measure."""
    return solve_conformal_center(c, **kwargs).point


def shrink_curve(c: Configuration, ts: Sequence[float], tol: float = 1e-12,
                 max_iter: int = 1_000_000) -> list[HPoint]:
    """Fixed points ``x(t r, xi)`` for each ``t`` in ``ts``."""
    require_stable(c)
    start = conformal_center(c)
    out = []
    for t in ts:
        if not 0.0 < t <= 1.0:
            raise ValueError("t must lie in (0, 1]")
        out.append(solve_fixed_point(c, t=float(t), tol=tol * t, max_iter=max_iter,
                                     start=start, accelerate=True, check_stability=False).point)
    return out


def shrink_limit_check(c: Configuration, ts: Sequence[float] = (0.5, 0.05, 0.005),
                       ratio_band: float = 3.0, **kwargs) -> dict:
    """Distances ``d(x(t r, xi), C(nu))`` and the ``O(t)`` ratio test."""
    ts = sorted((float(t) for t in ts), reverse=True)
    center = conformal_center(c)
    curve = shrink_curve(c, ts, **kwargs)
    dists = [hyp3.dist(p, center) for p in curve]
    ratios = [d / t for d, t in zip(dists, ts)]
    monotone = all(b < a for a, b in zip(dists[:-1], dists[1:]))
    last = ratios[-2:] if len(ratios) > 1 else ratios
    spread = max(last) / min(last) if min(last) > 0 else math.inf
    return {
        "t": ts,
        "distances": dists,
        "ratios": ratios,
        "monotone": monotone,
        "ratio_spread": spread,
        "pass": bool(monotone and spread <= ratio_band),
    }


# --------------------------------------------------------------------------
# Euclidean side and the transfer between the two spaces
# --------------------------------------------------------------------------

def inverse_gauss_e(c: Configuration) -> EPolygon:
    """Closed Euclidean polygon: move ``C(nu)`` to the origin, then ``e_i = r_i (g xi_i)``."""
    g = borel.inv2(hyp3.section(conformal_center(c).X))
    dirs = np.array([hyp3.act_boundary(g, u) for u in c.points])
    return EPolygon(c.weights[:, None] * dirs)


def _require_off_wall(r: np.ndarray, tol: float) -> None:
    hit, witness = moduli.on_wall(r, tol)
    if hit:
        raise DomainError(f"side lengths lie on a wall (partition {list(witness)})")


def transfer_e_to_h(poly: EPolygon, wall_tol: float = 1e-9, closure_tol: float = 1e-8,
                    **kwargs) -> HPolygon:
    """Hyperbolic polygon with the same side lengths and Gauss configuration class."""
    r = poly.side_lengths
    _require_off_wall(r, wall_tol)
    if moduli.euclidean_closure_residual(poly) > closure_tol * max(1.0, float(r.sum())):
        raise DomainError("Euclidean polygon is not closed")
    return inverse_gauss_h(gauss_e(poly), **kwargs)


def transfer_h_to_e(poly: HPolygon, wall_tol: float = 1e-9, closure_tol: float = 1e-8) -> EPolygon:
    r = poly.side_lengths
    _require_off_wall(r, wall_tol)
    if moduli.closure_residual(poly) > closure_tol:
        raise DomainError("hyperbolic polygon is not closed")
    return inverse_gauss_e(gauss_h(poly))


def random_stable_configuration(rng: np.random.Generator, n: int, margin: float = 0.05,
                                low: float = 0.5, high: float = 1.5) -> Configuration:
    """Uniform points on the sphere with weights in ``[low, high]``, redrawn until stable."""
    while True:
        pts = rng.standard_normal((n, 3))
        w = rng.uniform(low, high, n)
        if w.max() < (0.5 - margin) * w.sum():
            return Configuration(pts, w)
