"""Numerical Poisson geometry on ``B^n`` and Lu's family of area forms on the sphere.

Gradients are taken with respect to the pairing ``<u, v> = 2 Im tr(uv)`` on
``sl(2, C)``: the left gradient ``D_i phi`` is the element with

    <D_i phi, nu> = d/dt phi(g_1, ..., exp(t nu) g_i, ..., g_n) |_{t=0}

for all ``nu``, and the right gradient ``D'_i phi`` uses ``g_i exp(t nu)``.
With ``R = rho_k - rho_b`` the bracket is

    {phi, psi} = 1/2 sum_i ( <R D'_i phi, D'_i psi> - <R D_i phi, D_i psi> )

and the Hamiltonian field has components
``X_i = 1/2 ((R D_i phi) g_i - g_i (R D'_i phi))``. With these conventions the
field acts on functions by ``X_phi psi = -{phi, psi}``.

All derivatives are fourth-order central differences; repeating them with
half the step gives the error estimate that is reported alongside values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from . import bending, borel
from .borel import SL2_BASIS
from .errors import ConvergenceError, DomainError

DEFAULT_STEP = 1e-4

_GRAM = np.array([[borel.pairing(u, v) for v in SL2_BASIS] for u in SL2_BASIS])
_BASIS = np.array(SL2_BASIS)
_EXP_BASIS_CACHE: dict[float, np.ndarray] = {}


@dataclass(frozen=True)
class ScalarField:
    """A real function of a word ``(n, 2, 2)``, defined on all of ``SL(2, C)^n``.

    ``periodic=True`` marks angle-valued functions; differences of their
    values are wrapped into ``(-pi, pi]`` before dividing by the step.
    """

    fn: Callable[[np.ndarray], float]
    label: str = ""
    periodic: bool = False

    def __call__(self, mats: np.ndarray) -> float:
        return float(self.fn(mats))


def constant_field(value: float = 0.0) -> ScalarField:
    return ScalarField(lambda m: value, "const")


def f_field(i: int, j: int) -> ScalarField:
    return ScalarField(lambda m: bending.f(m, i, j), f"f[{i},{j}]")


def length_field(i: int, j: int) -> ScalarField:
    return ScalarField(lambda m: bending.diag_length(m, i, j), f"l[{i},{j}]")


def fan_length_field(i: int) -> ScalarField:
    """``l_i``, the length of the fan diagonal ``(1, i + 2)``."""
    return length_field(1, i + 2)


def angle_field(i: int) -> ScalarField:
    """``theta_i`` for the fan, read off the vertices of the word."""
    return ScalarField(lambda m: bending.dihedral_angles(m)[i - 1], f"theta[{i}]", periodic=True)


def entry_field(letter: int, row: int, col: int, imag: bool = False) -> ScalarField:
    """Real or imaginary part of one matrix entry of one letter (0-based)."""
    if imag:
        return ScalarField(lambda m: m[letter, row, col].imag, f"Im b{letter}[{row}{col}]")
    return ScalarField(lambda m: m[letter, row, col].real, f"Re b{letter}[{row}{col}]")


# --------------------------------------------------------------------------
# Finite-difference gradients
# --------------------------------------------------------------------------

def _wrap(d: float) -> float:
    return (d + math.pi) % (2.0 * math.pi) - math.pi


def _derivative(phi: ScalarField, mats: np.ndarray, i: int, nu: np.ndarray,
                h: float, right: bool) -> float:
    """Fourth-order central difference of ``phi`` along ``exp(t nu) g_i`` (or ``g_i exp(t nu)``)."""
    base = phi(mats) if phi.periodic else 0.0
    vals = []
    for s in (2.0, 1.0, -1.0, -2.0):
        e = borel.expm_sl2(s * h * nu)
        m = mats.copy()
        m[i] = m[i] @ e if right else e @ m[i]
        v = phi(m)
        vals.append(_wrap(v - base) if phi.periodic else v)
    return (-vals[0] + 8.0 * vals[1] - 8.0 * vals[2] + vals[3]) / (12.0 * h)


def _dual(derivs: np.ndarray) -> np.ndarray:
    """The element ``D`` with ``<D, e_k> = derivs[k]`` for the real basis ``e_k``."""
    c = np.linalg.solve(_GRAM.T, derivs)
    return np.tensordot(c, _BASIS, axes=1)


def lie_derivative(phi: ScalarField, word, i: int, nu: np.ndarray, right: bool = False,
                   h: float = DEFAULT_STEP) -> float:
    """``d/dt phi(..., exp(t nu) g_i, ...)`` (or ``g_i exp(t nu)`` with ``right=True``); ``i`` is 0-based."""
    return _derivative(phi, borel.word_array(word).copy(), i, np.asarray(nu, dtype=complex), h, right)


def lie_derivative_left(phi, word, i, nu, h=DEFAULT_STEP):
    return lie_derivative(phi, word, i, nu, right=False, h=h)


def lie_derivative_right(phi, word, i, nu, h=DEFAULT_STEP):
    return lie_derivative(phi, word, i, nu, right=True, h=h)


@dataclass
class Gradient:
    """Left and right gradients ``D_i``, ``D'_i`` of a field at a word."""

    left: np.ndarray
    right: np.ndarray


def gradient(phi: ScalarField, word, h: float = DEFAULT_STEP) -> Gradient:
    mats = borel.word_array(word).copy()
    n = len(mats)
    left = np.empty((n, 2, 2), dtype=complex)
    right = np.empty((n, 2, 2), dtype=complex)
    for i in range(n):
        for out, is_right in ((left, False), (right, True)):
            d = np.array([_derivative(phi, mats, i, e, h, is_right) for e in SL2_BASIS])
            out[i] = _dual(d)
    return Gradient(left, right)


def r_matrix(u: np.ndarray) -> np.ndarray:
    """``R = rho_k - rho_b``."""
    k = borel.project_k(u)
    return k - (u - k)


def bracket_from_gradients(gphi: Gradient, gpsi: Gradient) -> float:
    total = 0.0
    for i in range(len(gphi.left)):
        total += borel.pairing(r_matrix(gphi.right[i]), gpsi.right[i])
        total -= borel.pairing(r_matrix(gphi.left[i]), gpsi.left[i])
    return 0.5 * total


@dataclass
class BracketValue:
    value: float
    fd_error: float


def sklyanin_bracket(phi: ScalarField, psi: ScalarField, word, h: float = DEFAULT_STEP) -> float:
    return bracket_with_error(phi, psi, word, h).value


def bracket_with_error(phi: ScalarField, psi: ScalarField, word,
                       h: float = DEFAULT_STEP) -> BracketValue:
    """Bracket at step ``h`` and the change when the step is halved."""
    v1 = bracket_from_gradients(gradient(phi, word, h), gradient(psi, word, h))
    v2 = bracket_from_gradients(gradient(phi, word, h / 2), gradient(psi, word, h / 2))
    return BracketValue(v1, abs(v1 - v2))


def bracket_matrix(fields_a: Sequence[ScalarField], fields_b: Sequence[ScalarField], word,
                   h: float = DEFAULT_STEP) -> tuple[np.ndarray, np.ndarray]:
    """All brackets ``{a_i, b_j}`` and their error estimates, sharing gradients."""
    mats = borel.word_array(word)
    grads = {}
    for fld in list(fields_a) + list(fields_b):
        if id(fld) not in grads:
            grads[id(fld)] = (gradient(fld, mats, h), gradient(fld, mats, h / 2))
    vals = np.empty((len(fields_a), len(fields_b)))
    errs = np.empty_like(vals)
    for p, a in enumerate(fields_a):
        for q, b in enumerate(fields_b):
            ga, gb = grads[id(a)], grads[id(b)]
            v1 = bracket_from_gradients(ga[0], gb[0])
            v2 = bracket_from_gradients(ga[1], gb[1])
            vals[p, q] = v1
            errs[p, q] = abs(v1 - v2)
    return vals, errs


def hamiltonian_field(phi: ScalarField, word, h: float = DEFAULT_STEP) -> np.ndarray:
    """Tangent matrices ``X_i = 1/2 ((R D_i phi) g_i - g_i (R D'_i phi))``."""
    mats = borel.word_array(word)
    g = gradient(phi, mats, h)
    out = np.empty_like(mats)
    for i, m in enumerate(mats):
        out[i] = 0.5 * (r_matrix(g.left[i]) @ m - m @ r_matrix(g.right[i]))
    return out


def directional_derivative(psi: ScalarField, word, tangent: np.ndarray,
                           h: float = DEFAULT_STEP) -> float:
    """``d/dt psi(g_i exp(t g_i^{-1} X_i))`` at ``t = 0``, all letters at once."""
    mats = borel.word_array(word)
    algebra = np.array([borel.inv2(m) @ x for m, x in zip(mats, tangent)])
    base = psi(mats) if psi.periodic else 0.0
    vals = []
    for s in (2.0, 1.0, -1.0, -2.0):
        moved = np.array([m @ borel.expm_sl2(s * h * a) for m, a in zip(mats, algebra)])
        v = psi(moved)
        vals.append(_wrap(v - base) if psi.periodic else v)
    return (-vals[0] + 8.0 * vals[1] - 8.0 * vals[2] + vals[3]) / (12.0 * h)


def tangent_to_b(word, tangent: np.ndarray, tol: float = 1e-8) -> bool:
    """Whether each ``g_i^{-1} X_i`` lies in the Lie algebra of ``B``."""
    mats = borel.word_array(word)
    scale = max(1.0, float(np.abs(tangent).max()))
    return all(borel.in_b(borel.inv2(m) @ x, tol * scale) for m, x in zip(mats, tangent))


def integrate_field(phi: ScalarField, word, t: float, steps: int = 16,
                    h: float = DEFAULT_STEP) -> np.ndarray:
    """Classical RK4 for ``dg/dt = X_phi(g)``, with letters re-projected to ``B``."""
    mats = borel.word_array(word).copy()
    dt = t / steps
    for _ in range(steps):
        k1 = hamiltonian_field(phi, mats, h)
        k2 = hamiltonian_field(phi, mats + 0.5 * dt * k1, h)
        k3 = hamiltonian_field(phi, mats + 0.5 * dt * k2, h)
        k4 = hamiltonian_field(phi, mats + dt * k3, h)
        mats = mats + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        mats = mats / np.sqrt(np.linalg.det(mats))[:, None, None]
    return mats


def momentum_differential_check(word, tangent: np.ndarray, h: float = DEFAULT_STEP) -> float:
    """Compare ``(b_1...b_n)^{-1} d(b_1...b_n)`` with ``sum_i Ad_{(b_{i+1}...b_n)^{-1}}(b_i^{-1} db_i)``.

    Returns the largest entry of the difference for the tangent vector ``tangent``.
    """
    mats = borel.word_array(word)
    n = len(mats)
    prod = borel.prefix_products(mats)[-1]
    algebra = np.array([borel.inv2(m) @ x for m, x in zip(mats, tangent)])

    def moved_product(s):
        out = np.eye(2, dtype=complex)
        for m, a in zip(mats, algebra):
            out = out @ m @ borel.expm_sl2(s * a)
        return out

    fd = (-moved_product(2 * h) + 8 * moved_product(h) - 8 * moved_product(-h)
          + moved_product(-2 * h)) / (12 * h)
    lhs = borel.inv2(prod) @ fd
    rhs = np.zeros((2, 2), dtype=complex)
    suffix = np.eye(2, dtype=complex)
    for i in range(n - 1, -1, -1):
        rhs += borel.inv2(suffix) @ algebra[i] @ suffix
        suffix = mats[i] @ suffix
    return float(np.abs(lhs - rhs).max())


# --------------------------------------------------------------------------
# Action-angle brackets
# --------------------------------------------------------------------------

@dataclass
class AngleBrackets:
    """``{l_i, theta_j}`` and ``{theta_i, theta_j}`` for the fan, with error estimates."""

    length_angle: np.ndarray
    length_angle_err: np.ndarray
    angle_angle: np.ndarray
    angle_angle_err: np.ndarray

    @property
    def kappa(self) -> float:
        return float(np.mean(np.diag(self.length_angle)))

    @property
    def off_diagonal(self) -> float:
        m = self.length_angle - np.diag(np.diag(self.length_angle))
        return float(np.abs(m).max()) if m.size else 0.0

    @property
    def diagonal_spread(self) -> float:
        d = np.diag(self.length_angle)
        return float(np.abs(d - self.kappa).max())


def angle_bracket_check(word, h: float = DEFAULT_STEP) -> AngleBrackets:
    """Brackets of the fan lengths and dihedral angles at a closed nondegenerate polygon."""
    mats = borel.word_array(word)
    m = len(mats) - 3
    bending.dihedral_angles(mats)
    lengths = [fan_length_field(i) for i in range(1, m + 1)]
    angles = [angle_field(i) for i in range(1, m + 1)]
    la, la_err = bracket_matrix(lengths, angles, mats, h)
    aa, aa_err = bracket_matrix(angles, angles, mats, h)
    return AngleBrackets(la, la_err, aa, aa_err)


# --------------------------------------------------------------------------
# Lu's area forms on the plane
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LuParams:
    """``lambda > 0`` and ``epsilon in [0, 1]``; ``epsilon = 0`` is the limiting form."""

    lam: float
    eps: float

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError("lambda must be positive")
        if not 0.0 <= self.eps <= 1.0:
            raise DomainError("epsilon must lie in [0, 1]")

    @property
    def tau(self) -> float:
        """``1 / (1 - e^{4 eps lambda})``, negative for ``eps > 0``."""
        if self.eps == 0.0:
            return -math.inf
        return -1.0 / math.expm1(4.0 * self.eps * self.lam)


def lu_pi(params: LuParams, alpha: float, beta: float) -> float:
    """Coefficient of ``d/dalpha ^ d/dbeta`` in ``pi_eps = eps (pi_inf - tau pi_0)``.

    At ``eps = 0`` this is the limit ``pi_0 / (4 lambda)``.
    """
    u = 1.0 + alpha * alpha + beta * beta
    if params.eps == 0.0:
        return u * u / (8.0 * params.lam)
    return params.eps * (0.5 * u - 0.5 * params.tau * u * u)


def lu_omega(params: LuParams, alpha: float, beta: float) -> float:
    """Coefficient of ``dalpha ^ dbeta`` in the symplectic form inverse to ``pi_eps``."""
    u = 1.0 + alpha * alpha + beta * beta
    if params.eps == 0.0:
        return -8.0 * params.lam / (u * u)
    return -1.0 / (params.eps * (0.5 * u - 0.5 * params.tau * u * u))


def _omega_reduced(params: LuParams, s: float) -> float:
    """``omega(u) / s^2`` with ``u = 1 / s``, which is smooth on ``[0, 1]``."""
    if params.eps == 0.0:
        return -8.0 * params.lam
    # -1 / (eps s^2 (1/(2s) - tau/(2 s^2))) = -2 / (eps (s - tau))
    return -2.0 / (params.eps * (s - params.tau))


def lu_integral(params: LuParams, rel_tol: float = 1e-12) -> float:
    """``int_{R^2} omega_eps``.

    In polar coordinates with ``u = 1 + r^2`` the integral is
    ``pi int_1^oo omega(u) du``, and ``s = 1 / u`` maps the infinite range to
    ``[0, 1]`` with a smooth integrand, so no tail truncation is needed.
    """
    val, err = integrate.quad(lambda s: _omega_reduced(params, s), 0.0, 1.0,
                              epsabs=0.0, epsrel=rel_tol, limit=200)
    if not err <= 1e3 * rel_tol * abs(val):
        raise ConvergenceError(f"quadrature error estimate {err:.3e} too large", residual=err)
    return math.pi * val
