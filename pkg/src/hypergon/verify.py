"""Randomized verification suites for the bracket, flow and closing-up identities.

Each suite draws ``samples`` independent cases from a seed (one child seed per
case, so results do not depend on the number of workers) and returns a report

    {identity, samples, max_abs, fd_error_estimate, pass, ...}

where ``max_abs`` is the largest deviation from the identity over the cases.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable

import numpy as np

from . import bending, borel, gaussmap, moduli, poisson
from .bending import ActionAngle

BRACKET_TOL = 1e-6
ANGLE_TOL = 1e-5
KAPPA_TOL = 1e-4


def _map(fn: Callable, samples: int, seed: int, jobs: int = 1) -> list:
    seeds = np.random.SeedSequence(seed).spawn(samples)
    if jobs > 1 and samples > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, seeds))
    return [fn(s) for s in seeds]


def random_weights(rng: np.random.Generator, n: int, low: float = 0.5, high: float = 1.5,
                   wall_tol: float = 1e-6) -> np.ndarray:
    """Side lengths inside the cone and at least ``wall_tol`` away from every wall."""
    while True:
        r = rng.uniform(low, high, n)
        if r.max() < 0.5 * r.sum() - wall_tol and not moduli.on_wall(r, wall_tol)[0]:
            return r


def random_closed_polygon(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """A closed polygon with nondegenerate fan triangles, via random action-angle data.

    Returns ``(r, word array)``.
    """
    r = random_weights(rng, n)
    l = bending.sample_polyhedron(r, 1, seed=int(rng.integers(2**31)), slack=1e-3)[0]
    theta = rng.uniform(0.0, 2 * math.pi, n - 3)
    poly = bending.reconstruct(r, ActionAngle(tuple(l), tuple(theta)))
    return r, poly.matrices


def _report(identity: str, results: list[dict], tol: float, fd_tol: float | None = None,
            **extra) -> dict:
    max_abs = max(r["abs"] for r in results)
    fd = max(r.get("fd", 0.0) for r in results)
    ok = max_abs < tol and (fd_tol is None or fd < fd_tol)
    return {"identity": identity, "samples": len(results), "max_abs": max_abs,
            "fd_error_estimate": fd, "pass": bool(ok), **extra}


# --------------------------------------------------------------------------
# Per-case workers (top level so that worker processes can import them)
# --------------------------------------------------------------------------

def _brackets_commute_case(ss, n: int) -> dict:
    rng = np.random.default_rng(ss)
    mats = borel.word_array(borel.random_word(rng, n, scale=0.6))
    fields = [poisson.f_field(1, k + 1) for k in range(1, n + 1)]
    vals, errs = poisson.bracket_matrix(fields, fields, mats)
    return {"abs": float(np.abs(vals).max()), "fd": float(errs.max())}


def _length_brackets_case(ss, n: int) -> dict:
    rng = np.random.default_rng(ss)
    mats = borel.word_array(borel.random_word(rng, n, scale=0.6, closed=True))
    diags = [(i, j) for i in range(1, n + 1) for j in range(i + 2, n + 1) if (i, j) != (1, n)]
    pairs = [(a, b) for p, a in enumerate(diags) for b in diags[p + 1:]
             if bending.diagonals_nonintersecting(a, b, n)]
    fields = {d: poisson.length_field(*d) for d in diags}
    worst, fd = 0.0, 0.0
    for a, b in pairs:
        v = poisson.bracket_with_error(fields[a], fields[b], mats)
        worst, fd = max(worst, abs(v.value)), max(fd, v.fd_error)
    return {"abs": worst, "fd": fd, "pairs": len(pairs)}


def _angle_brackets_case(ss, n: int) -> dict:
    rng = np.random.default_rng(ss)
    _, mats = random_closed_polygon(rng, n)
    ab = poisson.angle_bracket_check(mats)
    return {
        "abs": max(ab.off_diagonal, float(np.abs(ab.angle_angle).max())),
        "fd": float(max(ab.length_angle_err.max(), ab.angle_angle_err.max())),
        "kappa": ab.kappa,
        "diag": np.diag(ab.length_angle).tolist(),
    }


def _flow_periods_case(ss, n: int) -> dict:
    rng = np.random.default_rng(ss)
    mats = borel.word_array(borel.random_word(rng, n, scale=0.6))
    k = int(rng.integers(1, n + 1))
    period = bending.bend_period(mats, k)
    d1 = bending.word_distance(bending.bend_flow(mats, k, period), mats)
    d2 = bending.word_distance(bending.bend_flow(mats, k, 2 * math.pi, normalized=True), mats)
    return {"abs": max(d1, d2)}


def _torus_commute_case(ss, n: int) -> dict:
    rng = np.random.default_rng(ss)
    _, mats = random_closed_polygon(rng, n)
    params = rng.uniform(-math.pi, math.pi, n - 3)
    ref = bending.torus_action(mats, params)
    order = rng.permutation(n - 3)
    return {"abs": bending.word_distance(ref, bending.torus_action(mats, params, order))}


def _gauss_roundtrip_case(ss, n: int) -> dict:
    rng = np.random.default_rng(ss)
    _, mats = random_closed_polygon(rng, n)
    poly = moduli.HPolygon(borel.as_word(mats))
    back = gaussmap.inverse_gauss_h(gaussmap.gauss_h(poly))
    return {"abs": float(np.abs(back.vertices_X - poly.vertices_X).max())}


def _contraction_case(ss, n: int, pairs: int = 200) -> dict:
    rng = np.random.default_rng(ss)
    c = gaussmap.random_stable_configuration(rng, n)
    poly, fp = gaussmap.close_polygon(c)
    lip = gaussmap.lipschitz_estimate(c, fp.point, pairs=pairs, rng=rng)
    return {"abs": moduli.closure_residual(poly), "factor": fp.contraction_factor,
            "lipschitz": lip, "iterations": fp.iterations}


# --------------------------------------------------------------------------
# Suites
# --------------------------------------------------------------------------

def brackets_commute(n: int = 5, samples: int = 10, seed: int = 0, jobs: int = 1) -> dict:
    res = _map(partial(_brackets_commute_case, n=n), samples, seed, jobs)
    return _report("{f_j, f_k} = 0", res, BRACKET_TOL, BRACKET_TOL, n=n)


def length_brackets(n: int = 5, samples: int = 10, seed: int = 0, jobs: int = 1) -> dict:
    res = _map(partial(_length_brackets_case, n=n), samples, seed, jobs)
    return _report("{l_ij, l_ab} = 0 for non-crossing diagonals", res, BRACKET_TOL, BRACKET_TOL,
                   n=n, pairs_per_sample=res[0]["pairs"])


def angle_brackets(n: int = 5, samples: int = 10, seed: int = 0, jobs: int = 1) -> dict:
    if n < 4:
        raise ValueError("angle brackets need n >= 4")
    res = _map(partial(_angle_brackets_case, n=n), samples, seed, jobs)
    diags = np.concatenate([r["diag"] for r in res])
    kappa = float(np.mean(diags))
    spread = float(np.abs(diags - kappa).max())
    rep = _report("{l_i, theta_j} = kappa delta_ij, {theta_i, theta_j} = 0", res, ANGLE_TOL,
                  ANGLE_TOL, n=n, kappa=kappa, kappa_sign=int(np.sign(kappa)),
                  kappa_spread=spread, kappa_doubled_lengths=2.0 * kappa)
    rep["pass"] = bool(rep["pass"] and spread < KAPPA_TOL)
    return rep


def flow_periods(n: int = 5, samples: int = 10, seed: int = 0, jobs: int = 1) -> dict:
    res = _map(partial(_flow_periods_case, n=n), samples, seed, jobs)
    return _report("bending flows return after one period", res, 1e-9, n=n)


def torus_commute(n: int = 5, samples: int = 10, seed: int = 0, jobs: int = 1) -> dict:
    if n < 4:
        raise ValueError("the torus action needs n >= 4")
    res = _map(partial(_torus_commute_case, n=n), samples, seed, jobs)
    return _report("fan flows commute", res, 1e-8, n=n)


def lu_integral(n: int = 0, samples: int = 0, seed: int = 0, jobs: int = 1) -> dict:
    """Relative error of the integral of ``omega_eps`` on a fixed (lambda, eps) grid."""
    del n, samples, seed, jobs
    lams, epss = (0.25, 1.0, 2.0), (0.0, 1e-3, 0.1, 1.0)
    rows = []
    for lam in lams:
        vals = [poisson.lu_integral(poisson.LuParams(lam, e)) for e in epss]
        exact = -8.0 * math.pi * lam
        rel = [abs(v / exact - 1.0) for v in vals]
        spread = (max(vals) - min(vals)) / abs(exact)
        rows.append({"lambda": lam, "values": vals, "abs": max(max(rel), spread)})
    rep = _report("integral of omega_eps = -8 pi lambda", rows, 1e-6)
    rep["grid"] = [{"lambda": r["lambda"], "eps": list(epss), "values": r["values"]} for r in rows]
    return rep


def gauss_roundtrip(n: int = 5, samples: int = 10, seed: int = 0, jobs: int = 1) -> dict:
    res = _map(partial(_gauss_roundtrip_case, n=n), samples, seed, jobs)
    return _report("inverse Gauss map undoes the Gauss map", res, 1e-8, n=n)


def contraction(n: int = 5, samples: int = 10, seed: int = 0, jobs: int = 1) -> dict:
    res = _map(partial(_contraction_case, n=n), samples, seed, jobs)
    factor = max(r["factor"] for r in res)
    lip = max(r["lipschitz"] for r in res)
    rep = _report("contraction closes the polygon", res, 1e-9, n=n,
                  max_contraction_factor=factor, max_lipschitz=lip,
                  max_iterations=max(r["iterations"] for r in res))
    rep["pass"] = bool(rep["pass"] and factor < 1.0 and lip < 1.0)
    return rep


SUITES: dict[str, Callable[..., dict]] = {
    "brackets-commute": brackets_commute,
    "length-brackets": length_brackets,
    "angle-brackets": angle_brackets,
    "flow-periods": flow_periods,
    "torus-commute": torus_commute,
    "lu-integral": lu_integral,
    "gauss-roundtrip": gauss_roundtrip,
    "contraction": contraction,
}


def run_suite(name: str, n: int = 5, samples: int = 10, seed: int = 0, jobs: int = 1) -> dict:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    return SUITES[name](n=n, samples=samples, seed=seed, jobs=jobs)
