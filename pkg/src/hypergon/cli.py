"""Command-line front end.

Exit codes: 0 success, 1 a verification suite failed, 2 domain rejection
(unstable, on a wall, degenerate), 3 convergence failure, 4 I/O or schema error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from . import SCHEMA, __version__, bending, borel, gaussmap, moduli, serialize, verify
from .bending import ActionAngle
from .errors import ConvergenceError, DomainError
from .serialize import SchemaError

EXIT_OK, EXIT_FAILED, EXIT_DOMAIN, EXIT_CONVERGENCE, EXIT_IO = 0, 1, 2, 3, 4

GLOBAL_DEFAULTS = {"tol": 1e-11, "max_iters": 1_000_000, "seed": 0, "model": "ball", "jobs": 1}


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _common_flags(parser: argparse.ArgumentParser) -> None:
    # SUPPRESS keeps an unset flag from overwriting a value given at the other level
    s = argparse.SUPPRESS
    parser.add_argument("--tol", type=_positive_float, default=s, help="solver tolerance")
    parser.add_argument("--max-iters", type=_positive_int, default=s, dest="max_iters")
    parser.add_argument("--seed", type=int, default=s)
    parser.add_argument("--model", choices=("half_space", "ball", "hyperboloid"), default=s)
    parser.add_argument("--jobs", type=_positive_int, default=s, help="worker processes")


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def cmd_close(args) -> int:
    c = serialize.configuration_from_doc(serialize.load(args.input))
    poly, fp = gaussmap.close_polygon(c, tol=args.tol, max_iter=args.max_iters,
                                      accelerate=args.accelerate)
    report = fp.report()
    report["closure_residual"] = moduli.closure_residual(poly)
    report["fixed_point"] = serialize.hpoint_to_json(fp.point.to(args.model))
    serialize.write_text(args.output, serialize.dumps(serialize.hpolygon_doc(poly, report=report)))
    return EXIT_OK


def cmd_gauss(args) -> int:
    doc = serialize.load(args.input)
    if args.space == "h":
        c = gaussmap.gauss_h(serialize.hpolygon_from_doc(doc))
    else:
        c = gaussmap.gauss_e(serialize.epolygon_from_doc(doc))
    charts = []
    for p in c.boundary_points():
        w = p.chart
        charts.append(None if w is None else [w.real, w.imag])
    out = serialize.configuration_doc(c, chart=charts)
    serialize.write_text(args.output, serialize.dumps(out))
    return EXIT_OK


def _bend_grid(args, mats) -> list[float]:
    if args.t is not None:
        return args.t
    if args.period:
        t_max = bending.bend_period(mats, args.k, args.normalized)
        if not math.isfinite(t_max):
            raise DomainError("degenerate diagonal: the flow is stationary")
    else:
        t_max = args.t_max
    return [t_max * i / args.steps for i in range(args.steps + 1)]


def cmd_bend(args) -> int:
    poly = serialize.hpolygon_from_doc(serialize.load(args.input))
    mats = poly.matrices
    n = len(mats)
    if not 1 <= args.k <= n:
        raise DomainError(f"flow index {args.k} out of range 1..{n}")
    grid = _bend_grid(args, mats)
    m = max(n - 3, 0)
    header = ["t"]
    ncoord = 4 if args.model == "hyperboloid" else 3
    header += [f"x{v}_{c}" for v in range(1, n + 2) for c in range(ncoord)]
    header += [f"l{i}" for i in range(1, m + 1)] + [f"theta{i}" for i in range(1, m + 1)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for t in grid:
        w = bending.bend_flow(mats, args.k, t, args.normalized)
        row = [t]
        for v in moduli.HPolygon(borel.as_word(w)).vertices(args.model):
            row += list(v.coords)
        row += list(bending.fan_lengths(w))
        try:
            row += list(bending.dihedral_angles(w)) if m else []
        except DomainError:
            row += [""] * m
        writer.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    serialize.write_text(args.output, buf.getvalue())
    return EXIT_OK


def cmd_sample(args) -> int:
    r = serialize.weights_from_doc(serialize.load(args.input))
    hit, witness = moduli.on_wall(r)
    if hit:
        raise DomainError(f"side lengths lie on a wall (partition {list(witness)})")
    ls = bending.sample_polyhedron(r, args.count, seed=args.seed)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed).spawn(1)[0])
    thetas = rng.uniform(0.0, 2 * math.pi, ls.shape)
    samples, polygons = [], []
    for l, th in zip(ls, thetas):
        aa = ActionAngle(tuple(l), tuple(th))
        samples.append(serialize.action_angle_to_json(aa))
        if not args.no_polygons:
            poly = bending.reconstruct(r, aa)
            polygons.append([serialize.belem_to_json(b) for b in poly.word])
    out = serialize.document("Samples", r=r.tolist(), seed=args.seed, samples=samples)
    if not args.no_polygons:
        out["polygons"] = polygons
    serialize.write_text(args.output, serialize.dumps(out))
    return EXIT_OK


def cmd_center(args) -> int:
    c = serialize.configuration_from_doc(serialize.load(args.input))
    res = gaussmap.solve_conformal_center(c)
    out = serialize.hpoint_doc(res.point.to(args.model), gradient_norm=res.gradient_norm,
                               iterations=res.iterations)
    if args.shrink is not None:
        out["shrink"] = gaussmap.shrink_limit_check(c, args.shrink, max_iter=args.max_iters)
    serialize.write_text(args.output, serialize.dumps(out))
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify.run_suite(args.suite, n=args.n, samples=args.samples, seed=args.seed,
                              jobs=args.jobs)
    out = serialize.document("VerificationReport", suite=args.suite, seed=args.seed, **report)
    serialize.write_text(args.output, serialize.dumps(out))
    return EXIT_OK if report["pass"] else EXIT_FAILED


def cmd_transfer(args) -> int:
    doc = serialize.load(args.input)
    if args.direction == "e2h":
        poly = gaussmap.transfer_e_to_h(serialize.epolygon_from_doc(doc), tol=args.tol,
                                        max_iter=args.max_iters)
        out = serialize.hpolygon_doc(poly)
    else:
        out = serialize.epolygon_doc(gaussmap.transfer_h_to_e(serialize.hpolygon_from_doc(doc)))
    serialize.write_text(args.output, serialize.dumps(out))
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypergon", description="Polygons in hyperbolic 3-space.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({SCHEMA})")
    _common_flags(p)
    sub = p.add_subparsers(dest="command", required=True)

    def command(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        _common_flags(sp)
        sp.add_argument("input", help="input JSON file, or - for stdin")
        sp.add_argument("-o", "--output", default="-", help="output file, or - for stdout")
        sp.set_defaults(func=fn)
        return sp

    sp = command("close", cmd_close, "close up a polygon from a stable configuration")
    sp.add_argument("--accelerate", action="store_true", help="Anderson-accelerated iteration")

    sp = command("gauss", cmd_gauss, "Gauss configuration of a polygon")
    sp.add_argument("--space", choices=("h", "e"), default="h")

    sp = command("bend", cmd_bend, "trajectory of a bending flow as CSV")
    sp.add_argument("--k", type=int, required=True, help="flow of f_k (1-based)")
    sp.add_argument("--normalized", action="store_true")
    grid = sp.add_mutually_exclusive_group()
    grid.add_argument("--period", action="store_true", help="sample one full period")
    grid.add_argument("--t-max", type=float, default=1.0, dest="t_max")
    grid.add_argument("--t", type=_float_list, default=None, help="comma-separated times")
    sp.add_argument("--steps", type=_positive_int, default=64)

    sp = command("sample", cmd_sample, "sample the momentum polyhedron and rebuild polygons")
    sp.add_argument("--count", type=_positive_int, default=10)
    sp.add_argument("--no-polygons", action="store_true", dest="no_polygons")

    sp = command("center", cmd_center, "conformal center of a stable configuration")
    sp.add_argument("--shrink", type=_float_list, default=None,
                    help="comma-separated t values for the shrinking-weights curve")

    sp = command("transfer", cmd_transfer, "move a polygon between E^3 and H^3")
    sp.add_argument("--direction", choices=("e2h", "h2e"), required=True)

    sp = sub.add_parser("verify", help="run a randomized verification suite")
    _common_flags(sp)
    sp.add_argument("suite", choices=sorted(verify.SUITES))
    sp.add_argument("--n", type=int, default=5)
    sp.add_argument("--samples", type=_positive_int, default=10)
    sp.add_argument("-o", "--output", default="-")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, value in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"hypergon: rejected: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"hypergon: no convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (SchemaError, OSError) as exc:
        print(f"hypergon: input/output error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
