"""Measure the angular speed of the normalized bending flows and the bracket constant kappa.

Prints a JSON report; both numbers depend on how the diagonal lengths are
normalized, so the report lists them for geometric and for doubled lengths.
"""

import argparse
import json
import math

import numpy as np

from hypergon import bending, poisson, verify


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=6)
    parser.add_argument("--samples", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    speeds, kappas = [], []
    for _ in range(args.samples):
        _, mats = verify.random_closed_polygon(rng, args.n)
        for k in range(2, args.n):
            for t in (0.1, 0.5, 1.2):
                out = bending.bend_flow(mats, k, t, normalized=True)
                speeds += [bending.rotation_angle(mats, out, k, v) / t for v in range(2, k + 1)]
        kappas += list(np.diag(poisson.angle_bracket_check(mats).length_angle))

    speed, kappa = float(np.mean(speeds)), float(np.mean(kappas))
    print(json.dumps({
        "n": args.n,
        "samples": args.samples,
        "normalized_flow_speed": speed,
        "normalized_flow_speed_spread": float(np.ptp(speeds)),
        "normalized_word_period": math.pi,
        "kappa_geometric_lengths": kappa,
        "kappa_doubled_lengths": 2 * kappa,
        "kappa_spread": float(np.ptp(kappas)),
    }, indent=2))


if __name__ == "__main__":
    main()
