"""Iteration counts and contraction factors of the closing-up solver, plain and accelerated."""

import argparse
import time

import numpy as np

from hypergon import gaussmap, moduli


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"{'n':>2} {'plain':>6} {'anderson':>8} {'factor':>7} {'residual':>10} {'ms':>7}")
    rng = np.random.default_rng(args.seed)
    for n in range(3, 9):
        plain, fast, factor, resid, ms = [], [], [], [], []
        for _ in range(args.count):
            c = gaussmap.random_stable_configuration(rng, n)
            t0 = time.perf_counter()
            poly, fp = gaussmap.close_polygon(c)
            ms.append(1e3 * (time.perf_counter() - t0))
            plain.append(fp.iterations)
            factor.append(fp.contraction_factor)
            resid.append(moduli.closure_residual(poly))
            fast.append(gaussmap.solve_fixed_point(c, accelerate=True).iterations)
        print(f"{n:>2} {np.mean(plain):>6.1f} {np.mean(fast):>8.1f} {max(factor):>7.3f} "
              f"{max(resid):>10.2e} {np.mean(ms):>7.2f}")


if __name__ == "__main__":
    main()
