#!/usr/bin/env python3
"""Choquet integrals, VaR and expected shortfall on a small empirical space.

Shows how the same loss profile is priced under different probability
distortions, and verifies the dual picture of expected shortfall: ES at
level alpha is the largest expectation over densities bounded by 1/alpha.
"""

import numpy as np

from paretopool import Distortion, EmpiricalSpace, choquet, es, oracle, var


def main() -> None:
    # Twelve months of aggregate losses, one state per month.
    space = EmpiricalSpace.uniform(12)
    z = np.array([0.0, 0.4, 0.0, 2.1, 0.9, 14.0, 3.3, 0.0, 1.2, 6.5, 0.2, 28.0])
    print(f"losses: {z.tolist()}")
    print(f"plain mean: {choquet(space, z, Distortion.identity()):.6f}")

    print("\nChoquet values under different attitudes")
    for d in (Distortion.power(0.5),
              Distortion.power(2.0),
              Distortion.prelec1(0.6),
              Distortion.kahneman_tversky(0.4)):
        print(f"  {d.label():<28} {choquet(space, z, d):12.6f}")

    print("\nquantile ladder")
    for a in (0.5, 0.25, 1.0 / 12.0 + 1e-9):
        print(f"  VaR_{a:<6.3f} = {var(space, z, a):8.3f}"
              f"   ES_{a:<6.3f} = {es(space, z, a):8.3f}")

    # Dual picture on a space small enough to enumerate vertices.
    small = EmpiricalSpace.uniform(6)
    zs = z[:6]
    alpha = 0.25
    verts = oracle.dual_vertices(small, alpha)
    dual = float(np.max(verts @ zs))
    print(f"\nES_{alpha} via dual vertex enumeration over "
          f"{{0 <= q <= p/alpha, sum q = 1}} (6-state slice):")
    print(f"  primal {es(small, zs, alpha):.12f}")
    print(f"  dual   {dual:.12f}   ({verts.shape[0]} vertices)")

    # ES is the Choquet integral of the truncated-linear distortion.
    tv = choquet(small, zs, Distortion.tvar(alpha))
    print(f"  tail distortion {tv:.12f}")


if __name__ == "__main__":
    main()
