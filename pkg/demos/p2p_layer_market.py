#!/usr/bin/env python3
"""Peer-to-peer risk sharing between three agents on an empirical space.

Solves for the Pareto-optimal layer allocation, prints the layer table
(which agent covers which slice of the aggregate loss), settles side
payments under the equal-split rule, and closes with the all-Prelec
special case where the optimum is a plain deductible contract.
"""

import numpy as np

from paretopool import (AgentSpec, Distortion, EmpiricalSpace, aggregate_loss,
                        prelec_deductible, side_payments, single, solve_fixed,
                        solve_robust, welfare_report, with_side_payments)


def main() -> None:
    space = EmpiricalSpace.uniform(8)
    xs = [np.array([0.0, 2.0, 1.0, 0.0, 5.0, 3.0, 0.0, 9.0]),
          np.array([1.0, 0.0, 4.0, 0.0, 2.0, 6.0, 1.0, 3.0]),
          np.array([0.0, 1.0, 0.0, 2.0, 0.0, 8.0, 2.0, 12.0])]
    dists = [Distortion.power(0.8),
             Distortion.prelec1(0.4),
             Distortion.kahneman_tversky(0.7)]
    agents = [AgentSpec(space, single(d), x) for d, x in zip(dists, xs)]

    alloc, value = solve_fixed(agents)
    S = aggregate_loss(agents)
    print(f"aggregate loss by state: {S.tolist()}")
    print(f"optimal total distorted risk: {value:.6f}\n")

    print("layer table (slope 1 = layer fully carried by that agent)")
    bps = alloc.breakpoints
    print(f"  {'layer':>12} {'survival':>9}  " +
          "  ".join(f"agent{i}" for i in range(len(agents))))
    survs = [float(space.weights[S > b].sum()) for b in bps[:-1]]
    for k in range(alloc.slopes.shape[1]):
        cells = "  ".join(f"{alloc.slopes[i, k]:6.2f}"
                          for i in range(len(agents)))
        print(f"  ({bps[k]:4.1f},{bps[k + 1]:5.1f}] {survs[k]:9.3f}  {cells}")

    c = side_payments(alloc, agents, "equal")
    report = welfare_report(agents, with_side_payments(alloc, c))
    print(f"\nside payments (sum {c.sum():+.2e}): "
          + ", ".join(f"{v:+.4f}" for v in c))
    print("welfare gains after equal split: "
          + ", ".join(f"{g:.6f}" for g in report.welfare_gains))
    print(f"total gain {report.total_welfare:.6f}, "
          f"per agent {report.average_gain:.6f}")

    # Candidate sets: each agent hedges over two plausible distortions and
    # the market is solved against the worst case.
    sets = [
        AgentSpec(space, (Distortion.kahneman_tversky(0.4), Distortion.power(0.7)), xs[0]),
        AgentSpec(space, (Distortion.kahneman_tversky(0.5), Distortion.prelec1(0.5)), xs[1]),
        AgentSpec(space, single(Distortion.power(0.6)), xs[2]),
    ]
    sol = solve_robust(sets)
    print(f"\nrobust market: worst-case candidates {sol.chosen}, "
          f"value {sol.value:.6f}")

    # All-Prelec market: the optimum is a deductible at the 1/e quantile.
    ps = [Distortion.prelec1(0.3), Distortion.prelec1(0.9)]
    pagents = [AgentSpec(space, single(ps[0]), xs[0] + xs[1]),
               AgentSpec(space, single(ps[1]), xs[2])]
    Sp = aggregate_loss(pagents)
    d_star = prelec_deductible(space, Sp, ps)
    palloc, _ = solve_fixed(pagents)
    cov = palloc.coverage(Sp)
    print(f"\nall-Prelec market: deductible d* = {d_star}")
    print(f"  low-alpha agent covers  min(S, d*): {cov[0].tolist()}")
    print(f"  high-alpha agent covers (S - d*)+:  {cov[1].tolist()}")


if __name__ == "__main__":
    main()
