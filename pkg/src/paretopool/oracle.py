"""Brute-force reference implementations used to cross-check the solvers.

Everything here trades speed for independence: no code is shared with the
main computational paths beyond the distortion evaluations themselves.
Instance sizes are capped so the enumerations stay exhaustive.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .distortion import Distortion
from .errors import DomainError, ResourceLimitError
from .riskmeasure import EmpiricalSpace, as_profile

_ASSIGNMENT_CAP = 400_000
_BASIS_CAP = 500_000


@dataclass(frozen=True)
class GridSpec:
    """Slope grid and size caps for the brute-force allocation search."""

    slopes: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    max_states: int = 4
    max_agents: int = 3

    def __post_init__(self) -> None:
        if 0.0 not in self.slopes or 1.0 not in self.slopes:
            raise DomainError("slope grid must contain 0 and 1")
        if any(s < 0.0 or s > 1.0 for s in self.slopes):
            raise DomainError("slopes must lie in [0, 1]")


def brute_force_choquet(space: EmpiricalSpace, values, d: Distortion) -> float:
    """Choquet integral by descending sort and distorted tail weights.

    Independent of the layer construction in riskmeasure.choquet: states are
    sorted by value (descending, stable) and the integral accumulates
    (z_k - z_{k+1}) * T(cumulative weight) plus the minimum value.
    """
    z = as_profile(space, values)
    order = np.argsort(-z, kind="stable")
    zz = z[order]
    w_ord = space.weights[order]
    cw = np.clip(np.cumsum(w_ord), 0.0, 1.0)
    # Cumulative weights followed only by zero-weight states carry full
    # measure; pin them to exactly 1 before distorting.
    remaining = np.concatenate([np.cumsum(w_ord[::-1])[::-1][1:], [0.0]])
    cw[remaining == 0.0] = 1.0
    if zz.size == 1:
        return float(zz[0])
    return float(np.dot(zz[:-1] - zz[1:], d(cw[:-1])) + zz[-1])


def _slope_combos(grid: GridSpec, n: int) -> list[tuple[float, ...]]:
    combos = []
    for h in itertools.product(grid.slopes, repeat=n):
        if abs(sum(h) - 1.0) <= 1e-12:
            combos.append(h)
    return combos


def brute_force_po(agents, grid: GridSpec = GridSpec(),
                   chosen: tuple[int, ...] | None = None) -> float:
    """Minimal total risk over grid-valued layer allocations.

    Enumerates every assignment of per-layer slope vectors drawn from the
    grid (summing to 1 across agents) and prices each candidate allocation
    agent by agent with brute_force_choquet under the agent's own belief.
    """
    n = len(agents)
    if n == 0:
        raise DomainError("at least one agent required")
    m_states = agents[0].belief.state_count
    if m_states > grid.max_states or n > grid.max_agents:
        raise ResourceLimitError(
            f"instance ({m_states} states, {n} agents) exceeds the oracle caps")
    if chosen is None:
        if any(len(a.distortions) != 1 for a in agents):
            raise DomainError("brute_force_po expects singleton candidate sets")
        chosen = (0,) * n
    S = np.sum([a.endowment for a in agents], axis=0)
    zs = np.unique(S)
    bps = zs if zs[0] == 0.0 else np.concatenate([[0.0], zs])
    lower, lengths = bps[:-1], np.diff(bps)
    layers = lower.size
    if layers == 0:
        return 0.0
    overlap = np.clip(S[None, :] - lower[:, None], 0.0, lengths[:, None])
    combos = _slope_combos(grid, n)
    if len(combos) ** layers > _ASSIGNMENT_CAP:
        raise ResourceLimitError(
            f"{len(combos)}^{layers} slope assignments exceed the oracle cap")
    dists = [a.distortions[chosen[i]] for i, a in enumerate(agents)]
    best = math.inf
    for assignment in itertools.product(combos, repeat=layers):
        h = np.asarray(assignment)            # (layers, agents)
        total = 0.0
        for i, a in enumerate(agents):
            total += brute_force_choquet(a.belief, h[:, i] @ overlap, dists[i])
        if total < best:
            best = total
    return best


def brute_force_robust(agents, grid: GridSpec = GridSpec(),
                       max_product: int = 1000) -> float:
    """Worst case of brute_force_po over the candidate distortion product."""
    sizes = [len(a.distortions) for a in agents]
    if math.prod(sizes) > max_product:
        raise ResourceLimitError(
            f"candidate product {math.prod(sizes)} exceeds {max_product}")
    best = -math.inf
    for combo in itertools.product(*(range(s) for s in sizes)):
        best = max(best, brute_force_po(agents, grid, chosen=combo))
    return best


def dual_vertices(space: EmpiricalSpace, alpha: float) -> np.ndarray:
    """Vertices of {q : 0 <= q <= p / alpha, sum q = 1}.

    At a vertex every state but at most one sits at a bound.  Capped at 6
    states.  Rows are the vertices.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    n = space.state_count
    if n > 6:
        raise ResourceLimitError("vertex enumeration capped at 6 states")
    caps = space.weights / alpha
    seen = {}
    for f in range(n):
        others = [j for j in range(n) if j != f]
        for r in range(len(others) + 1):
            for up in itertools.combinations(others, r):
                qf = 1.0 - sum(caps[list(up)])
                if -1e-12 <= qf <= caps[f] + 1e-12:
                    q = np.zeros(n)
                    q[list(up)] = caps[list(up)]
                    q[f] = min(max(qf, 0.0), caps[f])
                    seen[tuple(np.round(q, 12))] = q
    return np.array(sorted(seen.values(), key=tuple))


def _agent_layer_rows(space: EmpiricalSpace, endowments, distortions):
    """Exceedance indicator rows, lengths and distorted targets per layer."""
    rows, lens, nus = [], [], []
    for X, d in zip(endowments, distortions):
        X = as_profile(space, X)
        zs = np.unique(X)
        bps = zs if zs[0] == 0.0 else np.concatenate([[0.0], zs])
        for lo, ln in zip(bps[:-1], np.diff(bps)):
            ind = (X > lo).astype(float)
            rows.append(ind)
            lens.append(float(ln))
            if float(np.dot(1.0 - ind, space.weights)) == 0.0:
                surv = 1.0
            else:
                surv = min(1.0, float(np.dot(ind, space.weights)))
            nus.append(d(surv))
    if rows:
        return np.array(rows), np.array(lens), np.array(nus)
    return np.zeros((0, space.state_count)), np.zeros(0), np.zeros(0)


def brute_force_lp(space: EmpiricalSpace, endowments, distortions,
                   alpha: float) -> float:
    """Maximum of sum_i sum_layers length * min(Q(X_i > t), nu_i) over the
    dual set {0 <= q <= p / alpha, sum q = 1}.

    The objective is concave piecewise linear, so its maximum sits at a
    basic point of the subdivision cut out by the box facets together with
    the kink hyperplanes Q(X_i > t) = nu_i.  Plain bound vertices alone are
    not enough: with two opposed agents the optimum can sit strictly inside
    a box face, at a kink.  All full-rank active sets of size states-1
    (plus the normalisation row) are therefore enumerated.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    n = space.state_count
    if n > 6:
        raise ResourceLimitError("brute_force_lp capped at 6 states")
    caps = space.weights / alpha
    ex_rows, lens, nus = _agent_layer_rows(space, endowments, distortions)

    normals = [np.eye(n)[w] for w in range(n) for _ in range(2)]
    rhs = [v for w in range(n) for v in (0.0, caps[w])]
    for r, nu in zip(ex_rows, nus):
        normals.append(r)
        rhs.append(float(nu))
    normals = np.array(normals)
    rhs = np.array(rhs)
    r_count = normals.shape[0]

    if n == 1:
        points = np.array([[1.0]])
    else:
        combos = list(itertools.combinations(range(r_count), n - 1))
        if len(combos) > _BASIS_CAP:
            raise ResourceLimitError("active-set enumeration exceeds the oracle cap")
        idx = np.array(combos)
        A = np.empty((len(combos), n, n))
        A[:, :-1, :] = normals[idx]
        A[:, -1, :] = 1.0
        b = np.empty((len(combos), n))
        b[:, :-1] = rhs[idx]
        b[:, -1] = 1.0
        dets = np.linalg.det(A)
        keep = np.abs(dets) > 0.5     # integer 0/1 normals give integer dets
        if not np.any(keep):
            points = dual_vertices(space, alpha)
        else:
            sols = np.linalg.solve(A[keep], b[keep][..., None])[..., 0]
            feas = (np.all(sols >= -1e-9, axis=1)
                    & np.all(sols <= caps[None, :] + 1e-9, axis=1))
            points = np.clip(sols[feas], 0.0, caps[None, :])
            points = np.vstack([points, dual_vertices(space, alpha)])
    if lens.size == 0:
        return 0.0
    tail = points @ ex_rows.T                       # (points, layers)
    obj = np.minimum(tail, nus[None, :]) @ lens
    return float(np.max(obj))
