"""Command line front end.

Subcommands: summary, po-decentralized, po-centralized, stackelberg, sweep,
validate-config.  Run configuration is a JSON file with an explicit schema
version; unknown keys anywhere in the tree are rejected.  Emitted CSV files
round floats to 9 significant digits; JSON files keep full precision so an
allocation can be reloaded and re-evaluated without loss.

Exit codes: 0 success, 2 input or data format error, 3 solver failure,
4 configuration error.  The PARETOPOOL_LOG environment variable sets the
logging level.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import centralized as central
from . import ingest
from .distortion import (PARAM_NAMES, POWER, TABULATED, Distortion,
                         DistortionSet, single, validate_params)
from .errors import (ConfigError, FormatError, ParetopoolError)
from .posolver import (AgentSpec, LayerAllocation, side_payments, solve_robust,
                       welfare_report, with_side_payments)
from .riskmeasure import EmpiricalSpace

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_ALPHA = 0.15
DEFAULT_OUT = "paretopool_out"

_TOP_KEYS = {"version", "alpha", "weights", "loss_column", "tolerances", "agents"}
_AGENT_KEYS = {"label", "distortions", "belief", "endowment_column"}
_DIST_KEYS = {"family", "params"}
_TOL_KEYS = {"tie"}


@dataclass(frozen=True)
class AgentConfig:
    label: str
    distortions: DistortionSet
    belief_file: str | None
    endowment_column: str


@dataclass(frozen=True)
class RunConfig:
    agents: tuple[AgentConfig, ...]
    alpha: float
    weights: object            # "equal" | "last" | tuple of proportions
    loss_column: str
    tie_tolerance: float
    base_dir: Path


def _require_keys(mapping: dict, allowed: set, where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")


def _distortion_from_record(rec, where: str) -> Distortion:
    if not isinstance(rec, dict):
        raise ConfigError(f"{where}: distortion record must be an object")
    _require_keys(rec, _DIST_KEYS, where)
    family = rec.get("family")
    if not isinstance(family, str):
        raise ConfigError(f"{where}: missing family name")
    params = rec.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError(f"{where}: params must be an object")
    if family == TABULATED:
        if set(params) != {"knots"}:
            raise ConfigError(f"{where}: tabulated takes exactly the 'knots' param")
        knots = tuple((float(t), float(v)) for t, v in params["knots"])
        values: tuple[float, ...] = ()
    else:
        names = PARAM_NAMES.get(family)
        if names is None:
            raise ConfigError(f"{where}: unknown family '{family}'")
        if set(params) != set(names):
            raise ConfigError(
                f"{where}: family '{family}' takes params {list(names)}, got {sorted(params)}")
        try:
            values = tuple(float(params[n]) for n in names)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: non-numeric parameter ({exc})")
        knots = ()
    report = validate_params(family, values, knots)
    if not report.ok:
        raise ConfigError(f"{where}: " + "; ".join(report.violations))
    return Distortion(family, values, knots)


def _weights_from_value(value, where: str):
    if isinstance(value, str):
        if value in ("equal", "last"):
            return value
        raise ConfigError(f"{where}: weight rule must be 'equal', 'last' or a vector")
    if isinstance(value, list):
        try:
            vec = tuple(float(v) for v in value)
        except (TypeError, ValueError):
            raise ConfigError(f"{where}: weight vector must be numeric")
        if not vec or any(v < 0.0 for v in vec) or sum(vec) <= 0.0:
            raise ConfigError(f"{where}: weight proportions must be non-negative "
                              "with a positive sum")
        return vec
    raise ConfigError(f"{where}: unsupported weights value {value!r}")


def load_config(path) -> RunConfig:
    """Parse and validate a run configuration file (fail-fast)."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if not isinstance(payload, dict):
        raise ConfigError("config root must be an object")
    _require_keys(payload, _TOP_KEYS, "config")
    if payload.get("version") != SCHEMA_VERSION:
        raise ConfigError(f"config version must be {SCHEMA_VERSION}")
    alpha = float(payload.get("alpha", DEFAULT_ALPHA))
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    weights = _weights_from_value(payload.get("weights", "equal"), "config.weights")
    loss_column = payload.get("loss_column", ingest.DEFAULT_LOSS_COLUMN)
    if not isinstance(loss_column, str) or not loss_column:
        raise ConfigError("loss_column must be a non-empty string")
    tolerances = payload.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise ConfigError("tolerances must be an object")
    _require_keys(tolerances, _TOL_KEYS, "config.tolerances")
    tie = float(tolerances.get("tie", 1e-12))
    if tie < 0.0:
        raise ConfigError("tolerances.tie must be non-negative")
    raw_agents = payload.get("agents")
    if not isinstance(raw_agents, list) or not raw_agents:
        raise ConfigError("config.agents must be a non-empty list")
    agents: list[AgentConfig] = []
    labels = set()
    for i, rec in enumerate(raw_agents):
        where = f"config.agents[{i}]"
        if not isinstance(rec, dict):
            raise ConfigError(f"{where}: must be an object")
        _require_keys(rec, _AGENT_KEYS, where)
        label = rec.get("label")
        if not isinstance(label, str) or not label:
            raise ConfigError(f"{where}: missing label")
        if label in labels:
            raise ConfigError(f"{where}: duplicate label '{label}'")
        labels.add(label)
        recs = rec.get("distortions")
        if not isinstance(recs, list) or not recs:
            raise ConfigError(f"{where}: distortions must be a non-empty list")
        dset = DistortionSet(tuple(
            _distortion_from_record(r, f"{where}.distortions[{j}]")
            for j, r in enumerate(recs)))
        belief = rec.get("belief", "shared")
        if belief == "shared":
            belief_file = None
        elif isinstance(belief, dict):
            _require_keys(belief, {"weights_file"}, f"{where}.belief")
            belief_file = belief.get("weights_file")
            if not isinstance(belief_file, str):
                raise ConfigError(f"{where}.belief: weights_file must be a path")
        else:
            raise ConfigError(f"{where}: belief must be 'shared' or a weights_file object")
        column = rec.get("endowment_column", label)
        if not isinstance(column, str) or not column:
            raise ConfigError(f"{where}: endowment_column must be a non-empty string")
        agents.append(AgentConfig(label, dset, belief_file, column))
    if isinstance(weights, tuple) and len(weights) != len(agents):
        raise ConfigError(
            f"weight vector has {len(weights)} entries for {len(agents)} agents")
    return RunConfig(tuple(agents), alpha, weights, loss_column, tie, path.parent)


# -- market assembly ---------------------------------------------------------


def _load_belief(cfg: RunConfig, agent: AgentConfig, m: int) -> EmpiricalSpace | None:
    if agent.belief_file is None:
        return None
    path = Path(agent.belief_file)
    if not path.is_absolute():
        path = cfg.base_dir / path
    try:
        values = [float(line) for line in path.read_text().split()]
    except (OSError, ValueError) as exc:
        raise ConfigError(f"belief file {path}: {exc}")
    if len(values) != m:
        raise ConfigError(
            f"belief file {path} has {len(values)} weights for {m} months")
    try:
        return EmpiricalSpace(np.array(values))
    except ParetopoolError as exc:
        raise ConfigError(f"belief file {path}: {exc}")


def _load_market(cfg: RunConfig, data_path, loss_column: str):
    with open(data_path, "r", encoding="utf-8", newline="") as fh:
        panel, report = ingest.parse_losses(fh, loss_column)
    log.info("parsed %d claim rows (%d used, %d rejected) into %d months x %d agents",
             report.total_rows, report.used_rows, len(report.rejected),
             panel.month_count, len(panel.agents))
    shared, _ = ingest.to_space(panel)
    agents = []
    for acfg in cfg.agents:
        try:
            profile = panel.column(acfg.endowment_column)
        except ParetopoolError:
            raise ConfigError(
                f"agent '{acfg.label}': data has no column '{acfg.endowment_column}' "
                f"(available: {list(panel.agents)})")
        belief = _load_belief(cfg, acfg, panel.month_count) or shared
        agents.append(AgentSpec(belief, acfg.distortions, profile))
    return panel, shared, agents


def _require_plain_centralized(cfg: RunConfig) -> list[Distortion]:
    dists = []
    for acfg in cfg.agents:
        if acfg.belief_file is not None:
            raise ConfigError(
                f"agent '{acfg.label}': centralized commands use the shared "
                "reference measure; per-agent beliefs are not supported there")
        if len(acfg.distortions) != 1:
            raise ConfigError(
                f"agent '{acfg.label}': centralized commands need a single "
                "distortion per agent")
        dists.append(acfg.distortions[0])
    return dists


# -- output helpers ----------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{float(x):.9g}"


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _sorted_state_order(S: np.ndarray) -> np.ndarray:
    return np.argsort(S, kind="stable")


# -- subcommands -------------------------------------------------------------


def cmd_summary(args) -> int:
    cfg = load_config(args.config) if args.config else None
    loss_column = args.loss_column or (cfg.loss_column if cfg else ingest.DEFAULT_LOSS_COLUMN)
    with open(args.data, "r", encoding="utf-8", newline="") as fh:
        panel, report = ingest.parse_losses(fh, loss_column)
    log.info("summary over %d months, %d agents (%d rows rejected)",
             panel.month_count, len(panel.agents), len(report.rejected))
    out = _out_dir(args)
    stats = ingest.summary_stats(panel)
    header = ["statistic"] + list(panel.agents)
    rows = [[field] + [_fmt(getattr(stats[a], field)) for a in panel.agents]
            for field in ingest.STAT_FIELDS]
    _write_csv(out / "summary.csv", header, rows)
    corr = ingest.correlation(panel)
    header = ["agent"] + list(panel.agents)
    rows = [[a] + [_fmt(v) for v in corr.matrix[i]]
            for i, a in enumerate(panel.agents)]
    _write_csv(out / "correlation.csv", header, rows)
    print(f"wrote summary.csv and correlation.csv to {out}")
    return 0


def _resolve_weights_arg(args, cfg: RunConfig):
    if args.weights is None:
        return cfg.weights
    if args.weights in ("equal", "last"):
        return args.weights
    path = Path(args.weights)
    try:
        value = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read weights file: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"weights file is not valid JSON: {exc}")
    if not isinstance(value, list):
        raise ConfigError("weights file must hold a JSON array of proportions")
    vec = _weights_from_value(value, str(path))
    if len(vec) != len(cfg.agents):
        raise ConfigError(
            f"weights file has {len(vec)} entries for {len(cfg.agents)} agents")
    return vec


def _welfare_weights(rule, total: float, n: int):
    """Translate a weight rule into absolute welfare shares summing to W.

    Explicit vectors are proportions: the user cannot know W in advance, so
    they are scaled to sum to it.
    """
    if isinstance(rule, tuple):
        vec = np.asarray(rule, dtype=float)
        return total * vec / vec.sum()
    return rule


def cmd_po_decentralized(args) -> int:
    cfg = load_config(args.config)
    loss_column = args.loss_column or cfg.loss_column
    panel, _, agents = _load_market(cfg, args.data, loss_column)
    labels = [a.label for a in cfg.agents]
    solution = solve_robust(agents)
    rule = _resolve_weights_arg(args, cfg)
    base_report = welfare_report(agents, solution.allocation)
    weights = _welfare_weights(rule, base_report.total_welfare, len(agents))
    c = side_payments(solution.allocation, agents, weights)
    alloc = with_side_payments(solution.allocation, c)
    report = welfare_report(agents, alloc)
    out = _out_dir(args)

    payload = alloc.to_dict()
    payload["agent_labels"] = labels
    _write_json(out / "allocation.json", payload)

    rep = report.to_dict()
    rep["agent_labels"] = labels
    rep["solver_value"] = solution.value
    _write_json(out / "market_report.json", rep)

    S = np.sum([a.endowment for a in agents], axis=0)
    order = _sorted_state_order(S)
    raw = alloc.profiles(S)          # g_i(S) + c_i
    norm = alloc.coverage(S)         # zero retention at zero aggregate loss
    header = ["rank", "state", "aggregate_loss"]
    for label in labels:
        header += [f"retained_raw_{label}", f"retained_norm_{label}"]
    rows = []
    for rank, idx in enumerate(order):
        row = [rank, int(idx), _fmt(S[idx])]
        for i in range(len(labels)):
            row += [_fmt(raw[i, idx]), _fmt(norm[i, idx])]
        rows.append(row)
    _write_csv(out / "retention_decentralized.csv", header, rows)
    print(f"total welfare gain {_fmt(report.total_welfare)}; outputs in {out}")
    return 0


def _centralized_pieces(args):
    cfg = load_config(args.config)
    dists = _require_plain_centralized(cfg)
    alpha = args.alpha if args.alpha is not None else cfg.alpha
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    loss_column = args.loss_column or cfg.loss_column
    panel, space, agents = _load_market(cfg, args.data, loss_column)
    labels = [a.label for a in cfg.agents]
    endowments = [a.endowment for a in agents]
    contract = central.solve_centralized(space, endowments, dists, alpha)
    return cfg, labels, space, endowments, dists, contract


def cmd_po_centralized(args) -> int:
    _, labels, space, endowments, dists, contract = _centralized_pieces(args)
    welfare = central.centralized_welfare(space, endowments, dists, contract)
    out = _out_dir(args)
    _write_json(out / "contract.json", contract.to_dict(labels))
    _write_json(out / "welfare_centralized.json", welfare.to_dict(labels))

    S = np.sum(endowments, axis=0)
    order = _sorted_state_order(S)
    indemnities = contract.indemnity_profiles(space, endowments)
    header = ["rank", "state", "aggregate_loss"] + [f"retained_{l}" for l in labels]
    rows = []
    for rank, idx in enumerate(order):
        rows.append([rank, int(idx), _fmt(S[idx])]
                    + [_fmt(endowments[i][idx] - indemnities[i, idx])
                       for i in range(len(labels))])
    _write_csv(out / "retention_centralized.csv", header, rows)
    print(f"aggregate welfare gain {_fmt(welfare.aggregate_gain)}; outputs in {out}")
    return 0


def cmd_stackelberg(args) -> int:
    _, labels, space, endowments, dists, contract = _centralized_pieces(args)
    premiums = central.stackelberg_premiums(space, endowments, dists, contract)
    welfare = central.centralized_welfare(space, endowments, dists, contract,
                                          premiums=premiums)
    out = _out_dir(args)
    rows = [[label, _fmt(premiums[i]), _fmt(welfare.policyholder_gains[i])]
            for i, label in enumerate(labels)]
    _write_csv(out / "premiums_stackelberg.csv",
               ["agent", "premium", "policyholder_gain"], rows)
    _write_json(out / "stackelberg.json", {
        "schema_version": 1,
        "insurer_gain": welfare.insurer_gain,
        "aggregate_gain": welfare.aggregate_gain,
        "average_gain": welfare.average_gain,
    })
    print(f"insurer gain {_fmt(welfare.insurer_gain)}; outputs in {out}")
    return 0


def sweep_rows(space, endowments, dist_sets, sweep_index, gammas, alpha):
    """Welfare comparison rows for a grid of power exponents.

    The swept agent's distortion is replaced by power(gamma) at each grid
    value; every agent must carry a single distortion and the shared
    reference measure.  Grid points are evaluated in parallel; the rows
    come back in grid order.
    """
    base = [ds[0] for ds in dist_sets]

    def one(gamma: float):
        dists = list(base)
        dists[sweep_index] = Distortion.power(gamma)
        agents = [AgentSpec(space, single(d), x)
                  for d, x in zip(dists, endowments)]
        solution = solve_robust(agents)
        report = welfare_report(agents, solution.allocation)
        contract = central.solve_centralized(space, endowments, dists, alpha)
        welfare = central.centralized_welfare(space, endowments, dists, contract)
        cen, dec = welfare.average_gain, report.average_gain
        pct = 100.0 * (cen - dec) / cen if cen != 0.0 else math.nan
        return (gamma, 1.0 - gamma, cen, dec, pct)

    with ThreadPoolExecutor(max_workers=min(4, max(1, len(gammas)))) as pool:
        return list(pool.map(one, gammas))


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    _require_plain_centralized(cfg)
    alpha = args.alpha if args.alpha is not None else cfg.alpha
    loss_column = args.loss_column or cfg.loss_column
    panel, space, agents = _load_market(cfg, args.data, loss_column)
    labels = [a.label for a in cfg.agents]
    if args.sweep_agent is None:
        sweep_index = len(labels) - 1
    elif args.sweep_agent in labels:
        sweep_index = labels.index(args.sweep_agent)
    else:
        raise ConfigError(f"unknown sweep agent '{args.sweep_agent}'")
    if cfg.agents[sweep_index].distortions[0].family != POWER:
        raise ConfigError(
            f"sweep agent '{labels[sweep_index]}' must use a power distortion")
    try:
        gammas = [float(v) for v in args.grid.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad sweep grid '{args.grid}'")
    if not gammas or any(g <= 0.0 for g in gammas):
        raise ConfigError("sweep grid needs positive gamma values")
    endowments = [a.endowment for a in agents]
    dist_sets = [a.distortions for a in agents]
    rows = sweep_rows(space, endowments, dist_sets, sweep_index, gammas, alpha)
    out = _out_dir(args)
    _write_csv(out / "sweep.csv",
               ["gamma", "rpra", "centralized_avg_gain",
                "decentralized_avg_gain", "percent_decrease"],
               [[_fmt(v) for v in row] for row in rows])
    print(f"swept {len(gammas)} grid points; outputs in {out}")
    return 0


def cmd_validate_config(args) -> int:
    load_config(args.config)
    print("config ok")
    return 0


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paretopool",
        description="Pareto-optimal risk sharing with distortion risk measures")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, data=True, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="run configuration JSON file")
        if data:
            p.add_argument("--data", required=True,
                           help="claim-level CSV input")
            p.add_argument("--loss-column", default=None,
                           help="override the loss column name")
        p.add_argument("--out", default=DEFAULT_OUT,
                       help="output directory (created if missing)")

    p = sub.add_parser("summary", help="panel statistics and correlations")
    add_common(p, config_required=False)
    p.set_defaults(func=cmd_summary)

    p = sub.add_parser("po-decentralized",
                       help="peer-to-peer Pareto-optimal allocation")
    add_common(p)
    p.add_argument("--weights", default=None,
                   help="welfare split: equal, last, or a JSON file of proportions")
    p.set_defaults(func=cmd_po_decentralized)

    p = sub.add_parser("po-centralized",
                       help="centralized Pareto-optimal indemnities")
    add_common(p)
    p.add_argument("--alpha", type=float, default=None,
                   help="insurer expected-shortfall level")
    p.set_defaults(func=cmd_po_centralized)

    p = sub.add_parser("stackelberg",
                       help="insurer-optimal premiums on the centralized contract")
    add_common(p)
    p.add_argument("--alpha", type=float, default=None)
    p.set_defaults(func=cmd_stackelberg)

    p = sub.add_parser("sweep",
                       help="welfare comparison across a power-gamma grid")
    add_common(p)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--grid", required=True,
                   help="comma-separated gamma values")
    p.add_argument("--sweep-agent", default=None,
                   help="label of the swept agent (default: last)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate-config", help="check a config file and exit")
    add_common(p, data=False)
    p.set_defaults(func=cmd_validate_config)

    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("PARETOPOOL_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 4
    except FormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except ParetopoolError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
