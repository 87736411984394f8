"""Command-line front end: ``run``, ``oracle`` and ``list-builtins``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from dynap import engine, oracle
from dynap.graph_model import Graph, Scenario, ScheduleError, load_scenario
from dynap.scenarios import builtin_scenarios, describe

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_SCHEDULE = 3


@dataclass
class RunConfig:
    scenario: str | None = None
    builtin: str | None = None
    out: str | None = None
    format: str = "csv"
    seed: int = 0
    horizon: int | None = None
    keep_connected: bool = False
    literal_distances: bool = False

    def __post_init__(self) -> None:
        if (self.scenario is None) == (self.builtin is None):
            raise ValueError("exactly one of scenario path or builtin name is required")


def _fmt_set(s) -> str:
    return "{" + ", ".join(map(str, sorted(s))) + "}"


def _load(config: RunConfig) -> Scenario:
    if config.builtin is not None:
        table = builtin_scenarios(config.seed, config.keep_connected)
        if config.builtin not in table:
            raise KeyError(f"unknown builtin {config.builtin!r}; try list-builtins")
        scenario = table[config.builtin]
    else:
        scenario = load_scenario(config.scenario)
    if config.horizon is not None:
        scenario.horizon = config.horizon
    return scenario


def cmd_run(config: RunConfig) -> int:
    try:
        scenario = _load(config)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot load scenario: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    try:
        world = engine.simulate(scenario, relax=not config.literal_distances)
    except ScheduleError as exc:
        print(f"error: inconsistent schedule: {exc}", file=sys.stderr)
        return EXIT_SCHEDULE

    text = engine.trace_to_json(world.trace) if config.format == "json" else engine.trace_to_csv(world.trace)
    if config.out:
        Path(config.out).write_text(text)
        summary_stream = sys.stdout
    else:
        sys.stdout.write(text)
        summary_stream = sys.stderr

    conv = engine.convergence_round(world.trace)
    bicon = engine.network_biconnectivity(world)
    print(
        f"converged_at={conv if conv is not None else 'never'} "
        f"ap_set={_fmt_set(engine.current_ap_set(world))} "
        f"biconnected={'unknown' if bicon is None else str(bicon).lower()}",
        file=summary_stream,
    )
    return EXIT_OK


def _load_graph(path: str) -> Graph:
    with open(path) as f:
        data = json.load(f)
    return Graph.from_edges(int(data["nodes"]), data.get("edges", []))


def cmd_oracle(path: str) -> int:
    try:
        graph = _load_graph(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: cannot read graph: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    truth = oracle.ground_truth(graph)
    bridges = ", ".join(f"({u},{v})" for u, v in sorted(oracle.brute_force_bridges(graph)))
    print(f"articulation_points: {_fmt_set(truth.ap_set)}")
    print(f"bridges: [{bridges}]")
    print(f"components: {truth.component_count}")
    print(f"biconnected: {str(truth.biconnected).lower()}")
    return EXIT_OK


def cmd_list_builtins(seed: int = 0) -> int:
    for name, scenario in builtin_scenarios(seed).items():
        print(f"{name:12s} {describe(scenario)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario and write its trace")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", metavar="PATH")
    src.add_argument("--builtin", metavar="NAME")
    run.add_argument("--out", metavar="PATH")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--horizon", type=int)
    run.add_argument("--keep-connected", action="store_true",
                     help="ba-storm: redraw deletions that would disconnect the graph")
    run.add_argument("--literal-distances", action="store_true",
                     help="only touch distances when reachability flips (no relaxation)")

    orc = sub.add_parser("oracle", help="centralized AP/bridge/biconnectivity report")
    orc.add_argument("graph", metavar="PATH")

    lst = sub.add_parser("list-builtins", help="list built-in scenarios")
    lst.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        config = RunConfig(
            scenario=args.scenario, builtin=args.builtin, out=args.out, format=args.format,
            seed=args.seed, horizon=args.horizon, keep_connected=args.keep_connected,
            literal_distances=args.literal_distances,
        )
        return cmd_run(config)
    if args.command == "oracle":
        return cmd_oracle(args.graph)
    return cmd_list_builtins(args.seed)


if __name__ == "__main__":
    sys.exit(main())
