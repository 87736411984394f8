"""Deterministic synchronous round executor with per-round oracle scoring."""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from dynap import ap_detector
from dynap.graph_model import EdgeEvent, Graph, Op, Scenario, apply_events
from dynap.oracle import distance_error, ground_truth, state_error
from dynap.protocol import Inbox, NodeState, init_node, step

TRACE_COLUMNS = (
    "t", "x_error", "d_error", "active_flags", "ap_set", "truth_ap_set", "biconnected", "converged",
)


@dataclass(frozen=True)
class TraceRecord:
    t: int
    x_error: int
    d_error: int
    active_flag_total: int
    ap_set: frozenset[int]
    truth_ap_set: frozenset[int]
    biconnected_truth: bool
    converged: bool

    def as_row(self) -> dict:
        return {
            "t": self.t,
            "x_error": self.x_error,
            "d_error": self.d_error,
            "active_flags": self.active_flag_total,
            "ap_set": ";".join(map(str, sorted(self.ap_set))),
            "truth_ap_set": ";".join(map(str, sorted(self.truth_ap_set))),
            "biconnected": self.biconnected_truth,
            "converged": self.converged,
        }


@dataclass
class World:
    t: int
    graph: Graph
    nodes: dict[int, NodeState]
    schedule: list[EdgeEvent] = field(default_factory=list)
    trace: list[TraceRecord] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.graph.n

    def x_matrix(self) -> np.ndarray:
        return np.vstack([self.nodes[i].x for i in self.graph.nodes])

    def d_matrix(self) -> np.ndarray:
        return np.vstack([self.nodes[i].d for i in self.graph.nodes])


def init_world(scenario: Scenario) -> World:
    scenario.validate()
    n = scenario.n
    return World(
        t=0,
        graph=scenario.initial,
        nodes={i: init_node(i, n) for i in scenario.initial.nodes},
        schedule=list(scenario.events),
    )


def run_round(
    world: World,
    t: int,
    order: Iterable[int] | None = None,
    relax: bool = True,
    score: bool = True,
) -> World:
    """Advance ``world`` from ``t-1`` to ``t`` in place and return it.

    ``order`` only permutes the evaluation sequence; every node reads the
    frozen ``t-1`` snapshot, so the outcome never depends on it.  With
    ``score=False`` the oracle is skipped and no trace record is appended.
    """
    events = [e for e in world.schedule if e.t == t]
    world.schedule = [e for e in world.schedule if e.t != t]
    old_graph = world.graph
    new_graph, changes = apply_events(old_graph, events)
    old_adj = old_graph.adjacency()
    snapshot = {i: s.message() for i, s in world.nodes.items()}

    new_nodes: dict[int, NodeState] = {}
    for i in (order if order is not None else old_graph.nodes):
        local = changes.get(i, set())
        handshakes = {c.other: snapshot[c.other].d for c in local if c.op is Op.ADD}
        inbox = Inbox({j: snapshot[j] for j in sorted(old_adj[i])}, handshakes)
        state, _ = step(world.nodes[i], inbox, local, t, relax=relax)
        verdict = ap_detector.evaluate_node(state, inbox, t)
        state.ap_verdict = verdict
        new_nodes[i] = state
    if set(new_nodes) != set(world.nodes):
        raise ValueError("evaluation order must cover every node exactly once")

    world.nodes = {i: new_nodes[i] for i in sorted(new_nodes)}
    world.graph = new_graph
    world.t = t
    if not score:
        return world

    truth = ground_truth(new_graph)
    x_err = state_error(world.x_matrix(), truth.x_star)
    d_err = distance_error(world.d_matrix(), truth.d_star)
    world.trace.append(
        TraceRecord(
            t=t,
            x_error=x_err,
            d_error=d_err,
            active_flag_total=sum(len(s.active_flags) for s in world.nodes.values()),
            ap_set=current_ap_set(world),
            truth_ap_set=truth.ap_set,
            biconnected_truth=truth.biconnected,
            converged=x_err == 0 and d_err == 0,
        )
    )
    return world


def current_ap_set(world: World) -> frozenset[int]:
    """Nodes whose latest verdict says AP and whose stability trigger still holds."""
    return frozenset(
        i
        for i, s in world.nodes.items()
        if s.ap_verdict is not None and s.ap_verdict.is_ap and s.ap_verdict.decided_at == world.t
    )


def network_biconnectivity(world: World) -> bool | None:
    """Distributed biconnectivity verdict, or ``None`` while some node is unstable."""
    verdicts = {i: s.ap_verdict for i, s in world.nodes.items()}
    if any(v is None or v.decided_at != world.t for v in verdicts.values()):
        return None
    return ap_detector.biconnectivity_consensus(
        {i: v.is_ap for i, v in verdicts.items()},
        world.graph,
        world.n,
        reachability={i: s.x for i, s in world.nodes.items()},
    )


def converge_static(graph: Graph, max_rounds: int | None = None) -> World:
    """Cold-start a static graph until every node holds a fresh AP verdict."""
    world = init_world(Scenario(graph, [], 1))
    limit = max_rounds if max_rounds is not None else 2 * graph.n + 2
    for t in range(1, limit + 1):
        run_round(world, t, score=False)
        if all(s.ap_verdict is not None for s in world.nodes.values()):
            return world
    raise RuntimeError(f"no stable verdicts after {limit} rounds")


def simulate(
    scenario: Scenario, shuffle_seed: int | None = None, relax: bool = True
) -> World:
    world = init_world(scenario)
    rng = random.Random(shuffle_seed) if shuffle_seed is not None else None
    assert scenario.horizon is not None
    for t in range(1, scenario.horizon + 1):
        order = None
        if rng is not None:
            order = list(world.graph.nodes)
            rng.shuffle(order)
        run_round(world, t, order, relax)
    return world


def run(
    scenario: Scenario, shuffle_seed: int | None = None, relax: bool = True
) -> list[TraceRecord]:
    return simulate(scenario, shuffle_seed, relax).trace


def convergence_round(trace: list[TraceRecord]) -> int | None:
    """First round from which every later record is converged."""
    first = None
    for rec in trace:
        if rec.converged:
            if first is None:
                first = rec.t
        else:
            first = None
    return first


def trace_to_csv(trace: list[TraceRecord]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TRACE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rec in trace:
        writer.writerow(rec.as_row())
    return buf.getvalue()


def trace_to_json(trace: list[TraceRecord]) -> str:
    return json.dumps([rec.as_row() for rec in trace], indent=1)
