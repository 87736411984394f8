"""Built-in scenarios replaying the reference experiments."""

from __future__ import annotations

import random

from dynap.graph_model import (
    EdgeEvent,
    Graph,
    Op,
    Scenario,
    ba_generate,
    canonical_edge,
    fig1_topology,
    random_connected_graph,
)
from dynap.oracle import component_count

FIG1_HORIZON = 40


def _fig1(events: list[EdgeEvent], horizon: int | None = FIG1_HORIZON) -> Scenario:
    return Scenario(fig1_topology(), events, horizon)


def ba_storm(seed: int = 0, n: int = 20, m: int = 2, window: tuple[int, int] = (5, 12),
             keep_connected: bool = False) -> Scenario:
    """One random edge addition or deletion per round inside ``window``."""
    rng = random.Random(seed)
    graph = ba_generate(n, m, seed)
    initial = graph
    events = []
    for t in range(window[0], window[1] + 1):
        while True:
            if rng.random() < 0.5 and graph.edges:
                edge = rng.choice(sorted(graph.edges))
                candidate = graph.with_edges(remove=[edge])
                if keep_connected and component_count(candidate) > 1:
                    continue
                events.append(EdgeEvent(t, Op.DELETE, edge))
            else:
                absent = [
                    (u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)
                    if (u, v) not in graph.edges
                ]
                if not absent:
                    continue
                edge = canonical_edge(*rng.choice(absent))
                candidate = graph.with_edges(add=[edge])
                events.append(EdgeEvent(t, Op.ADD, edge))
            graph = candidate
            break
    return Scenario(initial, events, None, seed)


def random_event_scenario(
    seed: int,
    n_range: tuple[int, int] = (8, 20),
    event_range: tuple[int, int] = (1, 8),
    last_round: int = 12,
) -> Scenario:
    """Random connected start plus random valid edge flips at random rounds.

    Several events may share a round as long as they touch distinct edges;
    the graph is allowed to disconnect.
    """
    rng = random.Random(seed)
    n = rng.randint(*n_range)
    initial = random_connected_graph(n, rng.randint(0, n), rng)
    times = sorted(rng.randint(1, last_round) for _ in range(rng.randint(*event_range)))
    graph = initial
    events: list[EdgeEvent] = []
    for t in sorted(set(times)):
        picked: set = set()
        for _ in range(times.count(t)):
            while True:
                u, v = rng.sample(range(1, n + 1), 2)
                edge = canonical_edge(u, v)
                if edge not in picked:
                    break
            picked.add(edge)
            events.append(EdgeEvent(t, Op.DELETE if edge in graph.edges else Op.ADD, edge))
        for ev in events:
            if ev.t == t:
                graph = graph.with_edges(add=[ev.edge]) if ev.op is Op.ADD else graph.with_edges(remove=[ev.edge])
    return Scenario(initial, events, None, seed)


def builtin_scenarios(seed: int = 0, keep_connected: bool = False) -> dict[str, Scenario]:
    D, A = Op.DELETE, Op.ADD
    return {
        "fig1-static": _fig1([], None),
        "del-2-4": _fig1([EdgeEvent(5, D, (2, 4))]),
        "add-9-10": _fig1([EdgeEvent(5, A, (9, 10))]),
        "concurrent": _fig1([
            EdgeEvent(5, D, (2, 4)), EdgeEvent(5, D, (7, 8)),
            EdgeEvent(8, A, (9, 10)), EdgeEvent(8, A, (1, 10)),
            EdgeEvent(10, D, (6, 7)), EdgeEvent(10, D, (3, 4)),
        ]),
        "ba-storm": ba_storm(seed, keep_connected=keep_connected),
    }


def describe(scenario: Scenario) -> str:
    g: Graph = scenario.initial
    return f"n={g.n} edges={len(g.edges)} events={len(scenario.events)} horizon={scenario.horizon}"
