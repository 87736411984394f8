"""Time-varying undirected graphs, edge event schedules and graph generators.

Nodes are the integers ``1..n``; an edge is stored as the canonical tuple
``(min(u, v), max(u, v))``.
"""

from __future__ import annotations

import json
import random
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable

EdgeKey = tuple[int, int]


class InvalidEdgeError(ValueError):
    """Raised for self-loops or endpoints outside ``1..n``."""


class ScheduleError(ValueError):
    """Raised when an event schedule is inconsistent with the graph it acts on."""


class Op(str, Enum):
    ADD = "add"
    DELETE = "del"


def canonical_edge(u: int, v: int) -> EdgeKey:
    if u == v:
        raise InvalidEdgeError(f"self-loop ({u}, {v}) is not a valid edge")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset[EdgeKey] = frozenset()

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidEdgeError(f"graph needs at least one node, got n={self.n}")
        canon = frozenset(canonical_edge(u, v) for u, v in self.edges)
        for u, v in canon:
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise InvalidEdgeError(f"edge ({u}, {v}) outside 1..{self.n}")
        object.__setattr__(self, "edges", canon)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Iterable[int]]) -> "Graph":
        return cls(n, frozenset(tuple(e) for e in edges))  # type: ignore[misc]

    @property
    def nodes(self) -> range:
        return range(1, self.n + 1)

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {i: set() for i in self.nodes}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def neighbors(self, i: int) -> set[int]:
        return {v if u == i else u for u, v in self.edges if i in (u, v)}

    def degree(self, i: int) -> int:
        return sum(1 for e in self.edges if i in e)

    def has_edge(self, u: int, v: int) -> bool:
        return canonical_edge(u, v) in self.edges

    def with_edges(self, add: Iterable[EdgeKey] = (), remove: Iterable[EdgeKey] = ()) -> "Graph":
        edges = set(self.edges)
        edges.difference_update(canonical_edge(*e) for e in remove)
        edges.update(canonical_edge(*e) for e in add)
        return Graph(self.n, frozenset(edges))


@dataclass(frozen=True, order=True)
class EdgeEvent:
    t: int
    op: Op
    edge: EdgeKey

    def __post_init__(self) -> None:
        object.__setattr__(self, "op", Op(self.op))
        object.__setattr__(self, "edge", canonical_edge(*self.edge))


@dataclass(frozen=True)
class LocalChange:
    """An edge change as seen from one of its endpoints."""

    op: Op
    node: int
    other: int

    @property
    def edge(self) -> EdgeKey:
        return canonical_edge(self.node, self.other)


@dataclass
class Scenario:
    initial: Graph
    events: list[EdgeEvent] = field(default_factory=list)
    horizon: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        self.events = sorted(self.events, key=lambda e: (e.t, e.edge, e.op.value))
        if self.horizon is None:
            self.horizon = default_horizon(self.n, self.last_event_time)

    @property
    def n(self) -> int:
        return self.initial.n

    @property
    def last_event_time(self) -> int:
        return max((e.t for e in self.events), default=0)

    def events_at(self, t: int) -> list[EdgeEvent]:
        return [e for e in self.events if e.t == t]

    def validate(self) -> None:
        """Replay the schedule and raise ``ScheduleError`` on the first inconsistency."""
        assert self.horizon is not None
        graph = self.initial
        seen: set[tuple[int, EdgeKey]] = set()
        for e in self.events:
            if not 0 < e.t < self.horizon:
                raise ScheduleError(f"event {e} outside the open window (0, {self.horizon})")
            if (e.t, e.edge) in seen:
                raise ScheduleError(f"edge {e.edge} changed twice at t={e.t}")
            seen.add((e.t, e.edge))
        for t in sorted({e.t for e in self.events}):
            graph, _ = apply_events(graph, self.events_at(t))

    def final_graph(self) -> Graph:
        graph = self.initial
        for t in sorted({e.t for e in self.events}):
            graph, _ = apply_events(graph, self.events_at(t))
        return graph


def default_horizon(n: int, last_event: int) -> int:
    return 2 * last_event + 2 * n


def apply_events(
    graph: Graph, events: Iterable[EdgeEvent]
) -> tuple[Graph, dict[int, set[LocalChange]]]:
    """Apply one round's events; return the new graph and per-endpoint change records.

    Every event is checked against the input graph, so the result does not
    depend on the order of events inside the round.
    """
    edges = set(graph.edges)
    changes: dict[int, set[LocalChange]] = defaultdict(set)
    touched: set[EdgeKey] = set()
    for e in events:
        u, v = e.edge
        if v > graph.n:
            raise InvalidEdgeError(f"edge {e.edge} outside 1..{graph.n}")
        if e.edge in touched:
            raise ScheduleError(f"edge {e.edge} changed twice in one round")
        touched.add(e.edge)
        present = e.edge in graph.edges
        if e.op is Op.ADD:
            if present:
                raise ScheduleError(f"t={e.t}: cannot add present edge {e.edge}")
            edges.add(e.edge)
        else:
            if not present:
                raise ScheduleError(f"t={e.t}: cannot delete absent edge {e.edge}")
            edges.discard(e.edge)
        changes[u].add(LocalChange(e.op, u, v))
        changes[v].add(LocalChange(e.op, v, u))
    return Graph(graph.n, frozenset(edges)), dict(changes)


FIG1_EDGES: tuple[EdgeKey, ...] = (
    (1, 2), (1, 4), (2, 3), (2, 4), (3, 4), (4, 5), (4, 10),
    (5, 6), (5, 7), (6, 7), (7, 8), (7, 9), (8, 9),
)


def fig1_topology() -> Graph:
    """The 10-node reference network with cut vertices 4, 5, 7 and bridges (4,5), (4,10)."""
    return Graph(10, frozenset(FIG1_EDGES))


def ba_generate(n: int, m: int = 2, seed: int = 0) -> Graph:
    """Barabási-Albert preferential attachment starting from an ``m``-clique.

    With ``m == 1`` the seed clique is a single node and the first newcomer
    attaches to it, so the result is a tree.
    """
    if m < 1 or n <= m:
        raise ValueError(f"need n > m >= 1, got n={n}, m={m}")
    rng = random.Random(seed)
    edges: set[EdgeKey] = set()
    # each node appears once per incident edge; seed clique nodes get one extra ticket
    # so a single-node seed still has positive weight
    tickets: list[int] = []
    for u in range(1, m + 1):
        tickets.append(u)
        for v in range(u + 1, m + 1):
            edges.add((u, v))
            tickets += [u, v]
    for new in range(m + 1, n + 1):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(rng.choice(tickets))
        for old in sorted(targets):
            edges.add(canonical_edge(old, new))
            tickets += [old, new]
    return Graph(n, frozenset(edges))


def random_connected_graph(n: int, extra_edges: int, rng: random.Random) -> Graph:
    """Uniform random labelled tree plus ``extra_edges`` random chords."""
    order = list(range(1, n + 1))
    rng.shuffle(order)
    edges = {canonical_edge(order[i], order[rng.randrange(i)]) for i in range(1, n)}
    absent = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1) if (u, v) not in edges]
    rng.shuffle(absent)
    edges.update(absent[:extra_edges])
    return Graph(n, frozenset(edges))


# -- scenario files ---------------------------------------------------------


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "nodes": scenario.n,
        "edges": [list(e) for e in sorted(scenario.initial.edges)],
        "events": [
            {"t": e.t, "op": e.op.value, "u": e.edge[0], "v": e.edge[1]} for e in scenario.events
        ],
        "horizon": scenario.horizon,
        "seed": scenario.seed,
    }


def scenario_from_dict(data: dict) -> Scenario:
    try:
        graph = Graph.from_edges(int(data["nodes"]), data.get("edges", []))
        events = [
            EdgeEvent(int(ev["t"]), Op(ev["op"]), (int(ev["u"]), int(ev["v"])))
            for ev in data.get("events", [])
        ]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed scenario: {exc!r}") from exc
    horizon = data.get("horizon")
    return Scenario(graph, events, int(horizon) if horizon is not None else None, int(data.get("seed", 0)))


def load_scenario(path: str | Path) -> Scenario:
    with open(path) as f:
        return scenario_from_dict(json.load(f))


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(scenario_to_dict(scenario), f, indent=2)
