"""Local articulation-point self-identification and network biconnectivity check.

Once a node's state is stable it looks for neighbour pairs that provably lie
on a common cycle through it.  If those pairs glue all of its neighbours into
a single union-find component, the node is not a cut vertex.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from dynap.graph_model import Graph
from dynap.protocol import Inbox, NodeState, compute_delta


@dataclass(frozen=True)
class PairSet:
    owner: int
    pairs: frozenset[frozenset[int]]


@dataclass(frozen=True)
class ApVerdict:
    node: int
    is_ap: bool
    decided_at: int
    components: tuple[frozenset[int], ...]


class _DisjointSet:
    def __init__(self, items: Iterable[int]) -> None:
        self.parent = {i: i for i in items}

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)

    def groups(self) -> tuple[frozenset[int], ...]:
        out: dict[int, set[int]] = {}
        for i in self.parent:
            out.setdefault(self.find(i), set()).add(i)
        return tuple(frozenset(g) for _, g in sorted(out.items()))


def stability_trigger(state: NodeState, inbox: Inbox) -> bool:
    """True when no flag is held or heard and ``x``, ``d`` did not move this round."""
    if state.active_flags:
        return False
    if any(msg.flags for msg in inbox.messages.values()):
        return False
    if state.prev_x is None or state.prev_d is None:
        return False
    return bool(np.array_equal(state.x, state.prev_x) and np.array_equal(state.d, state.prev_d))


def build_pair_set(
    owner: int,
    d_self: np.ndarray,
    x_self: np.ndarray,
    neighbor_ds: Mapping[int, np.ndarray],
    neighbors: Iterable[int],
) -> PairSet:
    neighbors = sorted(neighbors)
    missing = [j for j in neighbors if j not in neighbor_ds]
    if missing:
        raise KeyError(f"node {owner}: no distance vector for neighbours {missing}")
    deltas = {j: compute_delta(d_self, neighbor_ds[j]) for j in neighbors}

    # witnesses: known-reachable nodes outside the closed neighbourhood
    witness = np.asarray(x_self, dtype=bool) & np.isfinite(d_self)
    witness[owner - 1] = False
    for j in neighbors:
        witness[j - 1] = False

    pairs = set()
    for j, k in combinations(neighbors, 2):
        if deltas[j][k - 1] == 0 and deltas[k][j - 1] == 0:
            pairs.add(frozenset((j, k)))
            continue
        # inf deltas are excluded here: all three distances must be finite
        ok = witness & (deltas[j] >= 0) & (deltas[k] >= 0) & np.isfinite(deltas[j]) & np.isfinite(deltas[k])
        if ok.any():
            pairs.add(frozenset((j, k)))
    return PairSet(owner, frozenset(pairs))


def union_find_verdict(neighbors: Iterable[int], pairs: PairSet, decided_at: int = 0) -> ApVerdict:
    neighbors = sorted(neighbors)
    dsu = _DisjointSet(neighbors)
    # leaves and isolated nodes can never be cut vertices
    if len(neighbors) <= 1:
        return ApVerdict(pairs.owner, False, decided_at, dsu.groups())
    for pair in pairs.pairs:
        j, k = sorted(pair)
        if j in dsu.parent and k in dsu.parent:
            dsu.union(j, k)
    groups = dsu.groups()
    return ApVerdict(pairs.owner, len(groups) > 1, decided_at, groups)


def evaluate_node(state: NodeState, inbox: Inbox, t: int) -> ApVerdict | None:
    """Verdict for a node after its round, or ``None`` if it is not yet stable."""
    if not stability_trigger(state, inbox):
        return None
    neighbor_ds = {j: msg.d for j, msg in inbox.messages.items()}
    pairs = build_pair_set(state.id, state.d, state.x, neighbor_ds, neighbor_ds)
    return union_find_verdict(neighbor_ds, pairs, t)


def biconnectivity_consensus(
    verdicts: Mapping[int, bool],
    graph: Graph,
    rounds: int | None = None,
    reachability: Mapping[int, np.ndarray] | None = None,
) -> bool:
    """OR-flood the AP bits; biconnected iff no bit reaches anyone and all ``x`` are all-ones.

    Without ``reachability`` the ``x`` vectors are recomputed by flooding the
    same number of rounds from cold start.
    """
    n = graph.n
    rounds = n if rounds is None else rounds
    adj = graph.adjacency()
    bits = {i: bool(verdicts[i]) for i in graph.nodes}
    if reachability is None:
        reach = {i: np.eye(n, dtype=np.uint8)[i - 1] for i in graph.nodes}
    else:
        reach = {i: np.asarray(reachability[i], dtype=np.uint8) for i in graph.nodes}
    for _ in range(rounds):
        bits = {i: bits[i] or any(bits[j] for j in adj[i]) for i in graph.nodes}
        if reachability is None:
            reach = {i: np.bitwise_or.reduce([reach[i]] + [reach[j] for j in adj[i]]) for i in graph.nodes}
    any_ap = any(bits.values())
    connected = all(bool(reach[i].all()) for i in graph.nodes)
    return connected and not any_ap
