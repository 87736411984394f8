"""Centralized ground truth used to score the distributed protocol."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from dynap.graph_model import EdgeKey, Graph

UNREACHABLE = math.inf


@dataclass(frozen=True)
class GroundTruth:
    x_star: np.ndarray  # (n, n) uint8
    d_star: np.ndarray  # (n, n) float, inf when unreachable
    ap_set: frozenset[int]
    component_count: int
    biconnected: bool


def _bfs(adj: dict[int, set[int]], n: int, source: int, banned: int | None = None) -> np.ndarray:
    dist = np.full(n, UNREACHABLE)
    dist[source - 1] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v != banned and dist[v - 1] == UNREACHABLE:
                dist[v - 1] = dist[u - 1] + 1
                queue.append(v)
    return dist


def bfs_distances(graph: Graph, i: int) -> np.ndarray:
    """Hop counts from every node to ``i`` (index ``k-1`` holds node ``k``)."""
    if not 1 <= i <= graph.n:
        raise ValueError(f"node {i} outside 1..{graph.n}")
    return _bfs(graph.adjacency(), graph.n, i)


def _count_components(adj: dict[int, set[int]], nodes: list[int], banned: int | None = None) -> int:
    seen: set[int] = set()
    count = 0
    for s in nodes:
        if s == banned or s in seen:
            continue
        count += 1
        seen.add(s)
        stack = [s]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v != banned and v not in seen:
                    seen.add(v)
                    stack.append(v)
    return count


def component_count(graph: Graph) -> int:
    return _count_components(graph.adjacency(), list(graph.nodes))


def brute_force_aps(graph: Graph) -> frozenset[int]:
    """Nodes whose removal increases the number of connected components."""
    adj = graph.adjacency()
    nodes = list(graph.nodes)
    base = _count_components(adj, nodes)
    aps = set()
    for i in nodes:
        # removing an isolated node drops one component; account for it
        remaining = _count_components(adj, nodes, banned=i)
        if remaining > base - (1 if not adj[i] else 0):
            aps.add(i)
    return frozenset(aps)


def brute_force_bridges(graph: Graph) -> frozenset[EdgeKey]:
    base = component_count(graph)
    return frozenset(
        e for e in graph.edges if component_count(graph.with_edges(remove=[e])) > base
    )


def ground_truth(graph: Graph) -> GroundTruth:
    adj = graph.adjacency()
    n = graph.n
    d_star = np.vstack([_bfs(adj, n, i) for i in graph.nodes])
    x_star = np.isfinite(d_star).astype(np.uint8)
    aps = brute_force_aps(graph)
    comps = _count_components(adj, list(graph.nodes))
    return GroundTruth(x_star, d_star, aps, comps, comps == 1 and not aps)


def state_error(x: np.ndarray, x_star: np.ndarray) -> int:
    x = np.asarray(x, dtype=np.int64)
    x_star = np.asarray(x_star, dtype=np.int64)
    if x.shape != x_star.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {x_star.shape}")
    return int(np.abs(x - x_star).sum())


def distance_error(d: np.ndarray, d_star: np.ndarray) -> int:
    """Finiteness mismatches count 1 each; finite pairs contribute their absolute gap."""
    d = np.asarray(d, dtype=float)
    d_star = np.asarray(d_star, dtype=float)
    if d.shape != d_star.shape:
        raise ValueError(f"shape mismatch: {d.shape} vs {d_star.shape}")
    fin, fin_star = np.isfinite(d), np.isfinite(d_star)
    both = fin & fin_star
    return int((fin != fin_star).sum() + np.abs(d[both] - d_star[both]).sum())
