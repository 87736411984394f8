"""Distributed incremental reachability, distance and articulation-point tracking."""

from dynap.ap_detector import ApVerdict, biconnectivity_consensus, build_pair_set, union_find_verdict
from dynap.engine import World, current_ap_set, run, run_round, simulate
from dynap.graph_model import EdgeEvent, Graph, Op, Scenario, ba_generate, canonical_edge, fig1_topology
from dynap.oracle import brute_force_aps, ground_truth
from dynap.protocol import ChangeFlag, NodeState, init_node, step

__all__ = [
    "ApVerdict", "ChangeFlag", "EdgeEvent", "Graph", "NodeState", "Op", "Scenario", "World",
    "ba_generate", "biconnectivity_consensus", "brute_force_aps", "build_pair_set",
    "canonical_edge", "current_ap_set", "fig1_topology", "ground_truth", "init_node", "run",
    "run_round", "simulate", "step", "union_find_verdict",
]
