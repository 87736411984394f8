"""Per-node incremental reachability/distance protocol.

Each node keeps a binary reachability vector ``x`` and a hop-distance vector
``d`` (index ``k-1`` describes node ``k``).  Edge changes spawn change flags
that travel one hop per round; a node receiving a flag for the first time
only trusts neighbours that carry it, which blocks stale reachability from
flowing back along broken paths.  A node that still holds a flag from the
previous round freezes for one round, and otherwise runs plain max-consensus.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import TYPE_CHECKING, Iterable

import numpy as np

from dynap.graph_model import EdgeKey, LocalChange, Op
from dynap.oracle import UNREACHABLE

if TYPE_CHECKING:
    from dynap.ap_detector import ApVerdict


class ProtocolError(RuntimeError):
    """Delivery-contract or internal-consistency violation inside a node."""


@dataclass(frozen=True, order=True)
class ChangeFlag:
    change_type: Op
    edge: EdgeKey
    timestamp: int

    def __str__(self) -> str:
        return f"{self.change_type.name}{self.edge}@{self.timestamp}"


@dataclass(frozen=True)
class Message:
    """What a node broadcasts at the end of a round: ``(x, d, flags)``."""

    x: np.ndarray
    d: np.ndarray
    flags: frozenset[ChangeFlag] = frozenset()


@dataclass
class Inbox:
    """Messages stamped ``t-1`` from every member of ``N_i[t-1]``.

    ``handshakes`` holds the ``d[t-1]`` vectors exchanged over edges added at ``t``.
    """

    messages: dict[int, Message] = field(default_factory=dict)
    handshakes: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def neighbors(self) -> list[int]:
        return sorted(self.messages)


class UpdateCase(Enum):
    NEW_FLAGS = 1
    HOLD = 2
    STANDARD = 3


@dataclass
class NodeState:
    id: int
    x: np.ndarray
    d: np.ndarray
    active_flags: frozenset[ChangeFlag] = frozenset()
    history: frozenset[ChangeFlag] = frozenset()
    prev_active_flags: frozenset[ChangeFlag] = frozenset()
    neighbor_cache: dict[int, Message] = field(default_factory=dict)
    prev_x: np.ndarray | None = None
    prev_d: np.ndarray | None = None
    ap_verdict: ApVerdict | None = None

    @property
    def n(self) -> int:
        return len(self.x)

    def message(self) -> Message:
        return Message(self.x, self.d, self.active_flags)


def init_node(id: int, n: int) -> NodeState:
    if not 1 <= id <= n:
        raise ValueError(f"node id {id} outside 1..{n}")
    x = np.zeros(n, dtype=np.uint8)
    x[id - 1] = 1
    d = np.full(n, UNREACHABLE)
    d[id - 1] = 0
    return NodeState(id=id, x=x, d=d)


def filter_new_flags(inbox: Inbox, history: Iterable[ChangeFlag]) -> frozenset[ChangeFlag]:
    received: set[ChangeFlag] = set()
    for msg in inbox.messages.values():
        received |= msg.flags
    return frozenset(received - set(history))


def aggregate_new_flags(inbox: Inbox, new_flags: Iterable[ChangeFlag]) -> np.ndarray:
    """AND over flags of (OR over the neighbours carrying that flag)."""
    new_flags = sorted(new_flags)
    if not new_flags:
        raise ProtocolError("flag aggregation needs at least one flag")
    out: np.ndarray | None = None
    for flag in new_flags:
        carriers = [m.x for m in inbox.messages.values() if flag in m.flags]
        if not carriers:
            raise ProtocolError(f"flag {flag} is carried by no neighbour")
        x_flag = np.bitwise_or.reduce(carriers)
        out = x_flag if out is None else out & x_flag
    assert out is not None
    return out.astype(np.uint8)


def consensus_new_flags(
    self_x: np.ndarray,
    inbox: Inbox,
    new_flags: Iterable[ChangeFlag],
    history: Iterable[ChangeFlag],
    node_id: int | None = None,
) -> np.ndarray:
    history = frozenset(history)
    x_hist = self_x.copy()
    for msg in inbox.messages.values():
        if msg.flags & history:
            x_hist |= msg.x
    x_hat = x_hist & aggregate_new_flags(inbox, new_flags)
    if node_id is not None:
        x_hat[node_id - 1] = 1
    return x_hat


def consensus_standard(self_x: np.ndarray, inbox: Inbox) -> np.ndarray:
    out = self_x.copy()
    for msg in inbox.messages.values():
        out |= msg.x
    return out


def select_case(new_flags: Iterable[ChangeFlag], prev_active: Iterable[ChangeFlag]) -> UpdateCase:
    if frozenset(new_flags):
        return UpdateCase.NEW_FLAGS
    if frozenset(prev_active):
        return UpdateCase.HOLD
    return UpdateCase.STANDARD


def update_distance_intermediate(
    x_hat: np.ndarray,
    x_prev: np.ndarray,
    d_prev: np.ndarray,
    inbox: Inbox,
    relax: bool = False,
) -> np.ndarray:
    """Distance follow-up to a reachability update.

    Entries that lost reachability become unreachable and entries that gained
    it take ``1 + min`` over the neighbours.  With ``relax`` the entries that
    stayed reachable may also shrink to ``1 + min`` (never grow).
    """
    d_hat = d_prev.copy()
    d_hat[(x_prev == 1) & (x_hat == 0)] = UNREACHABLE
    gained = (x_prev == 0) & (x_hat == 1)
    kept = (x_prev == 1) & (x_hat == 1)
    if not (gained.any() or (relax and kept.any())):
        return d_hat
    if inbox.messages:
        # inf + 1 stays inf, so entries with no finite neighbour remain unreachable
        via = np.min([m.d for m in inbox.messages.values()], axis=0) + 1
    else:
        via = np.full_like(d_prev, UNREACHABLE)
    d_hat[gained] = via[gained]
    if relax:
        d_hat[kept] = np.minimum(d_hat[kept], via[kept])
    return d_hat


def compute_delta(d_self_prev: np.ndarray, d_other_prev: np.ndarray) -> np.ndarray:
    """``d_self - d_other`` with ``+inf`` wherever either side is unreachable."""
    d_self_prev = np.asarray(d_self_prev, dtype=float)
    d_other_prev = np.asarray(d_other_prev, dtype=float)
    delta = np.full(d_self_prev.shape, UNREACHABLE)
    finite = np.isfinite(d_self_prev) & np.isfinite(d_other_prev)
    delta[finite] = d_self_prev[finite] - d_other_prev[finite]
    return delta


def apply_correction(x_hat: np.ndarray, delta: np.ndarray, node_id: int | None = None) -> np.ndarray:
    x = np.where(delta > 0, 0, x_hat).astype(np.uint8)
    if node_id is not None:
        x[node_id - 1] = 1
    return x


def on_edge_change(
    state: NodeState,
    changes: Iterable[LocalChange],
    x_hat: np.ndarray,
    d_hat: np.ndarray,
    inbox: Inbox,
    t: int,
) -> tuple[np.ndarray, np.ndarray, frozenset[ChangeFlag]]:
    """Invalidate entries a local edge change may have broken and mint its flags.

    ``state`` supplies the node's own ``d[t-1]`` and its neighbour cache.
    """
    changes = sorted(changes, key=lambda c: (c.edge, c.op.value))
    if not changes:
        raise ProtocolError("on_edge_change called without local changes")
    x = x_hat.copy()
    generated = set()
    for change in changes:
        j = change.other
        if change.op is Op.ADD:
            if j not in inbox.handshakes:
                raise ProtocolError(f"node {state.id}: no handshake from new neighbour {j}")
            d_other = inbox.handshakes[j]
        else:
            msg = inbox.messages.get(j) or state.neighbor_cache.get(j)
            if msg is None:
                raise ProtocolError(f"node {state.id}: no cached state for lost neighbour {j}")
            d_other = msg.d
        x = apply_correction(x, compute_delta(state.d, d_other), state.id)
        generated.add(ChangeFlag(change.op, change.edge, t))
    d = np.where(x == 0, UNREACHABLE, d_hat)
    return x, d, frozenset(generated)


def gc_history(history: Iterable[ChangeFlag], t: int, n: int) -> frozenset[ChangeFlag]:
    return frozenset(f for f in history if f.timestamp >= t - n)


def _finalize(x: np.ndarray, d: np.ndarray, node_id: int) -> tuple[np.ndarray, np.ndarray]:
    x = x.copy()
    d = d.copy()
    x[~np.isfinite(d)] = 0
    d[x == 0] = UNREACHABLE
    x[node_id - 1] = 1
    d[node_id - 1] = 0
    return x, d


def step(
    state: NodeState,
    inbox: Inbox,
    local_changes: Iterable[LocalChange] = (),
    t: int = 0,
    relax: bool = True,
) -> tuple[NodeState, Message]:
    """Run one synchronous round at a node; returns the new state and its broadcast."""
    local_changes = list(local_changes)
    new_flags = filter_new_flags(inbox, state.history)
    case = select_case(new_flags, state.active_flags)

    if case is UpdateCase.NEW_FLAGS:
        x_hat = consensus_new_flags(state.x, inbox, new_flags, state.history, state.id)
    elif case is UpdateCase.HOLD:
        x_hat = state.x.copy()
    else:
        x_hat = consensus_standard(state.x, inbox)
    x_hat[state.id - 1] = 1
    d_hat = update_distance_intermediate(
        x_hat, state.x, state.d, inbox, relax=relax and case is UpdateCase.STANDARD
    )

    generated: frozenset[ChangeFlag] = frozenset()
    if local_changes:
        x, d, generated = on_edge_change(state, local_changes, x_hat, d_hat, inbox, t)
    else:
        x, d = x_hat, d_hat
    x, d = _finalize(x, d, state.id)

    active = new_flags | generated
    history = gc_history(state.history | active, t, state.n)
    new_state = replace(
        state,
        x=x,
        d=d,
        active_flags=active,
        history=history,
        prev_active_flags=state.active_flags,
        neighbor_cache=dict(inbox.messages),
        prev_x=state.x,
        prev_d=state.d,
    )
    return new_state, new_state.message()

