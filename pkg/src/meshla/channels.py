"""Channel-set action space, link-channel derivation and the per-node
channel-state feedback function."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .topology import Routing, Topology


class ActionCatalog:
    """All channel subsets of size m drawn from {0..k-1}, in lexicographic
    order. The position of a set in this list is the automaton's action
    index for it."""

    def __init__(self, k: int, m: int):
        if m < 1:
            raise ValueError("channel-set size must be at least 1")
        if m > k:
            raise ValueError(f"channel-set size {m} exceeds channel count {k}")
        self.k = k
        self.m = m
        self.sets: list[tuple[int, ...]] = [
            tuple(c) for c in itertools.combinations(range(k), m)
        ]
        self.masks: list[int] = [_mask_of(s) for s in self.sets]
        self._index = {s: i for i, s in enumerate(self.sets)}

    def __len__(self) -> int:
        return len(self.sets)

    def decode(self, index: int) -> tuple[int, ...]:
        return self.sets[index]

    def encode(self, channel_set) -> int:
        key = tuple(sorted(channel_set))
        try:
            return self._index[key]
        except KeyError:
            raise ValueError(f"{channel_set!r} is not a size-{self.m} subset of 0..{self.k - 1}") from None


def enumerate_channel_sets(k: int, m: int) -> ActionCatalog:
    return ActionCatalog(k, m)


def _mask_of(channel_set) -> int:
    mask = 0
    for c in channel_set:
        mask |= 1 << c
    return mask


@dataclass
class ChannelAssignment:
    """Per-link active channel for one slot; -1 marks an inactive link."""

    active: np.ndarray
    k: int

    def matrix(self) -> np.ndarray:
        """Binary link-by-channel matrix with the active channel marked."""
        out = np.zeros((self.active.size, self.k), dtype=np.int8)
        for l, c in enumerate(self.active):
            if c >= 0:
                out[l, c] = 1
        return out


def derive_link_channels(topology: Topology, selections) -> ChannelAssignment:
    """Assign each link the smallest channel shared by both endpoints'
    selections; links with no common channel stay inactive this slot."""
    masks = {}
    k = 0
    for v in topology.nodes:
        try:
            chosen = selections[v.id]
        except KeyError:
            raise ValueError(f"no channel selection for node {v.id}") from None
        masks[v.id] = _mask_of(chosen)
        if chosen:
            k = max(k, max(chosen) + 1)
    active = np.full(topology.num_links, -1, dtype=np.int64)
    for l in topology.links:
        common = masks[l.b] & masks[l.e]
        if common:
            active[l.id] = (common & -common).bit_length() - 1
    return ChannelAssignment(active=active, k=k)


def connectivity_metric(topology: Topology, selections) -> int:
    """Total count of shared channels over node pairs in transmission range."""
    total = 0
    for u, v in topology.in_range_pairs():
        total += bin(_mask_of(selections[u]) & _mask_of(selections[v])).count("1")
    return total


def interference_metric(topology: Topology, assignment: ChannelAssignment) -> int:
    """Ordered pairs of active links that interfere and share a channel."""
    active = assignment.active
    total = 0
    for l in range(active.size):
        if active[l] < 0:
            continue
        for other in topology.interference_set(l):
            if active[other] == active[l]:
                total += 1
    return total


@dataclass
class SlotCounters:
    """Per-slot packet counters feeding the channel-state function.

    `received[l]` / `sent[l]` are the packets that crossed link l this slot
    (credited to the receiver and transmitter respectively), `backlog[l]`
    is the queue of link l at the start of the slot, and `injected[f]` is
    what flow f's source released this slot.
    """

    received: np.ndarray
    sent: np.ndarray
    backlog: np.ndarray
    injected: np.ndarray


def compute_cq(node: int, counters: SlotCounters, routing: Routing, theta: float) -> float:
    """Channel-state feedback for one node.

    Sums, over consecutive link pairs of each flow through the node, the
    ratio of packets sent downstream to packets offered upstream (this
    slot's arrivals plus the incoming link's standing backlog, floored at
    theta). Flow endpoints use virtual pairs: at the source the injection
    acts as the arrival on a virtual incoming link, and at the destination
    delivery acts as the send on a virtual outgoing link, so both ends
    receive feedback. Nodes with no pair at all score 0.
    """
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    total = 0.0
    for _f, lin, lout in routing.transit_pairs.get(node, ()):
        denom = max(float(counters.received[lin] + counters.backlog[lin]), theta)
        total += float(counters.sent[lout]) / denom
    for f, lout in routing.source_pairs.get(node, ()):
        denom = max(float(counters.injected[f] + counters.backlog[lout]), theta)
        total += float(counters.sent[lout]) / denom
    for _f, lin in routing.dest_pairs.get(node, ()):
        denom = max(float(counters.received[lin] + counters.backlog[lin]), theta)
        total += float(counters.received[lin]) / denom
    return total
