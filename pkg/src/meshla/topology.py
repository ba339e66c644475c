"""Static network model: nodes, directed links, flows and routing.

Links are materialized in both directions for every node pair within
transmission range. Interference follows a transmitter-centric rule: link
l' interferes with l when the transmitter of l' is within interference
range of the transmitter of l (links sharing a transmitter always
interfere, since one radio cannot feed two same-channel links at once).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedTopologyError, NoRouteError


@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float
    num_radios: int = 1


@dataclass(frozen=True)
class Link:
    id: int
    b: int  # transmitter node id
    e: int  # receiver node id
    capacity: int = 10


@dataclass(frozen=True)
class Flow:
    id: int
    src: int
    dst: int
    load: float  # offered packets per slot


class Topology:
    def __init__(self, nodes, links, tx_range: float, interference_range: float):
        self.nodes = sorted(nodes, key=lambda n: n.id)
        self.links = sorted(links, key=lambda l: l.id)
        self.tx_range = float(tx_range)
        self.interference_range = float(interference_range)
        self._node_by_id = {n.id: n for n in self.nodes}
        self._link_by_endpoints = {(l.b, l.e): l.id for l in self.links}
        self._incident: dict[int, set[int]] = {n.id: set() for n in self.nodes}
        for l in self.links:
            self._incident[l.b].add(l.id)
            self._incident[l.e].add(l.id)
        self._interference_cache: dict[int, set[int]] = {}

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_links(self) -> int:
        return len(self.links)

    def node(self, v: int) -> Node:
        try:
            return self._node_by_id[v]
        except KeyError:
            raise ValueError(f"unknown node id {v}") from None

    def link(self, l: int) -> Link:
        if not 0 <= l < len(self.links):
            raise ValueError(f"unknown link id {l}")
        return self.links[l]

    def link_between(self, b: int, e: int):
        """Link id for the directed pair (b, e), or None."""
        return self._link_by_endpoints.get((b, e))

    def distance(self, u: int, v: int) -> float:
        a, b = self.node(u), self.node(v)
        return math.hypot(a.x - b.x, a.y - b.y)

    def links_of_node(self, v: int) -> set[int]:
        """All links with v as transmitter or receiver."""
        self.node(v)
        return set(self._incident[v])

    def sending_links(self, v: int) -> set[int]:
        self.node(v)
        return {l for l in self._incident[v] if self.links[l].b == v}

    def receiving_links(self, v: int) -> set[int]:
        self.node(v)
        return {l for l in self._incident[v] if self.links[l].e == v}

    def interference_neighbors(self, v: int) -> set[int]:
        """Other nodes within interference range of v."""
        self.node(v)
        return {
            n.id
            for n in self.nodes
            if n.id != v and self.distance(v, n.id) <= self.interference_range
        }

    def interference_set(self, l: int) -> set[int]:
        """Links whose transmitter lies within interference range of l's
        transmitter. Links sharing l's transmitter are always included; l
        itself never is."""
        if l in self._interference_cache:
            return set(self._interference_cache[l])
        link = self.link(l)
        out = set()
        for other in self.links:
            if other.id == l:
                continue
            if other.b == link.b or self.distance(other.b, link.b) <= self.interference_range:
                out.add(other.id)
        self._interference_cache[l] = out
        return set(out)

    def in_range_pairs(self) -> list[tuple[int, int]]:
        """Unordered node pairs within transmission range (u < v)."""
        pairs = []
        ids = [n.id for n in self.nodes]
        for i, u in enumerate(ids):
            for v in ids[i + 1 :]:
                if self.distance(u, v) <= self.tx_range:
                    pairs.append((u, v))
        return pairs

    def neighbors(self, v: int) -> list[int]:
        """Nodes reachable from v over one sending link, ascending ids."""
        return sorted(self.links[l].e for l in self.sending_links(v))


def _materialize_links(nodes, tx_range: float, capacity: int) -> list[Link]:
    links = []
    pos = {n.id: (n.x, n.y) for n in nodes}
    ids = sorted(pos)
    lid = 0
    for b in ids:
        for e in ids:
            if b == e:
                continue
            if math.hypot(pos[b][0] - pos[e][0], pos[b][1] - pos[e][1]) <= tx_range:
                links.append(Link(id=lid, b=b, e=e, capacity=capacity))
                lid += 1
    return links


def _radio_counts(num_radios, count: int) -> list[int]:
    if isinstance(num_radios, int):
        return [num_radios] * count
    radios = [int(m) for m in num_radios]
    if len(radios) != count:
        raise ValueError(f"expected {count} per-node radio counts, got {len(radios)}")
    return radios


def generate_grid(
    side_count: int,
    region_size: float,
    tx_range: float,
    interference_range: float,
    num_radios=1,
    capacity: int = 10,
) -> Topology:
    """Uniform side_count x side_count grid of nodes inside a square region.

    Nodes sit at cell centers, so spacing is region_size / side_count.
    Node ids are row-major.
    """
    if side_count < 2:
        raise ValueError("grid needs side_count >= 2 to have any links")
    spacing = region_size / side_count
    if tx_range < spacing:
        raise DisconnectedTopologyError(
            f"tx_range {tx_range} below grid spacing {spacing}: no links would form"
        )
    radios = _radio_counts(num_radios, side_count * side_count)
    offset = spacing / 2.0
    nodes = []
    for r in range(side_count):
        for c in range(side_count):
            nid = r * side_count + c
            nodes.append(
                Node(id=nid, x=offset + c * spacing, y=offset + r * spacing, num_radios=radios[nid])
            )
    links = _materialize_links(nodes, tx_range, capacity)
    return Topology(nodes, links, tx_range, interference_range)


def generate_line(
    count: int,
    spacing: float,
    tx_range: float,
    interference_range: float,
    num_radios=1,
    capacity: int = 10,
) -> Topology:
    """Evenly spaced nodes along the x axis."""
    if count < 2:
        raise ValueError("line needs at least 2 nodes")
    if tx_range < spacing:
        raise DisconnectedTopologyError(
            f"tx_range {tx_range} below spacing {spacing}: no links would form"
        )
    radios = _radio_counts(num_radios, count)
    nodes = [Node(id=i, x=i * spacing, y=0.0, num_radios=radios[i]) for i in range(count)]
    links = _materialize_links(nodes, tx_range, capacity)
    return Topology(nodes, links, tx_range, interference_range)


class Routing:
    """Single-path routes for each flow plus the 0/1 flow-by-link matrix."""

    def __init__(self, topology: Topology, flows, paths: dict[int, list[int]]):
        self.topology = topology
        self.flows = list(flows)
        self.paths = paths  # flow id -> ordered link ids src..dst
        self.matrix = np.zeros((len(self.flows), topology.num_links), dtype=np.int8)
        self.first_link: dict[int, int] = {}
        self.next_link: dict[int, dict[int, int | None]] = {}
        for f in self.flows:
            path = paths[f.id]
            self.first_link[f.id] = path[0]
            nxt: dict[int, int | None] = {}
            for i, lid in enumerate(path):
                self.matrix[f.id, lid] = 1
                nxt[lid] = path[i + 1] if i + 1 < len(path) else None
            self.next_link[f.id] = nxt
        # Per node: (flow, incoming link, outgoing link) for consecutive hops,
        # (flow, first link) at the source and (flow, last link) at the
        # destination. These drive the feedback function; the source's
        # injection and the destination's delivery act as virtual links so
        # endpoint nodes also receive channel-state feedback.
        self.transit_pairs: dict[int, list[tuple[int, int, int]]] = {}
        self.source_pairs: dict[int, list[tuple[int, int]]] = {}
        self.dest_pairs: dict[int, list[tuple[int, int]]] = {}
        for f in self.flows:
            path = paths[f.id]
            self.source_pairs.setdefault(f.src, []).append((f.id, path[0]))
            self.dest_pairs.setdefault(f.dst, []).append((f.id, path[-1]))
            for lin, lout in zip(path, path[1:]):
                mid = topology.links[lin].e
                self.transit_pairs.setdefault(mid, []).append((f.id, lin, lout))


def shortest_path_routing(topology: Topology, flows) -> Routing:
    """Minimum-hop route per flow; ties broken by the lexicographically
    smallest node-id sequence."""
    paths: dict[int, list[int]] = {}
    for f in flows:
        node_seq = _min_hop_path(topology, f.src, f.dst)
        if node_seq is None:
            raise NoRouteError(f"flow {f.id}: no route from {f.src} to {f.dst}")
        paths[f.id] = [
            topology.link_between(u, v) for u, v in zip(node_seq, node_seq[1:])
        ]
    return Routing(topology, flows, paths)


def _min_hop_path(topology: Topology, src: int, dst: int):
    topology.node(src)
    topology.node(dst)
    if src == dst:
        raise ValueError("flow endpoints must differ")
    heap: list[tuple[int, tuple[int, ...]]] = [(0, (src,))]
    done: set[int] = set()
    while heap:
        hops, path = heapq.heappop(heap)
        tail = path[-1]
        if tail == dst:
            return list(path)
        if tail in done:
            continue
        done.add(tail)
        for nxt in topology.neighbors(tail):
            if nxt not in done:
                heapq.heappush(heap, (hops + 1, path + (nxt,)))
    return None
