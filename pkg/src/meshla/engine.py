"""Time-slotted simulation pipeline.

Each slot runs a fixed sequence: every node samples a channel-set, link
channels are derived, sources inject traffic, a seeded arbiter picks a
maximal conflict-free set of transmitting links, queues are served with
hop-by-hop forwarding, per-node channel-state feedback is computed, and
the automata update. One `random.Random` stream per run, consumed in a
fixed order, makes runs bit-reproducible.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .automaton import LearningParams, Scheme, apply_update, init_uniform, sample_action
from .channels import (
    ActionCatalog,
    ChannelAssignment,
    SlotCounters,
    compute_cq,
    connectivity_metric,
    derive_link_channels,
    interference_metric,
)
from .config import ScenarioConfig, build_flows, build_topology
from .errors import ConfigError
from .topology import Routing, Topology, shortest_path_routing

BINARY_IMPROVEMENT = "binary-improvement"
CONTINUOUS = "continuous"

CSV_COLUMNS = [
    "slot",
    "delivered",
    "connectivity",
    "interference",
    "mean_cq",
    "mean_max_prob",
    "suboptimal_l1",
    "switches",
]


class RunContext:
    """Immutable per-run structures shared by every slot."""

    def __init__(
        self,
        topology: Topology,
        flows,
        routing: Routing,
        channels: int,
        params: LearningParams,
        theta: float,
        feedback: str,
        horizon: int,
        warmup: int,
        track_probabilities: bool = True,
        debug_checks: bool = False,
        frozen: dict | None = None,
    ):
        if feedback not in (BINARY_IMPROVEMENT, CONTINUOUS):
            raise ConfigError(f"unknown feedback mode {feedback!r}")
        self.topology = topology
        self.flows = sorted(flows, key=lambda f: f.id)
        self.routing = routing
        self.channels = channels
        self.params = params
        self.theta = theta
        self.feedback = feedback
        self.horizon = horizon
        self.warmup = warmup
        self.track_probabilities = track_probabilities
        self.debug_checks = debug_checks
        self.node_ids = [n.id for n in topology.nodes]
        self.radios = {n.id: n.num_radios for n in topology.nodes}
        shared: dict[tuple[int, int], ActionCatalog] = {}
        self.catalogs = {}
        for n in topology.nodes:
            key = (channels, n.num_radios)
            if key not in shared:
                shared[key] = ActionCatalog(*key)
            self.catalogs[n.id] = shared[key]
        self.link_cap = np.array([l.capacity for l in topology.links], dtype=np.int64)
        self.intf = [topology.interference_set(l.id) for l in topology.links]
        self.frozen = None
        if frozen is not None:
            self.frozen = {}
            for v in self.node_ids:
                if v not in frozen:
                    raise ValueError(f"frozen selection missing node {v}")
                sel = tuple(sorted(frozen[v]))
                self.catalogs[v].encode(sel)  # validates size and channel range
                self.frozen[v] = sel

    @classmethod
    def from_config(cls, config: ScenarioConfig, frozen: dict | None = None) -> "RunContext":
        topology = build_topology(config)
        flows = build_flows(config, topology)
        routing = shortest_path_routing(topology, flows)
        params = LearningParams(
            scheme=Scheme(config.learning.scheme),
            lam=config.learning.lam,
            lam1=config.learning.lambda1,
            lam2=config.learning.lambda2,
        )
        return cls(
            topology=topology,
            flows=flows,
            routing=routing,
            channels=config.engine.channels,
            params=params,
            theta=config.engine.theta,
            feedback=config.engine.feedback,
            horizon=config.engine.horizon,
            warmup=config.engine.warmup,
            track_probabilities=config.engine.track_probabilities,
            debug_checks=config.engine.debug_checks,
            frozen=frozen,
        )


@dataclass
class SlotState:
    """Mutable per-run state; advanced in place by `step`."""

    t: int
    rng: random.Random
    queues: list[deque]
    accumulators: np.ndarray
    automata: dict[int, np.ndarray]
    cq_prev: np.ndarray
    prev_selection: dict | None
    injected_total: int = 0
    delivered_total: int = 0


def init_state(ctx: RunContext, seed: int) -> SlotState:
    return SlotState(
        t=0,
        rng=random.Random(seed),
        queues=[deque() for _ in range(ctx.topology.num_links)],
        accumulators=np.zeros(len(ctx.flows)),
        automata={v: init_uniform(len(ctx.catalogs[v])) for v in ctx.node_ids},
        cq_prev=np.zeros(len(ctx.node_ids)),
        prev_selection=None,
    )


def select_all(ctx: RunContext, state: SlotState):
    """Sample a channel-set per node (ascending node id, one shared rng
    stream); returns (selections, chosen action indices)."""
    selections: dict[int, tuple[int, ...]] = {}
    chosen: dict[int, int] = {}
    for v in ctx.node_ids:
        if ctx.frozen is not None:
            selections[v] = ctx.frozen[v]
            chosen[v] = ctx.catalogs[v].encode(ctx.frozen[v])
        else:
            idx = sample_action(state.automata[v], state.rng)
            chosen[v] = idx
            selections[v] = ctx.catalogs[v].decode(idx)
    return selections, chosen


def inject_traffic(ctx: RunContext, state: SlotState) -> np.ndarray:
    """Release whole packets at each flow's first link, carrying the
    fractional remainder of the offered load across slots."""
    released = np.zeros(len(ctx.flows), dtype=np.int64)
    for f in ctx.flows:
        state.accumulators[f.id] += f.load
        n = math.floor(state.accumulators[f.id])
        if n > 0:
            state.accumulators[f.id] -= n
            first = ctx.routing.first_link[f.id]
            state.queues[first].extend([f.id] * n)
            released[f.id] = n
            state.injected_total += n
    return released


def schedule_transmissions(ctx: RunContext, state: SlotState, assignment: ChannelAssignment) -> list[int]:
    """Pick a maximal conflict-free set of transmitting links.

    Candidates are active links with queued packets. The arbiter repeatedly
    admits a uniformly random candidate and evicts everything it now
    excludes: same-channel interfering links, links needing an endpoint's
    already-used (node, channel) slot, and links at endpoints whose radio
    budget is exhausted.
    """
    active = assignment.active
    pool = [l for l in range(active.size) if active[l] >= 0 and state.queues[l]]
    winners: list[int] = []
    node_links: dict[int, int] = {}
    node_chan: set[tuple[int, int]] = set()
    links = ctx.topology.links
    while pool:
        pick = pool[state.rng.randrange(len(pool))]
        winners.append(pick)
        c = int(active[pick])
        for v in (links[pick].b, links[pick].e):
            node_links[v] = node_links.get(v, 0) + 1
            node_chan.add((v, c))
        survivors = []
        for l in pool:
            if l == pick:
                continue
            cl = int(active[l])
            if cl == c and l in ctx.intf[pick]:
                continue
            ok = True
            for v in (links[l].b, links[l].e):
                if (v, cl) in node_chan or node_links.get(v, 0) >= ctx.radios[v]:
                    ok = False
                    break
            if ok:
                survivors.append(l)
        pool = survivors
    winners.sort()
    return winners


def serve_queues(ctx: RunContext, state: SlotState, winners: list[int]):
    """Serve winning links from their start-of-phase queues, then forward.

    Packets received this slot are enqueued on the flow's next link and
    become servable from the next slot; packets reaching the flow
    destination count as delivered.
    """
    num_links = ctx.topology.num_links
    served = np.zeros(num_links, dtype=np.int64)
    received = np.zeros(num_links, dtype=np.int64)
    delivered = 0
    transfers = []
    for l in winners:
        q = state.queues[l]
        r = min(len(q), int(ctx.link_cap[l]))
        pkts = [q.popleft() for _ in range(r)]
        served[l] = r
        transfers.append((l, pkts))
    for l, pkts in transfers:
        received[l] = len(pkts)
        for f in pkts:
            nxt = ctx.routing.next_link[f][l]
            if nxt is None:
                delivered += 1
            else:
                state.queues[nxt].append(f)
    state.delivered_total += delivered
    return served, received, delivered


def compute_beta(cq_now: float, cq_prev: float, mode: str) -> float:
    """Map channel-state readings to a reinforcement signal in [0, 1]."""
    if mode == BINARY_IMPROVEMENT:
        return 1.0 if cq_now > cq_prev else 0.0
    if mode == CONTINUOUS:
        return min(max(cq_now, 0.0), 1.0)
    raise ValueError(f"unknown feedback mode {mode!r}")


def step(ctx: RunContext, state: SlotState) -> dict:
    """Advance one slot; returns the slot's metrics record."""
    backlog = np.array([len(q) for q in state.queues], dtype=np.int64)
    selections, chosen = select_all(ctx, state)
    assignment = derive_link_channels(ctx.topology, selections)
    released = inject_traffic(ctx, state)
    winners = schedule_transmissions(ctx, state, assignment)
    served, received, delivered = serve_queues(ctx, state, winners)

    counters = SlotCounters(received=received, sent=served, backlog=backlog, injected=released)
    cq = np.array(
        [compute_cq(v, counters, ctx.routing, ctx.theta) for v in ctx.node_ids]
    )
    betas = np.array(
        [compute_beta(cq[i], state.cq_prev[i], ctx.feedback) for i in range(len(ctx.node_ids))]
    )

    probs_snapshot = [state.automata[v] for v in ctx.node_ids]
    max_prob = np.array([float(p.max()) for p in probs_snapshot])
    argmax = np.array([int(p.argmax()) for p in probs_snapshot], dtype=np.int64)
    switch = np.array(
        [
            state.prev_selection is not None and selections[v] != state.prev_selection[v]
            for v in ctx.node_ids
        ],
        dtype=bool,
    )

    if ctx.frozen is None:
        for i, v in enumerate(ctx.node_ids):
            state.automata[v] = apply_update(state.automata[v], chosen[v], float(betas[i]), ctx.params)

    state.cq_prev = cq
    state.prev_selection = selections

    queue_total = sum(len(q) for q in state.queues)
    if state.injected_total != state.delivered_total + queue_total:
        raise RuntimeError(
            f"packet conservation broken at slot {state.t}: injected "
            f"{state.injected_total} != delivered {state.delivered_total} + queued {queue_total}"
        )
    if ctx.debug_checks:
        _verify_slot(ctx, state, assignment, winners, selections)

    record = {
        "slot": state.t,
        "delivered": delivered,
        "injected": int(released.sum()),
        "queue_total": queue_total,
        "connectivity": connectivity_metric(ctx.topology, selections),
        "interference": interference_metric(ctx.topology, assignment),
        "served": served,
        "cq": cq,
        "beta": betas,
        "chosen": np.array([chosen[v] for v in ctx.node_ids], dtype=np.int64),
        "max_prob": max_prob,
        "argmax": argmax,
        "switch": switch,
        "probs": probs_snapshot if ctx.track_probabilities else None,
    }
    state.t += 1
    return record


def _verify_slot(ctx, state, assignment, winners, selections) -> None:
    """Debug-mode invariants: channel consistency, conflict-freedom and
    radio budgets."""
    active = assignment.active
    for l in ctx.topology.links:
        c = int(active[l.id])
        if c >= 0 and (c not in selections[l.b] or c not in selections[l.e]):
            raise RuntimeError(f"link {l.id} active on channel {c} not shared by endpoints")
    counts: dict[int, int] = {}
    used: set[tuple[int, int]] = set()
    for l in winners:
        link = ctx.topology.links[l]
        c = int(active[l])
        for v in (link.b, link.e):
            counts[v] = counts.get(v, 0) + 1
            if counts[v] > ctx.radios[v]:
                raise RuntimeError(f"node {v} exceeds its radio budget")
            if (v, c) in used:
                raise RuntimeError(f"node {v} uses channel {c} on two links at once")
            used.add((v, c))
    for i, l in enumerate(winners):
        for l2 in winners[i + 1 :]:
            if active[l] == active[l2] and l2 in ctx.intf[l]:
                raise RuntimeError(f"winners {l} and {l2} conflict on channel {int(active[l])}")


class MetricsSeries:
    """Per-slot metrics of one run, with the evaluation window boundary."""

    def __init__(self, records: list[dict], ctx: RunContext, final_probs: dict[int, np.ndarray]):
        self.warmup = ctx.warmup
        self.node_ids = list(ctx.node_ids)
        self.num_links = ctx.topology.num_links
        n = len(records)
        self.slots = np.arange(n, dtype=np.int64)
        self.delivered = np.array([r["delivered"] for r in records], dtype=np.int64)
        self.injected = np.array([r["injected"] for r in records], dtype=np.int64)
        self.queue_total = np.array([r["queue_total"] for r in records], dtype=np.int64)
        self.connectivity = np.array([r["connectivity"] for r in records], dtype=np.int64)
        self.interference = np.array([r["interference"] for r in records], dtype=np.int64)
        self.served = (
            np.vstack([r["served"] for r in records])
            if n
            else np.zeros((0, self.num_links), dtype=np.int64)
        )
        nn = len(self.node_ids)
        self.cq = np.vstack([r["cq"] for r in records]) if n else np.zeros((0, nn))
        self.beta = np.vstack([r["beta"] for r in records]) if n else np.zeros((0, nn))
        self.chosen = (
            np.vstack([r["chosen"] for r in records]) if n else np.zeros((0, nn), dtype=np.int64)
        )
        self.max_prob = np.vstack([r["max_prob"] for r in records]) if n else np.zeros((0, nn))
        self.argmax = (
            np.vstack([r["argmax"] for r in records]) if n else np.zeros((0, nn), dtype=np.int64)
        )
        self.switch = (
            np.vstack([r["switch"] for r in records]) if n else np.zeros((0, nn), dtype=bool)
        )
        self.prob_history: list[np.ndarray] | None = None
        if n and records[0]["probs"] is not None:
            self.prob_history = [
                np.vstack([r["probs"][i] for r in records]) for i in range(nn)
            ]
        self.final_probs = final_probs
        self.final_reference = np.array(
            [int(final_probs[v].argmax()) for v in self.node_ids], dtype=np.int64
        )

    def __len__(self) -> int:
        return int(self.slots.size)

    def suboptimal_l1(self) -> np.ndarray:
        """Per-slot total probability mass off each node's final preferred
        action (falls back to 1 - max prob when vectors were not tracked)."""
        if len(self) == 0:
            return np.zeros(0)
        if self.prob_history is not None:
            cols = [
                1.0 - self.prob_history[i][:, self.final_reference[i]]
                for i in range(len(self.node_ids))
            ]
            return np.sum(cols, axis=0)
        return np.sum(1.0 - self.max_prob, axis=1)

    def csv_columns(self) -> dict[str, list]:
        mean_cq = self.cq.mean(axis=1) if len(self) else np.zeros(0)
        mean_mp = self.max_prob.mean(axis=1) if len(self) else np.zeros(0)
        return {
            "slot": [int(x) for x in self.slots],
            "delivered": [int(x) for x in self.delivered],
            "connectivity": [int(x) for x in self.connectivity],
            "interference": [int(x) for x in self.interference],
            "mean_cq": [float(x) for x in mean_cq],
            "mean_max_prob": [float(x) for x in mean_mp],
            "suboptimal_l1": [float(x) for x in self.suboptimal_l1()],
            "switches": [int(x.sum()) for x in self.switch] if len(self) else [],
        }


def run(config: ScenarioConfig, seed: int | None = None, frozen: dict | None = None) -> MetricsSeries:
    """Run one scenario for its full horizon.

    `seed` overrides the config seed; `frozen` pins every node to a fixed
    channel-set and disables learning (used by the exhaustive optimizer and
    the static baselines).
    """
    ctx = RunContext.from_config(config, frozen=frozen)
    state = init_state(ctx, config.engine.seed if seed is None else seed)
    records = [step(ctx, state) for _ in range(ctx.horizon)]
    return MetricsSeries(records, ctx, dict(state.automata))
