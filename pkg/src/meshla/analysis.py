"""Metrics aggregation, convergence diagnostics and an exhaustive
optimality oracle for small instances."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field

import numpy as np

from .automaton import init_uniform, lri_update, lrp_update, sample_action
from .config import ScenarioConfig
from .engine import MetricsSeries, RunContext, run
from .errors import JointSpaceTooLargeError

JOINT_SPACE_LIMIT = 10_000


@dataclass
class NodeConvergence:
    node: int
    converged: bool
    action: int | None
    slot: int | None


@dataclass
class ConvergenceReport:
    threshold: float
    nodes: list[NodeConvergence]
    all_converged: bool
    achieved_vs_oracle: float | None = None


def convergence_check(series: MetricsSeries, threshold: float = 0.99) -> ConvergenceReport:
    """A node counts as converged at the first slot from which its max
    action probability stays at or above the threshold."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    nodes: list[NodeConvergence] = []
    if len(series) == 0:
        return ConvergenceReport(threshold=threshold, nodes=nodes, all_converged=False)
    for i, v in enumerate(series.node_ids):
        col = series.max_prob[:, i]
        below = np.nonzero(col < threshold)[0]
        start = 0 if below.size == 0 else int(below[-1]) + 1
        if start < len(series):
            nodes.append(
                NodeConvergence(
                    node=v, converged=True, action=int(series.final_reference[i]), slot=start
                )
            )
        else:
            nodes.append(NodeConvergence(node=v, converged=False, action=None, slot=None))
    return ConvergenceReport(
        threshold=threshold, nodes=nodes, all_converged=all(n.converged for n in nodes)
    )


def suboptimal_l1_trajectory(series: MetricsSeries, reference) -> tuple[np.ndarray, float]:
    """Per-slot total probability mass away from the reference action of
    each node, plus the linear-trend slope over the post-warmup window."""
    if series.prob_history is None:
        raise ValueError("probability tracking was disabled for this run")
    refs = [reference[v] for v in series.node_ids] if isinstance(reference, dict) else list(reference)
    cols = [1.0 - series.prob_history[i][:, refs[i]] for i in range(len(series.node_ids))]
    traj = np.sum(cols, axis=0) if cols else np.zeros(len(series))
    slope = linear_trend_slope(traj[series.warmup :]) if len(series) > series.warmup else 0.0
    return traj, slope


def linear_trend_slope(y) -> float:
    y = np.asarray(y, dtype=float)
    if y.size < 2:
        return 0.0
    return float(np.polyfit(np.arange(y.size), y, 1)[0])


def empirical_payoff(series: MetricsSeries, node: int, action: int):
    """Mean feedback the node collected on slots it played the action;
    None when the action was never sampled."""
    i = series.node_ids.index(node)
    mask = series.chosen[:, i] == action
    if not mask.any():
        return None
    return float(series.beta[mask, i].mean())


@dataclass
class Summary:
    delivered_per_slot: float
    connectivity: float
    interference: float
    switch_rate: float
    mean_cq: float
    warmup: int
    horizon: int
    interference_connectivity_ratio: list[float] = field(default_factory=list)


def summarize(series: MetricsSeries, warm_up: int | None = None) -> Summary:
    """Post-warmup means of the run's headline metrics."""
    warm_up = series.warmup if warm_up is None else warm_up
    n = len(series)
    if n == 0:
        return Summary(0.0, 0.0, 0.0, 0.0, 0.0, warmup=warm_up, horizon=0)
    w = min(warm_up, n)
    window = slice(w, None) if w < n else slice(0, n)
    ratio = [
        float(i) / float(c) if c > 0 else 0.0
        for i, c in zip(series.interference, series.connectivity)
    ]
    return Summary(
        delivered_per_slot=float(series.delivered[window].mean()),
        connectivity=float(series.connectivity[window].mean()),
        interference=float(series.interference[window].mean()),
        switch_rate=float(series.switch[window].mean()) if series.switch.size else 0.0,
        mean_cq=float(series.cq[window].mean()) if series.cq.size else 0.0,
        warmup=w,
        horizon=n,
        interference_connectivity_ratio=ratio,
    )


def time_to_fraction_of_final(trajectory, fraction: float = 0.9, final_window: int = 10):
    """First slot where the trajectory reaches the given fraction of its
    final level (mean of the last `final_window` points); None if never."""
    traj = np.asarray(trajectory, dtype=float)
    if traj.size == 0:
        return None
    tail = traj[-min(final_window, traj.size) :]
    target = fraction * float(tail.mean())
    hits = np.nonzero(traj >= target)[0]
    return int(hits[0]) if hits.size else None


@dataclass
class OracleResult:
    selection: dict[int, tuple[int, ...]]
    mean_delivered: float
    assignments_evaluated: int


def joint_space_size(config: ScenarioConfig) -> int:
    ctx = RunContext.from_config(config)
    size = 1
    for v in ctx.node_ids:
        size *= len(ctx.catalogs[v])
    return size


def evaluate_frozen(config: ScenarioConfig, selection, eval_slots: int, eval_seeds: int) -> float:
    """Mean delivered packets per slot with every node pinned to the given
    channel-sets, averaged over seeds."""
    cfg = _frozen_config(config, eval_slots)
    base = config.engine.seed
    totals = [
        int(run(cfg, seed=base + j, frozen=selection).delivered.sum())
        for j in range(eval_seeds)
    ]
    return float(np.mean(totals)) / float(eval_slots)


def brute_force_oracle(
    config: ScenarioConfig, eval_slots: int = 100, eval_seeds: int = 3
) -> OracleResult:
    """Exhaustively score every joint channel-set assignment with frozen
    (non-learning) runs and return the best one.

    Enumeration is lexicographic, and only a strictly better mean replaces
    the incumbent, so ties resolve to the smallest joint selection.
    Refuses joint spaces above JOINT_SPACE_LIMIT.
    """
    if eval_slots < 1 or eval_seeds < 1:
        raise ValueError("eval_slots and eval_seeds must be positive")
    ctx = RunContext.from_config(config)
    sizes = [len(ctx.catalogs[v]) for v in ctx.node_ids]
    total = math.prod(sizes)
    if total > JOINT_SPACE_LIMIT:
        raise JointSpaceTooLargeError(
            f"joint assignment space has {total} points, above the {JOINT_SPACE_LIMIT} limit"
        )
    cfg = _frozen_config(config, eval_slots)
    base = config.engine.seed
    best_selection: dict[int, tuple[int, ...]] | None = None
    best_value = -1.0
    for combo in itertools.product(*[range(s) for s in sizes]):
        selection = {v: ctx.catalogs[v].decode(i) for v, i in zip(ctx.node_ids, combo)}
        totals = [
            int(run(cfg, seed=base + j, frozen=selection).delivered.sum())
            for j in range(eval_seeds)
        ]
        value = float(np.mean(totals)) / float(eval_slots)
        if value > best_value:
            best_value = value
            best_selection = selection
    assert best_selection is not None
    return OracleResult(
        selection=best_selection, mean_delivered=best_value, assignments_evaluated=total
    )


def _frozen_config(config: ScenarioConfig, eval_slots: int) -> ScenarioConfig:
    raw = config.model_dump(by_alias=True)
    raw["engine"]["horizon"] = eval_slots
    raw["engine"]["warmup"] = 0
    raw["engine"]["track_probabilities"] = False
    return ScenarioConfig.model_validate(raw)


@dataclass
class GameResult:
    """Trajectory of a repeated identical-payoff automata game.

    `history[i]` holds player i's probability vector at the start of every
    iteration; `final[i]` is the vector after the last update.
    """

    payoff: np.ndarray
    history: list[np.ndarray]
    final: list[np.ndarray]

    def final_joint_action(self) -> tuple[int, ...]:
        return tuple(int(p.argmax()) for p in self.final)

    def converged(self, threshold: float = 0.99) -> bool:
        return all(float(p.max()) >= threshold for p in self.final)

    def l1_trajectory(self, reference=None) -> np.ndarray:
        """Per-iteration total probability mass off the reference joint
        action (default: each player's final preferred action)."""
        ref = self.final_joint_action() if reference is None else tuple(reference)
        return np.sum(
            [1.0 - h[:, ref[i]] for i, h in enumerate(self.history)], axis=0
        )


def play_identical_payoff_game(
    payoff,
    lam: float = 0.05,
    iterations: int = 5000,
    seed: int = 0,
    scheme: str = "reward-inaction",
    lam2: float = 0.1,
) -> GameResult:
    """Two automata repeatedly play a common-payoff game with stochastic
    binary feedback: both receive the same Bernoulli(payoff[a0, a1]) draw."""
    payoff = np.asarray(payoff, dtype=float)
    if payoff.ndim != 2:
        raise ValueError("payoff table must be 2-D")
    if np.any(payoff < 0.0) or np.any(payoff > 1.0):
        raise ValueError("payoff entries must lie in [0, 1]")
    rng = random.Random(seed)
    probs = [init_uniform(payoff.shape[0]), init_uniform(payoff.shape[1])]
    history = [np.empty((iterations, p.size)) for p in probs]
    for t in range(iterations):
        history[0][t] = probs[0]
        history[1][t] = probs[1]
        a0 = sample_action(probs[0], rng)
        a1 = sample_action(probs[1], rng)
        beta = 1.0 if rng.random() < payoff[a0, a1] else 0.0
        if scheme == "reward-inaction":
            probs[0] = lri_update(probs[0], a0, beta, lam)
            probs[1] = lri_update(probs[1], a1, beta, lam)
        else:
            probs[0] = lrp_update(probs[0], a0, beta, lam, lam2)
            probs[1] = lrp_update(probs[1], a1, beta, lam, lam2)
    return GameResult(payoff=payoff, history=history, final=probs)
