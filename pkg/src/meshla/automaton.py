"""Variable-structure stochastic learning automata.

Each automaton holds a probability vector over its actions, samples one
action per slot, and shifts probability mass according to a linear
reward-inaction or reward-penalty rule driven by a feedback signal
beta in [0, 1] (1 = fully favorable).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import NumericCorruptionError

SIMPLEX_ATOL = 1e-9
# Renormalize only when rounding has pushed the sum further than this.
DRIFT_REPAIR_THRESHOLD = 1e-12


class Scheme(enum.Enum):
    REWARD_INACTION = "reward-inaction"
    REWARD_PENALTY = "reward-penalty"


@dataclass(frozen=True)
class LearningParams:
    """Update-rule selection and step sizes.

    `lam` drives reward-inaction; `lam1`/`lam2` are the reward and penalty
    steps of reward-penalty.
    """

    scheme: Scheme = Scheme.REWARD_INACTION
    lam: float = 0.1
    lam1: float = 0.1
    lam2: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lam must be in (0, 1), got {self.lam}")
        if not 0.0 < self.lam1 < 1.0:
            raise ValueError(f"lam1 must be in (0, 1), got {self.lam1}")
        if not 0.0 <= self.lam2 < 1.0:
            raise ValueError(f"lam2 must be in [0, 1), got {self.lam2}")


def validate_probs(probs: np.ndarray) -> None:
    """Raise ValueError unless `probs` is a valid action-probability vector."""
    if probs.ndim != 1 or probs.size < 1:
        raise ValueError("probability vector must be 1-D and non-empty")
    if np.any(probs < -SIMPLEX_ATOL) or np.any(probs > 1.0 + SIMPLEX_ATOL):
        raise ValueError("probability entries must lie in [0, 1]")
    if abs(float(probs.sum()) - 1.0) > SIMPLEX_ATOL:
        raise ValueError(f"probability entries must sum to 1, got {probs.sum()!r}")


def init_uniform(r: int) -> np.ndarray:
    """Uniform probability vector over `r` actions."""
    if r < 1:
        raise ValueError(f"need at least one action, got r={r}")
    return np.full(r, 1.0 / r)


def sample_action(probs: np.ndarray, rng) -> int:
    """Draw an action index by cumulative-sum inversion.

    The cumulative sums are scanned in ascending index order and any
    rounding mass past the final sum goes to the last index, so the draw is
    reproducible across platforms. `rng` needs only a `.random()` method
    returning floats in [0, 1).
    """
    u = rng.random()
    cum = np.cumsum(probs)
    idx = int(np.searchsorted(cum, u, side="right"))
    return min(idx, probs.size - 1)


def lri_update(probs: np.ndarray, chosen: int, beta: float, lam: float) -> np.ndarray:
    """Linear reward-inaction step.

    p_chosen grows by lam*beta*(1 - p_chosen), every other entry shrinks by
    lam*beta*p_j; beta = 0 leaves the vector untouched.
    """
    _check_update_args(probs, chosen, beta)
    out = probs - lam * beta * probs
    out[chosen] = probs[chosen] + lam * beta * (1.0 - probs[chosen])
    return _repair_drift(out)


def lrp_update(
    probs: np.ndarray, chosen: int, beta: float, lam1: float, lam2: float
) -> np.ndarray:
    """Linear reward-penalty step.

    On top of the reward term, an unfavorable response (beta < 1) moves
    lam2-weighted mass off the chosen action and spreads it toward the
    uniform share 1/(r-1) of the others. Needs at least two actions.
    """
    _check_update_args(probs, chosen, beta)
    r = probs.size
    if r < 2:
        raise ValueError("reward-penalty needs at least 2 actions")
    penalty = lam2 * (1.0 - beta)
    out = probs - lam1 * beta * probs + penalty * (1.0 / (r - 1) - probs)
    out[chosen] = (
        probs[chosen]
        + lam1 * beta * (1.0 - probs[chosen])
        - penalty * probs[chosen]
    )
    return _repair_drift(out)


def apply_update(probs: np.ndarray, chosen: int, beta: float, params: LearningParams) -> np.ndarray:
    """Dispatch to the configured scheme. Single-action vectors pass through."""
    if probs.size == 1:
        return probs
    if params.scheme is Scheme.REWARD_INACTION:
        return lri_update(probs, chosen, beta, params.lam)
    return lrp_update(probs, chosen, beta, params.lam1, params.lam2)


def renormalize(probs: np.ndarray) -> np.ndarray:
    """Rescale a non-negative vector onto the exact simplex."""
    if np.any(probs < 0.0):
        raise NumericCorruptionError(f"negative probability entry in {probs!r}")
    total = float(probs.sum())
    if total <= 0.0:
        raise NumericCorruptionError("probability mass vanished")
    return probs / total


def _check_update_args(probs: np.ndarray, chosen: int, beta: float) -> None:
    if not 0 <= chosen < probs.size:
        raise ValueError(f"chosen action {chosen} out of range for r={probs.size}")
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")


def _repair_drift(probs: np.ndarray) -> np.ndarray:
    if abs(float(probs.sum()) - 1.0) > DRIFT_REPAIR_THRESHOLD:
        return renormalize(probs)
    return probs
