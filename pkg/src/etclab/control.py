"""Optimal impulsive controllers for the two information scenarios.

At a triggering instant every agent receives an impulse that moves it
toward a common consensus point ``c``.  What the impulse can subtract
depends on the information available locally:

* broadcast-only: agents know their own state only at their own
  triggering instants, so the impulse is ``c - xhat_i`` where ``xhat_i``
  is the broadcast-based estimate (the true state for initiators, the
  previous consensus point for everyone else);
* broadcast-plus-local: agents additionally know their own state at
  every global trigger, so the impulse is ``c - x_i`` and the fleet
  resets exactly to ``c``.

The consensus point itself is free within the optimal class; the
average and leader (minimum-index initiator) rules are the two
practical choices, and a fixed-point rule exists for diagnostics only.

Event protocol used by the simulation driver, in order: refresh the
estimates of the initiators to their true states, compute the consensus
point, form the jump vector, apply it, then set every estimate to ``c``
and record ``c`` as the new last consensus point.
"""

import enum
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .sde import SimState

__all__ = [
    "Average",
    "Leader",
    "Fixed",
    "ConsensusRule",
    "InfoScenario",
    "consensus_point",
    "impulse_broadcast",
    "impulse_local",
    "refresh_estimates",
]


@dataclass(frozen=True)
class Average:
    """Consensus point is the mean of the available state information."""


@dataclass(frozen=True)
class Leader:
    """Consensus point is the state of the minimum-index initiator."""


@dataclass(frozen=True)
class Fixed:
    """Constant consensus point; diagnostics only, defeats the purpose of
    communicating but keeps the same cost and trigger structure."""

    value: float = 0.0


ConsensusRule = Union[Average, Leader, Fixed]


class InfoScenario(enum.Enum):
    """Information available to the local controllers."""

    BROADCAST = "b"
    BROADCAST_LOCAL = "bl"


def consensus_value(
    x: np.ndarray,
    last_consensus_point: float,
    initiators: np.ndarray,
    rule: ConsensusRule,
    scenario: InfoScenario,
) -> float:
    """Consensus point from raw arrays; see :func:`consensus_point`."""
    initiators = np.asarray(initiators, dtype=int)
    if initiators.size == 0:
        raise ValueError("initiator set must be nonempty")
    if isinstance(rule, Fixed):
        return float(rule.value)
    if isinstance(rule, Leader):
        return float(x[int(initiators.min())])
    if not isinstance(rule, Average):
        raise TypeError(f"unknown consensus rule: {rule!r}")
    n = x.shape[0]
    if scenario is InfoScenario.BROADCAST_LOCAL:
        return float(x.mean())
    # Broadcast-only: initiators contribute their true state, everyone
    # else the previous consensus point (their current estimate).
    k = initiators.size
    return float(((n - k) * last_consensus_point + x[initiators].sum()) / n)


def consensus_point(
    state: SimState,
    initiators: np.ndarray,
    rule: ConsensusRule,
    scenario: InfoScenario,
) -> float:
    """Common consensus point announced at the event.

    With a single broadcast-only initiator ``i`` the average rule
    reduces to ``((n-1) * c_prev + x_i) / n``; when all agents initiate
    (synchronous periodic firing) both scenarios use the true mean.
    """
    return consensus_value(
        state.x, state.last_consensus_point, initiators, rule, scenario
    )


def refresh_estimates(state: SimState, initiators: np.ndarray) -> SimState:
    """Set the initiators' estimates to their true states (their own
    triggering makes the local state broadcast knowledge)."""
    xhat = state.xhat.copy()
    xhat[initiators] = state.x[initiators]
    return replace(state, xhat=xhat)


def impulse_broadcast(state: SimState, c: float) -> np.ndarray:
    """Jump vector ``c - xhat`` for the broadcast-only scenario.

    Assumes initiator estimates were refreshed first; afterwards the
    caller sets every estimate and the last consensus point to ``c``.
    """
    return c - state.xhat


def impulse_local(state: SimState, c: float) -> np.ndarray:
    """Jump vector ``c - x`` for the broadcast-plus-local scenario.

    The post-jump fleet is exactly ``c`` everywhere, so the deviation
    snapshot must be refreshed to the reset state by the caller.
    """
    return c - state.x
