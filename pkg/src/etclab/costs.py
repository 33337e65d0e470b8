"""Cost estimation from trajectories and the closed-form cost oracles.

Two estimators of the long-run average consensus-deviation cost are
maintained side by side:

* time average: left-endpoint rectangle integration of ``x' L x``
  divided by elapsed time, averaged across trials;
* renewal-reward: the per-cycle integral of one reference agent's
  squared deviation divided by the mean cycle length, scaled by
  ``n (n - 1)``.  Cycles are delimited by the reference agent's own
  events (broadcast-only) or by global events (broadcast-plus-local),
  and the final incomplete cycle is discarded.

The closed-form oracles cover the periodic schemes in both scenarios,
the level scheme in the broadcast-only scenario, the local-to-global
rate conversion and the factor-``n`` information gap between the two
periodic schemes at equal global rates.
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy import stats

__all__ = [
    "CostAccumulator",
    "CostReport",
    "accumulate",
    "merge_accumulators",
    "finalize",
    "j_tt_broadcast",
    "j_et_broadcast",
    "j_tt_broadcast_local",
    "local_to_global_period",
    "information_gap",
    "expected_occupation_integral",
]


@dataclass
class CostAccumulator:
    """Single-trial tallies: cost integral, renewal cycles, event counts."""

    n: int
    integral_sum: float = 0.0
    elapsed: float = 0.0
    per_renewal_costs: List[float] = field(default_factory=list)
    per_renewal_lengths: List[float] = field(default_factory=list)
    local_event_counts: np.ndarray = None
    global_event_count: int = 0

    def __post_init__(self):
        if self.local_event_counts is None:
            self.local_event_counts = np.zeros(self.n, dtype=np.int64)

    def add(self, cost_value: float, dt: float) -> None:
        self.integral_sum += cost_value * dt
        self.elapsed += dt

    def close_cycle(self, reward: float, length: float) -> None:
        self.per_renewal_costs.append(reward)
        self.per_renewal_lengths.append(length)

    def renewal_estimate(self) -> float:
        """Renewal-reward cost estimate from this trial's cycles alone."""
        if not self.per_renewal_lengths:
            return float("nan")
        mean_reward = float(np.mean(self.per_renewal_costs))
        mean_length = float(np.mean(self.per_renewal_lengths))
        return self.n * (self.n - 1) * mean_reward / mean_length


@dataclass(frozen=True)
class CostReport:
    """Merged cost estimates across trials with 95% CI on the time average."""

    j_time_avg: float
    j_renewal: float
    mean_local_interevent: float
    mean_global_interevent: float
    trials: int
    ci_halfwidth: float
    j_trials: Tuple[float, ...] = ()


def accumulate(acc: CostAccumulator, cost_value: float, dt: float) -> CostAccumulator:
    """Add one left-endpoint rectangle ``cost_value * dt`` to the integral."""
    if cost_value < 0:
        raise ValueError(f"cost must be nonnegative, got {cost_value}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    acc.add(cost_value, dt)
    return acc


def merge_accumulators(accs: Sequence[CostAccumulator]) -> CostAccumulator:
    """Combine per-trial accumulators; equivalent to accumulating the
    concatenated data."""
    if not accs:
        raise ValueError("nothing to merge")
    n = accs[0].n
    merged = CostAccumulator(n)
    for acc in accs:
        if acc.n != n:
            raise ValueError("accumulators disagree on agent count")
        merged.integral_sum += acc.integral_sum
        merged.elapsed += acc.elapsed
        merged.per_renewal_costs.extend(acc.per_renewal_costs)
        merged.per_renewal_lengths.extend(acc.per_renewal_lengths)
        merged.local_event_counts = merged.local_event_counts + acc.local_event_counts
        merged.global_event_count += acc.global_event_count
    return merged


def finalize(accumulators: Sequence[CostAccumulator]) -> CostReport:
    """Turn per-trial accumulators into a cost report.

    The time average is the across-trial mean of per-trial averages with
    a Student-t 95% half-width; the renewal-reward estimate pools every
    completed cycle.  Mean inter-event times use the per-transmission
    convention for local events and merged instants for global ones.
    """
    if not accumulators:
        raise ValueError("no trials to finalize")
    for acc in accumulators:
        if acc.elapsed <= 0:
            raise ValueError("cannot finalize a trial with zero elapsed time")
    n = accumulators[0].n
    per_trial = np.array([a.integral_sum / a.elapsed for a in accumulators])
    trials = len(accumulators)
    j_time_avg = float(per_trial.mean())
    if trials > 1:
        scale = stats.t.ppf(0.975, trials - 1) / np.sqrt(trials)
        ci = float(per_trial.std(ddof=1) * scale)
    else:
        ci = 0.0

    merged = merge_accumulators(accumulators)
    if merged.per_renewal_lengths:
        j_renewal = (
            n
            * (n - 1)
            * float(np.mean(merged.per_renewal_costs))
            / float(np.mean(merged.per_renewal_lengths))
        )
    else:
        j_renewal = float("nan")

    total_local = int(merged.local_event_counts.sum())
    mean_local = n * merged.elapsed / total_local if total_local else float("nan")
    mean_global = (
        merged.elapsed / merged.global_event_count
        if merged.global_event_count
        else float("nan")
    )
    return CostReport(
        j_time_avg=j_time_avg,
        j_renewal=j_renewal,
        mean_local_interevent=mean_local,
        mean_global_interevent=mean_global,
        trials=trials,
        ci_halfwidth=ci,
        j_trials=tuple(float(v) for v in per_trial),
    )


def j_tt_broadcast(n: int, local_period: float) -> float:
    """Long-run cost of the periodic scheme under broadcast-only
    information: ``n (n - 1) * T / 2`` with ``T`` the per-agent period."""
    if n < 1:
        raise ValueError(f"agent count must be >= 1, got {n}")
    if local_period <= 0:
        raise ValueError(f"period must be positive, got {local_period}")
    return n * (n - 1) * local_period / 2.0


def j_et_broadcast(n: int, delta: float) -> float:
    """Long-run cost of the level scheme under broadcast-only
    information: ``n (n - 1) * delta^2 / 6`` (mean exit time is delta^2)."""
    if n < 1:
        raise ValueError(f"agent count must be >= 1, got {n}")
    if delta <= 0:
        raise ValueError(f"threshold must be positive, got {delta}")
    return n * (n - 1) * delta * delta / 6.0


def j_tt_broadcast_local(n: int, global_period: float) -> float:
    """Long-run cost of the periodic scheme under broadcast-plus-local
    information: ``n (n - 1) * T / 2`` with ``T`` the global period."""
    if n < 1:
        raise ValueError(f"agent count must be >= 1, got {n}")
    if global_period <= 0:
        raise ValueError(f"period must be positive, got {global_period}")
    return n * (n - 1) * global_period / 2.0


def local_to_global_period(n: int, local_period: float) -> float:
    """Global inter-event time at equal transmission rate: ``T / n``."""
    if n < 1:
        raise ValueError(f"agent count must be >= 1, got {n}")
    if local_period <= 0:
        raise ValueError(f"period must be positive, got {local_period}")
    return local_period / n


def information_gap(n: int) -> float:
    """Cost ratio of the two periodic schemes at equal global rates.

    Equals ``j_tt_broadcast(n, n * T) / j_tt_broadcast_local(n, T)`` for
    any ``T``, i.e. exactly ``n``: richer local information buys a
    factor-``n`` improvement for periodic triggering.
    """
    if n < 1:
        raise ValueError(f"agent count must be >= 1, got {n}")
    return float(n)


def expected_occupation_integral(delta: float) -> float:
    """``E[int_0^T B(t)^2 dt]`` for Brownian exit from ``[-delta, delta]``,
    in closed form ``delta^4 / 6``."""
    if delta <= 0:
        raise ValueError(f"threshold must be positive, got {delta}")
    return delta**4 / 6.0
