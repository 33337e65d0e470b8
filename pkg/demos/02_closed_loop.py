"""
Watching the closed loop: triggers, impulses and bookkeeping
============================================================

Three noisy integrators keep consensus through impulsive control.  This
script runs short trials of the level-triggered loop in both
information scenarios and prints what happens at the first few events:
who triggered, where the consensus point landed, and what the impulse
did to states and estimates.
"""

import math

import numpy as np

from etclab import (
    InfoScenario,
    LevelBroadcast,
    LevelGlobal,
    ScenarioConfig,
    run_trial,
)

np.set_printoptions(precision=3, suppress=True)

# --- broadcast-only: estimates reset, states only partially ------------------

config = ScenarioConfig(
    n=3,
    scenario=InfoScenario.BROADCAST,
    scheme=LevelBroadcast(math.sqrt(1.5)),
    horizon=2000.0,
    trials=1,
    seed=8,
    record_events=True,
)
result = run_trial(config, 0)
print("broadcast-only level rule, first four events:")
for event in result.events[:4]:
    print(f"  t={event.time:7.3f}  initiators={event.initiators}  c={event.consensus_point:+.3f}")
    print(f"    x  {event.x_pre} -> {event.x_post}")
    print(f"    x^ {event.xhat_pre} -> {event.xhat_post}")

# between events an agent's error is its own accumulated noise; its
# estimate is the last consensus point, common to everyone
report = result.accumulator
print(f"\n  events in {config.horizon:.0f} s: {report.global_event_count}"
      f"  (per agent: {report.local_event_counts})")
print(f"  time-average cost: {report.integral_sum / report.elapsed:.4f}")

# --- broadcast+local: every event is a perfect reset --------------------------

config = ScenarioConfig(
    n=3,
    scenario=InfoScenario.BROADCAST_LOCAL,
    scheme=LevelGlobal(1.04),
    horizon=2000.0,
    trials=1,
    seed=8,
    record_events=True,
)
result = run_trial(config, 0)
print("\nbroadcast+local level rule, first four events:")
for event in result.events[:4]:
    print(f"  t={event.time:7.3f}  initiators={event.initiators}  c={event.consensus_point:+.3f}")
    print(f"    x  {event.x_pre} -> {event.x_post}   (exact reset)")

report = result.accumulator
print(f"\n  global events: {report.global_event_count}"
      f"  mean spacing: {report.elapsed / report.global_event_count:.3f} s")
print(f"  time-average cost: {report.integral_sum / report.elapsed:.4f}")
print("\nricher local information buys lower cost at the same event rate,")
print("because the whole fleet, not just estimates, returns to consensus.")
