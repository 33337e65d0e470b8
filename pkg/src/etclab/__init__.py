"""Monte-Carlo laboratory for time- vs event-triggered consensus.

A fleet of noisy single integrators keeps consensus through impulsive
control; sampling instants come either from periodic schedules or from
level-triggering rules, under two local-information scenarios.  The
package simulates the closed loop reproducibly, estimates the long-run
consensus-deviation cost two independent ways, carries the closed-form
cost oracles for the schemes that have them, and tunes level thresholds
to hit target triggering rates.
"""

from .calibration import (
    CalibrationError,
    CalibrationResult,
    calibrate_broadcast_threshold,
    calibrate_global_threshold,
)
from .control import (
    Average,
    ConsensusRule,
    Fixed,
    InfoScenario,
    Leader,
    consensus_point,
    impulse_broadcast,
    impulse_local,
    refresh_estimates,
)
from .costs import (
    CostAccumulator,
    CostReport,
    accumulate,
    expected_occupation_integral,
    finalize,
    information_gap,
    j_et_broadcast,
    j_tt_broadcast,
    j_tt_broadcast_local,
    local_to_global_period,
    merge_accumulators,
)
from .driver import (
    ScenarioConfig,
    TrialResult,
    run_batch,
    run_trial,
    run_trial_reference,
    run_trials,
)
from .graph import CompleteGraph, consensus_cost, laplacian_dense
from .sde import (
    NoiseStream,
    SimState,
    apply_impulse,
    drift_step,
    initial_state,
    wiener_increments,
)
from .triggering import (
    LevelBroadcast,
    LevelGlobal,
    PeriodicAsync,
    PeriodicSync,
    TriggerEvent,
    TriggerScheme,
    check_level_broadcast,
    check_level_global,
    check_periodic,
    sample_first_passage_batch,
    sample_first_passage_min,
    sample_first_passage_single,
    staggered_offsets,
)

__version__ = "0.1.0"
