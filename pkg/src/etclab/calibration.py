"""Threshold tuning so a level scheme hits a target mean inter-event time.

For the broadcast-only scheme the mean single-agent exit time is exactly
``delta^2``, so the threshold is closed form.  For the global level
scheme the mean exit time of the fastest of ``n`` motions has no simple
expression; the primary method estimates the unit-threshold mean exit
time ``m_n`` once by Monte Carlo and applies the exact Brownian scaling
``E[T(delta)] = delta^2 * m_n``.  A bisection fallback on the monotone
map ``delta -> mean exit time`` (with common random numbers across
iterates) covers the case where the scaling estimate fails its
verification run.  Sampling defaults to the bridge-corrected sampler:
accuracy here dominates the bias of every rate-matched experiment
downstream.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .sde import NoiseStream
from .triggering import sample_first_passage_batch

__all__ = [
    "CalibrationResult",
    "CalibrationError",
    "calibrate_broadcast_threshold",
    "calibrate_global_threshold",
]

DEFAULT_SAMPLES = 100_000
DEFAULT_DT = 1e-3
DEFAULT_TOLERANCE = 0.03


@dataclass(frozen=True)
class CalibrationResult:
    """Tuned threshold with its Monte-Carlo verification."""

    delta_star: float
    target_period: float
    achieved_period: float
    ci_halfwidth: float
    samples_used: int
    method: str


class CalibrationError(RuntimeError):
    """Verification run missed the target beyond tolerance."""

    def __init__(self, message: str, *, delta: float, target: float, achieved: float,
                 tolerance: float, samples: int):
        super().__init__(message)
        self.delta = delta
        self.target = target
        self.achieved = achieved
        self.tolerance = tolerance
        self.samples = samples


def _mean_exit(stream: NoiseStream, n: int, delta: float, dt: float, samples: int,
               bridge_correction: bool = True):
    times = sample_first_passage_batch(
        stream, samples, delta, dt, n_agents=n, bridge_correction=bridge_correction
    )
    mean = float(times.mean())
    ci = float(1.96 * times.std(ddof=1) / np.sqrt(samples))
    return mean, ci


def calibrate_broadcast_threshold(
    target_local_period: float,
    stream: Optional[NoiseStream] = None,
    dt: float = DEFAULT_DT,
    samples: int = 20_000,
    verify: bool = True,
    bridge_correction: bool = True,
) -> CalibrationResult:
    """Threshold for the broadcast-only level rule: ``sqrt(target)``.

    The mean exit law makes this exact; the optional Monte-Carlo run
    only fills in the achieved value and its confidence interval.
    """
    if target_local_period <= 0:
        raise ValueError(f"target period must be positive, got {target_local_period}")
    delta = float(np.sqrt(target_local_period))
    if verify:
        stream = stream if stream is not None else NoiseStream(0)
        achieved, ci = _mean_exit(stream.child(2), 1, delta, dt, samples,
                                  bridge_correction)
    else:
        achieved, ci, samples = float("nan"), float("nan"), 0
    return CalibrationResult(
        delta_star=delta,
        target_period=target_local_period,
        achieved_period=achieved,
        ci_halfwidth=ci,
        samples_used=samples,
        method="scaling-law",
    )


def calibrate_global_threshold(
    n: int,
    target_global_period: float,
    stream: Optional[NoiseStream] = None,
    dt: float = DEFAULT_DT,
    tolerance: float = DEFAULT_TOLERANCE,
    samples: int = DEFAULT_SAMPLES,
    method: str = "scaling",
    bridge_correction: bool = True,
) -> CalibrationResult:
    """Tune the global level threshold for ``n`` agents.

    Parameters
    ----------
    n : int
        Agent count (>= 1).
    target_global_period : float
        Desired mean global inter-event time, seconds.
    stream : NoiseStream, optional
        Sampling stream; defaults to seed 0.  Identical streams give
        bit-identical results.
    tolerance : float
        Relative acceptance band on the verified mean, in (0, 0.2].
    method : str
        ``"scaling"`` (default, with bisection fallback) or
        ``"bisection"`` to force the fallback path.

    Raises
    ------
    CalibrationError
        If the verification run still misses the target after the
        fallback, carrying the diagnostics.
    """
    if n < 1:
        raise ValueError(f"agent count must be >= 1, got {n}")
    if target_global_period <= 0:
        raise ValueError(f"target period must be positive, got {target_global_period}")
    if not 0 < tolerance <= 0.2:
        raise ValueError(f"tolerance must be in (0, 0.2], got {tolerance}")
    if method not in ("scaling", "bisection"):
        raise ValueError(f"unknown method {method!r}")
    stream = stream if stream is not None else NoiseStream(0)

    used = 0
    # verification only needs the mean pinned to ~1/10 of the tolerance
    verify_samples = max(samples // 5, 5_000)
    if method == "scaling":
        m_n, _ = _mean_exit(stream.child(1), n, 1.0, dt, samples, bridge_correction)
        used += samples
        delta = float(np.sqrt(target_global_period / m_n))
        achieved, ci = _mean_exit(stream.child(2), n, delta, dt, verify_samples,
                                  bridge_correction)
        used += verify_samples
        if abs(achieved - target_global_period) <= tolerance * target_global_period:
            return CalibrationResult(
                delta_star=delta,
                target_period=target_global_period,
                achieved_period=achieved,
                ci_halfwidth=ci,
                samples_used=used,
                method="scaling-law",
            )
        guess = delta
    else:
        guess = float(np.sqrt(target_global_period))  # crude bracket seed

    # Bisection on the monotone map delta -> mean exit time, evaluated
    # with common random numbers (same substream restarted per iterate).
    iterate_samples = max(samples // 5, 2_000)
    lo, hi = 0.25 * guess, 4.0 * guess
    crn = stream.child(3)
    delta = guess
    for _ in range(60):
        delta = 0.5 * (lo + hi)
        mean, _ = _mean_exit(crn.restarted(), n, delta, dt, iterate_samples,
                             bridge_correction)
        used += iterate_samples
        if abs(mean - target_global_period) <= 0.5 * tolerance * target_global_period:
            break
        if mean < target_global_period:
            lo = delta
        else:
            hi = delta
    achieved, ci = _mean_exit(stream.child(4), n, delta, dt, verify_samples,
                              bridge_correction)
    used += verify_samples
    if abs(achieved - target_global_period) > tolerance * target_global_period:
        raise CalibrationError(
            f"calibration missed target {target_global_period} "
            f"(achieved {achieved:.6g} at delta={delta:.6g}, tolerance {tolerance:.1%})",
            delta=delta,
            target=target_global_period,
            achieved=achieved,
            tolerance=tolerance,
            samples=used,
        )
    return CalibrationResult(
        delta_star=float(delta),
        target_period=target_global_period,
        achieved_period=achieved,
        ci_halfwidth=ci,
        samples_used=used,
        method="bisection",
    )
