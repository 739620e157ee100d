"""Time-to-solution accounting and its uncertainty.

Success probabilities are estimated per instance, averaged across the
instances of a size, and only then pushed through the repetition formula;
uncertainty comes from bootstrap resampling over instances. A size where no
trial ever succeeded cannot be extrapolated and is reported as censored
rather than given a made-up value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class Censored(Exception):
    """Raised where a time-to-solution is undefined (zero successes)."""


def n_repetitions(p_s: float, p_r: float = 0.99) -> float:
    """Expected runs to hit the ground state at least once with confidence p_r.

    max(1, ln(1 - p_r) / ln(1 - p_s)); exactly 1.0 when p_s >= p_r, and in
    particular at p_s = 1. Raises Censored at p_s = 0.
    """
    if not 0.0 <= p_s <= 1.0:
        raise ValueError(f"success probability {p_s} outside [0, 1]")
    if not 0.0 < p_r < 1.0:
        raise ValueError(f"confidence {p_r} outside (0, 1)")
    if p_s == 0.0:
        raise Censored("no successes: repetition count undefined")
    if p_s == 1.0:
        return 1.0
    return max(1.0, math.log(1.0 - p_r) / math.log(1.0 - p_s))


def tts(tau: float, p_s: float, p_r: float = 0.99) -> float:
    """Time to solution: tau times the repetition count, in tau's unit."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    return tau * n_repetitions(p_s, p_r)


@dataclass(frozen=True)
class InstanceStats:
    """Per-instance success tally.

    tau is the annealing time each trial ran for: model nanoseconds for the
    clocked samplers, sweeps for the serial baseline.
    """

    instance_id: int
    n_trials: int
    n_success: int
    tau: float | None = None

    def __post_init__(self):
        if self.n_trials < 1 or not 0 <= self.n_success <= self.n_trials:
            raise ValueError("invalid trial tally")

    @property
    def p_s(self) -> float:
        return self.n_success / self.n_trials


@dataclass(frozen=True)
class BenchReport:
    """Aggregated time-to-solution for one (size, sampler) cell."""

    sampler: str
    n_instances: int
    tau: float
    p_r: float
    mean_ps: float
    tts: float  # inf when censored
    ci_lo: float
    ci_hi: float
    censored: bool
    censored_fraction: float  # of bootstrap resamples
    censored_instances: int = 0  # instances with zero successes
    tau_unit: str = "ns"
    size: str = ""


def _tts_of_means(means: np.ndarray, tau: float, p_r: float) -> np.ndarray:
    """Vectorized tts over mean success probabilities; 0 maps to inf."""
    out = np.full(means.shape, np.inf)
    pos = means > 0
    with np.errstate(divide="ignore"):
        nr = np.log(1.0 - p_r) / np.log(1.0 - means[pos])
    out[pos] = tau * np.maximum(1.0, nr)
    out[means >= 1.0] = tau
    return out


def bootstrap_ci(ps: np.ndarray, tau: float, p_r: float = 0.99, *,
                 n_resamples: int = 10_000, confidence: float = 0.95,
                 rng: np.random.Generator | None = None) -> tuple[float, float, float]:
    """Bootstrap confidence interval for the aggregate time to solution.

    Instances are resampled with replacement; each resample's mean success
    probability is pushed through the tts formula. Bounds are nearest-rank
    percentiles of the resampled statistics; all-failure resamples carry an
    infinite tts and so pile up in the upper tail. Returns
    (lo, hi, fraction of censored resamples).
    """
    if len(ps) and isinstance(ps[0], InstanceStats):
        ps = [s.p_s for s in ps]
    ps = np.asarray(ps, dtype=np.float64)
    if ps.size == 0:
        raise ValueError("need at least one instance")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    rng = rng if rng is not None else np.random.default_rng(0)
    draws = rng.integers(0, ps.size, size=(n_resamples, ps.size))
    means = ps[draws].mean(axis=1)
    stats = np.sort(_tts_of_means(means, tau, p_r))
    q_lo = (1.0 - confidence) / 2.0
    lo = stats[max(1, math.ceil(q_lo * n_resamples)) - 1]
    hi = stats[max(1, math.ceil((1.0 - q_lo) * n_resamples)) - 1]
    frac_censored = float(np.mean(np.isinf(stats)))
    return float(lo), float(hi), frac_censored


def aggregate_size(stats: list[InstanceStats], tau: float, p_r: float = 0.99, *,
                   sampler: str = "", size: str = "", tau_unit: str = "ns",
                   n_resamples: int = 10_000, confidence: float = 0.95,
                   rng: np.random.Generator | None = None) -> BenchReport:
    """Pool instances of one size: mean success probability, then tts and CI."""
    if not stats:
        raise ValueError("need at least one instance")
    ps = np.array([s.p_s for s in stats])
    mean_ps = float(ps.mean())
    try:
        point = tts(tau, mean_ps, p_r)
        censored = False
    except Censored:
        point = np.inf
        censored = True
    lo, hi, frac = bootstrap_ci(ps, tau, p_r, n_resamples=n_resamples,
                                confidence=confidence, rng=rng)
    return BenchReport(sampler=sampler, n_instances=len(stats), tau=tau,
                       p_r=p_r, mean_ps=mean_ps, tts=point, ci_lo=lo, ci_hi=hi,
                       censored=censored, censored_fraction=frac,
                       censored_instances=int(np.sum(ps == 0.0)),
                       tau_unit=tau_unit, size=size)


def update_rate_hz(updates: int | float, model_time_ns: float) -> float:
    """Attempted p-bit updates per second of model time."""
    if model_time_ns <= 0:
        raise ValueError("model time must be positive")
    return updates / model_time_ns * 1e9


def flips_per_second(sampler: str, n: int, f_avg_mhz: float | None = None) -> float:
    """Model-time flip throughput.

    A serialized machine attempts exactly one flip per model step (n per
    sweep) regardless of n; a parallel fabric attempts n flips per mean clock
    period, i.e. n * f_avg per model second.
    """
    if sampler == "serial":
        return 1.0
    if f_avg_mhz is None or f_avg_mhz <= 0:
        raise ValueError("clocked samplers need a positive mean frequency")
    return n * f_avg_mhz * 1e6
