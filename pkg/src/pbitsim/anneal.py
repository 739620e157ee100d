"""Annealing schedules shared by all samplers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AnnealSchedule:
    """Ordered (beta, sweeps) stages with nondecreasing beta."""

    stages: tuple[tuple[float, int], ...]

    def __post_init__(self):
        if not self.stages:
            raise ValueError("schedule needs at least one stage")
        betas = [b for b, _ in self.stages]
        if any(b < 0 for b in betas):
            raise ValueError("beta must be nonnegative")
        if any(b2 < b1 for b1, b2 in zip(betas, betas[1:])):
            raise ValueError("betas must be nondecreasing")
        if any(s < 1 for _, s in self.stages):
            raise ValueError("stage sweep counts must be positive")

    @property
    def total_sweeps(self) -> int:
        return sum(s for _, s in self.stages)

    @property
    def betas(self) -> np.ndarray:
        return np.array([b for b, _ in self.stages], dtype=np.float64)

    @property
    def stage_sweeps(self) -> np.ndarray:
        return np.array([s for _, s in self.stages], dtype=np.int64)

    def cumulative_sweeps(self) -> np.ndarray:
        """Sweep index at which each stage ends (exclusive upper bound)."""
        return np.cumsum(self.stage_sweeps)


def linear_schedule(beta_start: float, beta_end: float, beta_step: float,
                    sweeps_per_stage: int) -> AnnealSchedule:
    """Stages at beta_start, beta_start + step, ..., beta_end inclusive."""
    if beta_start > beta_end:
        raise ValueError("beta_start must not exceed beta_end")
    if beta_step <= 0:
        raise ValueError("beta_step must be positive")
    if sweeps_per_stage < 1:
        raise ValueError("sweeps_per_stage must be positive")
    n_stages = int(np.floor((beta_end - beta_start) / beta_step + 1e-9)) + 1
    stages = tuple((beta_start + i * beta_step, sweeps_per_stage) for i in range(n_stages))
    return AnnealSchedule(stages)


def beta_at(s: AnnealSchedule, progress: float) -> float:
    """Stage beta at the given sweep progress, right-continuous at boundaries.

    Progress counts completed sweeps in [0, total]; the boundary sweep
    belongs to the later stage. progress == total returns the final beta.
    """
    total = s.total_sweeps
    if not 0 <= progress <= total:
        raise ValueError(f"progress {progress} outside [0, {total}]")
    bounds = s.cumulative_sweeps()
    idx = int(np.searchsorted(bounds, progress, side="right"))
    if idx == len(bounds):
        idx -= 1  # progress == total: final stage
    return s.stages[idx][0]
