"""Ring-oscillator clock fabric: free-running clocks driving p-bit activations.

Every p-bit is driven by exactly one clock; all p-bits sharing a clock must
belong to the same graph partition so that directly coupled p-bits never
update on the same edge systematically. Simulation time is in nanoseconds,
frequencies in MHz (1 MHz clock = 1000 ns period). A clock with frequency f
and phase p fires at p, p + 1/f, p + 2/f, ... strictly before the horizon.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class ClockSpec:
    """One free-running clock: frequency (MHz), phase offset (ns), optional
    fractional-period Gaussian jitter."""

    id: int
    frequency_mhz: float
    phase_ns: float = 0.0
    jitter_sigma: float = 0.0

    def __post_init__(self):
        if self.frequency_mhz <= 0:
            raise ValueError(f"clock {self.id}: frequency must be positive")
        if not 0 <= self.phase_ns < self.period_ns:
            raise ValueError(f"clock {self.id}: phase {self.phase_ns} outside one period")
        if self.jitter_sigma < 0:
            raise ValueError("jitter_sigma must be nonnegative")

    @property
    def period_ns(self) -> float:
        return 1000.0 / self.frequency_mhz


@dataclass(frozen=True)
class ClockPlan:
    """Clock bank plus a per-p-bit clock assignment (index into `clocks`)."""

    clocks: tuple[ClockSpec, ...]
    assignment: np.ndarray  # int32, one clock index per p-bit

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int32)
        if a.ndim != 1:
            raise ValueError("assignment must be one clock index per p-bit")
        if len(self.clocks) == 0:
            raise ValueError("plan needs at least one clock")
        if a.size and (a.min() < 0 or a.max() >= len(self.clocks)):
            raise ValueError("assignment references unknown clock")
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    @property
    def num_pbits(self) -> int:
        return int(self.assignment.size)

    def pbits_of_clock(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == c).astype(np.int32)

    def mean_frequency_mhz(self) -> float:
        """Mean activation rate per p-bit (MHz), weighted by assignment."""
        freqs = np.array([c.frequency_mhz for c in self.clocks])
        counts = np.bincount(self.assignment, minlength=len(self.clocks))
        return float(np.dot(freqs, counts) / self.num_pbits)

    def check_partition_purity(self, partition: np.ndarray) -> None:
        """Every clock must drive p-bits of a single partition."""
        for c in range(len(self.clocks)):
            ids = self.pbits_of_clock(c)
            if ids.size and len(set(int(partition[i]) for i in ids)) > 1:
                raise ValueError(f"clock {c} drives p-bits from both partitions")


def default_rosc_bank(n_clocks: int, f_lo_mhz: float, f_hi_mhz: float,
                      rng: np.random.Generator | None = None,
                      jitter_sigma: float = 0.0) -> list[ClockSpec]:
    """n_clocks frequencies evenly spaced on [f_lo, f_hi] inclusive.

    Phases are drawn uniformly within one period when an rng is given
    (redraw per trial to model oscillators starting asynchronously),
    otherwise zero.
    """
    if n_clocks < 1:
        raise ValueError("need at least one clock")
    if f_lo_mhz <= 0 or f_hi_mhz < f_lo_mhz:
        raise ValueError(f"invalid frequency range [{f_lo_mhz}, {f_hi_mhz}] MHz")
    freqs = np.linspace(f_lo_mhz, f_hi_mhz, n_clocks)
    bank = []
    for i, f in enumerate(freqs):
        phase = float(rng.uniform(0.0, 1000.0 / f)) if rng is not None else 0.0
        bank.append(ClockSpec(id=i, frequency_mhz=float(f), phase_ns=phase,
                              jitter_sigma=jitter_sigma))
    return bank


def with_random_phases(clocks: list[ClockSpec], rng: np.random.Generator) -> list[ClockSpec]:
    """Copy of the bank with fresh uniform phases (frequencies unchanged)."""
    return [replace(c, phase_ns=float(rng.uniform(0.0, c.period_ns))) for c in clocks]


def mean_matched(clocks: list[ClockSpec], target_mean_mhz: float = 9.375) -> list[ClockSpec]:
    """Rescale all frequencies so the bank mean is exactly target, preserving
    ratios. Phases are reset to zero (periods changed)."""
    mean = sum(c.frequency_mhz for c in clocks) / len(clocks)
    scale = target_mean_mhz / mean
    return [replace(c, frequency_mhz=c.frequency_mhz * scale, phase_ns=0.0)
            for c in clocks]


def two_phase_bank(f_mhz: float) -> list[ClockSpec]:
    """Two equal-frequency clocks half a period apart (synchronous two-phase)."""
    period = 1000.0 / f_mhz
    return [ClockSpec(id=0, frequency_mhz=f_mhz, phase_ns=0.0),
            ClockSpec(id=1, frequency_mhz=f_mhz, phase_ns=period / 2.0)]


def assign_clocks(g, clocks: list[ClockSpec], rng: np.random.Generator) -> ClockPlan:
    """Assign each p-bit a clock, keeping clocks partition-pure.

    The bank is split between partitions (first half to A, second half to B)
    and each partition's p-bits are dealt round-robin over its clocks from a
    randomized starting clock, balancing counts within one.
    """
    part = np.asarray(g.partition)
    sides = [np.flatnonzero(part == 0), np.flatnonzero(part == 1)]
    n_nonempty = sum(1 for s in sides if s.size)
    if len(clocks) < n_nonempty:
        raise ValueError(f"{len(clocks)} clocks cannot cover {n_nonempty} partitions")

    assignment = np.zeros(g.num_nodes, dtype=np.int32)
    half = len(clocks) // 2
    groups = [list(range(half)) or [0], list(range(half, len(clocks)))]
    if sides[1].size == 0:
        groups[0] = list(range(len(clocks)))
    for side, clock_ids in zip(sides, groups):
        if side.size == 0:
            continue
        start = int(rng.integers(len(clock_ids)))
        for t, pbit in enumerate(np.sort(side)):
            assignment[pbit] = clock_ids[(start + t) % len(clock_ids)]

    plan = ClockPlan(clocks=tuple(clocks), assignment=assignment)
    plan.check_partition_purity(part)
    return plan


def clock_firings(plan: ClockPlan, horizon_ns: float,
                  rng: np.random.Generator | None = None) -> tuple[np.ndarray, np.ndarray]:
    """All clock edges before the horizon, sorted by (time, clock index).

    Returns (times_ns, clock_idx). With jitter_sigma > 0 periods are
    multiplied per tick by max(1e-3, 1 + sigma * N(0, 1)) drawn from rng;
    without jitter, tick times are computed exactly as phase + k * period.
    """
    if horizon_ns <= 0:
        raise ValueError("horizon must be positive")
    times_all: list[np.ndarray] = []
    idx_all: list[np.ndarray] = []
    for ci, c in enumerate(plan.clocks):
        if c.jitter_sigma > 0:
            if rng is None:
                raise ValueError("jittered clocks need an rng")
            ts = []
            t = c.phase_ns
            while t < horizon_ns:
                ts.append(t)
                t += c.period_ns * max(1e-3, 1.0 + c.jitter_sigma * rng.standard_normal())
            times = np.array(ts, dtype=np.float64)
        else:
            count = int(np.ceil((horizon_ns - c.phase_ns) / c.period_ns))
            count = max(count, 0)
            times = c.phase_ns + np.arange(count, dtype=np.float64) * c.period_ns
            times = times[times < horizon_ns]
        times_all.append(times)
        idx_all.append(np.full(times.size, ci, dtype=np.int32))
    times = np.concatenate(times_all) if times_all else np.zeros(0)
    idx = np.concatenate(idx_all) if idx_all else np.zeros(0, dtype=np.int32)
    order = np.lexsort((idx, times))
    return times[order], idx[order]


class EventQueue:
    """Priority queue of (time_ns, pbit_id) activation events.

    Pop order is nondecreasing in time with ties broken by ascending p-bit id.
    """

    def __init__(self):
        self._heap: list[tuple[float, int]] = []

    def push(self, time_ns: float, pbit_id: int) -> None:
        heapq.heappush(self._heap, (time_ns, pbit_id))

    def pop(self) -> tuple[float, int]:
        if not self._heap:
            raise IndexError("pop from empty EventQueue")
        return heapq.heappop(self._heap)

    def peek(self) -> tuple[float, int]:
        if not self._heap:
            raise IndexError("peek at empty EventQueue")
        return self._heap[0]

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)


def schedule_events(plan: ClockPlan, horizon_ns: float,
                    rng: np.random.Generator | None = None):
    """Yield (time_ns, pbit_id) activation events in queue order.

    Each clock edge activates all p-bits assigned to that clock; coincident
    edges merge, with p-bits emitted in ascending id. Deterministic given the
    plan and rng seed.
    """
    times, idx = clock_firings(plan, horizon_ns, rng)
    pbits_by_clock = [plan.pbits_of_clock(c) for c in range(len(plan.clocks))]
    i = 0
    n = times.size
    while i < n:
        j = i
        while j < n and times[j] == times[i]:
            j += 1
        group = np.sort(np.concatenate([pbits_by_clock[c] for c in idx[i:j]]))
        t = float(times[i])
        for p in group:
            yield (t, int(p))
        i = j
