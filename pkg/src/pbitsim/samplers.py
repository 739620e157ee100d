"""The three samplers: serialized Gibbs, synchronous colored Gibbs, and
asynchronous clock-driven Gibbs.

All samplers draw from the same per-p-bit random streams (splitmix64 by
default, per-p-bit 32-bit LFSRs in hardware mode) and consume exactly one
draw per activation, so runs with equal seeds are directly comparable across
samplers: if two samplers activate p-bits in the same order from the same
state they produce identical traces.

The initial state, unless supplied, costs one draw per p-bit (a beta = 0
update, uniform over +-1). In fixed-point mode that one draw is still taken
through the floating uniform mapping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .anneal import AnnealSchedule
from .clocks import ClockPlan, clock_firings
from .model import FixedActivation, IsingProblem, Lfsr, LFSR_TAPS_32, pbit_update, stream_init, stream_next

SAMPLER_SERIAL = "serial"
SAMPLER_CHROMATIC = "chromatic"
SAMPLER_ASYNC = "async"


def success_threshold(e_ground: float) -> float:
    """Energies at or below this count as reaching the ground energy."""
    return e_ground + 1e-9 * abs(e_ground) + 1e-12


@dataclass(frozen=True)
class HazardConfig:
    """Timing hazards of the asynchronous fabric.

    synapse_delay_ns: a flip is invisible to readers for this long.
    simultaneity_window_ns: firings within this window of a group's first
    firing update simultaneously (0 means exact time ties only).
    """

    synapse_delay_ns: float = 3.33
    simultaneity_window_ns: float = 0.0

    def __post_init__(self):
        if self.synapse_delay_ns < 0 or self.simultaneity_window_ns < 0:
            raise ValueError("hazard times must be nonnegative")


@dataclass
class TrialResult:
    """Outcome of one annealing run."""

    instance_id: int
    sampler: str
    seed: int
    success: bool
    best_energy: float
    final_energy: float
    sweeps_executed: float
    updates: int
    flips: int
    model_time_ns: float
    time_to_first_success: float | None
    stale_reads: int = 0
    collisions: int = 0
    trace: tuple[np.ndarray, np.ndarray] | None = None


def _problem_of(inst) -> IsingProblem:
    prob = getattr(inst, "problem", None)
    if not isinstance(prob, IsingProblem):
        raise TypeError(f"cannot extract an Ising problem from {type(inst).__name__}")
    return prob


def _streams(seed: int, n: int, lfsr: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(splitmix states, aux state, lfsr registers) for n p-bits.

    Stream i belongs to p-bit i; the aux stream (index n) only drives scan
    order permutations. LFSR registers are seeded from the same hash, forced
    nonzero.
    """
    sm = np.empty(n, dtype=np.uint64)
    for i in range(n):
        sm[i] = stream_init(seed, i)
    aux = np.array([stream_init(seed, n)], dtype=np.uint64)
    lf = np.ones(n, dtype=np.uint32)
    if lfsr:
        for i in range(n):
            r = stream_init(seed, i) & 0xFFFFFFFF
            lf[i] = r if r != 0 else 1
    return sm, aux, lf


def _initial_state(sm: np.ndarray, lf: np.ndarray, lfsr: bool) -> np.ndarray:
    """Uniform random state, one beta = 0 update per p-bit."""
    n = sm.size
    m = np.empty(n, dtype=np.int8)
    for i in range(n):
        if lfsr:
            reg = Lfsr(width=32, taps=LFSR_TAPS_32, register=int(lf[i]))
            r = reg.next_uniform()
            lf[i] = reg.register
        else:
            s, r = stream_next(int(sm[i]))
            sm[i] = s
        m[i] = pbit_update(0.0, 0.0, r)
    return m


def _coerce_m0(m0, n: int) -> np.ndarray:
    m = np.asarray(m0, dtype=np.int8).copy()
    if m.shape != (n,) or not np.all(np.abs(m) == 1):
        raise ValueError("m0 must be +-1 with one entry per spin")
    return m


def _act_args(fixed: FixedActivation | None):
    """(act_kind, table, qmax, half, frac_mul, sh_sm, sh_lf) kernel args."""
    if fixed is None:
        return _kernels.ACT_FLOAT, np.zeros(1, dtype=np.int16), 0, 0, 1.0, 0, 0
    total = fixed.total_bits
    if total > 32:
        raise ValueError("fixed-point width beyond the 32-bit draw")
    return (_kernels.ACT_FIXED, fixed.table.copy(), fixed.qmax,
            1 << (total - 1), float(1 << fixed.frac_bits), 64 - total, 32 - total)


def _stage_bounds(schedule: AnnealSchedule) -> np.ndarray:
    """Sweep index at which each stage starts, plus the schedule end."""
    return np.concatenate(([0], schedule.cumulative_sweeps())).astype(np.int64)


def _track_args(prob: IsingProblem) -> tuple[float, int]:
    if prob.e_ground is None:
        return 0.0, 0
    return success_threshold(prob.e_ground), 1


def _run_sweep_sampler(prob, schedule, seed, colors_indptr, colors_nodes,
                       scan_random, lfsr, fixed, m0, n_sweeps, record_trace):
    n = prob.num_spins
    indptr, indices, weights = prob.csr
    sm, aux, lf = _streams(seed, n, lfsr)
    m = _coerce_m0(m0, n) if m0 is not None else _initial_state(sm, lf, lfsr)
    act_kind, table, qmax, half, frac_mul, sh_sm, sh_lf = _act_args(fixed)
    e_thresh, track = _track_args(prob)
    n_trace = n_sweeps * n if record_trace else 0
    trace_nodes = np.zeros(n_trace, dtype=np.int32)
    trace_vals = np.zeros(n_trace, dtype=np.int8)
    best, fin, first_upd, upd, flips = _kernels.sweep_trial(
        indptr, indices, weights, prob.h, m,
        schedule.betas, _stage_bounds(schedule), n_sweeps,
        colors_indptr, colors_nodes, 1 if scan_random else 0,
        _kernels.RNG_LFSR if lfsr else _kernels.RNG_SPLITMIX, sm, lf, aux,
        act_kind, table, qmax, half, frac_mul, sh_sm, sh_lf,
        e_thresh, track,
        trace_nodes, trace_vals, 1 if record_trace else 0)
    trace = (trace_nodes, trace_vals) if record_trace else None
    return best, fin, int(first_upd), int(upd), int(flips), trace, m


def run_serial_gibbs(inst, schedule: AnnealSchedule, seed: int, *,
                     scan_order: str = "ascending", lfsr: bool = False,
                     fixed: FixedActivation | None = None,
                     m0=None, n_sweeps: int | None = None,
                     record_trace: bool = False, instance_id: int = -1) -> TrialResult:
    """One p-bit update at a time, n updates per sweep.

    scan_order "ascending" visits p-bits in id order; "random" draws a fresh
    permutation per sweep from the auxiliary stream. A software baseline has
    no hardware clock, so model_time_ns is 0 and time_to_first_success is in
    sweeps (fractional).
    """
    if scan_order not in ("ascending", "random"):
        raise ValueError(f"unknown scan_order {scan_order!r}")
    prob = _problem_of(inst)
    n = prob.num_spins
    sweeps = int(n_sweeps if n_sweeps is not None else schedule.total_sweeps)
    colors_indptr = np.array([0, n], dtype=np.int64)
    colors_nodes = np.arange(n, dtype=np.int32)
    best, fin, first_upd, upd, flips, trace, _ = _run_sweep_sampler(
        prob, schedule, seed, colors_indptr, colors_nodes,
        scan_order == "random", lfsr, fixed, m0, sweeps, record_trace)
    return TrialResult(
        instance_id=instance_id, sampler=SAMPLER_SERIAL, seed=seed,
        success=first_upd >= 0, best_energy=best, final_energy=fin,
        sweeps_executed=float(sweeps), updates=upd, flips=flips,
        model_time_ns=0.0,
        time_to_first_success=first_upd / n if first_upd >= 0 else None,
        trace=trace)


def chromatic_sweep_count(tau_ns: float, f_clock_mhz: float) -> int:
    """Whole sweeps a synchronous fabric at f_clock completes within tau."""
    return int(np.floor(tau_ns * f_clock_mhz / 1000.0 + 1e-9))


def _partition_of(inst, prob, partition):
    if partition is not None:
        part = np.asarray(partition)
    else:
        g = getattr(inst, "graph", None)
        if g is None:
            raise ValueError("no partition given and the instance carries no graph")
        part = np.asarray(g.partition)
    if part.shape != (prob.num_spins,):
        raise ValueError("partition must label every spin")
    for (i, j) in prob.couplings:
        if part[i] == part[j]:
            raise ValueError(f"edge ({i}, {j}) joins two spins of color {part[i]}")
    return part


def run_chromatic(inst, schedule: AnnealSchedule, seed: int, *,
                  f_clock_mhz: float = 9.375, tau_ns: float | None = None,
                  partition=None, lfsr: bool = False,
                  fixed: FixedActivation | None = None,
                  m0=None, n_sweeps: int | None = None,
                  record_trace: bool = False, instance_id: int = -1) -> TrialResult:
    """Two-phase synchronous sampling over a proper 2-coloring.

    Per clock period both color blocks update once, each block
    simultaneously (legal because same-color spins are never coupled). With
    tau_ns given, the sweep count is the whole periods fitting in tau;
    annealing holds the final beta for any sweeps past the schedule.
    """
    if f_clock_mhz <= 0:
        raise ValueError("clock frequency must be positive")
    prob = _problem_of(inst)
    n = prob.num_spins
    part = _partition_of(inst, prob, partition)
    nodes0 = np.flatnonzero(part == part.min()).astype(np.int32)
    nodes1 = np.flatnonzero(part != part.min()).astype(np.int32)
    colors_indptr = np.array([0, nodes0.size, n], dtype=np.int64)
    colors_nodes = np.concatenate([nodes0, nodes1])
    if n_sweeps is not None:
        sweeps = int(n_sweeps)
    elif tau_ns is not None:
        sweeps = chromatic_sweep_count(tau_ns, f_clock_mhz)
    else:
        sweeps = schedule.total_sweeps
    best, fin, first_upd, upd, flips, trace, _ = _run_sweep_sampler(
        prob, schedule, seed, colors_indptr, colors_nodes,
        False, lfsr, fixed, m0, sweeps, record_trace)
    period = 1000.0 / f_clock_mhz
    if first_upd < 0:
        t_first = None
    elif first_upd == 0:
        t_first = 0.0
    else:
        s, within = divmod(first_upd - 1, n)
        block = 1 if within < nodes0.size else 2
        t_first = s * period + block * (period / 2.0)
    return TrialResult(
        instance_id=instance_id, sampler=SAMPLER_CHROMATIC, seed=seed,
        success=first_upd >= 0, best_energy=best, final_energy=fin,
        sweeps_executed=float(sweeps), updates=upd, flips=flips,
        model_time_ns=sweeps * period, time_to_first_success=t_first,
        trace=trace)


def _clock_csr(plan: ClockPlan) -> tuple[np.ndarray, np.ndarray]:
    groups = [plan.pbits_of_clock(c) for c in range(len(plan.clocks))]
    indptr = np.zeros(len(groups) + 1, dtype=np.int64)
    np.cumsum([g.size for g in groups], out=indptr[1:])
    pbs = np.concatenate(groups) if groups else np.zeros(0, dtype=np.int32)
    return indptr, pbs.astype(np.int32)


def run_async(inst, schedule: AnnealSchedule, seed: int, plan: ClockPlan, *,
              tau_ns: float | None = None, hazards: HazardConfig | None = None,
              beta_mode: str = "time", lfsr: bool = False,
              fixed: FixedActivation | None = None, m0=None,
              record_trace: bool = False, rng: np.random.Generator | None = None,
              instance_id: int = -1) -> TrialResult:
    """Asynchronous sampling: every p-bit updates on its own clock's edges.

    The run covers model time [0, tau_ns); tau defaults to the time the
    schedule would take at the plan's mean activation rate. beta_mode "time"
    advances the schedule at stage start times scaled by that rate;
    beta_mode "sweep" advances it per n completed activations.
    """
    if beta_mode not in ("time", "sweep"):
        raise ValueError(f"unknown beta_mode {beta_mode!r}")
    prob = _problem_of(inst)
    n = prob.num_spins
    if plan.num_pbits != n:
        raise ValueError(f"plan drives {plan.num_pbits} p-bits, problem has {n}")
    hazards = hazards if hazards is not None else HazardConfig()
    min_period = min(c.period_ns for c in plan.clocks)
    if hazards.simultaneity_window_ns >= min_period:
        raise ValueError("simultaneity window must be below the fastest clock period")
    f_mean = plan.mean_frequency_mhz()
    sweep_period = 1000.0 / f_mean
    horizon = float(tau_ns if tau_ns is not None else schedule.total_sweeps * sweep_period)
    bounds = _stage_bounds(schedule)
    stage_starts = bounds.astype(np.float64) * sweep_period

    indptr, indices, weights = prob.csr
    sm, aux, lf = _streams(seed, n, lfsr)
    m = _coerce_m0(m0, n) if m0 is not None else _initial_state(sm, lf, lfsr)
    act_kind, table, qmax, half, frac_mul, sh_sm, sh_lf = _act_args(fixed)
    e_thresh, track = _track_args(prob)

    fire_times, fire_clocks = clock_firings(plan, horizon, rng)
    clock_indptr, clock_pbs = _clock_csr(plan)
    sizes = np.diff(clock_indptr)
    n_trace = 0
    if record_trace:
        counts = np.bincount(fire_clocks, minlength=len(plan.clocks))
        n_trace = int(np.dot(counts, sizes))
    trace_nodes = np.zeros(n_trace, dtype=np.int32)
    trace_vals = np.zeros(n_trace, dtype=np.int8)

    best, fin, first_upd, first_t, upd, flips, stale, coll = _kernels.async_trial(
        indptr, indices, weights, prob.h, m,
        schedule.betas, bounds, stage_starts, 1 if beta_mode == "time" else 0,
        fire_times, fire_clocks, clock_indptr, clock_pbs,
        hazards.simultaneity_window_ns, hazards.synapse_delay_ns,
        _kernels.RNG_LFSR if lfsr else _kernels.RNG_SPLITMIX, sm, lf,
        act_kind, table, qmax, half, frac_mul, sh_sm, sh_lf,
        e_thresh, track,
        trace_nodes, trace_vals, 1 if record_trace else 0)
    return TrialResult(
        instance_id=instance_id, sampler=SAMPLER_ASYNC, seed=seed,
        success=first_upd >= 0, best_energy=best, final_energy=fin,
        sweeps_executed=upd / n, updates=int(upd), flips=int(flips),
        model_time_ns=horizon,
        time_to_first_success=float(first_t) if first_upd >= 0 else None,
        stale_reads=int(stale), collisions=int(coll),
        trace=(trace_nodes, trace_vals) if record_trace else None)


def fixed_beta_histogram(inst, beta: float, n_sweeps: int, seed: int, *,
                         partition=None, chromatic: bool = False,
                         burn_in: int = 0, lfsr: bool = False,
                         fixed: FixedActivation | None = None, m0=None) -> np.ndarray:
    """State visit counts at fixed beta, one count per post-burn-in sweep.

    Index of a state is sum_i (m_i == +1) << i. Serial scan order unless
    chromatic=True, which updates by color blocks. Limited to 20 spins.
    """
    prob = _problem_of(inst)
    n = prob.num_spins
    if n > 20:
        raise ValueError("histograms are limited to 20 spins")
    if not 0 <= burn_in < n_sweeps:
        raise ValueError("burn_in must lie inside the sweep budget")
    if chromatic:
        part = _partition_of(inst, prob, partition)
        nodes0 = np.flatnonzero(part == part.min()).astype(np.int32)
        nodes1 = np.flatnonzero(part != part.min()).astype(np.int32)
        colors_indptr = np.array([0, nodes0.size, n], dtype=np.int64)
        colors_nodes = np.concatenate([nodes0, nodes1])
    else:
        colors_indptr = np.array([0, n], dtype=np.int64)
        colors_nodes = np.arange(n, dtype=np.int32)
    indptr, indices, weights = prob.csr
    sm, aux, lf = _streams(seed, n, lfsr)
    m = _coerce_m0(m0, n) if m0 is not None else _initial_state(sm, lf, lfsr)
    act_kind, table, qmax, half, frac_mul, sh_sm, sh_lf = _act_args(fixed)
    hist = np.zeros(1 << n, dtype=np.int64)
    _kernels.histogram_trial(
        indptr, indices, weights, prob.h, m,
        float(beta), int(n_sweeps), int(burn_in),
        colors_indptr, colors_nodes,
        _kernels.RNG_LFSR if lfsr else _kernels.RNG_SPLITMIX, sm, lf,
        act_kind, table, qmax, half, frac_mul, sh_sm, sh_lf,
        hist)
    return hist
