"""End-to-end acceptance checks.

Each test pins one externally meaningful contract of the suite: exact-Gibbs
statistics, planted ground-state optimality, TTS arithmetic, hardware sweep
budgets, the synchronous-vs-asynchronous benchmark ordering at desk scale,
event-driven degeneration to serial Gibbs, bootstrap reproducibility, and the
fixed-point activation error bound.
"""

import json
import math

import numpy as np
import pytest

from conftest import random_tile_problem, tv_distance
from pbitsim import io
from pbitsim.anneal import linear_schedule
from pbitsim.bench import (InstanceStats, aggregate_size, bootstrap_ci,
                           flips_per_second, n_repetitions, tts,
                           update_rate_hz)
from pbitsim.cli import main
from pbitsim.clocks import (ClockPlan, ClockSpec, assign_clocks,
                            default_rosc_bank, mean_matched,
                            with_random_phases)
from pbitsim.graph import build_chimera
from pbitsim.model import (FixedActivation, exact_boltzmann,
                           exhaustive_ground_energy, trial_seed)
from pbitsim.planted import generate_instance
from pbitsim.samplers import (HazardConfig, chromatic_sweep_count, run_async,
                              run_chromatic, run_serial_gibbs)

SCHED = linear_schedule(0.5, 7.0, 0.5, 937)
TAU_NS = 1.4e6
HAZARDS = HazardConfig(synapse_delay_ns=3.33, simultaneity_window_ns=0.0)


def test_samplers_reproduce_boltzmann_distribution_on_tiles():
    # serial and block-parallel Gibbs both converge to the exact Boltzmann
    # distribution over all 256 states of random single-tile instances
    from pbitsim.samplers import fixed_beta_histogram
    n_sweeps = 1_000_000
    for seed in (101, 102, 103, 104, 105):
        g, prob = random_tile_problem(seed)
        p_exact = exact_boltzmann(prob, 1.0)
        h_serial = fixed_beta_histogram(prob, 1.0, n_sweeps, seed=seed)
        h_chrom = fixed_beta_histogram(prob, 1.0, n_sweeps, seed=seed + 7,
                                       chromatic=True, partition=g.partition)
        assert tv_distance(h_serial / n_sweeps, p_exact) < 0.02
        assert tv_distance(h_chrom / n_sweeps, p_exact) < 0.02


def test_planted_energy_is_the_true_minimum():
    # brute force over all 2^16 states of 50 seeded 16-spin instances
    g = build_chimera(2, 1, 4)
    for seed in range(1, 51):
        inst = generate_instance(g, 0.4, 4, 8, np.random.default_rng(seed),
                                 seed=seed)
        e_min, _ = exhaustive_ground_energy(inst)
        assert abs(e_min - inst.e_ground) <= 1e-12


def test_tts_formula_constants():
    assert abs(n_repetitions(0.5, 0.99) - 6.6439) <= 1e-3
    for p in (0.99, 0.995, 1.0):
        assert n_repetitions(p, 0.99) == 1.0
    # 1.4 ms at half success extrapolates to 9.301 ms
    assert abs(tts(1.4e6, 0.5, 0.99) - 9.301e6) <= 1e3


def test_sweep_budgets_match_across_samplers():
    # the annealing schedule, the synchronous clock, and the free-running
    # oscillator bank all execute the same sweep budget to within a percent
    assert SCHED.total_sweeps == 14 * 937 == 13118
    assert chromatic_sweep_count(TAU_NS, 9.375) == 13125

    g = build_chimera(10, 10, 4)
    inst = generate_instance(g, 0.4, 4, 8, np.random.default_rng(77), seed=77)
    chrom = run_chromatic(inst, SCHED, 5, f_clock_mhz=9.375, tau_ns=TAU_NS)
    assert chrom.sweeps_executed == 13125.0
    assert abs(chrom.sweeps_executed - 13118) / 13118 < 0.01

    bank = mean_matched(default_rosc_bank(10, 5.0, 17.0), 9.375)
    plan = assign_clocks(g, bank, np.random.default_rng(12))
    plan = ClockPlan(tuple(with_random_phases(list(plan.clocks),
                                              np.random.default_rng(11))),
                     plan.assignment)
    assert plan.mean_frequency_mhz() == pytest.approx(9.375)  # 80 p-bits each
    asy = run_async(inst, SCHED, 5, plan, tau_ns=TAU_NS, hazards=HAZARDS,
                    beta_mode="time")
    assert abs(asy.sweeps_executed - 13125) / 13125 < 0.01
    assert abs(asy.sweeps_executed - 13118) / 13118 < 0.01


def _benchmark_cell(rows, cols, n_instances, n_trials, base_seed):
    """Chromatic and async success tallies over one lattice size."""
    g = build_chimera(rows, cols, 4)
    stats = {"chromatic": [], "async": []}
    for k in range(n_instances):
        inst = generate_instance(g, 0.4, 4, 8,
                                 np.random.default_rng(base_seed + k),
                                 seed=base_seed + k)
        bank = mean_matched(default_rosc_bank(10, 5.0, 17.0), 9.375)
        plan0 = assign_clocks(g, bank,
                              np.random.default_rng(trial_seed(base_seed, k, -1)))
        n_chrom = n_async = 0
        for t in range(n_trials):
            ts = trial_seed(base_seed, k, t)
            c = run_chromatic(inst, SCHED, ts, tau_ns=TAU_NS, instance_id=k)
            phase_rng = np.random.default_rng(ts)
            plan_t = ClockPlan(tuple(with_random_phases(list(plan0.clocks),
                                                        phase_rng)),
                               plan0.assignment)
            a = run_async(inst, SCHED, ts, plan_t, tau_ns=TAU_NS,
                          hazards=HAZARDS, beta_mode="time", instance_id=k)
            assert c.best_energy >= inst.e_ground - 1e-9
            assert a.best_energy >= inst.e_ground - 1e-9
            n_chrom += c.success
            n_async += a.success
        stats["chromatic"].append(InstanceStats(k, n_trials, n_chrom, tau=TAU_NS))
        stats["async"].append(InstanceStats(k, n_trials, n_async, tau=TAU_NS))
    return {s: aggregate_size(st, TAU_NS, 0.99, sampler=s,
                              size=f"{rows}x{cols}", n_resamples=2000,
                              rng=np.random.default_rng(base_seed))
            for s, st in stats.items()}


@pytest.mark.parametrize("rows,cols", [(2, 2), (4, 4), (6, 6)])
def test_synchronous_design_beats_asynchronous_but_not_by_much(rows, cols):
    # 20 instances x 100 trials per sampler: the carefully clocked block
    # sampler is at least as fast in model time as the free-running design,
    # and the free-running design stays within a factor of 5
    reps = _benchmark_cell(rows, cols, n_instances=20, n_trials=100,
                           base_seed=2026)
    chrom, asy = reps["chromatic"], reps["async"]
    assert not chrom.censored and not asy.censored
    assert chrom.tts <= asy.tts
    assert asy.tts < 5.0 * chrom.tts


def test_parallelism_shows_up_as_flip_throughput_accounting():
    # a serialized machine attempts one flip per model step no matter the
    # size; a clocked fabric attempts n flips per mean period, so its
    # throughput carries the factor-of-n parallelism
    for n in (8, 32, 128, 288, 800):
        assert flips_per_second("serial", n) == 1.0
        assert flips_per_second("chromatic", n, 9.375) == n * 9.375e6
        assert flips_per_second("async", n, 9.375) == n * 9.375e6
        ratio = flips_per_second("chromatic", n, 9.375) / (9.375e6)
        assert ratio == n
    # and a real synchronous trial attempts updates at exactly n * f
    g = build_chimera(2, 2, 4)
    inst = generate_instance(g, 0.4, 4, 8, np.random.default_rng(3), seed=3)
    tr = run_chromatic(inst, SCHED, 1, tau_ns=TAU_NS)
    assert update_rate_hz(tr.updates, tr.model_time_ns) == pytest.approx(
        g.num_nodes * 9.375e6, rel=1e-12)


def test_event_driven_sampler_degenerates_to_serial_gibbs():
    # one oscillator per p-bit, firing in scan order with gaps wider than the
    # synapse delay, sharing the serial sampler's RNG streams: trajectories
    # must match byte for byte over the whole schedule
    g = build_chimera(2, 1, 4)
    inst = generate_instance(g, 0.4, 4, 8, np.random.default_rng(9), seed=9)
    n = g.num_nodes
    clocks = tuple(ClockSpec(id=i, frequency_mhz=10.0, phase_ns=4.0 * i)
                   for i in range(n))
    plan = ClockPlan(clocks=clocks, assignment=np.arange(n, dtype=np.int32))
    asy = run_async(inst, SCHED, 31, plan, tau_ns=SCHED.total_sweeps * 100.0,
                    hazards=HAZARDS, beta_mode="sweep", record_trace=True)
    ser = run_serial_gibbs(inst, SCHED, 31, record_trace=True)
    assert asy.updates == ser.updates == SCHED.total_sweeps * n
    assert np.array_equal(asy.trace[0], ser.trace[0])
    assert np.array_equal(asy.trace[1], ser.trace[1])
    assert asy.flips == ser.flips
    assert asy.best_energy == ser.best_energy
    assert asy.final_energy == ser.final_energy
    assert asy.stale_reads == 0 and asy.collisions == 0


def test_seeded_reports_are_byte_identical(tmp_path):
    inst_dir = tmp_path / "inst"
    assert main(["gen", "--tiles", "1x1", "--count", "3", "--seed", "5",
                 "--alpha", "0.5", "--out", str(inst_dir)]) == 0
    res = tmp_path / "res.jsonl"
    assert main(["run", "--instances", str(inst_dir), "--sampler", "serial",
                 "--trials", "4", "--seed", "3", "--sweeps-per-stage", "40",
                 "--out", str(res)]) == 0
    csv_a, csv_b = tmp_path / "a.csv", tmp_path / "b.csv"
    for csv_path in (csv_a, csv_b):
        assert main(["report", "--results", str(res), "--csv", str(csv_path),
                     "--seed", "17"]) == 0
    assert csv_a.read_bytes() == csv_b.read_bytes()
    assert b"ci_lo" in csv_a.read_bytes().splitlines()[0]


def test_ci_width_halves_when_instances_quadruple():
    rng = np.random.default_rng(7)
    base = np.clip(rng.beta(4.0, 4.0, 25), 0.02, 0.98)
    big = np.tile(base, 4)  # same distribution, 4x the instances
    lo1, hi1, _ = bootstrap_ci(base, tau=1.0, rng=np.random.default_rng(0))
    lo4, hi4, _ = bootstrap_ci(big, tau=1.0, rng=np.random.default_rng(0))
    ratio = (hi1 - lo1) / (hi4 - lo4)
    assert 1.6 <= ratio <= 2.4


def test_fixed_point_activation_error_bound():
    # every representable non-saturated input stays within 2^-6 of the
    # floating-point activation
    fa = FixedActivation()
    step = 1.0 / (1 << fa.frac_bits)
    for q in range(-fa.qmax, fa.qmax + 1):
        x = q * step
        p_fixed = fa.prob_plus(x)
        p_float = 0.5 * (1.0 + math.tanh(x))
        assert abs(p_fixed - p_float) <= 2.0 ** -6
    # off-grid inputs round to the nearest code and obey the same bound
    for x in np.linspace(-3.99, 3.99, 4001):
        if abs(round(x * (1 << fa.frac_bits))) > fa.qmax:
            continue
        assert abs(fa.prob_plus(x) - 0.5 * (1.0 + math.tanh(x))) <= 2.0 ** -6
