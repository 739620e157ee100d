from __future__ import annotations

import numpy as np
import pytest

from conftest import random_tile_problem, tv_distance
from pbitsim.anneal import AnnealSchedule, linear_schedule
from pbitsim.clocks import ClockPlan, ClockSpec, assign_clocks, clock_firings, default_rosc_bank
from pbitsim.graph import build_chimera
from pbitsim.model import (IsingProblem, energy, exact_boltzmann, local_field,
                           pbit_update, stream_init, stream_next)
from pbitsim.planted import generate_instance
from pbitsim.samplers import (HazardConfig, chromatic_sweep_count,
                              fixed_beta_histogram, run_async, run_chromatic,
                              run_serial_gibbs, success_threshold)

SCHED = linear_schedule(0.5, 7.0, 0.5, 937)


def _fm_pair() -> IsingProblem:
    return IsingProblem(2, {(0, 1): 1.0}, np.zeros(2), e_ground=-1.0)


def _planted(seed: int, rows: int = 2, cols: int = 1):
    g = build_chimera(rows, cols, 4)
    return generate_instance(g, 0.4, 4, 8, np.random.default_rng(seed), seed=seed)


def _per_pbit_plan(n: int, f_mhz: float, gap_ns: float) -> ClockPlan:
    """One clock per p-bit, firing in id order gap_ns apart within a period."""
    assert n * gap_ns < 1000.0 / f_mhz
    clocks = tuple(ClockSpec(id=i, frequency_mhz=f_mhz, phase_ns=i * gap_ns)
                   for i in range(n))
    return ClockPlan(clocks=clocks, assignment=np.arange(n, dtype=np.int32))


def test_serial_reaches_fm_pair_ground_state_fast():
    prob = _fm_pair()
    sched = AnnealSchedule(stages=((10.0, 3),))
    for seed in range(500):
        tr = run_serial_gibbs(prob, sched, seed, m0=[1, -1])
        assert tr.success
        assert tr.best_energy == -1.0
        assert tr.time_to_first_success <= 3.0  # sweeps


def test_serial_result_bookkeeping():
    inst = _planted(1)
    tr = run_serial_gibbs(inst, SCHED, 42, instance_id=7)
    assert tr.sampler == "serial"
    assert tr.instance_id == 7
    assert tr.sweeps_executed == 13118.0
    assert tr.updates == 13118 * 16
    assert tr.model_time_ns == 0.0  # no hardware clock to model
    assert 0 <= tr.flips <= tr.updates
    assert tr.best_energy <= tr.final_energy
    assert tr.best_energy >= inst.e_ground - 1e-9
    assert tr.success == (tr.best_energy <= success_threshold(inst.e_ground))
    if tr.success:
        assert 0 <= tr.time_to_first_success <= tr.sweeps_executed


def test_serial_rejects_unknown_scan_order():
    with pytest.raises(ValueError):
        run_serial_gibbs(_fm_pair(), SCHED, 0, scan_order="zigzag")


def test_serial_zero_sweeps_returns_initial_energy():
    prob = _fm_pair()
    tr = run_serial_gibbs(prob, SCHED, 3, n_sweeps=0, m0=[1, -1])
    assert tr.updates == 0 and tr.flips == 0
    assert tr.best_energy == tr.final_energy == 1.0


def test_samplers_are_deterministic():
    inst = _planted(2)
    plan = assign_clocks(inst.graph, default_rosc_bank(4, 5.0, 17.0),
                         np.random.default_rng(0))
    a = run_serial_gibbs(inst, SCHED, 9, n_sweeps=300)
    b = run_serial_gibbs(inst, SCHED, 9, n_sweeps=300)
    assert a == b
    a = run_chromatic(inst, SCHED, 9, n_sweeps=300)
    b = run_chromatic(inst, SCHED, 9, n_sweeps=300)
    assert a == b
    a = run_async(inst, SCHED, 9, plan, tau_ns=40_000.0)
    b = run_async(inst, SCHED, 9, plan, tau_ns=40_000.0)
    assert a == b


def test_scan_orders_visit_every_node_once_per_sweep():
    inst = _planted(3)
    n = inst.num_spins
    for order in ("ascending", "random"):
        tr = run_serial_gibbs(inst, SCHED, 5, scan_order=order, n_sweeps=4,
                              record_trace=True)
        nodes, _ = tr.trace
        assert nodes.size == 4 * n
        for s in range(4):
            sweep = nodes[s * n:(s + 1) * n]
            assert sorted(sweep) == list(range(n))
    asc = run_serial_gibbs(inst, SCHED, 5, scan_order="ascending", n_sweeps=4,
                           record_trace=True)
    assert np.array_equal(asc.trace[0][:n], np.arange(n))


def test_chromatic_equals_serial_on_single_tile():
    # on one tile the color blocks are exactly the ascending scan order,
    # so the two samplers walk identical trajectories from the same seed
    g, prob = random_tile_problem(51)
    a = run_serial_gibbs(prob, SCHED, 13, n_sweeps=500, record_trace=True)
    b = run_chromatic(prob, SCHED, 13, partition=g.partition, n_sweeps=500,
                      record_trace=True)
    assert np.array_equal(a.trace[0], b.trace[0])
    assert np.array_equal(a.trace[1], b.trace[1])
    assert a.best_energy == b.best_energy
    assert a.flips == b.flips


def test_chromatic_blocks_have_no_internal_edges():
    inst = _planted(4, 2, 2)
    tr = run_chromatic(inst, SCHED, 21, n_sweeps=3, record_trace=True)
    nodes, _ = tr.trace
    n = inst.num_spins
    part = np.asarray(inst.graph.partition)
    first_block = nodes[:int(np.sum(part == part.min()))]
    assert len(set(part[i] for i in first_block)) == 1


def test_chromatic_sweep_count_and_model_time():
    assert chromatic_sweep_count(1.4e6, 9.375) == 13125
    inst = _planted(5)
    tr = run_chromatic(inst, SCHED, 3, tau_ns=1.4e6)
    assert tr.sweeps_executed == 13125.0
    assert tr.model_time_ns == pytest.approx(1.4e6, rel=1e-12)
    assert tr.updates == 13125 * 16
    if tr.success:
        assert 0.0 <= tr.time_to_first_success <= tr.model_time_ns


def test_chromatic_rejects_monochromatic_coupling():
    prob = IsingProblem(4, {(0, 1): 1.0}, np.zeros(4))
    partition = np.array([0, 0, 1, 1], dtype=np.uint8)
    with pytest.raises(ValueError):
        run_chromatic(prob, SCHED, 0, partition=partition, n_sweeps=1)


def test_fixed_beta_histogram_matches_boltzmann():
    g, prob = random_tile_problem(61)
    p_exact = exact_boltzmann(prob, 1.0)
    hist_s = fixed_beta_histogram(prob, 1.0, 300_000, seed=1)
    hist_c = fixed_beta_histogram(prob, 1.0, 300_000, seed=2, chromatic=True,
                                  partition=g.partition)
    assert hist_s.sum() == 300_000
    assert tv_distance(hist_s / hist_s.sum(), p_exact) < 0.02
    assert tv_distance(hist_c / hist_c.sum(), p_exact) < 0.02


def test_flat_landscape_is_uniform_at_any_beta():
    prob = IsingProblem(8, {}, np.zeros(8))
    hist = fixed_beta_histogram(prob, 3.0, 500_000, seed=9)
    assert tv_distance(hist / hist.sum(), np.full(256, 1.0 / 256.0)) < 0.02


def test_fixed_beta_histogram_validation():
    _, prob = random_tile_problem(62)
    with pytest.raises(ValueError):
        fixed_beta_histogram(prob, 1.0, 100, seed=0, burn_in=100)
    with pytest.raises(ValueError):
        fixed_beta_histogram(prob, 1.0, 100, seed=0, chromatic=True)  # no partition
    big = IsingProblem(21, {}, np.zeros(21))
    with pytest.raises(ValueError):
        fixed_beta_histogram(big, 1.0, 10, seed=0)


def test_collision_makes_neighbors_swap_forever():
    # two coupled p-bits firing at identical timestamps both read the
    # pre-update state, so at high beta they exchange values every period
    prob = _fm_pair()
    clocks = (ClockSpec(id=0, frequency_mhz=10.0), ClockSpec(id=1, frequency_mhz=10.0))
    plan = ClockPlan(clocks=clocks, assignment=np.array([0, 1], dtype=np.int32))
    sched = AnnealSchedule(stages=((50.0, 10_000),))
    tr = run_async(prob, sched, 0, plan, tau_ns=350.0, m0=[1, -1],
                   hazards=HazardConfig(synapse_delay_ns=0.0,
                                        simultaneity_window_ns=0.0),
                   beta_mode="sweep", record_trace=True)
    assert tr.updates == 8  # firings at 0, 100, 200, 300 x 2 p-bits
    assert tr.flips == 8  # every activation flips
    assert tr.collisions == 8  # every activation shares its group with its neighbor
    assert tr.stale_reads == 0
    assert not tr.success
    assert tr.best_energy == tr.final_energy == 1.0  # never aligned
    vals = tr.trace[1].reshape(4, 2)
    assert [list(v) for v in vals] == [[-1, 1], [1, -1], [-1, 1], [1, -1]]


def test_stale_read_blocks_alignment_within_delay():
    # p-bit 1 fires 2 ns after p-bit 0; within a 3.33 ns synapse delay it
    # still sees the neighbor's pre-flip value and keeps anti-aligning
    prob = _fm_pair()
    clocks = (ClockSpec(id=0, frequency_mhz=10.0, phase_ns=0.0),
              ClockSpec(id=1, frequency_mhz=10.0, phase_ns=2.0))
    plan = ClockPlan(clocks=clocks, assignment=np.array([0, 1], dtype=np.int32))
    sched = AnnealSchedule(stages=((50.0, 10_000),))
    stale = run_async(prob, sched, 0, plan, tau_ns=250.0, m0=[1, -1],
                      hazards=HazardConfig(synapse_delay_ns=3.33,
                                           simultaneity_window_ns=0.0),
                      beta_mode="sweep")
    assert stale.stale_reads == 3  # each firing of p-bit 1 reads history
    assert stale.collisions == 0
    assert stale.flips == 6  # stale reads re-break the pair every period
    assert stale.final_energy == 1.0  # anti-aligned again at the horizon
    clean = run_async(prob, sched, 0, plan, tau_ns=250.0, m0=[1, -1],
                      hazards=HazardConfig(synapse_delay_ns=0.0,
                                           simultaneity_window_ns=0.0),
                      beta_mode="sweep")
    assert clean.stale_reads == 0
    assert clean.success  # true reads align the pair immediately
    assert clean.flips == 1  # one flip, then the pair stays settled
    assert clean.final_energy == -1.0


def test_widening_delay_never_loses_stale_reads():
    inst = _planted(6, 2, 2)
    bank = default_rosc_bank(6, 5.0, 17.0, rng=np.random.default_rng(77))
    plan = assign_clocks(inst.graph, bank, np.random.default_rng(78))
    counts = []
    for delay in (0.0, 1.0, 3.33, 10.0, 40.0):
        tr = run_async(inst, SCHED, 11, plan, tau_ns=60_000.0,
                       hazards=HazardConfig(synapse_delay_ns=delay,
                                            simultaneity_window_ns=0.0))
        counts.append(tr.stale_reads)
    assert counts[0] == 0
    assert all(a <= b for a, b in zip(counts, counts[1:]))


def test_async_degenerates_to_serial_gibbs_trace():
    # one clock per p-bit, firing order = serial scan, gaps > synapse delay:
    # the event-driven sampler must replay the serial trajectory byte for byte
    inst = _planted(7)
    n = inst.num_spins
    plan = _per_pbit_plan(n, 10.0, 4.0)
    horizon = SCHED.total_sweeps * 100.0
    a = run_async(inst, SCHED, 23, plan, tau_ns=horizon,
                  hazards=HazardConfig(synapse_delay_ns=3.33,
                                       simultaneity_window_ns=0.0),
                  beta_mode="sweep", record_trace=True)
    s = run_serial_gibbs(inst, SCHED, 23, record_trace=True)
    assert a.updates == s.updates == SCHED.total_sweeps * n
    assert a.stale_reads == 0 and a.collisions == 0
    assert np.array_equal(a.trace[0], s.trace[0])
    assert np.array_equal(a.trace[1], s.trace[1])
    assert a.flips == s.flips
    assert a.best_energy == s.best_energy
    assert a.final_energy == s.final_energy
    assert a.success == s.success


def test_async_replay_oracle_exact_gibbs_steps():
    # hazards off, no coincident firings: every update must be a single-site
    # Gibbs step; recompute each field from a replayed global state log
    inst = _planted(8)
    prob = inst.problem
    n = prob.num_spins
    rng = np.random.default_rng(5)
    clocks = tuple(ClockSpec(id=i, frequency_mhz=float(f), phase_ns=float(p))
                   for i, (f, p) in enumerate(zip(rng.uniform(8.0, 14.0, n),
                                                  rng.uniform(0.0, 50.0, n))))
    plan = ClockPlan(clocks=clocks, assignment=np.arange(n, dtype=np.int32))
    horizon = 30_000.0
    seed = 99
    tr = run_async(inst, SCHED, seed, plan, tau_ns=horizon,
                   hazards=HazardConfig(synapse_delay_ns=0.0,
                                        simultaneity_window_ns=0.0),
                   beta_mode="sweep", record_trace=True)
    assert tr.stale_reads == 0 and tr.collisions == 0

    times, idx = clock_firings(plan, horizon)
    assert np.all(np.diff(times) > 0)  # no ties anywhere in this plan
    states = [stream_init(seed, i) for i in range(n)]
    m = np.empty(n, dtype=np.int8)
    for i in range(n):
        states[i], r = stream_next(states[i])
        m[i] = pbit_update(0.0, 0.0, r)
    bounds = [0] + list(SCHED.cumulative_sweeps())
    betas = SCHED.betas
    ptr = 0
    flips = 0
    for upd, ci in enumerate(idx):
        (i,) = plan.pbits_of_clock(int(ci))
        while ptr + 1 < len(betas) and upd // n >= bounds[ptr + 1]:
            ptr += 1
        field_i = local_field(m, prob, int(i))
        states[i], r = stream_next(states[i])
        new = pbit_update(field_i, float(betas[ptr]), r)
        assert tr.trace[0][upd] == i
        assert tr.trace[1][upd] == new
        if new != m[i]:
            flips += 1
        m[i] = new
    assert tr.updates == times.size
    assert tr.flips == flips
    assert tr.final_energy == pytest.approx(energy(m, prob), abs=1e-9)


def test_async_validations():
    inst = _planted(9)
    plan = _per_pbit_plan(4, 10.0, 4.0)  # wrong size
    with pytest.raises(ValueError):
        run_async(inst, SCHED, 0, plan, tau_ns=1000.0)
    good = _per_pbit_plan(16, 10.0, 4.0)
    with pytest.raises(ValueError):
        run_async(inst, SCHED, 0, good, tau_ns=1000.0,
                  hazards=HazardConfig(synapse_delay_ns=0.0,
                                       simultaneity_window_ns=150.0))
    with pytest.raises(ValueError):
        run_async(inst, SCHED, 0, good, tau_ns=1000.0, beta_mode="chaotic")


def test_async_time_mode_tracks_stage_starts():
    inst = _planted(10)
    plan = assign_clocks(inst.graph, default_rosc_bank(4, 9.0, 11.0),
                         np.random.default_rng(1))
    tr = run_async(inst, SCHED, 31, plan, beta_mode="time")
    # default horizon: full schedule at the plan's mean activation rate
    f_mean = plan.mean_frequency_mhz()
    assert tr.model_time_ns == pytest.approx(SCHED.total_sweeps * 1000.0 / f_mean)
    assert tr.sweeps_executed == pytest.approx(SCHED.total_sweeps, rel=0.01)
    assert tr.best_energy >= inst.e_ground - 1e-9


def test_best_energy_never_beats_ground_state():
    for seed in range(4):
        inst = _planted(40 + seed)
        plan = assign_clocks(inst.graph, default_rosc_bank(4, 5.0, 17.0),
                             np.random.default_rng(seed))
        for tr in (run_serial_gibbs(inst, SCHED, seed),
                   run_chromatic(inst, SCHED, seed, tau_ns=1.4e6),
                   run_async(inst, SCHED, seed, plan, tau_ns=1.4e6)):
            assert tr.best_energy >= inst.e_ground - 1e-9
            assert tr.best_energy <= tr.final_energy + 1e-12
            assert tr.success == (tr.best_energy <= success_threshold(inst.e_ground))


def test_lfsr_and_fixed_point_paths_run_and_repeat():
    from pbitsim.model import FixedActivation
    inst = _planted(11)
    fa = FixedActivation()
    a = run_serial_gibbs(inst, SCHED, 3, lfsr=True, fixed=fa, n_sweeps=2000)
    b = run_serial_gibbs(inst, SCHED, 3, lfsr=True, fixed=fa, n_sweeps=2000)
    assert a == b
    assert a.best_energy >= inst.e_ground - 1e-9
    c = run_chromatic(inst, SCHED, 3, lfsr=True, fixed=fa, n_sweeps=2000)
    assert c.best_energy >= inst.e_ground - 1e-9
    plan = assign_clocks(inst.graph, default_rosc_bank(4, 5.0, 17.0),
                         np.random.default_rng(2))
    d = run_async(inst, SCHED, 3, plan, tau_ns=100_000.0, lfsr=True, fixed=fa)
    assert d.best_energy >= inst.e_ground - 1e-9


def test_m0_coercion_and_validation():
    prob = _fm_pair()
    tr = run_serial_gibbs(prob, SCHED, 0, m0=[1, -1], n_sweeps=1)
    assert tr.updates == 2
    with pytest.raises(ValueError):
        run_serial_gibbs(prob, SCHED, 0, m0=[1, 0], n_sweeps=1)
    with pytest.raises(ValueError):
        run_serial_gibbs(prob, SCHED, 0, m0=[1, -1, 1], n_sweeps=1)
