"""Discrete-event simulator and benchmark suite for p-bit Ising machines.

Compares three ways of clocking a lattice of probabilistic bits on planted
spin-glass instances: serialized Gibbs sweeps, synchronous two-color block
updates, and truly asynchronous updates driven by free-running ring
oscillators, including the stale-read and simultaneous-update hazards real
asynchronous hardware exhibits.
"""

from .anneal import AnnealSchedule, beta_at, linear_schedule
from .bench import (BenchReport, Censored, InstanceStats, aggregate_size,
                    bootstrap_ci, flips_per_second, n_repetitions, tts,
                    update_rate_hz)
from .clocks import (ClockPlan, ClockSpec, EventQueue, assign_clocks,
                     clock_firings, default_rosc_bank, mean_matched,
                     schedule_events, two_phase_bank, with_random_phases)
from .graph import COLOR_A, COLOR_B, ChimeraGraph, build_chimera, expected_edge_count, two_coloring
from .model import (FixedActivation, IsingProblem, Lfsr, Lfsr32, energy,
                    exact_boltzmann, exhaustive_ground_energy, fixed_activation,
                    flip_cost, lfsr_uniforms, local_field, pbit_update,
                    trial_seed)
from .planted import (AttemptBudgetExceeded, Clause, PlantedInstance,
                      generate_instance, random_loop, verify_plant)
from .samplers import (HazardConfig, TrialResult, fixed_beta_histogram,
                       run_async, run_chromatic, run_serial_gibbs,
                       success_threshold)

__version__ = "0.1.0"

__all__ = [
    "AnnealSchedule", "beta_at", "linear_schedule",
    "BenchReport", "Censored", "InstanceStats", "aggregate_size",
    "bootstrap_ci", "flips_per_second", "n_repetitions", "tts",
    "update_rate_hz",
    "ClockPlan", "ClockSpec", "EventQueue", "assign_clocks", "clock_firings",
    "default_rosc_bank", "mean_matched", "schedule_events", "two_phase_bank",
    "with_random_phases",
    "COLOR_A", "COLOR_B", "ChimeraGraph", "build_chimera",
    "expected_edge_count", "two_coloring",
    "FixedActivation", "IsingProblem", "Lfsr", "Lfsr32", "energy",
    "exact_boltzmann", "exhaustive_ground_energy", "fixed_activation",
    "flip_cost", "lfsr_uniforms", "local_field", "pbit_update", "trial_seed",
    "AttemptBudgetExceeded", "Clause", "PlantedInstance", "generate_instance",
    "random_loop", "verify_plant",
    "HazardConfig", "TrialResult", "fixed_beta_histogram", "run_async",
    "run_chromatic", "run_serial_gibbs", "success_threshold",
    "__version__",
]
