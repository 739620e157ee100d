"""On-disk formats: planted instances (JSON), trial results (JSONL),
aggregated reports (CSV).

Serialization is canonical (sorted keys, fixed separators, stable float
formatting) so equal inputs produce byte-equal files; instance files round
trip exactly through load/save.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

from .bench import BenchReport
from .graph import build_chimera
from .planted import Clause, PlantedInstance
from .samplers import TrialResult

INSTANCE_FORMAT = "pbit-planted-instance"
INSTANCE_VERSION = 1


def instance_to_dict(inst: PlantedInstance) -> dict:
    g = inst.graph
    couplings = [[i, j, int(w)] for (i, j), w in sorted(inst.raw_couplings.items())]
    return {
        "format": INSTANCE_FORMAT,
        "version": INSTANCE_VERSION,
        "graph": g.to_spec(),
        "alpha": inst.alpha,
        "l_min": inst.l_min,
        "l_max": inst.l_max,
        "seed": inst.seed,
        "plant": [int(s) for s in inst.plant],
        "clauses": [{"nodes": list(c.nodes), "flip": c.flip_index} for c in inst.clauses],
        "z": inst.z,
        "couplings": couplings,
        "e_ground": inst.e_ground,
    }


def instance_from_dict(d: dict) -> PlantedInstance:
    if d.get("format") != INSTANCE_FORMAT:
        raise ValueError(f"not a planted instance file: format={d.get('format')!r}")
    if d.get("version") != INSTANCE_VERSION:
        raise ValueError(f"unsupported instance version {d.get('version')!r}, "
                         f"this build reads version {INSTANCE_VERSION}")
    g = build_chimera(**d["graph"])
    plant = np.array(d["plant"], dtype=np.int8)
    if plant.shape != (g.num_nodes,) or not np.all(np.abs(plant) == 1):
        raise ValueError("plant must assign +-1 to every node")
    edge_set = set(g.edges)
    raw: dict[tuple[int, int], int] = {}
    for i, j, w in d["couplings"]:
        if (i, j) in raw:
            raise ValueError(f"duplicate coupling ({i}, {j})")
        if (i, j) not in edge_set:
            raise ValueError(f"coupling ({i}, {j}) is not a lattice edge")
        raw[(i, j)] = int(w)
    clauses = tuple(Clause(nodes=tuple(c["nodes"]), flip_index=c["flip"])
                    for c in d["clauses"])
    for c in clauses:
        if any(not 0 <= v < g.num_nodes for v in c.nodes):
            raise ValueError("clause node outside the graph")
    plant.setflags(write=False)
    return PlantedInstance(graph=g, plant=plant, clauses=clauses,
                           raw_couplings=raw, z=int(d["z"]),
                           e_ground=float(d["e_ground"]), alpha=float(d["alpha"]),
                           l_min=int(d["l_min"]), l_max=int(d["l_max"]),
                           seed=d["seed"])


def dumps_instance(inst: PlantedInstance) -> str:
    return json.dumps(instance_to_dict(inst), sort_keys=True,
                      separators=(",", ":")) + "\n"


def save_instance(inst: PlantedInstance, path) -> None:
    with open(path, "w") as f:
        f.write(dumps_instance(inst))


def load_instance(path) -> PlantedInstance:
    with open(path) as f:
        return instance_from_dict(json.load(f))


def trial_record(tr: TrialResult, *, rows: int, cols: int, shore: int) -> dict:
    """One results-file line; the trace never leaves memory.

    tau is what the trial annealed for: model nanoseconds for the clocked
    samplers, sweeps for the serial baseline (which has no hardware clock).
    """
    serial = tr.model_time_ns == 0.0
    return {
        "instance_id": tr.instance_id,
        "sampler": tr.sampler,
        "seed": tr.seed,
        "success": tr.success,
        "best_energy": tr.best_energy,
        "final_energy": tr.final_energy,
        "sweeps": tr.sweeps_executed,
        "updates": tr.updates,
        "flips": tr.flips,
        "model_time_ns": tr.model_time_ns,
        "t_first": tr.time_to_first_success,
        "stale_reads": tr.stale_reads,
        "collisions": tr.collisions,
        "rows": rows,
        "cols": cols,
        "shore": shore,
        "spins": rows * cols * 2 * shore,
        "tau": tr.sweeps_executed if serial else tr.model_time_ns,
        "tau_unit": "sweeps" if serial else "ns",
    }


def write_results(records: list[dict], path) -> None:
    with open(path, "w") as f:
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")


def read_results(path) -> list[dict]:
    out = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run; JSON round-trippable."""

    sampler: str
    beta_start: float = 0.5
    beta_end: float = 7.0
    beta_step: float = 0.5
    sweeps_per_stage: int = 937
    tau_ns: float | None = None
    trials: int = 50
    seed: int = 0
    n_clocks: int = 10
    f_lo_mhz: float = 5.0
    f_hi_mhz: float = 17.0
    f_clock_mhz: float = 9.375
    mean_match: bool = False
    mean_target_mhz: float = 9.375
    jitter_sigma: float = 0.0
    beta_mode: str = "time"
    synapse_delay_ns: float = 3.33
    simultaneity_window_ns: float = 0.0
    scan_order: str = "ascending"
    lfsr: bool = False
    fixed_point: bool = False
    fixed_total_bits: int = 10
    fixed_frac_bits: int = 7
    threads: int = 1

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return cls(**d)


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if np.isinf(x):
            return "inf"
        return f"{x:.10g}"
    return str(x)


REPORT_COLUMNS = ("size_tiles", "spins", "sampler", "tau", "tau_unit",
                  "mean_ps", "tts", "ci_lo", "ci_hi", "censored",
                  "censored_instances")


def report_csv_rows(rows: list[tuple]) -> str:
    """CSV text for ((size_tiles, spins), report) rows, already ordered."""
    lines = [",".join(REPORT_COLUMNS)]
    for (size_tiles, spins), rep in rows:
        rep: BenchReport
        lines.append(",".join([
            size_tiles, str(spins), rep.sampler, _fmt(rep.tau), rep.tau_unit,
            _fmt(rep.mean_ps), _fmt(rep.tts), _fmt(rep.ci_lo), _fmt(rep.ci_hi),
            _fmt(rep.censored), str(rep.censored_instances),
        ]))
    return "\n".join(lines) + "\n"
