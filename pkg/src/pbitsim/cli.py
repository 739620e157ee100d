"""Command line front end: generate instances, run samplers, report TTS.

Runs are reproducible end to end: instance k of a generation is seeded
base + k, and trial t on instance k of a run is seeded by hashing
(base, k, t), so reruns with equal arguments produce byte-equal files.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import bench, io
from .anneal import linear_schedule
from .clocks import ClockPlan, assign_clocks, default_rosc_bank, mean_matched, with_random_phases
from .graph import build_chimera
from .model import FixedActivation, trial_seed
from .planted import generate_instance, verify_plant
from .samplers import HazardConfig, run_async, run_chromatic, run_serial_gibbs

DEFAULT_DATA_DIR = os.environ.get("PBIT_DATA_DIR", "pbit-data")


def _parse_tiles(text: str) -> tuple[int, int]:
    try:
        r, c = text.lower().split("x")
        return int(r), int(c)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected ROWSxCOLS, got {text!r}")


def _parse_loops(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MIN:MAX, got {text!r}")


def _parse_betas(text: str) -> tuple[float, float, float]:
    try:
        a, b, c = text.split(":")
        return float(a), float(b), float(c)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:END:STEP, got {text!r}")


def _instance_paths(spec: list[str]) -> list[Path]:
    paths: list[Path] = []
    for s in spec:
        p = Path(s)
        if p.is_dir():
            paths.extend(sorted(p.glob("instance_*.json")))
        else:
            paths.append(p)
    if not paths:
        raise SystemExit(f"no instance files under {spec}")
    return paths


def cmd_gen(args) -> int:
    rows, cols = args.tiles
    l_min, l_max = args.loops
    g = build_chimera(rows, cols, args.shore)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(args.count):
        seed_k = args.seed + k
        rng = np.random.default_rng(seed_k)
        inst = generate_instance(g, args.alpha, l_min, l_max, rng, seed=seed_k)
        io.save_instance(inst, out / f"instance_{k:04d}.json")
    print(f"wrote {args.count} instances ({rows}x{cols} tiles, {g.num_nodes} spins, "
          f"alpha={args.alpha}, loops {l_min}:{l_max}) to {out}")
    return 0


def cmd_run(args) -> int:
    paths = _instance_paths(args.instances)
    beta_start, beta_end, beta_step = args.beta
    schedule = linear_schedule(beta_start, beta_end, beta_step, args.sweeps_per_stage)
    tau_ns = args.tau_ns
    if args.tau_ms is not None:
        tau_ns = args.tau_ms * 1e6
    fixed = FixedActivation(args.fixed_total_bits, args.fixed_frac_bits) if args.fixed_point else None
    hazards = HazardConfig(synapse_delay_ns=args.synapse_delay,
                           simultaneity_window_ns=args.sim_window)

    jobs = []
    graphs = {}
    for k, path in enumerate(paths):
        inst = io.load_instance(path)
        graphs[k] = inst.graph
        plan_base = None
        if args.sampler == "async":
            bank = default_rosc_bank(args.clocks, args.f_lo, args.f_hi,
                                     jitter_sigma=args.jitter)
            if args.mean_match:
                bank = mean_matched(bank, args.mean_target)
            assign_rng = np.random.default_rng(trial_seed(args.seed, k, -1))
            plan_base = assign_clocks(inst.graph, bank, assign_rng)
        for t in range(args.trials):
            jobs.append((k, t, inst, plan_base))

    def execute(job):
        k, t, inst, plan_base = job
        tseed = trial_seed(args.seed, k, t)
        try:
            if args.sampler == "serial":
                return k, t, run_serial_gibbs(
                    inst, schedule, tseed, scan_order=args.scan_order,
                    lfsr=args.lfsr, fixed=fixed, instance_id=k)
            if args.sampler == "chromatic":
                return k, t, run_chromatic(
                    inst, schedule, tseed, f_clock_mhz=args.f_clock, tau_ns=tau_ns,
                    lfsr=args.lfsr, fixed=fixed, instance_id=k)
            phase_rng = np.random.default_rng(tseed)
            clocks_t = with_random_phases(list(plan_base.clocks), phase_rng)
            plan_t = ClockPlan(tuple(clocks_t), plan_base.assignment)
            return k, t, run_async(
                inst, schedule, tseed, plan_t, tau_ns=tau_ns, hazards=hazards,
                beta_mode=args.beta_mode, lfsr=args.lfsr, fixed=fixed,
                rng=phase_rng, instance_id=k)
        except Exception as e:  # keep the sweep going; surface at exit
            return k, t, e

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            outcomes = list(pool.map(execute, jobs))
    else:
        outcomes = [execute(j) for j in jobs]

    records = []
    failures = 0
    for (k, t, tr) in outcomes:
        g = graphs[k]
        if isinstance(tr, Exception):
            failures += 1
            records.append({"instance_id": k, "trial": t, "sampler": args.sampler,
                            "error": f"{type(tr).__name__}: {tr}"})
            continue
        records.append(io.trial_record(tr, rows=g.rows, cols=g.cols, shore=g.shore))
    io.write_results(records, args.out)
    n_succ = sum(1 for r in records if r.get("success"))
    print(f"{args.sampler}: {len(records)} trials over {len(paths)} instances, "
          f"{n_succ} reached ground energy; results in {args.out}")
    if failures:
        print(f"{failures} trials failed; see error records in {args.out}")
    return 1 if failures else 0


def cmd_report(args) -> int:
    records = [r for r in io.read_results(args.results) if "error" not in r]
    if not records:
        raise SystemExit("results file is empty")
    groups: dict[tuple, list[dict]] = {}
    for r in records:
        key = (r["spins"], r["sampler"], r["rows"], r["cols"], r["shore"])
        groups.setdefault(key, []).append(r)

    rng = np.random.default_rng(args.seed)
    rows_out = []
    warnings = []
    for key in sorted(groups):
        spins, sampler, rows, cols, shore = key
        recs = groups[key]
        tally: dict[int, list[int]] = {}
        for r in recs:
            t = tally.setdefault(r["instance_id"], [0, 0])
            t[0] += 1
            t[1] += 1 if r["success"] else 0
        tau = recs[0]["tau"]
        unit = recs[0]["tau_unit"]
        stats = [bench.InstanceStats(i, n, s, tau=tau)
                 for i, (n, s) in sorted(tally.items())]
        rep = bench.aggregate_size(stats, tau, args.p_r, sampler=sampler,
                                   size=f"{rows}x{cols}", tau_unit=unit,
                                   n_resamples=args.resamples,
                                   confidence=args.confidence, rng=rng)
        rows_out.append(((f"{rows}x{cols}", spins), rep))
        if rep.censored_fraction > 0.01:
            warnings.append(f"warning: {rows}x{cols} {sampler}: "
                            f"{rep.censored_fraction:.1%} of bootstrap resamples censored")

    csv_text = io.report_csv_rows(rows_out)
    if args.csv:
        Path(args.csv).write_text(csv_text)
    header = f"{'size':>6} {'spins':>6} {'sampler':>10} {'mean_ps':>8} {'tts':>14} {'unit':>6} {'ci95':>30}"
    print(header)
    for (size_tiles, spins), rep in rows_out:
        ci = f"[{rep.ci_lo:.6g}, {rep.ci_hi:.6g}]"
        tts_s = "censored" if rep.censored else f"{rep.tts:.6g}"
        print(f"{size_tiles:>6} {spins:>6} {rep.sampler:>10} {rep.mean_ps:>8.4f} "
              f"{tts_s:>14} {rep.tau_unit:>6} {ci:>30}")
    for w in warnings:
        print(w)
    return 0


def cmd_verify(args) -> int:
    paths = _instance_paths(args.instances)
    bad = 0
    for p in paths:
        try:
            inst = io.load_instance(p)
            report = verify_plant(inst)
            if report.ok:
                print(f"{p}: ok ({len(inst.clauses)} clauses, z={inst.z}, "
                      f"e_ground={inst.e_ground:.6f})")
            else:
                bad += 1
                print(f"{p}: FAILED")
                for f in report.failures:
                    print(f"  {f}")
        except (ValueError, KeyError) as e:
            bad += 1
            print(f"{p}: unreadable: {e}")
    if bad:
        print(f"{bad} of {len(paths)} instances failed verification")
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pbitsim",
                                 description="p-bit Ising sampler benchmark")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate planted instances")
    g.add_argument("--tiles", type=_parse_tiles, default=(10, 10), metavar="RxC")
    g.add_argument("--shore", type=int, default=4)
    g.add_argument("--alpha", type=float, default=0.4)
    g.add_argument("--loops", type=_parse_loops, default=(4, 8), metavar="MIN:MAX")
    g.add_argument("--count", type=int, default=100)
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--out", default=os.path.join(DEFAULT_DATA_DIR, "instances"))
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run a sampler over instances")
    r.add_argument("--instances", nargs="+", required=True)
    r.add_argument("--sampler", choices=("serial", "chromatic", "async"), required=True)
    r.add_argument("--out", default=os.path.join(DEFAULT_DATA_DIR, "results.jsonl"))
    r.add_argument("--beta", type=_parse_betas, default=(0.5, 7.0, 0.5),
                   metavar="START:END:STEP")
    r.add_argument("--sweeps-per-stage", type=int, default=937)
    r.add_argument("--tau-ns", type=float, default=None)
    r.add_argument("--tau-ms", type=float, default=None)
    r.add_argument("--trials", type=int, default=50)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--scan-order", choices=("ascending", "random"), default="ascending")
    r.add_argument("--f-clock", type=float, default=9.375,
                   help="synchronous clock frequency, MHz")
    r.add_argument("--clocks", type=int, default=10)
    r.add_argument("--f-lo", type=float, default=5.0)
    r.add_argument("--f-hi", type=float, default=17.0)
    r.add_argument("--mean-match", action="store_true",
                   help="rescale the oscillator bank to hit --mean-target")
    r.add_argument("--mean-target", type=float, default=9.375)
    r.add_argument("--jitter", type=float, default=0.0)
    r.add_argument("--beta-mode", choices=("time", "sweep"), default="time")
    r.add_argument("--synapse-delay", type=float, default=3.33)
    r.add_argument("--sim-window", type=float, default=0.0)
    r.add_argument("--lfsr", action="store_true")
    r.add_argument("--fixed-point", action="store_true")
    r.add_argument("--fixed-total-bits", type=int, default=10)
    r.add_argument("--fixed-frac-bits", type=int, default=7)
    r.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="aggregate results into TTS tables")
    p.add_argument("--results", required=True)
    p.add_argument("--csv", default=None)
    p.add_argument("--p-r", type=float, default=0.99, dest="p_r")
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--resamples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_report)

    v = sub.add_parser("verify", help="re-check archived instances")
    v.add_argument("--instances", nargs="+", required=True)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
