"""Command-line front end: config loading, population sweeps, Monte Carlo
execution, and result emission.

Precedence for every parameter: command-line flag > config file > default.
Exit codes: 0 success, 2 configuration error (message names the offending
key), 1 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

from .config import (ConfigError, DEFAULT_SWEEP, LoadedConfig, RachConfig,
                     RunConfig, ScenarioConfig, config_to_dict,
                     default_duration_for, format_defaults, load_config_file,
                     validate)
from .engine import run_monte_carlo, run_simulation, run_streams
from .metrics import (summary_entry, write_access_records_csv, write_ecdf_csv,
                      write_summary_json, write_timeseries_csv)
from .scenario import generate_deployment, write_deployment_csv


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rachsim",
        description="Simulate LTE random access under massive simultaneous "
                    "machine-type traffic and emit delay/throughput metrics.")
    p.add_argument("--config", metavar="PATH", help="YAML configuration file")
    p.add_argument("--num-mtds", type=int, metavar="N",
                   help="simulate a single population of N devices")
    p.add_argument("--sweep", metavar="N1,N2,...",
                   help="comma-separated population sizes to sweep")
    p.add_argument("--runs", type=int, metavar="R", help="Monte Carlo runs per population")
    p.add_argument("--seed", type=int, metavar="SEED", help="master seed")
    p.add_argument("--mode", choices=("ideal", "realistic"), help="access model")
    p.add_argument("--out-dir", metavar="DIR", help="output directory")
    p.add_argument("--jobs", type=int, default=1, metavar="J",
                   help="concurrent runs (default 1; results are identical)")
    p.add_argument("--print-defaults", action="store_true",
                   help="print every default value and exit")
    p.add_argument("--dump-deployment", action="store_true",
                   help="also write deployment_N<k>.csv (positions of run 0)")
    p.add_argument("--trace", action="store_true",
                   help="also write per-event trace CSVs (debugging; keep N small)")
    return p


def _apply_overrides(cfg: LoadedConfig, args) -> tuple[ScenarioConfig, RachConfig, RunConfig]:
    scenario, run = cfg.scenario, cfg.run
    if args.num_mtds is not None:
        scenario = dataclasses.replace(scenario, num_mtds=args.num_mtds)
    run_updates = {}
    if args.runs is not None:
        run_updates["num_runs"] = args.runs
    if args.seed is not None:
        run_updates["seed"] = args.seed
    if args.mode is not None:
        run_updates["mode"] = args.mode
    if args.out_dir is not None:
        run_updates["output_dir"] = args.out_dir
    if run_updates:
        run = dataclasses.replace(run, **run_updates)
    validate(scenario, cfg.rach, run)
    return scenario, cfg.rach, run


def _sweep_list(args, cfg: LoadedConfig) -> list[int]:
    if args.sweep is not None:
        try:
            values = [int(v) for v in args.sweep.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"sweep: expected comma-separated integers: {exc}")
        if not values:
            raise ConfigError("sweep: empty list")
        return values
    if args.num_mtds is not None:
        return [args.num_mtds]
    if "scenario.num_mtds" in cfg.explicit:
        return [cfg.scenario.num_mtds]
    return list(DEFAULT_SWEEP)


def _trace_writer(path):
    fh = open(path, "w")
    fh.write("subframe,ue,event,phase_from,phase_to\n")

    def record(t, ue, event, phase_from, phase_to):
        fh.write(f"{t},{ue},{event},{phase_from.name},{phase_to.name}\n")

    return record, fh


def run_experiment(scenario: ScenarioConfig, rach: RachConfig, run_cfg: RunConfig,
                   sweep: list[int], jobs: int = 1, dump_deployment: bool = False,
                   trace: bool = False) -> dict:
    """Execute the sweep and write every output file.  Returns the summary
    entries keyed by population size."""
    out = Path(run_cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = {}
    for n in sweep:
        scenario_n = dataclasses.replace(
            scenario, num_mtds=n,
            sim_duration_s=scenario.sim_duration_s or default_duration_for(n))
        validate(scenario_n, rach, run_cfg)
        if trace:
            for i in range(run_cfg.num_runs):
                writer, fh = _trace_writer(out / f"trace_N{n}_run{i}.csv")
                run_simulation(scenario_n, rach, run_cfg, i, trace=writer)
                fh.close()
        results = run_monte_carlo(scenario_n, rach, run_cfg, jobs=jobs)
        n_dir = out / f"N{n}"
        n_dir.mkdir(exist_ok=True)
        write_access_records_csv(n_dir / "access_records.csv", results)
        write_ecdf_csv(out / f"ecdf_N{n}.csv", results)
        write_timeseries_csv(out / f"timeseries_N{n}.csv", results)
        if dump_deployment:
            geo_rng, _ = run_streams(run_cfg.seed, 0)
            deployment, _links = generate_deployment(scenario_n, geo_rng)
            write_deployment_csv(deployment, out / f"deployment_N{n}.csv")
        entries[n] = summary_entry(results)
    effective = config_to_dict(scenario, rach, run_cfg)
    # Where the files land is not part of the experiment: identical runs
    # into different directories must serialize identically.
    del effective["run"]["output_dir"]
    common = {
        "config": effective,
        "sweep": sweep,
        "master_seed": run_cfg.seed,
        "num_runs": run_cfg.num_runs,
        "mode": run_cfg.mode,
    }
    write_summary_json(out / "summary.json", entries, common)
    return entries


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_defaults:
        print(format_defaults(), end="")
        return 0
    started = time.time()
    try:
        if args.config:
            cfg = load_config_file(args.config)
        else:
            cfg = LoadedConfig(ScenarioConfig(), RachConfig(), RunConfig(), frozenset())
        scenario, rach, run_cfg = _apply_overrides(cfg, args)
        sweep = _sweep_list(args, cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        entries = run_experiment(scenario, rach, run_cfg, sweep, jobs=args.jobs,
                                 dump_deployment=args.dump_deployment,
                                 trace=args.trace)
        manifest = {
            "invocation": sys.argv if argv is None else ["rachsim"] + list(argv),
            "sweep": sweep,
            "wallclock_s": time.time() - started,
            "finished_unix": time.time(),
            "outputs": sorted(p.name for p in Path(run_cfg.output_dir).iterdir()),
        }
        with open(Path(run_cfg.output_dir) / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        for n in sweep:
            e = entries[n]
            mean = "-" if e["mean_delay_s"] is None else f"{e['mean_delay_s']:.3f}"
            print(f"N={n}: success={e['success_fraction']:.3f} "
                  f"mean_delay_s={mean} runs={run_cfg.num_runs}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
