"""Command-line entry point: ``migsched {simulate,generate,ablate,verify,inspect}``.

Exit codes: 0 success, 1 usage or configuration error, 2 verification failure.
Set ``MIGSCHED_LOG`` (e.g. ``DEBUG``) for log output on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import oracle
from .config import SchedulerConfig, load_config
from .errors import MigSchedError
from .experiments import ablate, ablation_csv
from .frag import frag_report
from .mig_model import classify, make_gpu, utilization
from .sim import run, write_events
from .workload import PRESETS, dump_trace, generate, get_preset, load_trace

log = logging.getLogger("migsched")

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_jobs(args, cfg: SchedulerConfig):
    if args.trace and args.preset:
        raise MigSchedError("give either --trace or --preset, not both")
    if args.trace:
        return load_trace(args.trace)
    seed = args.seed if args.seed is not None else cfg.seed
    return generate(get_preset(args.preset or "Normal(25)", seed))


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    jobs = _load_jobs(args, cfg)
    report, events = run(jobs, cfg)
    out = _out_dir(args.out)
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    (out / "report.csv").write_text(report.jobs_csv())
    with open(out / "events.jsonl", "w") as f:
        write_events(events, f)
    (out / "fragcost_timeline.csv").write_text(report.timeline_csv())
    print(
        f"jobs={len(report.jobs)} mean_wait={report.mean_wait_s:.2f}s "
        f"mean_execution={report.mean_execution_s:.2f}s mean_turnaround={report.mean_turnaround_s:.2f}s "
        f"makespan={report.workload_makespan_s:.2f}s migrations={report.migration_count} "
        f"reconfig_ops={report.reconfig_op_count}"
    )
    return EXIT_OK


def cmd_generate(args) -> int:
    cfg = load_config(args.config)
    jobs = _load_jobs(argparse.Namespace(trace=None, preset=args.preset, seed=args.seed), cfg)
    dest = Path(args.out)
    if dest.suffix != ".jsonl":
        dest = _out_dir(dest) / "trace.jsonl"
    dump_trace(jobs, dest)
    print(f"wrote {len(jobs)} jobs to {dest}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    cfg = load_config(args.config)
    jobs = _load_jobs(args, cfg)
    rows = ablate(jobs, cfg)
    out = _out_dir(args.out)
    (out / "ablation.csv").write_text(ablation_csv(rows))
    (out / "ablation.json").write_text(
        json.dumps({"schema": 1, "rows": [r.to_dict() for r in rows]}, indent=2) + "\n"
    )
    print(f"{'features':<14}{'turnaround':>12}{'normalized':>12}{'wait':>10}{'exec':>10}{'migr':>7}")
    for r in rows:
        d = r.to_dict()
        print(f"{r.label:<14}{d['mean_turnaround_s']:>12.2f}{r.normalized_turnaround:>12.4f}"
              f"{d['mean_wait_s']:>10.2f}{d['mean_execution_s']:>10.2f}{d['migrations']:>7}")
    return EXIT_OK


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    n, bad = oracle.differential_check(args.depth, stop_after=1)
    elapsed = time.perf_counter() - t0
    if bad:
        print(f"FAIL after {n} states: {bad[0]}")
        return EXIT_VERIFY
    print(f"OK: {n} states x {len(oracle.PROFILES)} profiles, no discrepancies ({elapsed:.2f}s)")
    return EXIT_OK


def _read_snapshot(path):
    """Snapshot: {"schema": 1, "gpus": [{"id": 0, "instances": [{"profile", "start", "job"}]}]}."""
    with open(path) as f:
        data = json.load(f)
    gpus = []
    for g in data["gpus"]:
        busy = [(i["profile"], i["start"], i["job"]) for i in g["instances"] if i.get("job") is not None]
        idle = [(i["profile"], i["start"]) for i in g["instances"] if i.get("job") is None]
        gpus.append(make_gpu(g["id"], busy=busy, idle=idle))
    return gpus


def cmd_inspect(args) -> int:
    cfg = load_config(args.config)
    try:
        gpus = _read_snapshot(args.snapshot)
    except (OSError, KeyError, TypeError, ValueError) as e:
        raise MigSchedError(f"bad snapshot {args.snapshot}: {e}") from e
    out = []
    for g in gpus:
        d = frag_report(g).to_dict()
        d["utilization"] = utilization(g)
        d["load_class"] = classify(g, cfg.threshold).value
        out.append(d)
    text = json.dumps({"schema": 1, "gpus": out}, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="migsched", description="Fragmentation-aware MIG scheduler simulator")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def workload_flags(sp):
        sp.add_argument("--trace", help="JSON-Lines job trace")
        sp.add_argument("--preset", choices=list(PRESETS), help="synthetic workload preset (default Normal(25))")
        sp.add_argument("--seed", type=int, help="override the preset's seed")
        sp.add_argument("--config", help="TOML config file")

    sp = sub.add_parser("simulate", help="run one simulation")
    workload_flags(sp)
    sp.add_argument("--out", default="out", help="output directory")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("generate", help="write a synthetic trace")
    sp.add_argument("--preset", choices=list(PRESETS), default="Normal(25)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--config", help="TOML config file (only its seed is used)")
    sp.add_argument("--out", default="trace.jsonl", help="trace file (.jsonl) or directory")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("ablate", help="baseline / +LB / +LB+Dyn / +LB+Dyn+Migr on one trace")
    workload_flags(sp)
    sp.add_argument("--out", default="out", help="output directory")
    sp.set_defaults(func=cmd_ablate)

    sp = sub.add_parser("verify", help="differential checks against the brute-force oracle")
    sp.add_argument("--depth", type=int, default=2, help="max busy instances per enumerated GPU state")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("inspect", help="per-GPU fragmentation report for a snapshot file")
    sp.add_argument("snapshot")
    sp.add_argument("--config", help="TOML config file (threshold for Lazy/Busy)")
    sp.add_argument("--out", help="also write the JSON report here")
    sp.set_defaults(func=cmd_inspect)
    return p


def main(argv=None) -> int:
    level = os.environ.get("MIGSCHED_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MigSchedError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
