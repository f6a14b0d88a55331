#!/usr/bin/env python3
"""Feature ablation on every shipped preset.

Prints mean turnaround and makespan for baseline / LB / LB+Dyn / LB+Dyn+Migr,
normalized to the first-fit baseline, and optionally writes one CSV.
"""
import argparse
import csv
import sys
from dataclasses import replace

from migsched.config import load_config
from migsched.experiments import ablate
from migsched.workload import PRESETS, generate


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", help="TOML config")
    ap.add_argument("--jobs", type=int, help="override job count per preset")
    ap.add_argument("--csv", help="write all rows here")
    args = ap.parse_args(argv)

    cfg = load_config(args.config)
    out = []
    for name, spec in PRESETS.items():
        if args.jobs:
            spec = replace(spec, job_count=args.jobs)
        rows = ablate(generate(spec), cfg)
        print(f"\n{name}")
        for r in rows:
            d = r.to_dict()
            print(f"  {r.label:<13} turnaround {d['mean_turnaround_s']:>10.1f}s ({r.normalized_turnaround:.3f})"
                  f"  makespan {d['workload_makespan_s']:>10.1f}s ({r.normalized_makespan:.3f})"
                  f"  migrations {d['migrations']}")
            out.append({"preset": name, **d})
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=list(out[0]))
            w.writeheader()
            w.writerows(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
