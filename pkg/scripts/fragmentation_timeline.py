#!/usr/bin/env python3
"""Mean fragmentation cost over time, with and without migration.

Writes a CSV with columns time_s, with_migration, without_migration (step
functions sampled at every event of either run) and prints summary numbers.
"""
import argparse
import bisect
import csv
import sys

from migsched.config import load_config
from migsched.sim import run
from migsched.workload import PRESETS, generate, get_preset


def step_lookup(timeline):
    times = [t for t, _, _ in timeline]
    values = [v for _, v, _ in timeline]

    def at(t):
        i = bisect.bisect_right(times, t) - 1
        return values[max(i, 0)]
    return at


def time_weighted_mean(timeline, end):
    total = 0.0
    for (t0, v, _), (t1, _, _) in zip(timeline, timeline[1:] + [(end, 0.0, "")]):
        total += v * (t1 - t0)
    return total / end if end else 0.0


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", choices=list(PRESETS), default="Normal(25)")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--config", help="TOML config")
    ap.add_argument("--out", default="fragcost_compare.csv")
    args = ap.parse_args(argv)

    cfg = load_config(args.config)
    trace = generate(get_preset(args.preset, args.seed))
    with_m, _ = run(trace, cfg.with_features(migration=True))
    without, _ = run(trace, cfg.with_features(migration=False))

    a, b = step_lookup(with_m.frag_cost_timeline), step_lookup(without.frag_cost_timeline)
    times = sorted({t for t, _, _ in with_m.frag_cost_timeline} | {t for t, _, _ in without.frag_cost_timeline})
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["time_s", "with_migration", "without_migration"])
        for t in times:
            w.writerow([t, a(t), b(t)])

    end = max(times)
    print(f"{args.preset}: time-weighted mean frag cost "
          f"with migration {time_weighted_mean(with_m.frag_cost_timeline, end):.4f}, "
          f"without {time_weighted_mean(without.frag_cost_timeline, end):.4f} "
          f"({with_m.migration_count} migrations); wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
