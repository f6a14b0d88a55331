#!/usr/bin/env python3
"""Mean wait under dynamic partitioning versus the three static layouts.

Traces use the static-friendly profile mix so every job has a matching
partition in each layout.
"""
import argparse
import sys
from dataclasses import replace

from migsched.config import load_config
from migsched.experiments import static_vs_dynamic
from migsched.workload import PRESETS, STATIC_MIX, generate


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", help="TOML config")
    ap.add_argument("--seed", type=int, help="override every preset's seed")
    args = ap.parse_args(argv)
    cfg = load_config(args.config)

    print(f"{'preset':<12}" + "".join(f"{k:>12}" for k in ("dynamic", "static-A", "static-B", "static-C")))
    for name, spec in PRESETS.items():
        spec = replace(spec, profile_mix=dict(STATIC_MIX))
        if args.seed is not None:
            spec = replace(spec, seed=args.seed)
        reports = static_vs_dynamic(generate(spec), cfg)
        waits = [reports[k].mean_wait_s for k in ("dynamic", "static-A", "static-B", "static-C")]
        best_static = min(waits[1:])
        gain = 1 - waits[0] / best_static if best_static else 0.0
        print(f"{name:<12}" + "".join(f"{w:>12.1f}" for w in waits) + f"   gain vs best static {gain:.0%}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
