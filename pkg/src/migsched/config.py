"""Scheduler/simulator configuration and its TOML file form.

Example file::

    threshold = 0.4
    seed = 7

    [features]
    load_balancing = true
    dynamic_partitioning = true
    migration = true

    [contention]
    alpha = 0.15

    [migration]
    overlap_s = 0.0

    [reconfig]
    latency_s = 0.0

    [cluster]
    gpus = 4

    # one list per GPU, cycled when the cluster has more GPUs
    static_layout = [["4g.20gb@0", "3g.20gb@4"], ["2g.10gb@0", "2g.10gb@2", "2g.10gb@4", "1g.5gb@6"]]
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .errors import BadSpec, MigSchedError
from .mig_model import check_threshold, make_gpu, parse_slot

Layout = tuple[tuple[tuple[str, int], ...], ...]

# Shipped static layouts. All three hold the same multiset of instances
# (2x4g, 2x3g, 4x2g, 4x1g.5gb) arranged differently across four GPUs.
STATIC_LAYOUTS: dict[str, Layout] = {
    "A": (
        (("4g.20gb", 0), ("3g.20gb", 4)),
        (("4g.20gb", 0), ("2g.10gb", 4), ("1g.5gb", 6)),
        (("3g.20gb", 0), ("2g.10gb", 4), ("1g.5gb", 6)),
        (("2g.10gb", 0), ("2g.10gb", 2), ("1g.5gb", 4), ("1g.5gb", 5)),
    ),
    "B": (
        (("4g.20gb", 0), ("2g.10gb", 4), ("1g.5gb", 6)),
        (("4g.20gb", 0), ("2g.10gb", 4), ("1g.5gb", 6)),
        (("3g.20gb", 0), ("3g.20gb", 4)),
        (("2g.10gb", 0), ("2g.10gb", 2), ("1g.5gb", 4), ("1g.5gb", 5)),
    ),
    "C": (
        (("4g.20gb", 0), ("3g.20gb", 4)),
        (("4g.20gb", 0), ("3g.20gb", 4)),
        (("2g.10gb", 0), ("2g.10gb", 2), ("2g.10gb", 4), ("1g.5gb", 6)),
        (("2g.10gb", 0), ("1g.5gb", 2), ("1g.5gb", 3), ("1g.5gb", 4)),
    ),
}
DEFAULT_STATIC_LAYOUT = STATIC_LAYOUTS["A"]


@dataclass(frozen=True)
class Features:
    load_balancing: bool = True
    dynamic_partitioning: bool = True
    migration: bool = True

    def label(self) -> str:
        parts = [n for n, on in (("LB", self.load_balancing), ("Dyn", self.dynamic_partitioning),
                                 ("Migr", self.migration)) if on]
        return "+".join(parts) if parts else "baseline"


@dataclass(frozen=True)
class SchedulerConfig:
    threshold: float = 0.4
    features: Features = field(default_factory=Features)
    static_layout: Optional[Layout] = None
    alpha: float = 0.15
    overlap_s: float = 0.0
    reconfig_latency_s: float = 0.0
    seed: Optional[int] = None  # workload seed override
    gpus: int = 4

    def __post_init__(self):
        check_threshold(self.threshold)
        if self.alpha < 0 or self.overlap_s < 0 or self.reconfig_latency_s < 0:
            raise BadSpec("alpha, overlap_s and latency_s must be non-negative")
        if self.gpus < 1:
            raise BadSpec("cluster needs at least one GPU")
        if self.static_layout is not None:
            for i, per_gpu in enumerate(self.static_layout):
                make_gpu(i, idle=per_gpu)

    def layout_for(self, gpu_id: int) -> tuple[tuple[str, int], ...]:
        """Initial partitions of one GPU; empty when no layout applies."""
        layout = self.static_layout
        if layout is None and not self.features.dynamic_partitioning:
            layout = DEFAULT_STATIC_LAYOUT
        if not layout:
            return ()
        return layout[gpu_id % len(layout)]

    def with_features(self, **flags: bool) -> "SchedulerConfig":
        return replace(self, features=replace(self.features, **flags))


def _parse_layout(raw: Any) -> Layout:
    if not isinstance(raw, list):
        raise BadSpec("static_layout must be a list of per-GPU lists")
    out = []
    for per_gpu in raw:
        slots = []
        for s in per_gpu:
            profile, start = parse_slot(s)
            slots.append((profile.name, start))
        out.append(tuple(slots))
    return tuple(out)


def config_from_dict(d: dict) -> SchedulerConfig:
    known = {"threshold", "seed", "features", "contention", "migration", "reconfig", "cluster", "static_layout"}
    extra = set(d) - known
    if extra:
        raise BadSpec(f"unknown config keys: {sorted(extra)}")
    feats = d.get("features", {})
    unknown_feats = set(feats) - {"load_balancing", "dynamic_partitioning", "migration"}
    if unknown_feats:
        raise BadSpec(f"unknown feature flags: {sorted(unknown_feats)}")
    layout = d.get("static_layout")
    return SchedulerConfig(
        threshold=float(d.get("threshold", 0.4)),
        features=Features(**{k: bool(v) for k, v in feats.items()}),
        static_layout=_parse_layout(layout) if layout is not None else None,
        alpha=float(d.get("contention", {}).get("alpha", 0.15)),
        overlap_s=float(d.get("migration", {}).get("overlap_s", 0.0)),
        reconfig_latency_s=float(d.get("reconfig", {}).get("latency_s", 0.0)),
        seed=int(d["seed"]) if "seed" in d else None,
        gpus=int(d.get("cluster", {}).get("gpus", 4)),
    )


def load_config(path: str | Path | None) -> SchedulerConfig:
    if path is None:
        return SchedulerConfig()
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise BadSpec(f"cannot read config {path}: {e}") from e
    try:
        return config_from_dict(data)
    except MigSchedError:
        raise
    except (TypeError, ValueError) as e:
        raise BadSpec(f"bad config {path}: {e}") from e
