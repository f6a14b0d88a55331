"""Multi-run experiments: the feature ablation and the static-vs-dynamic comparison."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from typing import Sequence

from .config import STATIC_LAYOUTS, Features, SchedulerConfig
from .job import Job
from .sim import SimReport, run

ABLATION_STEPS: tuple[tuple[str, Features], ...] = (
    ("baseline", Features(load_balancing=False, dynamic_partitioning=False, migration=False)),
    ("LB", Features(load_balancing=True, dynamic_partitioning=False, migration=False)),
    ("LB+Dyn", Features(load_balancing=True, dynamic_partitioning=True, migration=False)),
    ("LB+Dyn+Migr", Features(load_balancing=True, dynamic_partitioning=True, migration=True)),
)


@dataclass
class AblationRow:
    label: str
    report: SimReport
    normalized_turnaround: float
    normalized_makespan: float

    def to_dict(self) -> dict:
        r = self.report
        return {
            "features": self.label,
            "mean_wait_s": r.mean_wait_s,
            "mean_execution_s": r.mean_execution_s,
            "mean_turnaround_s": r.mean_turnaround_s,
            "normalized_turnaround": self.normalized_turnaround,
            "workload_makespan_s": r.workload_makespan_s,
            "normalized_makespan": self.normalized_makespan,
            "migrations": r.migration_count,
            "reconfig_ops": r.reconfig_op_count,
        }


def ablate(trace: Sequence[Job], cfg: SchedulerConfig | None = None) -> list[AblationRow]:
    """Run the four cumulative feature sets on one trace, normalized to the first-fit baseline."""
    cfg = cfg or SchedulerConfig()
    reports = [(label, run(trace, replace(cfg, features=f))[0]) for label, f in ABLATION_STEPS]
    base = reports[0][1]

    def norm(x: float, b: float) -> float:
        return x / b if b else 1.0

    return [
        AblationRow(label, r, norm(r.mean_turnaround_s, base.mean_turnaround_s),
                    norm(r.workload_makespan_s, base.workload_makespan_s))
        for label, r in reports
    ]


def ablation_csv(rows: Sequence[AblationRow]) -> str:
    buf = io.StringIO()
    dicts = [r.to_dict() for r in rows]
    w = csv.DictWriter(buf, fieldnames=list(dicts[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(dicts)
    return buf.getvalue()


def static_vs_dynamic(trace: Sequence[Job], cfg: SchedulerConfig | None = None) -> dict[str, SimReport]:
    """Mean-wait comparison: dynamic partitioning against each shipped static layout.

    Load balancing stays on and migration off in every run so only the
    partitioning policy differs.
    """
    cfg = cfg or SchedulerConfig()
    out = {"dynamic": run(trace, replace(cfg, features=Features(True, True, False), static_layout=None))[0]}
    for name, layout in STATIC_LAYOUTS.items():
        out[f"static-{name}"] = run(
            trace, replace(cfg, features=Features(True, False, False), static_layout=layout)
        )[0]
    return out
