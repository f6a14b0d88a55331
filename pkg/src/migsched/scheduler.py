"""Arrival-time job placement.

``schedule`` is the conditional load-balancing, fragmentation-aware policy:
Lazy GPUs (utilization below the threshold) are searched first, every legal
free placement is scored by the GPU's fragmentation cost with the job
hypothetically placed, and the global minimum wins. Ties go to reusing an
existing idle partition, then the lower GPU id, then the lower start index.
Busy GPUs are only tried when no Lazy GPU can host the job.

``first_fit_schedule`` is the baseline. ``dispatch`` picks between the two
according to the feature flags.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from typing import Iterator, Optional, Sequence

from . import frag
from .config import SchedulerConfig
from .errors import UnknownGpu
from .job import Job
from .mig_model import (
    GpuState,
    LoadClass,
    MigProfile,
    Placement,
    avail,
    classify,
    create_instance,
    footprint_masks,
    get_profile,
)


@dataclass(frozen=True)
class ScheduleDecision:
    job: int
    gpu: Optional[int] = None
    placement: Optional[Placement] = None
    reused: bool = False
    evaluated_candidates: int = 0
    cost: Optional[float] = None
    reconfig_ops: int = 0

    @property
    def placed(self) -> bool:
        return self.gpu is not None

    @property
    def outcome(self) -> str:
        return "Placed" if self.placed else "Queued"


def candidate_placements(
    gpu: GpuState, profile: MigProfile, dynamic: bool
) -> Iterator[tuple[Placement, bool]]:
    """Yield ``(placement, reuses_idle_instance)`` for every slot the job may take on ``gpu``.

    Without dynamic partitioning only exact-match idle instances qualify.
    """
    for pl in profile.placements():
        if not avail(gpu, profile, pl):
            continue
        reuse = gpu.idle_match(profile, pl) is not None
        if dynamic or reuse:
            yield pl, reuse


def schedule(job: Job, gpus: Sequence[GpuState], cfg: SchedulerConfig) -> ScheduleDecision:
    profile = get_profile(job.profile)
    dynamic = cfg.features.dynamic_partitioning
    by_class: dict[LoadClass, list[GpuState]] = {LoadClass.LAZY: [], LoadClass.BUSY: []}
    for gpu in gpus:
        by_class[classify(gpu, cfg.threshold)].append(gpu)

    evaluated = 0
    for cls in (LoadClass.LAZY, LoadClass.BUSY):
        best = None
        for gpu in by_class[cls]:
            bc, bm = gpu.busy_masks
            for pl, reuse in candidate_placements(gpu, profile, dynamic):
                c, m = footprint_masks(profile, pl)
                cost = frag.cost_of_masks(bc | c, bm | m)
                evaluated += 1
                key = (cost, not reuse, gpu.id, pl.start)
                if best is None or key < best[0]:
                    best = (key, gpu.id, pl, reuse)
        if best is not None:
            key, gid, pl, reuse = best
            return ScheduleDecision(job.id, gid, pl, reuse, evaluated, key[0])
    return ScheduleDecision(job.id, evaluated_candidates=evaluated)


def first_fit_schedule(job: Job, gpus: Sequence[GpuState], cfg: SchedulerConfig) -> ScheduleDecision:
    profile = get_profile(job.profile)
    dynamic = cfg.features.dynamic_partitioning
    scanned = 0
    for gpu in gpus:
        for pl, reuse in candidate_placements(gpu, profile, dynamic):
            scanned += 1
            return ScheduleDecision(job.id, gpu.id, pl, reuse, scanned)
    return ScheduleDecision(job.id, evaluated_candidates=scanned)


def dispatch(job: Job, gpus: Sequence[GpuState], cfg: SchedulerConfig) -> ScheduleDecision:
    if cfg.features.load_balancing:
        return schedule(job, gpus, cfg)
    return first_fit_schedule(job, gpus, cfg)


def gpu_index(gpus: Sequence[GpuState], gpu_id: int) -> int:
    for i, g in enumerate(gpus):
        if g.id == gpu_id:
            return i
    raise UnknownGpu(f"no GPU with id {gpu_id}")


def place(
    gpus: Sequence[GpuState], job: Job, decision: ScheduleDecision
) -> tuple[tuple[GpuState, ...], int]:
    """Apply a Placed decision; returns the new cluster state and reconfig op count."""
    idx = gpu_index(gpus, decision.gpu)
    new_gpu, ops = create_instance(gpus[idx], get_profile(job.profile), decision.placement, job.id)
    out = list(gpus)
    out[idx] = new_gpu
    return tuple(out), ops


def try_dequeue(
    queue: deque[Job], gpus: Sequence[GpuState], cfg: SchedulerConfig, stats: list[int] | None = None
) -> tuple[list[ScheduleDecision], tuple[GpuState, ...]]:
    """Place queued jobs strictly in FCFS order, stopping at the first head that does not fit.

    Placed jobs are popped from ``queue``. Returns the decisions (with their
    reconfig op counts filled in) and the updated cluster. If ``stats`` is
    given, the candidate count of every attempt (including the failed one) is
    appended to it.
    """
    placed = []
    gpus = tuple(gpus)
    while queue:
        head = queue[0]
        d = dispatch(head, gpus, cfg)
        if stats is not None:
            stats.append(d.evaluated_candidates)
        if not d.placed:
            break
        gpus, ops = place(gpus, head, d)
        placed.append(replace(d, reconfig_ops=ops))
        queue.popleft()
    return placed, gpus
