"""Departure-triggered migration planning.

After a job leaves a GPU, that GPU is classified again. If it is still Busy,
jobs on it are shuffled to placements that lower its fragmentation cost
(intra-GPU). If it became Lazy, jobs are pulled over from Busy GPUs to even
out load (inter-GPU). Both planners are greedy loops over single-job moves.

Moves use replica semantics: the destination instance is created before the
source instance is released, so a destination must be free while the job
still holds its source slices.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

from . import frag
from .config import SchedulerConfig
from .errors import NotLazy, UnknownJob
from .mig_model import (
    GpuState,
    LoadClass,
    Placement,
    classify,
    create_instance,
    footprint_masks,
    get_profile,
    release_instance,
    remove_job,
)
from .scheduler import candidate_placements, gpu_index


class MoveKind(str, enum.Enum):
    INTRA = "IntraGpu"
    INTER = "InterGpu"


@dataclass(frozen=True)
class MigrationMove:
    job: int
    profile: str
    src_gpu: int
    src: Placement
    dst_gpu: int
    dst: Placement
    kind: MoveKind
    overlap_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "job": self.job,
            "profile": self.profile,
            "from": [self.src_gpu, self.src.start, self.src.size],
            "to": [self.dst_gpu, self.dst.start, self.dst.size],
            "kind": self.kind.value,
            "overlap_s": self.overlap_s,
        }


@dataclass
class MigrationPlan:
    moves: list[MigrationMove] = field(default_factory=list)
    path: str = ""  # "intra", "inter" or "" when no planning happened
    # one entry per move: fragmentation cost of the affected GPUs before/after
    cost_trace: list[dict] = field(default_factory=list)
    # frag-cost evaluations spent in each planning iteration (incl. the last, unproductive one)
    evaluations: list[int] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.moves)

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "moves": [m.to_dict() for m in self.moves],
            "cost_trace": self.cost_trace,
            "evaluations": self.evaluations,
        }


def _movable(gpu: GpuState) -> list[tuple[int, object]]:
    """(job, instance) pairs that can be relocated; jobs mid-migration hold two instances and are skipped."""
    out = []
    for job in gpu.jobs():
        insts = gpu.instances_of(job)
        if len(insts) == 1:
            out.append((job, insts[0]))
    return out


def _source_instance(gpu: GpuState, move: MigrationMove):
    for inst in gpu.instances_of(move.job):
        if inst.placement == move.src:
            return inst
    raise UnknownJob(f"job {move.job} is not at {move.src} on GPU {gpu.id}")


def begin_move(gpus: Sequence[GpuState], move: MigrationMove) -> tuple[tuple[GpuState, ...], int]:
    """Create the destination replica; the job then holds both footprints."""
    si = gpu_index(gpus, move.src_gpu)
    _source_instance(gpus[si], move)
    di = gpu_index(gpus, move.dst_gpu)
    new_dst, ops = create_instance(gpus[di], get_profile(move.profile), move.dst, move.job)
    out = list(gpus)
    out[di] = new_dst
    return tuple(out), ops


def finish_move(gpus: Sequence[GpuState], move: MigrationMove) -> tuple[GpuState, ...]:
    """Release the source instance (it stays around as an idle partition)."""
    si = gpu_index(gpus, move.src_gpu)
    inst = _source_instance(gpus[si], move)
    out = list(gpus)
    out[si] = release_instance(gpus[si], inst.id)
    return tuple(out)


def apply_move(
    gpus: Sequence[GpuState], move: MigrationMove, cfg: SchedulerConfig | None = None
) -> tuple[tuple[GpuState, ...], int]:
    """Atomic relocation. The simulator splits this into begin/finish when overlap_s > 0."""
    gpus, ops = begin_move(gpus, move)
    return finish_move(gpus, move), ops


def plan_intra(gpu: GpuState, dynamic: bool = True) -> MigrationPlan:
    plan = MigrationPlan(path="intra")
    gpus = (gpu,)
    current = frag.frag_cost(gpu)
    while True:
        g = gpus[0]
        n = 0
        best = None
        for job, inst in _movable(g):
            profile = inst.profile
            bc, bm = remove_job(g, job).busy_masks
            for pl, _ in candidate_placements(g, profile, dynamic):
                c, m = footprint_masks(profile, pl)
                cost = frag.cost_of_masks(bc | c, bm | m)
                n += 1
                key = (cost, job, pl.start)
                if best is None or key < best[0]:
                    best = (key, inst, pl)
        plan.evaluations.append(n)
        if best is None or best[0][0] >= current:
            return plan
        (cost, job, _), inst, pl = best
        move = MigrationMove(job, inst.profile.name, g.id, inst.placement, g.id, pl, MoveKind.INTRA)
        gpus, _ = apply_move(gpus, move)
        plan.moves.append(move)
        plan.cost_trace.append({"gpu": g.id, "before": current, "after": cost})
        current = cost


def plan_inter(gpus: Sequence[GpuState], lazy_gpu: int, cfg: SchedulerConfig) -> MigrationPlan:
    t = cfg.threshold
    dynamic = cfg.features.dynamic_partitioning
    di = gpu_index(gpus, lazy_gpu)
    if classify(gpus[di], t) is not LoadClass.LAZY:
        raise NotLazy(f"GPU {lazy_gpu} is not Lazy at threshold {t}")
    gpus = tuple(gpus)
    plan = MigrationPlan(path="inter")
    while True:
        dest = gpus[di]
        n = 0
        eligible = []
        for src in gpus:
            if src.id == lazy_gpu or classify(src, t) is not LoadClass.BUSY:
                continue
            for job, inst in _movable(src):
                cs = inst.profile.compute_slices
                # post-move load on the destination must stay below the source's
                if not dest.busy_compute + cs < src.busy_compute - cs:
                    continue
                if next(candidate_placements(dest, inst.profile, dynamic), None) is None:
                    continue
                src_cost = frag.cost_of_masks(*remove_job(src, job).busy_masks)
                n += 1
                eligible.append((src_cost, src.id, job, inst))
        if not eligible:
            plan.evaluations.append(n)
            return plan
        src_cost, src_id, job, inst = min(eligible, key=lambda e: e[:3])
        profile = inst.profile
        bc, bm = dest.busy_masks
        best = None
        for pl, _ in candidate_placements(dest, profile, dynamic):
            c, m = footprint_masks(profile, pl)
            cost = frag.cost_of_masks(bc | c, bm | m)
            n += 1
            if best is None or (cost, pl.start) < best[0]:
                best = ((cost, pl.start), pl)
        plan.evaluations.append(n)
        (dst_cost, _), pl = best
        src_gpu = gpus[gpu_index(gpus, src_id)]
        move = MigrationMove(job, profile.name, src_id, inst.placement, lazy_gpu, pl, MoveKind.INTER)
        plan.cost_trace.append({
            "src_gpu": src_id,
            "src_before": frag.frag_cost(src_gpu),
            "src_after": src_cost,
            "dst_gpu": lazy_gpu,
            "dst_before": frag.frag_cost(dest),
            "dst_after": dst_cost,
        })
        gpus, _ = apply_move(gpus, move)
        plan.moves.append(move)


def on_departure(gpus: Sequence[GpuState], departed_gpu: int, cfg: SchedulerConfig) -> MigrationPlan:
    idx = gpu_index(gpus, departed_gpu)
    if not cfg.features.migration:
        return MigrationPlan()
    gpu = gpus[idx]
    if classify(gpu, cfg.threshold) is LoadClass.BUSY:
        return plan_intra(gpu, cfg.features.dynamic_partitioning)
    return plan_inter(gpus, departed_gpu, cfg)
