"""Deterministic discrete-event simulation of a single MIG node.

Jobs sharing a GPU slow each other down: with ``k`` jobs running on a GPU each
progresses at rate ``1 / (1 + alpha * (k - 1))``. Remaining work is
re-integrated whenever any rate changes.

Processing order at equal timestamps: completions (ascending job id), then
timers (reconfiguration finishes, migration overlap ends), then arrivals
(ascending job id). Each event carries a ``seq`` number; the log is totally
ordered by ``(time_s, seq)``.
"""
from __future__ import annotations

import csv
import heapq
import io
import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from . import frag
from .config import SchedulerConfig
from .errors import BadConcurrency, JobsPending, SimulationStalled, SlicesBusy, TraceUnsorted, UnknownJob
from .job import Job
from .mig_model import GpuState, get_profile, gpu_from_layout, release_job
from .migration import MigrationMove, begin_move, finish_move, on_departure
from .scheduler import dispatch, gpu_index, place, try_dequeue

log = logging.getLogger(__name__)

EVENT_KINDS = (
    "Arrival", "Enqueue", "Dequeue", "Reconfig", "Placed", "MigrationStart", "MigrationEnd", "Completion",
)


def slowdown(k: int, alpha: float) -> float:
    if k < 1:
        raise BadConcurrency(f"concurrency must be >= 1, got {k}")
    return 1.0 + alpha * (k - 1)


@dataclass
class SimEvent:
    seq: int
    time_s: float
    kind: str
    job: Optional[int] = None
    data: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"seq": self.seq, "time_s": self.time_s, "kind": self.kind, "job": self.job, "data": self.data}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "SimEvent":
        return cls(d["seq"], d["time_s"], d["kind"], d.get("job"), d.get("data", {}))


@dataclass
class JobRecord:
    job: int
    profile: str
    service_s: float
    dispatched_s: float
    scheduled_s: float
    completed_s: float

    @property
    def wait_s(self) -> float:
        return self.scheduled_s - self.dispatched_s

    @property
    def execution_s(self) -> float:
        return self.completed_s - self.scheduled_s

    @property
    def turnaround_s(self) -> float:
        return self.wait_s + self.execution_s

    def to_dict(self) -> dict:
        return {
            "job": self.job,
            "profile": self.profile,
            "service_s": self.service_s,
            "dispatched_s": self.dispatched_s,
            "scheduled_s": self.scheduled_s,
            "completed_s": self.completed_s,
            "wait_s": self.wait_s,
            "execution_s": self.execution_s,
            "turnaround_s": self.turnaround_s,
        }


@dataclass
class SimReport:
    jobs: list[JobRecord]
    mean_wait_s: float
    mean_execution_s: float
    mean_turnaround_s: float
    workload_makespan_s: float
    migration_count: int
    reconfig_op_count: int
    frag_cost_timeline: list[tuple[float, float, str]] = field(default_factory=list)
    complexity: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "jobs": len(self.jobs),
            "mean_wait_s": self.mean_wait_s,
            "mean_execution_s": self.mean_execution_s,
            "mean_turnaround_s": self.mean_turnaround_s,
            "workload_makespan_s": self.workload_makespan_s,
            "migration_count": self.migration_count,
            "reconfig_op_count": self.reconfig_op_count,
        }

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "summary": self.summary(),
            "complexity": self.complexity,
            "jobs": [j.to_dict() for j in self.jobs],
        }

    def jobs_csv(self) -> str:
        buf = io.StringIO()
        cols = list(JobRecord.__dataclass_fields__) + ["wait_s", "execution_s", "turnaround_s"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for j in self.jobs:
            w.writerow(j.to_dict())
        return buf.getvalue()

    def timeline_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time_s", "mean_frag_cost", "cause"])
        w.writerows(self.frag_cost_timeline)
        return buf.getvalue()


def metrics(events: Iterable[SimEvent]) -> SimReport:
    arrivals: dict[int, SimEvent] = {}
    placed: dict[int, float] = {}
    completed: dict[int, float] = {}
    migrations = reconfig = 0
    for ev in events:
        if ev.kind == "Arrival":
            arrivals[ev.job] = ev
        elif ev.kind == "Placed":
            placed[ev.job] = ev.time_s
        elif ev.kind == "Completion":
            completed[ev.job] = ev.time_s
        elif ev.kind == "MigrationStart":
            migrations += 1
        elif ev.kind == "Reconfig":
            reconfig += ev.data["ops"]
    pending = sorted(set(arrivals) - set(completed))
    if pending:
        raise JobsPending(f"{len(pending)} jobs never completed, e.g. job {pending[0]}")
    recs = [
        JobRecord(j, a.data["profile"], a.data["service_s"], a.time_s, placed[j], completed[j])
        for j, a in sorted(arrivals.items())
    ]
    if not recs:
        return SimReport([], 0.0, 0.0, 0.0, 0.0, migrations, reconfig)
    n = len(recs)
    return SimReport(
        jobs=recs,
        mean_wait_s=sum(r.wait_s for r in recs) / n,
        mean_execution_s=sum(r.execution_s for r in recs) / n,
        mean_turnaround_s=sum(r.turnaround_s for r in recs) / n,
        workload_makespan_s=max(r.completed_s for r in recs) - min(r.dispatched_s for r in recs),
        migration_count=migrations,
        reconfig_op_count=reconfig,
    )


@dataclass
class _Running:
    job: Job
    gpu: int
    remaining: float
    started: bool


class _Simulation:
    def __init__(self, cfg: SchedulerConfig, cluster: int):
        self.cfg = cfg
        self.gpus: tuple[GpuState, ...] = tuple(gpu_from_layout(i, cfg.layout_for(i)) for i in range(cluster))
        self.now = 0.0
        self.queue: deque[Job] = deque()
        self.running: dict[int, _Running] = {}
        self.timers: list = []
        self.timer_seq = 0
        self.pending_moves: deque[MigrationMove] = deque()
        self.move_in_flight = False
        self.events: list[SimEvent] = []
        self.timeline: list[tuple[float, float, str]] = []
        self.max_arrival_evals = 0
        self.max_intra_evals = 0
        self.max_inter_evals = 0

    # -- bookkeeping -----------------------------------------------------
    def emit(self, kind: str, job: Optional[int] = None, **data) -> None:
        self.events.append(SimEvent(len(self.events), self.now, kind, job, data))

    def sample(self, cause: str) -> None:
        self.timeline.append((self.now, frag.mean_frag_cost(self.gpus), cause))

    def push_timer(self, at: float, kind: str, payload) -> None:
        self.timer_seq += 1
        heapq.heappush(self.timers, (at, self.timer_seq, kind, payload))

    def concurrency(self) -> dict[int, int]:
        k: dict[int, int] = {}
        for r in self.running.values():
            if r.started:
                k[r.gpu] = k.get(r.gpu, 0) + 1
        return k

    def finish_times(self) -> dict[int, float]:
        k = self.concurrency()
        return {
            j: self.now + r.remaining * slowdown(k[r.gpu], self.cfg.alpha)
            for j, r in self.running.items()
            if r.started
        }

    def advance(self, t: float) -> None:
        dt = t - self.now
        if dt > 0:
            k = self.concurrency()
            for r in self.running.values():
                if r.started:
                    r.remaining -= dt / slowdown(k[r.gpu], self.cfg.alpha)
        self.now = t

    # -- placement -------------------------------------------------------
    def note_evals(self, n: int) -> None:
        self.max_arrival_evals = max(self.max_arrival_evals, n)

    def start_job(self, job: Job, decision, ops: int) -> None:
        if ops:
            self.emit("Reconfig", job.id, gpu=decision.gpu, ops=ops)
        self.running[job.id] = _Running(job, decision.gpu, job.service_s, started=False)
        delay = ops * self.cfg.reconfig_latency_s
        placement = {"gpu": decision.gpu, "start": decision.placement.start,
                     "size": decision.placement.size, "reused": decision.reused}
        if delay > 0:
            self.push_timer(self.now + delay, "Start", (job.id, placement))
        else:
            self.mark_started(job.id, placement)

    def mark_started(self, job_id: int, placement: dict) -> None:
        r = self.running[job_id]
        r.started = True
        self.emit("Placed", job_id, **placement)
        self.sample("placement")

    def dequeue(self) -> None:
        stats: list[int] = []
        heads = list(self.queue)
        decisions, self.gpus = try_dequeue(self.queue, self.gpus, self.cfg, stats=stats)
        for n in stats:
            self.note_evals(n)
        for job, d in zip(heads, decisions):
            self.emit("Dequeue", job.id)
            self.start_job(job, d, d.reconfig_ops)

    def arrive(self, job: Job) -> None:
        self.emit("Arrival", job.id, profile=job.profile, service_s=job.service_s)
        if self.queue:
            self.queue.append(job)
            self.emit("Enqueue", job.id)
            self.dequeue()
            return
        d = dispatch(job, self.gpus, self.cfg)
        self.note_evals(d.evaluated_candidates)
        if d.placed:
            self.gpus, ops = place(self.gpus, job, d)
            self.start_job(job, d, ops)
        else:
            self.queue.append(job)
            self.emit("Enqueue", job.id)

    # -- departures and migration ---------------------------------------
    def complete(self, job_id: int) -> None:
        r = self.running.pop(job_id)
        gpus = list(self.gpus)
        for i, g in enumerate(gpus):
            if g.instances_of(job_id):
                gpus[i] = release_job(g, job_id)
        self.gpus = tuple(gpus)
        self.emit("Completion", job_id, gpu=r.gpu)
        self.sample("departure")
        self.dequeue()
        if self.cfg.features.migration:
            plan = on_departure(self.gpus, r.gpu, self.cfg)
            evals = max(plan.evaluations, default=0)
            if plan.path == "intra":
                self.max_intra_evals = max(self.max_intra_evals, evals)
            elif plan.path == "inter":
                self.max_inter_evals = max(self.max_inter_evals, evals)
            self.pending_moves.extend(plan.moves)
            self.run_moves()
            self.dequeue()

    def move_still_valid(self, move: MigrationMove) -> bool:
        r = self.running.get(move.job)
        if r is None or r.gpu != move.src_gpu:
            return False
        src = self.gpus[gpu_index(self.gpus, move.src_gpu)]
        if [i.placement for i in src.instances_of(move.job)] != [move.src]:
            return False
        if not self.cfg.features.dynamic_partitioning:
            dst = self.gpus[gpu_index(self.gpus, move.dst_gpu)]
            return dst.idle_match(get_profile(move.profile), move.dst) is not None
        return True

    def run_moves(self) -> None:
        """Start pending moves one at a time; with zero overlap they all complete immediately."""
        while self.pending_moves and not self.move_in_flight:
            move = replace(self.pending_moves.popleft(), overlap_s=self.cfg.overlap_s)
            if not self.move_still_valid(move):
                log.debug("dropping stale move %s", move)
                continue
            try:
                gpus, ops = begin_move(self.gpus, move)
            except (SlicesBusy, UnknownJob):
                log.debug("dropping blocked move %s", move)
                continue
            self.gpus = gpus
            self.emit("MigrationStart", move.job, move=move.to_dict())
            if ops:
                self.emit("Reconfig", move.job, gpu=move.dst_gpu, ops=ops)
            if self.cfg.overlap_s > 0:
                self.move_in_flight = True
                self.push_timer(self.now + self.cfg.overlap_s, "MigrationEnd", move)
            else:
                self.end_move(move)

    def end_move(self, move: MigrationMove) -> None:
        self.move_in_flight = False
        if move.job in self.running:
            self.gpus = finish_move(self.gpus, move)
            self.running[move.job].gpu = move.dst_gpu
            self.emit("MigrationEnd", move.job, gpu=move.dst_gpu, start=move.dst.start, size=move.dst.size)
            self.sample("migration")

    def fire_timer(self, kind: str, payload) -> None:
        if kind == "Start":
            job_id, placement = payload
            if job_id in self.running:
                self.mark_started(job_id, placement)
        elif kind == "MigrationEnd":
            self.end_move(payload)
            self.dequeue()
            self.run_moves()

    # -- main loop -------------------------------------------------------
    def run(self, trace: Sequence[Job]) -> None:
        arrivals = deque(trace)
        self.sample("start")
        while arrivals or self.running or self.timers or self.queue:
            finish = self.finish_times()
            t_done = min(finish.values(), default=math.inf)
            t_timer = self.timers[0][0] if self.timers else math.inf
            t_arr = arrivals[0].arrival_s if arrivals else math.inf
            t_next = min(t_done, t_timer, t_arr)
            if t_next == math.inf:
                raise SimulationStalled(
                    f"{len(self.queue)} queued jobs can never be placed (head: job {self.queue[0].id}, "
                    f"profile {self.queue[0].profile})"
                )
            self.advance(t_next)
            for j in sorted(j for j, ft in finish.items() if ft == t_next):
                self.running[j].remaining = 0.0
                self.complete(j)
            while self.timers and self.timers[0][0] == t_next:
                _, _, kind, payload = heapq.heappop(self.timers)
                self.fire_timer(kind, payload)
            batch = []
            while arrivals and arrivals[0].arrival_s == t_next:
                batch.append(arrivals.popleft())
            for job in sorted(batch, key=lambda j: j.id):
                self.arrive(job)


def validate_trace(trace: Sequence[Job]) -> None:
    prev = -math.inf
    for job in trace:
        get_profile(job.profile)
        if job.arrival_s < prev:
            raise TraceUnsorted(f"job {job.id} arrives at {job.arrival_s} before its predecessor ({prev})")
        prev = job.arrival_s


def run(
    trace: Sequence[Job], cfg: SchedulerConfig | None = None, cluster: int | None = None
) -> tuple[SimReport, list[SimEvent]]:
    """Simulate ``trace`` on ``cluster`` GPUs (default: ``cfg.gpus``)."""
    cfg = cfg or SchedulerConfig()
    validate_trace(trace)
    sim = _Simulation(cfg, cluster if cluster is not None else cfg.gpus)
    sim.run(trace)
    report = metrics(sim.events)
    report.frag_cost_timeline = sim.timeline
    report.complexity = {
        "gpus": len(sim.gpus),
        "max_arrival_evals": sim.max_arrival_evals,
        "max_intra_iteration_evals": sim.max_intra_evals,
        "max_inter_iteration_evals": sim.max_inter_evals,
    }
    return report, sim.events


def write_events(events: Iterable[SimEvent], fh) -> None:
    for ev in events:
        fh.write(ev.to_json())
        fh.write("\n")


def read_events(fh) -> list[SimEvent]:
    return [SimEvent.from_dict(json.loads(line)) for line in fh if line.strip()]
