"""Brute-force reference implementations for small states.

Nothing here reuses the occupancy, metric or scheduling code of the package:
slices are plain Python sets built straight from the profile table, so the
differential checks compare two independent computations.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Optional, Sequence

from .mig_model import PROFILES, GpuState, Instance, MigProfile, Placement

N_COMPUTE = 7
N_MEMORY = 8

# every (profile, legal start) pair in table order
SLOTS = [(p, st) for p in PROFILES.values() for st in p.start_indexes]


def _footprint(profile: MigProfile, start: int) -> tuple[set[int], set[int]]:
    return set(range(start, start + profile.compute_slices)), set(range(start, start + profile.memory_slices))


def _occupied(gpu: GpuState) -> tuple[set[int], set[int]]:
    comp: set[int] = set()
    mem: set[int] = set()
    for inst in gpu.instances:
        if inst.job is None:
            continue
        c, m = _footprint(inst.profile, inst.placement.start)
        comp |= c
        mem |= m
    return comp, mem


def _free_starts(comp: set[int], mem: set[int], profile: MigProfile) -> list[int]:
    out = []
    for st in profile.start_indexes:
        c, m = _footprint(profile, st)
        if c.isdisjoint(comp) and m.isdisjoint(mem):
            out.append(st)
    return out


def enumerate_states(max_busy: int) -> Iterator[GpuState]:
    """Every GPU whose busy instances form a slice-disjoint set of at most ``max_busy`` slots."""

    def disjoint(chosen) -> bool:
        comp: set[int] = set()
        mem: set[int] = set()
        for p, st in chosen:
            c, m = _footprint(p, st)
            if comp & c or mem & m:
                return False
            comp |= c
            mem |= m
        return True

    for k in range(max_busy + 1):
        for chosen in combinations(SLOTS, k):
            if not disjoint(chosen):
                continue
            insts = tuple(
                Instance(f"oracle-{j}", p, Placement(st, p.size), job=j) for j, (p, st) in enumerate(chosen)
            )
            yield GpuState(0, insts, len(insts))


def brute_feasible(gpu: GpuState, profile: MigProfile) -> int:
    comp, mem = _occupied(gpu)
    return len(_free_starts(comp, mem, profile))


def brute_ideal(gpu: GpuState, profile: MigProfile) -> int:
    comp, mem = _occupied(gpu)
    return min((N_COMPUTE - len(comp)) // profile.compute_slices, (N_MEMORY - len(mem)) // profile.memory_slices)


def _cost(comp: set[int], mem: set[int]) -> Fraction:
    terms = []
    for p in PROFILES.values():
        ideal = min((N_COMPUTE - len(comp)) // p.compute_slices, (N_MEMORY - len(mem)) // p.memory_slices)
        if ideal:
            terms.append(Fraction(len(_free_starts(comp, mem, p)), ideal))
    return 1 - sum(terms, Fraction(0)) / len(terms) if terms else Fraction(0)


def brute_cost(gpu: GpuState) -> Fraction:
    return _cost(*_occupied(gpu))


def best_placement_search(gpu: GpuState, profile: MigProfile) -> Optional[tuple[Placement, Fraction]]:
    """Exhaustive argmin of post-placement cost on one GPU; ties go to the lower start index."""
    comp, mem = _occupied(gpu)
    best = None
    for st in _free_starts(comp, mem, profile):
        c, m = _footprint(profile, st)
        cost = _cost(comp | c, mem | m)
        if best is None or cost < best[1]:
            best = (Placement(st, profile.size), cost)
    return best


def best_cluster_placement(
    gpus: Sequence[GpuState], profile: MigProfile, threshold: float
) -> Optional[tuple[int, Placement, Fraction]]:
    """Exhaustive reference for the load-balancing scheduler on GPUs without idle partitions.

    GPUs below the threshold are searched first; within a class the winner has
    the lowest cost, then the lowest GPU id, then the lowest start.
    """
    lazy, busy = [], []
    for g in gpus:
        used = len(_occupied(g)[0])
        (lazy if used / N_COMPUTE < threshold else busy).append(g)
    for group in (lazy, busy):
        cands = []
        for g in group:
            comp, mem = _occupied(g)
            for st in _free_starts(comp, mem, profile):
                c, m = _footprint(profile, st)
                cands.append((_cost(comp | c, mem | m), g.id, st))
        if cands:
            cost, gid, st = min(cands)
            return gid, Placement(st, profile.size), cost
    return None


def _busy_slots(gpu: GpuState) -> dict[int, tuple[MigProfile, int]]:
    return {i.job: (i.profile, i.placement.start) for i in gpu.instances if i.job is not None}


def _slots_cost(slots: dict) -> Fraction:
    comp: set[int] = set()
    mem: set[int] = set()
    for p, st in slots.values():
        c, m = _footprint(p, st)
        comp |= c
        mem |= m
    return _cost(comp, mem)


def _single_moves(slots: dict) -> Iterator[dict]:
    """Every state reachable by relocating one job to a slot disjoint from all held slices."""
    comp: set[int] = set()
    mem: set[int] = set()
    for p, st in slots.values():
        c, m = _footprint(p, st)
        comp |= c
        mem |= m
    for job, (p, _) in sorted(slots.items()):
        for st in _free_starts(comp, mem, p):
            nxt = dict(slots)
            nxt[job] = (p, st)
            yield nxt


def intra_min_reachable(gpu: GpuState, depth: int) -> Fraction:
    """Lowest cost reachable from ``gpu`` by at most ``depth`` single-job relocations."""
    start = _busy_slots(gpu)
    best = _slots_cost(start)
    frontier = [start]
    for _ in range(depth):
        nxt = []
        for s in frontier:
            for t in _single_moves(s):
                best = min(best, _slots_cost(t))
                nxt.append(t)
        frontier = nxt
    return best


def improving_move_exists(gpu: GpuState) -> bool:
    slots = _busy_slots(gpu)
    here = _slots_cost(slots)
    return any(_slots_cost(t) < here for t in _single_moves(slots))


@dataclass
class Discrepancy:
    check: str
    state: list[tuple[str, int]]
    profile: str
    expected: object
    actual: object

    def __str__(self) -> str:
        slots = ", ".join(f"{n}@{s}" for n, s in self.state) or "empty"
        return f"[{self.check}] GPU {{{slots}}} profile {self.profile}: expected {self.expected}, got {self.actual}"


def differential_check(depth: int, stop_after: int = 1) -> tuple[int, list[Discrepancy]]:
    """Compare the package's metric and placement code against the brute-force versions.

    Returns the number of states checked and the discrepancies found (at most ``stop_after``).
    """
    # looked up at call time so a patched implementation is what gets checked
    from . import frag
    from .config import SchedulerConfig
    from .job import Job
    from . import scheduler

    cfg = SchedulerConfig()
    bad: list[Discrepancy] = []
    n = 0
    for gpu in enumerate_states(depth):
        n += 1
        desc = [(i.profile.name, i.placement.start) for i in gpu.instances]
        cost = frag.frag_cost(gpu)
        ref_cost = brute_cost(gpu)
        if cost != float(ref_cost):
            bad.append(Discrepancy("frag_cost", desc, "-", ref_cost, cost))
        for p in PROFILES.values():
            feas = frag.feasible_mig_num(gpu, p)
            ref = brute_feasible(gpu, p)
            if feas != ref:
                bad.append(Discrepancy("feasible", desc, p.name, ref, feas))
            ideal = frag.ideal_mig_num(gpu, p)
            if ideal != brute_ideal(gpu, p):
                bad.append(Discrepancy("ideal", desc, p.name, brute_ideal(gpu, p), ideal))
            if feas > ideal:
                bad.append(Discrepancy("feasible<=ideal", desc, p.name, f"<= {ideal}", feas))
            d = scheduler.schedule(Job(-1, 0.0, p.name, 1.0), [gpu], cfg)
            ref_pl = best_placement_search(gpu, p)
            got = (d.placement, d.cost) if d.placed else None
            want = (ref_pl[0], float(ref_pl[1])) if ref_pl else None
            if got != want:
                bad.append(Discrepancy("placement", desc, p.name, want, got))
        if stop_after and len(bad) >= stop_after:
            break
    return n, bad[:stop_after] if stop_after else bad
