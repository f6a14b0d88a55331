"""MIG-partitionable GPU model: profiles, placements, instances and per-GPU occupancy.

A GPU exposes 7 compute slices and 8 memory slices. An instance placed at start
index ``st`` occupies compute slices ``st .. st+cs-1`` and memory slices
``st .. st+ms-1``. Only busy instances (bound to a job) block new placements;
idle instances are real partitions that get destroyed lazily when a new
instance overlaps them.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from typing import Iterable, Optional, Sequence

from .errors import BadThreshold, InvalidPlacement, SlicesBusy, UnknownJob, UnknownProfile

COMPUTE_SLICES = 7
MEMORY_SLICES = 8


@dataclass(frozen=True)
class MigProfile:
    name: str
    compute_slices: int
    memory_slices: int
    start_indexes: tuple[int, ...]
    size: int

    def placements(self) -> list["Placement"]:
        return [Placement(st, self.size) for st in self.start_indexes]


# A100 40GB instance profiles, largest first.
PROFILES: dict[str, MigProfile] = {
    p.name: p
    for p in (
        MigProfile("7g.40gb", 7, 8, (0,), 8),
        MigProfile("4g.20gb", 4, 4, (0,), 4),
        MigProfile("3g.20gb", 3, 4, (0, 4), 4),
        MigProfile("2g.10gb", 2, 2, (0, 2, 4), 2),
        MigProfile("1g.10gb", 1, 2, (0, 2, 4, 6), 2),
        MigProfile("1g.5gb", 1, 1, (0, 1, 2, 3, 4, 5, 6), 1),
    )
}

# Short aliases accepted wherever a profile name is parsed.
ALIASES = {"7g": "7g.40gb", "4g": "4g.20gb", "3g": "3g.20gb", "2g": "2g.10gb", "1g": "1g.5gb"}


def get_profile(name: str | MigProfile) -> MigProfile:
    if isinstance(name, MigProfile):
        return name
    try:
        return PROFILES[ALIASES.get(name, name)]
    except KeyError:
        raise UnknownProfile(f"unknown MIG profile {name!r}") from None


@dataclass(frozen=True, order=True)
class Placement:
    start: int
    size: int

    def __post_init__(self):
        if self.start < 0 or self.size < 1 or self.start + self.size > MEMORY_SLICES:
            raise InvalidPlacement(f"placement ({self.start},{self.size}) outside the memory axis")

    def __str__(self) -> str:
        return f"({self.start},{self.size})"


@dataclass(frozen=True)
class Instance:
    id: str
    profile: MigProfile
    placement: Placement
    job: Optional[int] = None

    @property
    def idle(self) -> bool:
        return self.job is None


class LoadClass(enum.Enum):
    LAZY = "Lazy"
    BUSY = "Busy"


def valid(profile: MigProfile, placement: Placement) -> bool:
    return placement.size == profile.size and placement.start in profile.start_indexes


def _check_valid(profile: MigProfile, placement: Placement) -> None:
    if not valid(profile, placement):
        raise InvalidPlacement(f"{profile.name} cannot be placed at {placement}")


@lru_cache(maxsize=None)
def _masks(profile: MigProfile, start: int) -> tuple[int, int]:
    cmask = ((1 << profile.compute_slices) - 1) << start
    mmask = ((1 << profile.memory_slices) - 1) << start
    return cmask, mmask


def footprint_masks(profile: MigProfile, placement: Placement) -> tuple[int, int]:
    """Bitmask form of :func:`slice_footprint` (bit i set = slice i occupied)."""
    _check_valid(profile, placement)
    return _masks(profile, placement.start)


def slice_footprint(profile: MigProfile, placement: Placement) -> tuple[frozenset[int], frozenset[int]]:
    _check_valid(profile, placement)
    st = placement.start
    return (
        frozenset(range(st, st + profile.compute_slices)),
        frozenset(range(st, st + profile.memory_slices)),
    )


def _overlaps(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return bool(a[0] & b[0]) or bool(a[1] & b[1])


@dataclass(frozen=True)
class GpuState:
    id: int
    instances: tuple[Instance, ...] = ()
    next_serial: int = field(default=0, compare=False)

    compute_capacity = COMPUTE_SLICES
    memory_capacity = MEMORY_SLICES

    @cached_property
    def busy_masks(self) -> tuple[int, int]:
        cm = mm = 0
        for inst in self.instances:
            if inst.job is not None:
                c, m = _masks(inst.profile, inst.placement.start)
                cm |= c
                mm |= m
        return cm, mm

    @property
    def busy_compute(self) -> int:
        return bin(self.busy_masks[0]).count("1")

    @property
    def busy_memory(self) -> int:
        return bin(self.busy_masks[1]).count("1")

    @property
    def remaining_compute(self) -> int:
        return COMPUTE_SLICES - self.busy_compute

    @property
    def remaining_memory(self) -> int:
        return MEMORY_SLICES - self.busy_memory

    def busy(self) -> list[Instance]:
        return [i for i in self.instances if i.job is not None]

    def idle(self) -> list[Instance]:
        return [i for i in self.instances if i.job is None]

    def jobs(self) -> list[int]:
        """Distinct job ids hosted here, in ascending order."""
        return sorted({i.job for i in self.instances if i.job is not None})

    def instances_of(self, job: int) -> list[Instance]:
        return [i for i in self.instances if i.job == job]

    def idle_match(self, profile: MigProfile, placement: Placement) -> Optional[Instance]:
        for inst in self.instances:
            if inst.job is None and inst.profile == profile and inst.placement == placement:
                return inst
        return None


def avail(gpu: GpuState, profile: MigProfile, placement: Placement) -> bool:
    cm, mm = footprint_masks(profile, placement)
    bc, bm = gpu.busy_masks
    return not (cm & bc) and not (mm & bm)


def utilization(gpu: GpuState) -> float:
    return gpu.busy_compute / COMPUTE_SLICES


def check_threshold(t: float) -> None:
    if not 0.0 <= t <= 1.0:
        raise BadThreshold(f"threshold {t} outside [0, 1]")


def classify(gpu: GpuState, t: float) -> LoadClass:
    check_threshold(t)
    return LoadClass.LAZY if utilization(gpu) < t else LoadClass.BUSY


def create_instance(
    gpu: GpuState, profile: MigProfile, placement: Placement, job: int
) -> tuple[GpuState, int]:
    """Bind ``job`` to an instance at ``placement``, partitioning the GPU if needed.

    Returns the new state and the number of reconfiguration operations
    (instance destroys plus creates) that the change required.
    """
    if not avail(gpu, profile, placement):
        raise SlicesBusy(f"GPU {gpu.id}: {profile.name}@{placement} overlaps a busy instance")
    match = gpu.idle_match(profile, placement)
    if match is not None:
        instances = tuple(replace(i, job=job) if i is match else i for i in gpu.instances)
        return replace(gpu, instances=instances), 0

    fp = _masks(profile, placement.start)
    kept = []
    ops = 0
    for inst in gpu.instances:
        if inst.job is None and _overlaps(fp, _masks(inst.profile, inst.placement.start)):
            ops += 1
            continue
        kept.append(inst)
    new = Instance(f"gpu{gpu.id}-gi{gpu.next_serial}", profile, placement, job)
    kept.append(new)
    return replace(gpu, instances=tuple(kept), next_serial=gpu.next_serial + 1), ops + 1


def release_job(gpu: GpuState, job: int) -> GpuState:
    """Turn every instance bound to ``job`` idle; the partitions themselves stay."""
    if not any(i.job == job for i in gpu.instances):
        raise UnknownJob(f"job {job} is not running on GPU {gpu.id}")
    return replace(gpu, instances=tuple(replace(i, job=None) if i.job == job else i for i in gpu.instances))


def release_instance(gpu: GpuState, instance_id: str) -> GpuState:
    for inst in gpu.instances:
        if inst.id == instance_id:
            break
    else:
        raise UnknownJob(f"no instance {instance_id} on GPU {gpu.id}")
    return replace(
        gpu, instances=tuple(replace(i, job=None) if i.id == instance_id else i for i in gpu.instances)
    )


def remove_job(gpu: GpuState, job: int) -> GpuState:
    """State with ``job``'s instances dropped entirely (used for hypothetical costs)."""
    return replace(gpu, instances=tuple(i for i in gpu.instances if i.job != job))


def parse_slot(text: str) -> tuple[MigProfile, int]:
    """Parse ``"3g.20gb@4"`` into (profile, start)."""
    name, sep, start = text.partition("@")
    if not sep:
        raise InvalidPlacement(f"expected PROFILE@START, got {text!r}")
    return get_profile(name.strip()), int(start)


def make_gpu(
    gpu_id: int = 0,
    busy: Iterable[tuple[str, int, int]] = (),
    idle: Iterable[tuple[str, int]] = (),
) -> GpuState:
    """Build a GPU from ``(profile, start, job)`` busy triples and ``(profile, start)`` idle pairs.

    Raises InvalidPlacement or SlicesBusy if the result would break occupancy invariants.
    """
    instances: list[Instance] = []
    taken = (0, 0)
    for n, spec in enumerate([(p, s, j) for p, s, j in busy] + [(p, s, None) for p, s in idle]):
        name, start, job = spec
        profile = get_profile(name)
        placement = Placement(start, profile.size)
        fp = footprint_masks(profile, placement)
        if _overlaps(fp, taken):
            raise SlicesBusy(f"{profile.name}@{start} overlaps another instance on GPU {gpu_id}")
        taken = (taken[0] | fp[0], taken[1] | fp[1])
        instances.append(Instance(f"gpu{gpu_id}-gi{n}", profile, placement, job))
    return GpuState(gpu_id, tuple(instances), len(instances))


def gpu_from_layout(gpu_id: int, layout: Sequence[tuple[str, int]]) -> GpuState:
    return make_gpu(gpu_id, idle=layout)
