"""Per-GPU fragmentation cost.

For every profile the ideal count (capacity only) is compared with the
feasible count (legal, unoccupied placements). The cost is one minus the mean
feasible/ideal ratio. Profiles whose ideal count is zero are left out of the
mean; if every profile is left out the GPU is full and its cost is 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .mig_model import COMPUTE_SLICES, MEMORY_SLICES, PROFILES, GpuState, MigProfile, _masks


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _ideal(cmask: int, mmask: int, profile: MigProfile) -> int:
    rc = COMPUTE_SLICES - _popcount(cmask)
    rm = MEMORY_SLICES - _popcount(mmask)
    return min(rc // profile.compute_slices, rm // profile.memory_slices)


def _feasible(cmask: int, mmask: int, profile: MigProfile) -> int:
    n = 0
    for st in profile.start_indexes:
        c, m = _masks(profile, st)
        if not (c & cmask) and not (m & mmask):
            n += 1
    return n


def ideal_mig_num(gpu: GpuState, profile: MigProfile) -> int:
    return _ideal(*gpu.busy_masks, profile)


def feasible_mig_num(gpu: GpuState, profile: MigProfile) -> int:
    return _feasible(*gpu.busy_masks, profile)


@lru_cache(maxsize=None)
def _exact_cost(cmask: int, mmask: int) -> Fraction:
    ratios = []
    for profile in PROFILES.values():
        ideal = _ideal(cmask, mmask, profile)
        if ideal > 0:
            ratios.append(Fraction(_feasible(cmask, mmask, profile), ideal))
    if not ratios:
        return Fraction(0)
    return 1 - sum(ratios) / len(ratios)


def cost_of_masks(cmask: int, mmask: int) -> float:
    """Fragmentation cost of a GPU given its busy compute/memory bitmasks.

    Every scheduler and planner evaluation goes through here, so tests can
    count evaluations by wrapping this function.
    """
    return float(_exact_cost(cmask, mmask))


def frag_cost(gpu: GpuState) -> float:
    return cost_of_masks(*gpu.busy_masks)


def mean_frag_cost(gpus) -> float:
    gpus = list(gpus)
    return sum(frag_cost(g) for g in gpus) / len(gpus) if gpus else 0.0


@dataclass
class ProfileFrag:
    ideal: int
    feasible: int
    ratio: Optional[float]  # None when excluded (ideal == 0)


@dataclass
class FragReport:
    gpu: int
    per_profile: dict[str, ProfileFrag]
    cost: float

    def to_dict(self) -> dict:
        return {
            "gpu": self.gpu,
            "cost": self.cost,
            "per_profile": {
                name: {
                    "ideal": pf.ideal,
                    "feasible": pf.feasible,
                    "ratio": "excluded" if pf.ratio is None else pf.ratio,
                }
                for name, pf in self.per_profile.items()
            },
        }


def frag_report(gpu: GpuState) -> FragReport:
    per = {}
    for name, profile in PROFILES.items():
        ideal = ideal_mig_num(gpu, profile)
        feas = feasible_mig_num(gpu, profile)
        per[name] = ProfileFrag(ideal, feas, feas / ideal if ideal else None)
    return FragReport(gpu.id, per, frag_cost(gpu))
