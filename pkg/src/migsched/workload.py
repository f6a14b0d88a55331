"""Synthetic workload generation and JSON-Lines trace I/O.

Trace line format (one job per line)::

    {"schema": 1, "job_id": 0, "arrival_s": 12.5, "profile": "2g.10gb", "service_s": 140.2}
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from statistics import NormalDist
from typing import Iterable

import numpy as np

from .errors import BadSpec, ParseError, UnknownProfile
from .job import Job
from .mig_model import PROFILES, get_profile

TRACE_SCHEMA = 1

WORKLOAD_PROFILES = ("1g.5gb", "2g.10gb", "3g.20gb", "4g.20gb")
UNIFORM_MIX = {p: 0.25 for p in WORKLOAD_PROFILES}
# Matches the instance multiset of the shipped static layouts.
STATIC_MIX = {"1g.5gb": 4 / 12, "2g.10gb": 4 / 12, "3g.20gb": 2 / 12, "4g.20gb": 2 / 12}

_STD_NORMAL = NormalDist()


@dataclass(frozen=True)
class ServiceDist:
    """Service-time distribution. ``family`` is one of lognormal, exponential, uniform, constant.

    lognormal: median, sigma; exponential: mean; uniform: low, high; constant: value.
    """

    family: str = "lognormal"
    params: dict = field(default_factory=lambda: {"median": 120.0, "sigma": 0.8})

    def validate(self) -> None:
        p = self.params
        required = {
            "lognormal": ("median", "sigma"),
            "exponential": ("mean",),
            "uniform": ("low", "high"),
            "constant": ("value",),
        }.get(self.family)
        if required is None:
            raise BadSpec(f"unknown service distribution {self.family!r}")
        for k in required:
            if k not in p or not p[k] > 0:
                raise BadSpec(f"{self.family} needs a positive {k!r}")
        if self.family == "uniform" and not p["high"] > p["low"]:
            raise BadSpec("uniform needs high > low")

    def ppf(self, u: float) -> float:
        p = self.params
        if self.family == "lognormal":
            return p["median"] * math.exp(p["sigma"] * _STD_NORMAL.inv_cdf(u))
        if self.family == "exponential":
            return -p["mean"] * math.log1p(-u)
        if self.family == "uniform":
            return p["low"] + u * (p["high"] - p["low"])
        return p["value"]

    def median(self) -> float:
        return self.ppf(0.5)


@dataclass(frozen=True)
class WorkloadSpec:
    mean_interarrival_s: float = 25.0
    query_type: str = "Normal"  # "Normal" or "Long" (upper half of the service distribution)
    profile_mix: dict = field(default_factory=lambda: dict(UNIFORM_MIX))
    service_dist: ServiceDist = field(default_factory=ServiceDist)
    job_count: int = 1000
    seed: int = 0

    def validate(self) -> None:
        if not self.mean_interarrival_s > 0:
            raise BadSpec("mean_interarrival_s must be positive")
        if self.query_type not in ("Normal", "Long"):
            raise BadSpec(f"query_type must be Normal or Long, got {self.query_type!r}")
        if self.job_count < 0:
            raise BadSpec("job_count must be non-negative")
        if not self.profile_mix:
            raise BadSpec("profile_mix is empty")
        for name, prob in self.profile_mix.items():
            if name not in PROFILES:
                raise BadSpec(f"profile_mix names unknown profile {name!r}")
            if prob < 0:
                raise BadSpec("profile_mix probabilities must be non-negative")
        if abs(sum(self.profile_mix.values()) - 1.0) > 1e-9:
            raise BadSpec("profile_mix probabilities must sum to 1")
        self.service_dist.validate()


PRESETS: dict[str, WorkloadSpec] = {
    "Normal(25)": WorkloadSpec(25.0, "Normal", seed=25),
    "Long(25)": WorkloadSpec(25.0, "Long", seed=26),
    "Normal(50)": WorkloadSpec(50.0, "Normal", seed=50),
    "Long(50)": WorkloadSpec(50.0, "Long", seed=51),
}


def get_preset(name: str, seed: int | None = None) -> WorkloadSpec:
    try:
        spec = PRESETS[name]
    except KeyError:
        raise BadSpec(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    return spec if seed is None else replace(spec, seed=seed)


def generate(spec: WorkloadSpec) -> list[Job]:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n = spec.job_count
    gaps = rng.exponential(spec.mean_interarrival_s, size=n)
    arrivals = np.cumsum(gaps)
    names = list(spec.profile_mix)
    probs = np.array([spec.profile_mix[k] for k in names], dtype=float)
    picks = rng.choice(len(names), size=n, p=probs / probs.sum())
    # Long queries are drawn from the upper half of the distribution by inverse CDF.
    lo = 0.5 if spec.query_type == "Long" else 0.0
    u = rng.uniform(lo, 1.0, size=n)
    return [
        Job(i, float(arrivals[i]), names[picks[i]], float(spec.service_dist.ppf(float(u[i]))))
        for i in range(n)
    ]


def dump_trace(jobs: Iterable[Job], path: str | Path) -> None:
    with open(path, "w") as f:
        for job in jobs:
            f.write(json.dumps(job.to_dict(), sort_keys=True))
            f.write("\n")


def load_trace(path: str | Path) -> list[Job]:
    jobs = []
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(lineno, f"invalid JSON ({e.msg})") from None
            if not isinstance(rec, dict):
                raise ParseError(lineno, "expected a JSON object")
            if rec.get("schema", TRACE_SCHEMA) != TRACE_SCHEMA:
                raise ParseError(lineno, f"unsupported schema {rec.get('schema')!r}")
            try:
                job_id = int(rec["job_id"])
                arrival = float(rec["arrival_s"])
                profile = str(rec["profile"])
                service = float(rec["service_s"])
            except (KeyError, TypeError, ValueError) as e:
                raise ParseError(lineno, f"missing or malformed field: {e}") from None
            if not (math.isfinite(arrival) and arrival >= 0):
                raise ParseError(lineno, f"arrival_s must be a non-negative number, got {arrival}")
            if not (math.isfinite(service) and service > 0):
                raise ParseError(lineno, f"service_s must be positive, got {service}")
            try:
                profile = get_profile(profile).name
            except UnknownProfile as e:
                raise UnknownProfile(f"line {lineno}: {e}") from None
            jobs.append(Job(job_id, arrival, profile, service))
    ids = [j.id for j in jobs]
    if len(set(ids)) != len(ids):
        raise ParseError(0, "duplicate job_id")
    jobs.sort(key=lambda j: (j.arrival_s, j.id))
    return jobs
