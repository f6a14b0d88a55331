from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass
class Job:
    """A job requesting one MIG instance of a fixed profile.

    ``service_s`` is the work the job needs at zero contention. The lifecycle
    timestamps are filled in by the simulator.
    """

    id: int
    arrival_s: float
    profile: str
    service_s: float
    dispatched_s: Optional[float] = None
    scheduled_s: Optional[float] = None
    completed_s: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "job_id": self.id,
            "arrival_s": self.arrival_s,
            "profile": self.profile,
            "service_s": self.service_s,
        }
