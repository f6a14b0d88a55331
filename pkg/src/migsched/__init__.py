"""Online fragmentation-aware scheduling for Multi-Instance-GPU nodes."""
from .config import Features, SchedulerConfig, load_config
from .frag import feasible_mig_num, frag_cost, frag_report, ideal_mig_num
from .job import Job
from .mig_model import (
    PROFILES,
    GpuState,
    LoadClass,
    MigProfile,
    Placement,
    avail,
    classify,
    create_instance,
    get_profile,
    make_gpu,
    release_job,
    slice_footprint,
    utilization,
    valid,
)
from .migration import MigrationMove, MigrationPlan, apply_move, on_departure, plan_inter, plan_intra
from .scheduler import ScheduleDecision, first_fit_schedule, schedule, try_dequeue
from .sim import SimReport, metrics, run, slowdown
from .workload import PRESETS, WorkloadSpec, generate, load_trace

__version__ = "0.1.0"
