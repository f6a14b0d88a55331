"""Hypothesis strategies for random but valid GPU states."""
from hypothesis import strategies as st

from migsched.mig_model import PROFILES, make_gpu
from migsched.oracle import SLOTS

SLOT_NAMES = [(p.name, s) for p, s in SLOTS]


def _disjoint_subset(slots):
    taken_c, taken_m, out = set(), set(), []
    for name, start in slots:
        p = PROFILES[name]
        c = set(range(start, start + p.compute_slices))
        m = set(range(start, start + p.memory_slices))
        if c & taken_c or m & taken_m:
            continue
        taken_c |= c
        taken_m |= m
        out.append((name, start))
    return out


@st.composite
def gpu_states(draw, gpu_id=0, max_busy=7, with_idle=False, job_base=0):
    picks = _disjoint_subset(draw(st.lists(st.sampled_from(SLOT_NAMES), max_size=12)))
    n_busy = draw(st.integers(0, min(max_busy, len(picks))))
    busy = [(n, s, job_base + j) for j, (n, s) in enumerate(picks[:n_busy])]
    idle = picks[n_busy:] if with_idle else []
    return make_gpu(gpu_id, busy=busy, idle=idle)


@st.composite
def clusters(draw, max_gpus=3, max_busy=3, with_idle=False):
    g = draw(st.integers(1, max_gpus))
    return [draw(gpu_states(i, max_busy, with_idle, job_base=100 * i)) for i in range(g)]
