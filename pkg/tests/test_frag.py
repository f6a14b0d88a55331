import pytest
from hypothesis import given

from migsched import oracle
from migsched.frag import feasible_mig_num, frag_cost, frag_report, ideal_mig_num
from migsched.mig_model import PROFILES, make_gpu, remove_job

from strategies import gpu_states

P = PROFILES
EMPTY = make_gpu()
THREE_G_AT_0 = make_gpu(busy=[("3g.20gb", 0, 1)])


def test_ideal_examples():
    assert ideal_mig_num(EMPTY, P["1g.5gb"]) == 7
    assert ideal_mig_num(EMPTY, P["7g.40gb"]) == 1
    assert ideal_mig_num(THREE_G_AT_0, P["7g.40gb"]) == 0


def test_feasible_examples():
    assert feasible_mig_num(EMPTY, P["1g.5gb"]) == 7
    assert feasible_mig_num(THREE_G_AT_0, P["4g.20gb"]) == 0
    assert feasible_mig_num(THREE_G_AT_0, P["1g.5gb"]) == 3


# expected values come from the set-based oracle, cross-checked by hand
@pytest.mark.parametrize(
    "busy,expected",
    [
        ([], 0.0),
        ([("3g.20gb", 0, 1)], 0.35),
        ([("2g.10gb", 2, 1)], 0.2),
        ([("2g.10gb", 4, 1)], 0.0),
        ([("3g.20gb", 4, 1)], 0.0),
        ([("4g.20gb", 0, 1), ("3g.20gb", 4, 2)], 0.0),
        ([("7g.40gb", 0, 1)], 0.0),
    ],
)
def test_frag_cost_examples(busy, expected):
    gpu = make_gpu(busy=busy)
    assert frag_cost(gpu) == expected
    assert frag_cost(gpu) == float(oracle.brute_cost(gpu))


def test_report_ratios_for_3g_at_0():
    rep = frag_report(THREE_G_AT_0)
    ratios = {n: pf.ratio for n, pf in rep.per_profile.items()}
    assert ratios == {"7g.40gb": None, "4g.20gb": 0.0, "3g.20gb": 1.0, "2g.10gb": 0.5, "1g.10gb": 1.0,
                      "1g.5gb": 0.75}
    assert rep.to_dict()["per_profile"]["7g.40gb"]["ratio"] == "excluded"
    assert rep.cost == 0.35


@given(gpu_states())
def test_feasible_le_ideal_and_cost_in_unit_interval(gpu):
    for p in P.values():
        assert feasible_mig_num(gpu, p) <= ideal_mig_num(gpu, p)
    assert 0.0 <= frag_cost(gpu) <= 1.0


@given(gpu_states(with_idle=True))
def test_cost_ignores_idle_instances(gpu):
    busy_only = make_gpu(busy=[(i.profile.name, i.placement.start, i.job) for i in gpu.busy()])
    assert frag_cost(gpu) == frag_cost(busy_only)


def test_fully_busy_gpus_cost_zero():
    for gpu in oracle.enumerate_states(7):
        if gpu.remaining_compute == 0:
            assert frag_cost(gpu) == 0.0


def test_remove_job_helper():
    g = make_gpu(busy=[("3g.20gb", 0, 1), ("1g.5gb", 4, 2)])
    assert frag_cost(remove_job(g, 2)) == 0.35
