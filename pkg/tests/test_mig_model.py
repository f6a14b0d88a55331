import pytest
from hypothesis import given
from hypothesis import strategies as st

from migsched.errors import BadThreshold, InvalidPlacement, SlicesBusy, UnknownJob, UnknownProfile
from migsched.mig_model import (
    PROFILES,
    LoadClass,
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

from strategies import gpu_states

P = PROFILES

TABLE = {
    "7g.40gb": (7, 8, (0,), 8),
    "4g.20gb": (4, 4, (0,), 4),
    "3g.20gb": (3, 4, (0, 4), 4),
    "2g.10gb": (2, 2, (0, 2, 4), 2),
    "1g.10gb": (1, 2, (0, 2, 4, 6), 2),
    "1g.5gb": (1, 1, (0, 1, 2, 3, 4, 5, 6), 1),
}


def test_profiles_match_a100_table():
    assert {n: (p.compute_slices, p.memory_slices, p.start_indexes, p.size) for n, p in P.items()} == TABLE


@pytest.mark.parametrize("profile", list(P.values()), ids=lambda p: p.name)
def test_every_legal_start_fits(profile):
    assert profile.size == profile.memory_slices
    for st_ in profile.start_indexes:
        assert st_ + profile.compute_slices - 1 <= 6
        assert st_ + profile.size - 1 <= 7
        comp, mem = slice_footprint(profile, Placement(st_, profile.size))
        assert comp <= set(range(7)) and mem <= set(range(8))


@pytest.mark.parametrize("profile", list(P.values()), ids=lambda p: p.name)
def test_footprints_of_one_profile_are_disjoint(profile):
    fps = [slice_footprint(profile, pl) for pl in profile.placements()]
    for i in range(len(fps)):
        for j in range(i + 1, len(fps)):
            assert not fps[i][0] & fps[j][0]
            assert not fps[i][1] & fps[j][1]


@pytest.mark.parametrize(
    "name,placement,expected",
    [("4g.20gb", (0, 4), True), ("4g.20gb", (4, 4), False), ("1g.5gb", (7, 1), False), ("2g.10gb", (4, 4), False)],
)
def test_valid(name, placement, expected):
    assert valid(P[name], Placement(*placement)) is expected


def test_placement_bounds():
    with pytest.raises(InvalidPlacement):
        Placement(7, 2)
    with pytest.raises(InvalidPlacement):
        Placement(-1, 1)


def test_slice_footprint_examples():
    assert slice_footprint(P["3g.20gb"], Placement(4, 4)) == ({4, 5, 6}, {4, 5, 6, 7})
    assert slice_footprint(P["7g.40gb"], Placement(0, 8)) == (set(range(7)), set(range(8)))
    assert slice_footprint(P["1g.10gb"], Placement(6, 2)) == ({6}, {6, 7})
    with pytest.raises(InvalidPlacement):
        slice_footprint(P["4g.20gb"], Placement(4, 4))


def test_avail_examples():
    g = make_gpu(busy=[("3g.20gb", 0, 1)])
    assert avail(g, P["3g.20gb"], Placement(4, 4))
    assert not avail(g, P["4g.20gb"], Placement(0, 4))
    assert avail(make_gpu(), P["7g.40gb"], Placement(0, 8))
    with pytest.raises(InvalidPlacement):
        avail(g, P["1g.5gb"], Placement(7, 1))


def test_idle_instances_never_block():
    g = make_gpu(idle=[("4g.20gb", 0), ("3g.20gb", 4)])
    assert avail(g, P["7g.40gb"], Placement(0, 8))
    assert utilization(g) == 0


def test_utilization_and_classify():
    assert utilization(make_gpu()) == 0
    assert utilization(make_gpu(busy=[("3g", 0, 1)])) == pytest.approx(3 / 7)
    assert utilization(make_gpu(busy=[("4g", 0, 1), ("3g", 4, 2)])) == 1.0
    assert classify(make_gpu(busy=[("3g", 0, 1)]), 0.4) is LoadClass.BUSY
    assert classify(make_gpu(busy=[("2g", 0, 1)]), 0.4) is LoadClass.LAZY
    assert classify(make_gpu(), 0.0) is LoadClass.BUSY
    with pytest.raises(BadThreshold):
        classify(make_gpu(), 1.2)


def test_create_instance_fresh_reuse_and_destroy():
    g, ops = create_instance(make_gpu(), P["2g.10gb"], Placement(4, 2), 7)
    assert ops == 1 and [(i.placement, i.job) for i in g.instances] == [(Placement(4, 2), 7)]

    idle2g = make_gpu(idle=[("2g.10gb", 4)])
    g, ops = create_instance(idle2g, P["2g.10gb"], Placement(4, 2), 7)
    assert ops == 0 and g.instances[0].id == idle2g.instances[0].id and g.instances[0].job == 7

    g, ops = create_instance(make_gpu(idle=[("3g.20gb", 4)]), P["2g.10gb"], Placement(4, 2), 7)
    assert ops == 2
    assert [(i.profile.name, i.job) for i in g.instances] == [("2g.10gb", 7)]


def test_create_instance_errors():
    g = make_gpu(busy=[("3g", 0, 1)])
    with pytest.raises(SlicesBusy):
        create_instance(g, P["4g.20gb"], Placement(0, 4), 2)
    with pytest.raises(InvalidPlacement):
        create_instance(g, P["4g.20gb"], Placement(4, 4), 2)


def test_release_job():
    g = release_job(make_gpu(busy=[("3g", 0, 1)]), 1)
    assert [i.idle for i in g.instances] == [True]
    assert g.remaining_compute == 7

    g = release_job(make_gpu(busy=[("1g.5gb", 6, 1), ("4g", 0, 2)]), 1)
    assert {(i.profile.name, i.job) for i in g.instances} == {("1g.5gb", None), ("4g.20gb", 2)}
    with pytest.raises(UnknownJob):
        release_job(g, 99)


def test_unknown_profile():
    with pytest.raises(UnknownProfile):
        get_profile("5g.25gb")


@given(gpu_states(with_idle=True), st.sampled_from(list(P)), st.integers(0, 6))
def test_create_then_release_restores_remaining(gpu, name, start):
    profile = P[name]
    if start not in profile.start_indexes:
        return
    pl = Placement(start, profile.size)
    if not avail(gpu, profile, pl):
        return
    g2, _ = create_instance(gpu, profile, pl, 999)
    g3 = release_job(g2, 999)
    assert (g3.remaining_compute, g3.remaining_memory) == (gpu.remaining_compute, gpu.remaining_memory)


@given(gpu_states(), st.sampled_from(list(P)), st.sampled_from(list(P)), st.integers(0, 6), st.integers(0, 6))
def test_avail_is_monotone(gpu, qname, aname, qstart, astart):
    q, a = P[qname], P[aname]
    if qstart not in q.start_indexes or astart not in a.start_indexes:
        return
    qpl, apl = Placement(qstart, q.size), Placement(astart, a.size)
    if not avail(gpu, a, apl):
        return
    bigger, _ = create_instance(gpu, a, apl, 999)
    if not avail(gpu, q, qpl):
        assert not avail(bigger, q, qpl)


@given(gpu_states(with_idle=True))
def test_occupancy_invariants(gpu):
    seen_c, seen_m = set(), set()
    for inst in gpu.instances:
        c, m = slice_footprint(inst.profile, inst.placement)
        assert not c & seen_c and not m & seen_m
        seen_c |= c
        seen_m |= m
    assert gpu.remaining_compute == 7 - sum(i.profile.compute_slices for i in gpu.busy())
    assert gpu.remaining_memory == 8 - sum(i.profile.memory_slices for i in gpu.busy())
