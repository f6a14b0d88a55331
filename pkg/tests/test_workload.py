import json
import statistics

import numpy as np
import pytest

from migsched.errors import BadSpec, ParseError, UnknownProfile
from migsched.workload import (
    PRESETS,
    STATIC_MIX,
    ServiceDist,
    WorkloadSpec,
    dump_trace,
    generate,
    get_preset,
    load_trace,
)


def test_mean_interarrival_close_to_target():
    jobs = generate(WorkloadSpec(25.0, job_count=1000, seed=7))
    gaps = np.diff([0.0] + [j.arrival_s for j in jobs])
    assert abs(gaps.mean() - 25.0) / 25.0 < 0.10


def test_long_queries_sit_above_the_median():
    dist = ServiceDist()
    rng = np.random.default_rng(0)
    median_est = float(np.median([dist.ppf(u) for u in rng.uniform(0, 1, 100_000)]))
    jobs = generate(WorkloadSpec(25.0, "Long", job_count=2000, seed=11))
    assert min(j.service_s for j in jobs) >= median_est * 0.999
    assert dist.median() == pytest.approx(120.0)


def test_same_seed_same_trace():
    a = generate(get_preset("Long(50)"))
    b = generate(get_preset("Long(50)"))
    assert a == b
    assert a != generate(get_preset("Long(50)", seed=99))


def test_presets_and_mix():
    assert set(PRESETS) == {"Normal(25)", "Long(25)", "Normal(50)", "Long(50)"}
    assert sum(STATIC_MIX.values()) == pytest.approx(1.0)
    with pytest.raises(BadSpec):
        get_preset("Medium(10)")


@pytest.mark.parametrize(
    "spec",
    [
        WorkloadSpec(mean_interarrival_s=0.0),
        WorkloadSpec(job_count=-1),
        WorkloadSpec(query_type="Short"),
        WorkloadSpec(profile_mix={"5g.25gb": 1.0}),
        WorkloadSpec(service_dist=ServiceDist("lognormal", {"median": -1.0, "sigma": 0.8})),
        WorkloadSpec(service_dist=ServiceDist("uniform", {"low": 5.0, "high": 1.0})),
    ],
)
def test_bad_specs(spec):
    with pytest.raises((BadSpec, UnknownProfile)):
        generate(spec)


def test_trace_roundtrip(tmp_path):
    jobs = generate(WorkloadSpec(job_count=30, seed=3))
    path = tmp_path / "t.jsonl"
    dump_trace(jobs, path)
    assert load_trace(path) == jobs


def write_lines(path, rows):
    path.write_text("\n".join(r if isinstance(r, str) else json.dumps(r) for r in rows) + "\n")


def rec(i, t, p="1g.5gb", s=10.0):
    return {"schema": 1, "job_id": i, "arrival_s": t, "profile": p, "service_s": s}


def test_load_trace_valid(tmp_path):
    p = tmp_path / "t.jsonl"
    write_lines(p, [rec(0, 0.0), rec(1, 1.0, "2g"), "", rec(2, 0.5, "3g.20gb")])
    jobs = load_trace(p)
    assert [j.id for j in jobs] == [0, 2, 1]
    assert jobs[2].profile == "2g.10gb"


def test_load_trace_errors(tmp_path):
    p = tmp_path / "t.jsonl"
    write_lines(p, [rec(0, 0.0), rec(1, 1.0, "5g.25gb")])
    with pytest.raises(UnknownProfile, match="line 2"):
        load_trace(p)

    write_lines(p, [rec(0, -1.0)])
    with pytest.raises(ParseError) as err:
        load_trace(p)
    assert err.value.line == 1

    write_lines(p, [rec(0, 0.0), "{not json"])
    with pytest.raises(ParseError) as err:
        load_trace(p)
    assert err.value.line == 2

    write_lines(p, [rec(0, 0.0), rec(0, 1.0)])
    with pytest.raises(ParseError):
        load_trace(p)


def test_service_families():
    assert ServiceDist("constant", {"value": 3.0}).ppf(0.9) == 3.0
    assert ServiceDist("exponential", {"mean": 10.0}).median() == pytest.approx(10.0 * np.log(2))
    assert ServiceDist("uniform", {"low": 1.0, "high": 3.0}).ppf(0.5) == 2.0
    ln = ServiceDist()
    samples = [ln.ppf(u) for u in np.linspace(0.001, 0.999, 999)]
    assert statistics.median(samples) == pytest.approx(120.0, rel=1e-6)
