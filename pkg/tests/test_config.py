import pytest

from migsched.config import DEFAULT_STATIC_LAYOUT, STATIC_LAYOUTS, Features, SchedulerConfig, load_config
from migsched.errors import BadSpec, BadThreshold
from migsched.frag import frag_cost
from migsched.mig_model import gpu_from_layout


def test_defaults():
    cfg = load_config(None)
    assert cfg == SchedulerConfig()
    assert (cfg.threshold, cfg.alpha, cfg.gpus) == (0.4, 0.15, 4)
    assert cfg.features.label() == "LB+Dyn+Migr"
    assert Features(False, False, False).label() == "baseline"


def test_static_layouts_are_valid_and_share_a_multiset():
    multisets = set()
    for layout in STATIC_LAYOUTS.values():
        assert len(layout) == 4
        for i, per_gpu in enumerate(layout):
            g = gpu_from_layout(i, per_gpu)
            assert sum(inst.profile.compute_slices for inst in g.instances) <= 7
            assert g.busy_compute == 0 and frag_cost(g) == 0.0
        multisets.add(tuple(sorted(n for per_gpu in layout for n, _ in per_gpu)))
    assert len(STATIC_LAYOUTS) == 3 and len(multisets) == 1


def test_layout_selection():
    assert SchedulerConfig().layout_for(0) == ()
    static = SchedulerConfig().with_features(dynamic_partitioning=False)
    assert static.layout_for(5) == DEFAULT_STATIC_LAYOUT[1]


def test_load_toml(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text(
        'threshold = 0.5\nseed = 3\nstatic_layout = [["4g.20gb@0", "3g.20gb@4"]]\n'
        "[features]\nmigration = false\n[contention]\nalpha = 0.0\n"
        "[migration]\noverlap_s = 2.5\n[reconfig]\nlatency_s = 1.0\n[cluster]\ngpus = 2\n"
    )
    cfg = load_config(p)
    assert cfg.threshold == 0.5 and cfg.seed == 3 and cfg.alpha == 0.0 and cfg.gpus == 2
    assert cfg.overlap_s == 2.5 and cfg.reconfig_latency_s == 1.0
    assert cfg.features == Features(True, True, False)
    assert cfg.layout_for(1) == (("4g.20gb", 0), ("3g.20gb", 4))


@pytest.mark.parametrize(
    "body,err",
    [
        ("threshold = 1.2\n", BadThreshold),
        ("bogus = 1\n", BadSpec),
        ("[contention]\nalpha = -1\n", BadSpec),
        ('static_layout = [["4g.20gb@0", "4g.20gb@0"]]\n', Exception),
    ],
)
def test_bad_configs(tmp_path, body, err):
    p = tmp_path / "c.toml"
    p.write_text(body)
    with pytest.raises(err):
        load_config(p)
