import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from msf_lab.errors import CapExceeded, ConfigError
from msf_lab.experiment import KINDS, ExperimentConfig, read_csv, run_experiment
from msf_lab.rng import RNG_ID, label_bits, seeded_label, structural_key, to_unit
from msf_lab.trials import WORKERS_ENV, resolve_workers, run_trials, statistics


def test_statistics_examples():
    s = statistics([2, 2, 2])
    assert (s.mean, s.stderr, s.count) == (2.0, 0.0, 3)
    s = statistics([0, 1])
    assert (s.mean, s.stderr, s.count) == (0.5, 0.5, 2)
    s = statistics([3.5])
    assert (s.mean, s.stderr, s.count, s.single) == (3.5, 0.0, 1, True)
    with pytest.raises(ValueError):
        statistics([])


def test_fair_coin_self_test():
    coins = (to_unit(label_bits(np.arange(10_000, dtype=np.uint64), 77, 0, 0)) < 0.5).astype(float)
    s = statistics(coins)
    assert abs(s.mean - 0.5) <= 3 * s.stderr
    assert s.stderr == pytest.approx(0.005, rel=0.01)


def test_seeded_label_deterministic():
    assert seeded_label(1, 12345, 2, 3) == seeded_label(1, 12345, 2, 3)
    assert seeded_label(1, 12345, 2, 3) != seeded_label(1, 12345, 2, 4)
    assert 0 <= seeded_label(0, 0, 0, 0) < 1
    assert to_unit(np.array([2 ** 64 - 1], dtype=np.uint64))[0] < 1.0


def test_chi_square_uniformity():
    keys = np.array([structural_key(("edge", i)) for i in range(100_000)], dtype=np.uint64)
    u = to_unit(label_bits(keys, 2024, 1, 0))
    counts = np.bincount((u * 100).astype(int), minlength=100)
    chi2 = float(((counts - 1000.0) ** 2 / 1000.0).sum())
    lo, hi = sps.chi2.ppf([0.0005, 0.9995], df=99)
    assert lo <= chi2 <= hi


def test_layer_streams_uncorrelated():
    keys = np.arange(100_000, dtype=np.uint64)
    x = to_unit(label_bits(keys, 5, 1, 0))
    y = to_unit(label_bits(keys, 5, 2, 0))
    assert abs(np.corrcoef(x, y)[0, 1]) < 0.01
    z = to_unit(label_bits(keys, 5, 1, 1))
    assert abs(np.corrcoef(x, z)[0, 1]) < 0.01
    # consecutive keys (serial correlation)
    assert abs(np.corrcoef(x[:-1], x[1:])[0, 1]) < 0.01


def test_run_trials_order_and_workers(monkeypatch):
    assert run_trials(lambda t: t * t, 10, workers=3) == [t * t for t in range(10)]
    monkeypatch.setenv(WORKERS_ENV, "4")
    assert resolve_workers() == 4
    assert resolve_workers(0) == 1


configs = st.builds(
    ExperimentConfig,
    kind=st.sampled_from(KINDS),
    seed=st.integers(0, 2 ** 40),
    trials=st.integers(1, 10 ** 6),
    family=st.sampled_from(["free", "abelian", "free_product"]),
    orders=st.lists(st.integers(2, 7), max_size=3).map(tuple),
    power=st.integers(1, 4),
    sides=st.lists(st.integers(3, 20), max_size=3).map(tuple),
    radii=st.lists(st.integers(1, 12), max_size=4).map(tuple),
    a=st.sampled_from(["", "a*a", "e1"]),
    tolerance=st.floats(1e-15, 1e-3),
    csv=st.sampled_from(["", "out/run.csv"]),
)


@given(configs)
@settings(max_examples=50)
def test_config_round_trip(cfg):
    assert ExperimentConfig.from_ini(cfg.to_ini()) == cfg


def test_validation_names_fields():
    cases = [
        (dict(patch="torus", family="abelian", dim=2, sides=(2, 6)), "sides"),
        (dict(trials=0), "trials"),
        (dict(kind="bogus"), "kind"),
        (dict(kind="tau-stats", a="a*a"), "b"),
        (dict(kind="corollary-scan", k_list=(1, 2), radii=(3,)), "radii"),
        (dict(family="free", rank=0), "group"),
    ]
    for kwargs, field in cases:
        with pytest.raises(ConfigError) as info:
            ExperimentConfig(**kwargs).validate()
        assert info.value.field == field


def test_unknown_config_field():
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_ini("[experiment]\nkind = fmsf\ncolour = blue\n")
    assert info.value.field == "experiment.colour"
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_ini("[experiment]\ntrials = many\n")
    assert info.value.field == "trials"


def test_fmsf_on_tree():
    rec = run_experiment(ExperimentConfig(kind="fmsf", trials=20, radius=3))
    header, cols, rows = read_csv(rec.to_csv())
    assert header["rng"] == RNG_ID and header["format"] == "msf-lab format 1"
    assert ExperimentConfig.from_json(header["config"]) == rec.config
    assert header["config_sha256"] == rec.config.digest()
    row = dict(zip(cols, rows[0]))
    assert float(row["mean_degree"]) == 4.0 and float(row["stderr"]) == 0.0
    assert row["graph"] == "Cay(F2,S) ball R=3"


def test_csv_identical_across_workers():
    cfg = ExperimentConfig(kind="fmsf", family="free", power=2, radius=2, trials=40, seed=9, radii=(1, 2))
    one = run_experiment(cfg, workers=1).to_csv()
    three = run_experiment(cfg, workers=3).to_csv()
    assert one == three


def test_relative_audit_records():
    cfg = ExperimentConfig(kind="relative-msf", family="abelian", dim=2, patch="torus", sides=(4, 4), a="e1",
                           trials=3, audit="full", audit_path="x.jsonl")
    rec = run_experiment(cfg)
    assert {e["trial"] for e in rec.audit} == {0, 1, 2}
    assert all(e["connected"] for e in rec.audit)
    lines = rec.audit_lines().splitlines()
    assert len(lines) == len(rec.audit)


def test_tau_stats_experiment():
    cfg = ExperimentConfig(kind="tau-stats", family="free", power=2, radius=3, a="a*a", b="b*b", n_max=3,
                           n_list=(1, 2), trials=5)
    rec = run_experiment(cfg)
    _, cols, rows = read_csv(rec.to_csv())
    assert [int(r[0]) for r in rows] == [1, 2]
    assert all(r[cols.index("all_acyclic")] == "true" for r in rows)


def test_bad_slot_and_cap():
    cfg = ExperimentConfig(kind="relative-msf", family="abelian", dim=2, patch="torus", sides=(4, 4), a="e9")
    with pytest.raises(ConfigError) as info:
        run_experiment(cfg)
    assert info.value.field == "a"
    with pytest.raises(CapExceeded):
        run_experiment(ExperimentConfig(kind="fmsf", radius=12, vertex_cap=500))


def test_spectral_experiment():
    rec = run_experiment(ExperimentConfig(kind="spectral", radii=(2, 3), n_list=(2, 4)))
    _, cols, rows = read_csv(rec.to_csv())
    assert [r[0] for r in rows] == ["power", "power", "cycles", "cycles"]
    assert [r[cols.index("c_n")] for r in rows[2:]] == ["4", "28"]
    assert math.isclose(float(rows[0][cols.index("lambda_exact")]), math.sqrt(3) / 2)
