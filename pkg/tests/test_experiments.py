import csv

import numpy as np
import pytest

from weasel_muse.dtwi import DtwConfig
from weasel_muse.experiments import (
    ABLATION_ARMS,
    TEST_SEED_OFFSET,
    RunReport,
    ablation,
    benchmark,
    make_oscillations,
    noise_sweep,
    parse_levels,
    run_dtwi,
    run_muse,
)
from weasel_muse.ingest import add_gaussian_noise, normalize_dataset


@pytest.fixture(scope="module")
def waves():
    return (make_oscillations(6, length=48, seed=1),
            make_oscillations(4, length=48, seed=2, prefix="t"))


def test_parse_levels():
    levels = parse_levels("0:1:0.1")
    assert len(levels) == 11 and levels[0] == 0.0 and levels[-1] == 1.0
    assert levels[3] == 0.3
    assert parse_levels("0,0.5") == [0.0, 0.5]
    for bad in ("1:0", "0:1:0", "-1,2", ""):
        with pytest.raises(ValueError):
            parse_levels(bad)


def test_make_oscillations_shape_and_seed():
    a = make_oscillations(3, length=32, n_dims=3, seed=7)
    b = make_oscillations(3, length=32, n_dims=3, seed=7)
    assert len(a) == 6 and a.n_dims == 3 and a.labels == ["0", "1"] * 3
    for u, v in zip(a, b):
        np.testing.assert_array_equal(u.values, v.values)


def test_level_zero_equals_clean_run(waves):
    train, test = waves
    row = noise_sweep(train, test, [0.0], l=2, binning="equi_depth")[0]
    rec, _, _ = run_muse(normalize_dataset(train), normalize_dataset(test), l=2,
                         binning="equi_depth")
    dt, _ = run_dtwi(normalize_dataset(train), normalize_dataset(test))
    assert row == dict(level=0.0, muse_acc=rec.accuracy, dtwi_acc=dt.accuracy)


def test_noise_sweep_uses_distinct_train_and_test_seeds(waves):
    train, test = waves
    rows = noise_sweep(train, test, [0.5], seed=3, l=2, binning="equi_depth")
    tr = add_gaussian_noise(normalize_dataset(train), 0.5, 3)
    te = add_gaussian_noise(normalize_dataset(test), 0.5, 3 + TEST_SEED_OFFSET)
    rec, _, _ = run_muse(tr, te, l=2, binning="equi_depth")
    assert rows[0]["muse_acc"] == rec.accuracy


def test_benchmark_record(waves):
    out = benchmark(*waves, l=2, binning="equi_depth", dtw=DtwConfig(normalize=False), name="w")
    assert out["muse"].dataset == "w" and out["dtwi"].method == "dtwi"
    assert out["dtwi_ms"] >= 0 and out["ratio"] >= 0


def test_ablation_arms(waves):
    arms = ablation(*waves, l=2, binning="equi_depth")
    assert [a for a, _ in arms] == [a for a, _, _ in ABLATION_ARMS]
    for (_, multi, derivs), (_, rec) in zip(ABLATION_ARMS, arms):
        assert f"derivatives={int(derivs)}" in rec.config
        assert f"multivariate={int(multi)}" in rec.config


def test_run_report_csv(tmp_path, waves):
    report = RunReport()
    rec, _, _ = run_muse(*waves, l=2, binning="equi_depth", name="w")
    report.add(rec)
    report.add(run_dtwi(*waves, name="w")[0])
    p = tmp_path / "runs.csv"
    report.write(p)
    rows = list(csv.DictReader(open(p)))
    assert [r["method"] for r in rows] == ["muse", "dtwi"]
    assert list(rows[0]) == RunReport.columns
    assert int(rows[0]["peak_feature_count"]) > 0
