import json
import os
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from app.core.errors import TrialFailedError
from app.eval import METHODS, SyntheticSpec, UniformMissing, WholeColumns, cep, run_method, run_trials, score, synth
from app.eval.methods import method_settings
from app.grid import aggregate, load_trajectories, trim_empty_borders

SMALL = {"tau_s": 3, "tau_t": 3, "truncation_r": 1, "max_iters": 30}


def corridor(n_vehicles=40, speed=None, seed=0):
    """Машины въезжают по очереди и едут по участку 0..300 фут с записью раз в секунду."""
    rng = np.random.default_rng(seed)
    rows = []
    for vid in range(1, n_vehicles + 1):
        v = speed if speed is not None else float(rng.uniform(20, 45))
        t0 = 2.0 * vid
        for k in range(int(300 / v) + 1):
            rows.append((vid, t0 + k, v * k, v))
    return pd.DataFrame(rows, columns=["vehicle_id", "time_s", "position_ft", "speed_fts"])


def test_constant_speed_mean_fill_is_exact():
    report = run_trials(corridor(speed=30.0), fraction=0.5, n_trials=1, methods=["mean"],
                        settings={}, progress=False)
    summary = report.summaries["mean"]
    assert summary.mae_mean == 0.0 and summary.rmse_mean == 0.0
    assert summary.n_trials == 1


def test_position_window_shrinks_truth():
    full = run_trials(corridor(speed=30.0), 0.5, 1, ["mean"], settings={}, progress=False)
    cut = run_trials(corridor(speed=30.0), 0.5, 1, ["mean"], settings={}, progress=False,
                     position_range=(0.0, 150.0))
    assert full.outcomes[0].train_mask.shape[0] == 31
    assert cut.outcomes[0].train_mask.shape[0] == 13


def test_methods_share_train_masks():
    records = corridor()
    one = run_trials(records, 0.3, 3, ["mean"], SMALL, base_seed=10, progress=False)
    two = run_trials(records, 0.3, 3, ["mean", "sth-lrtc"], SMALL, base_seed=10, progress=False)
    assert [o.seed for o in two.outcomes] == [10, 11, 12]
    for a, b in zip(one.outcomes, two.outcomes):
        assert np.array_equal(a.train_mask, b.train_mask)
    assert set(two.summaries) == {"mean", "sth-lrtc"}


def test_trials_are_reproducible():
    records = corridor(seed=1)
    a = run_trials(records, 0.3, 2, ["sth-lrtc"], SMALL, progress=False)
    b = run_trials(records, 0.3, 2, ["sth-lrtc"], SMALL, progress=False)
    for key in ("mae_mean", "mae_std", "rmse_mean", "rmse_std", "missing_rate_mean"):
        assert a.to_json()["sth-lrtc"][key] == b.to_json()["sth-lrtc"][key]


def test_parallel_matches_sequential():
    records = corridor(seed=2)
    seq = run_trials(records, 0.3, 3, ["mean"], {}, progress=False)
    par = run_trials(records, 0.3, 3, ["mean"], {}, jobs=2, progress=False)
    assert seq.summaries["mean"].mae_mean == par.summaries["mean"].mae_mean
    assert [o.seed for o in par.outcomes] == [0, 1, 2]


def test_report_json_layout(tmp_path):
    report = run_trials(corridor(seed=3), 0.3, 2, ["mean"], {}, progress=False)
    path = tmp_path / "report.json"
    report.write(path)
    loaded = json.loads(path.read_text(encoding="utf-8"))
    assert set(loaded["mean"]) == {"mae_mean", "mae_std", "rmse_mean", "rmse_std",
                                   "wall_s_mean", "wall_s_std", "n_trials", "missing_rate_mean"}


def test_failed_trial_names_seed():
    with pytest.raises(TrialFailedError, match="^trial failed: seed 5") as info:
        run_trials(corridor(), 0.3, 2, ["sth-lrtc"], {"tau_s": 500}, base_seed=5, progress=False)
    assert info.value.seed == 5


def test_method_settings_layering():
    settings = {"min_iters": 1, "gamma": 1.0, "methods": {"mftv": {"gamma": 3.0}}}
    assert method_settings("sth-lrtc", settings)["min_iters"] == 1
    assert method_settings("mftv", settings)["min_iters"] == 50
    assert method_settings("mftv", settings)["gamma"] == 3.0
    assert "methods" not in method_settings("sth-snn", settings)
    assert sorted(METHODS) == ["mean", "mftv", "sth-lrtc", "sth-snn"]


# --- приёмка на синтетике ---

SUITE = SyntheticSpec(rows=60, cols=80, rank=3, missing=(UniformMissing(0.7), WholeColumns(5)))
SUITE_SETTINGS = {"tau_s": 10, "tau_t": 12, "truncation_r": 3, "max_iters": 200}


@pytest.mark.slow
def test_synthetic_suite_ordering_and_convergence():
    wins = 0
    rmse = {name: [] for name in ("sth-lrtc", "mftv", "sth-snn")}
    for seed in range(10):
        truth, train = synth(replace(SUITE, seed=seed))

        def pinned(iteration, Z):
            assert np.array_equal(Z[train.mask], train.values[train.mask])

        results = {name: run_method(name, train, SUITE_SETTINGS, pinned) for name in rmse}
        ours = results["sth-lrtc"]
        assert ours.converged and ours.iterations <= 200
        assert ours.trace.relative_changes[-1] < 1e-3
        assert np.all(np.diff(ours.trace.rhos) >= 0) and ours.trace.rhos.max() <= 10.0

        for name, result in results.items():
            rmse[name].append(score(truth, result.completed, train.mask).rmse)
        if rmse["sth-lrtc"][-1] < min(rmse["mftv"][-1], rmse["sth-snn"][-1]):
            wins += 1

    assert wins >= 8
    assert np.mean(rmse["sth-lrtc"]) < np.mean(rmse["mftv"])
    assert np.mean(rmse["sth-lrtc"]) < np.mean(rmse["sth-snn"])


@pytest.mark.slow
def test_synthetic_suite_is_deterministic():
    truth, train = synth(replace(SUITE, seed=3))
    a = run_method("sth-lrtc", train, SUITE_SETTINGS)
    b = run_method("sth-lrtc", train, SUITE_SETTINGS)
    assert np.array_equal(a.completed.values, b.completed.values)
    assert score(truth, a.completed, train.mask) == score(truth, b.completed, train.mask)


# --- NGSIM US-101, полоса 2 ---

NGSIM_CSV = os.environ.get("NGSIM_LANE2_CSV")
needs_ngsim = pytest.mark.skipif(not NGSIM_CSV or not os.path.exists(NGSIM_CSV),
                                 reason="NGSIM_LANE2_CSV не задан или файл не найден")


@pytest.mark.ngsim
@needs_ngsim
def test_ngsim_field_shape_and_cep():
    truth = trim_empty_borders(aggregate(load_trajectories(NGSIM_CSV), 10, 5))
    assert truth.shape == (130, 480)
    if truth.is_complete:
        c = cep(truth)
        assert c[12] == pytest.approx(0.80, abs=0.03)
        assert c[41] == pytest.approx(0.90, abs=0.02)
        assert c[73] == pytest.approx(0.95, abs=0.02)


@pytest.mark.ngsim
@pytest.mark.slow
@needs_ngsim
def test_ngsim_reproduction():
    report = run_trials(load_trajectories(NGSIM_CSV), 0.05, 10, ["sth-lrtc", "sth-snn"],
                        {"seed": 0}, progress=False)
    ours, snn = report.summaries["sth-lrtc"], report.summaries["sth-snn"]
    assert 3.9 <= ours.mae_mean <= 5.5
    assert 5.1 <= ours.rmse_mean <= 7.5
    assert ours.missing_rate_mean == pytest.approx(0.88, abs=0.02)
    assert ours.wall_s_mean <= 0.5 * snn.wall_s_mean
