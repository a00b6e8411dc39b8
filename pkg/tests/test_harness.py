import csv
import hashlib
import json
import math

import numpy as np
import pytest

from multisep.estimation import FitOptions, fit
from multisep.exceptions import ConfigError
from multisep.graphgen import BernoulliFixed, sample_basis, sample_multilayer
from multisep.harness import (ExperimentConfig, asymptotic_covariance, draw_theta, log_log_slope, replicate_seed,
                              run_experiment, run_gof, run_replicates)
from multisep.io import save_network
from multisep.model import build_interaction_index, info_dyad

THETA_STAR = [-3.0, -2.0, -1.0, 0.5, 0.0, 0.0]


def cfg(tmp_path, **kw):
    base = {"study": "consistency", "n_grid": [60], "replicates": 3, "output_dir": str(tmp_path / "out")}
    return ExperimentConfig.from_dict({**base, **kw})


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


# -- configuration -----------------------------------------------------------------

@pytest.mark.parametrize("bad", [
    {"study": "power"}, {"n_grid": []}, {"n_grid": [2]}, {"replicates": 0}, {"theta": [1.0, 2.0]},
    {"objective": "mcmle"}, {"alpha": 1.5}, {"max_order": 4}, {"basis": {"family": "bernoulli", "prob": 1.5}},
    {"theta": {"random": {"low": 1, "high": 0}}}, {"theta": {"random": {"zero": [9]}}}, {"colour": "red"},
    {"k_grid": []},
])
def test_config_errors(tmp_path, bad):
    with pytest.raises(ConfigError):
        cfg(tmp_path, **bad)


def test_config_requires_study_and_grid():
    with pytest.raises(ConfigError, match="missing"):
        ExperimentConfig.from_dict({"study": "consistency"})


def test_config_json_roundtrip(tmp_path):
    c = cfg(tmp_path, theta="random", basis={"family": "sbm", "n_blocks": 5, "p_in": 0.5, "p_out": 0.05})
    path = tmp_path / "c.json"
    path.write_text(json.dumps(c.to_dict()))
    assert ExperimentConfig.from_json(path).to_dict() == c.to_dict()
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(path)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(tmp_path / "missing.json")


def test_random_theta_has_forced_zeros(tmp_path):
    c = cfg(tmp_path, theta="random")
    rng = np.random.default_rng(0)
    draws = np.array([draw_theta(c.theta_source, 6, rng) for _ in range(200)])
    assert (draws[:, [2, 4]] == 0).all()
    others = draws[:, [0, 1, 3, 5]]
    assert (np.abs(others) < 1).all() and (others != 0).all()


# -- seeds ------------------------------------------------------------------------------

def test_replicate_seeds_distinct_and_pure():
    seeds = {replicate_seed(0, n, r) for n in (200, 400, 600, 800, 1000) for r in range(250)}
    assert len(seeds) == 5 * 250
    assert replicate_seed(0, 200, 3) == replicate_seed(0, 200, 3)
    assert replicate_seed(1, 200, 3) != replicate_seed(0, 200, 3)


def test_replicates_do_not_depend_on_n_jobs(tmp_path):
    a = run_replicates(cfg(tmp_path, n_grid=[40, 50], n_jobs=1))
    b = run_replicates(cfg(tmp_path, n_grid=[40, 50], n_jobs=2))
    assert [(r["N"], r["replicate"]) for r in a] == [(40, 0), (40, 1), (40, 2), (50, 0), (50, 1), (50, 2)]
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x["theta_hat"], y["theta_hat"])
        assert x["seed"] == y["seed"]


# -- consistency ------------------------------------------------------------------------

def test_single_replicate_single_size(tmp_path):
    res = run_experiment(cfg(tmp_path, replicates=1))
    assert len(res.records) == 1
    assert "slope" not in res.summary
    assert not (tmp_path / "out" / "slope.csv").exists()
    assert len(read_csv(tmp_path / "out" / "replicates.csv")) == 2


def test_record_count_and_manifest(tmp_path):
    res = run_experiment(cfg(tmp_path, n_grid=[60, 120], replicates=4))
    assert len(res.records) == 8 and not res.failed
    assert "slope" in res.summary
    out = tmp_path / "out"
    manifest = json.loads((out / "manifest.json").read_text())
    listed = {f["path"] for f in manifest["files"]}
    on_disk = {p.name for p in out.iterdir()} - {"manifest.json"}
    assert listed == on_disk
    for f in manifest["files"]:
        assert hashlib.sha256((out / f["path"]).read_bytes()).hexdigest() == f["sha256"]
    rows = read_csv(out / "replicates.csv")
    assert rows[0][:3] == ["N", "replicate", "seed"]
    assert "runtime" not in rows[0]


def test_log_log_slope():
    n = np.array([200, 400, 800])
    assert log_log_slope(n, 3.0 / n)[0] == pytest.approx(-1.0)
    assert log_log_slope([100], [0.1]) is None


# -- determinism ---------------------------------------------------------------------------

STUDY_CONFIGS = [
    {"study": "consistency", "n_grid": [50, 80], "replicates": 3},
    {"study": "normality", "n_grid": [60], "replicates": 50},
    {"study": "normality", "n_grid": [60], "replicates": 50, "synthetic_gaussian": True},
    {"study": "fdr", "n_grid": [60], "replicates": 4, "theta": "random"},
    {"study": "roc", "n_grid": [60], "replicates": 4},
    {"study": "gof", "n_grid": [60], "gof_reps": 3},
    {"study": "bounds-sweep", "n_grid": [100, 1000], "k_grid": [1, 2, 3], "n_ball_samples": 5},
    {"study": "bounds-sweep", "n_grid": [50], "basis": {"family": "lsm", "density": 0.6, "mc_reps": 20000}},
]


@pytest.mark.parametrize("conf", STUDY_CONFIGS, ids=lambda c: c["study"])
def test_rerun_is_byte_identical(tmp_path, conf):
    outputs = []
    for run in range(2):
        c = ExperimentConfig.from_dict({**conf, "output_dir": str(tmp_path / f"run{run}")})
        res = run_experiment(c)
        assert not res.failed, res.message
        outputs.append({p.name: p.read_bytes() for p in (tmp_path / f"run{run}").glob("*.csv")})
    assert outputs[0] and outputs[0] == outputs[1]


# -- normality ---------------------------------------------------------------------------

def test_normality_minimum_replicates(tmp_path):
    with pytest.raises(ConfigError, match="50"):
        run_experiment(cfg(tmp_path, study="normality", replicates=10))
    with pytest.raises(ConfigError, match="explicit"):
        run_experiment(cfg(tmp_path, study="normality", replicates=50, theta="random"))


def test_synthetic_gaussian_mode_is_calibrated(tmp_path):
    passes, skew = 0, 0
    for seed in range(20):
        res = run_experiment(cfg(tmp_path, study="normality", n_grid=[1000], replicates=100,
                                 synthetic_gaussian=True, seed=seed, plots=False))
        passes += res.summary["standardized"]["n_ad_pass"]
        skew += res.summary["standardized"]["mardia_skew_pvalue"] > 0.05
    assert passes >= 0.9 * 20 * 6
    assert skew >= 17


def test_asymptotic_covariance_mle_is_inverse_information():
    idx = build_interaction_index(3, 2)
    cov = asymptotic_covariance(THETA_STAR, idx, 1000.0, "mle")
    np.testing.assert_allclose(cov @ (1000 * info_dyad(np.array(THETA_STAR), idx)), np.eye(6), atol=1e-9)


# -- FDR / ROC ---------------------------------------------------------------------------

def test_fdr_without_true_nulls_is_zero(tmp_path):
    res = run_experiment(cfg(tmp_path, study="fdr", n_grid=[80], replicates=5,
                             theta=[-3.0, -2.0, -1.0, 0.5, 0.4, -0.4]))
    assert all(fdr == 0.0 for fdr, _ in res.summary.values())
    rows = read_csv(tmp_path / "out" / "fdr.csv")
    assert rows[0] == ["N", "method", "n_replicates", "fdr", "power"]
    assert len(rows) == 1 + 4


def test_roc_outputs(tmp_path):
    res = run_experiment(cfg(tmp_path, study="roc", n_grid=[150], replicates=5))
    auc = res.summary[150]
    assert 0.5 <= auc <= 1.0
    rows = read_csv(tmp_path / "out" / "roc.csv")[1:]
    assert rows[0][1:] == ["0.0", "0.0"] and rows[-1][1:] == ["1.0", "1.0"]


# -- goodness of fit ----------------------------------------------------------------------

def _fitted(n=150, objective="mple", seed=0):
    idx = build_interaction_index(3, 2)
    Y, _ = sample_basis(BernoulliFixed(0.8), n, seed=seed)
    X = sample_multilayer(Y, THETA_STAR, idx, seed=seed + 1)
    return X, Y, idx, fit(X, Y, idx, FitOptions(objective=objective))


def test_gof_rejects_nonpositive_reps():
    X, Y, idx, res = _fitted(40)
    for bad in (0, -1):
        with pytest.raises(ConfigError):
            run_gof(res, Y, idx, bad)


def test_gof_mle_moment_matching():
    X, Y, idx, res = _fitted(150, "mle")
    table = run_gof(res, Y, idx, 200, seed=1, observed=X)
    assert table.rel_l2_error <= 0.01
    assert table.simulated.shape == (200, 6)
    assert len(table.rows()) == 6 and len(table.rows()[0]) == len(table.header)


def test_gof_error_shrinks_with_reps():
    X, Y, idx, res = _fitted(150, "mle")
    small = run_gof(res, Y, idx, 5, seed=2).rel_l2_error
    big = run_gof(res, Y, idx, 500, seed=2).rel_l2_error
    assert big < small


def test_gof_study_from_saved_network(tmp_path):
    X, Y, idx, res = _fitted(80)
    save_network(tmp_path / "x.txt", X)
    out = run_experiment(cfg(tmp_path, study="gof", gof_reps=5, input={"network": str(tmp_path / "x.txt")}))
    np.testing.assert_allclose(out.summary["theta_hat"], res.theta_hat)
    assert math.isfinite(out.summary["rel_l2_error"])
    with pytest.raises(ConfigError):
        run_experiment(cfg(tmp_path, study="gof", gof_reps=0))


# -- bounds sweep ---------------------------------------------------------------------------

def test_bounds_sweep_table(tmp_path):
    res = run_experiment(cfg(tmp_path, study="bounds-sweep", n_grid=[200, 400], k_grid=[1, 3],
                             n_ball_samples=5))
    rows = read_csv(tmp_path / "out" / "bounds.csv")
    assert len(rows) == 1 + 4
    k1 = [r for r in rows[1:] if r[1] == "1"]
    assert all(r[7] == "nan" for r in k1)
    k3 = [r for r in rows[1:] if r[1] == "3"]
    assert float(k3[1][7]) < float(k3[0][7])
    assert float(k3[0][8]) == pytest.approx(3 * float(k3[0][7]))
    assert (tmp_path / "out" / "bounds_bernoulli.csv").exists()
    assert len(res.summary["rows"]) == 4
