import json
import os
import subprocess

import numpy as np
import pytest
from scipy import stats

import bsfr

SMALL = {
    "preset": "exp1_synthetic",
    "scene": {
        "domain": {"nx": 12, "ny": 12},
        "sensors": {"n_point": 10, "n_integral": 10},
        "M": 20,
        "K": 20,
        "substeps": 10,
    },
    "calibration": {"R": 200},
    "nlrt": {"J": 500},
    "realizations": 3,
}


def test_presets_and_config():
    assert set(bsfr.preset_names()) == {"exp1_synthetic", "exp2_sensitivity", "nea_fitted"}
    cfg = bsfr.resolve_config(SMALL)
    assert cfg["scene"]["M"] == 20
    assert cfg["scene"]["sensors"]["n_point"] == 10
    with pytest.raises(bsfr.ConfigError):
        bsfr.resolve_config({**SMALL, "unknown": 1})


def test_scene_points_are_disjoint():
    queries, p, i = bsfr.scene_points(SMALL)
    assert queries.shape == (124, 2) and p.shape == (10, 2) and i.shape == (10, 2)
    taken = {tuple(x) for x in np.vstack([p, i])}
    assert not any(tuple(q) in taken for q in queries)


def test_orthant_and_bvn():
    o = bsfr.binorm_orthant(0.0, 0.0, 1.0, 1.0, 0.5, 0.0)
    assert o["gg"] == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert sum(o.values()) == pytest.approx(1.0, abs=1e-12)
    ref = stats.multivariate_normal(mean=[0, 0], cov=[[1, 0.3], [0.3, 1]]).cdf([0.4, -0.2])
    assert bsfr.bvn_cdf(0.4, -0.2, 0.3) == pytest.approx(ref, abs=1e-6)


def test_warps_round_trip():
    z = np.linspace(-4, 4, 33)
    gamma = {"family": "gamma", "shape": 2.0, "scale": 1.0}
    v = bsfr.warp_forward(gamma, z)
    np.testing.assert_allclose(v, stats.gamma(2.0).ppf(stats.norm.cdf(z)), rtol=1e-9)
    np.testing.assert_allclose(bsfr.warp_inverse(gamma, v), z, atol=1e-8)
    gh = {"family": "tukey_gh", "g": 0.1, "h": 0.4, "loc": 1.0, "scale": 1.0, "tail": "half"}
    assert bsfr.warp_forward(gh, [0.0])[0] == pytest.approx(1.0)
    with pytest.raises(bsfr.DomainError):
        bsfr.warp_inverse(gamma, [-1.0])


def test_wgplrt_identity_matches_gaussian():
    times = np.linspace(0, 5, 8)
    h0 = {"kernel": {"family": "matern12", "scale": 1.0, "length_scale": 1.0}, "warp": {"family": "identity"}}
    h1 = {"kernel": {"family": "matern52", "scale": 1.0, "length_scale": 1.0}, "warp": {"family": "identity"}}
    det = bsfr.WgplrtDetector(h0, h1, times, 0.1)
    d = np.abs(times[:, None] - times[None, :])
    k0 = np.exp(-d) + 0.01 * np.eye(8)
    r = np.sqrt(5) * d
    k1 = (1 + r + r * r / 3) * np.exp(-r) + 0.01 * np.eye(8)
    z = np.random.default_rng(0).normal(size=8)
    exact = stats.multivariate_normal(cov=k1).logpdf(z) - stats.multivariate_normal(cov=k0).logpdf(z)
    assert det.statistic(z) == pytest.approx(exact, abs=1e-8)
    assert det.log_likelihood(0, z) == pytest.approx(stats.multivariate_normal(cov=k0).logpdf(z), abs=1e-8)


def test_sblue_and_knn():
    sensors = np.array([[0.0, 0.0], [1.0, 0.0]])
    queries = np.array([[0.1, 0.0], [0.9, 0.0]])
    kernel = {"family": "squared_exponential", "scale": 1.0, "length_scale": 1.0}
    u = [[0.9, 0.1], [0.17, 0.83]]
    sb = bsfr.SBlue(sensors, queries, kernel, 0.0, 0.0, [u, u])
    g_hat, y_hat = sb.predict([1, 0])
    assert g_hat[0] > 0 > g_hat[1]
    assert list(y_hat) == [1, 0]
    assert np.all(sb.bayes_risk < 1.0) and np.all(sb.bayes_risk > 0.0)
    np.testing.assert_allclose(sb.mean_decisions, [0.5 * 0.83 + 0.5 * 0.1] * 2)
    assert list(bsfr.knn_predict([1, 0], sensors, queries, 1)) == [1, 0]


def test_calibrate_and_pipeline():
    cal = bsfr.calibrate(SMALL)
    assert set(cal) == {"wgplrt", "nlrt"}
    for c in cal.values():
        u = np.asarray(c["transition"])
        np.testing.assert_allclose(u.sum(axis=1), [1.0, 1.0])
        assert 0.5 < c["auc"] <= 1.0
    res = bsfr.run_pipeline(SMALL)
    algs = [r["algorithm"] for r in res["rows"]]
    assert algs == ["S-BLUE", "Oracle", "KNN"]
    assert all(0.0 <= r["mse"] <= 1.0 for r in res["rows"])
    assert res["bayes_risk"].shape == (124,)
    again = bsfr.run_pipeline(SMALL)
    assert again["rows"] == res["rows"]


@pytest.mark.skipif(not os.environ.get("BSFR_CLI"), reason="CLI not built")
def test_cli_experiment(tmp_path):
    cfg = tmp_path / "small.json"
    cfg.write_text(json.dumps(SMALL))
    out = tmp_path / "out"
    run = subprocess.run(
        [os.environ["BSFR_CLI"], "--config", str(cfg), "--out", str(out), "experiment"],
        capture_output=True,
        text=True,
    )
    assert run.returncode == 0, run.stderr
    header = (out / "metrics.csv").read_text().splitlines()[0]
    assert header == "realization,algorithm,mse,f1,fpr,tpr,tp,fp,tn,fn"
    bad = subprocess.run([os.environ["BSFR_CLI"], "--preset", "nope", "experiment"], capture_output=True)
    assert bad.returncode == 2
