import json
import math
import os
import random
import subprocess

import pytest

import rhedge


def test_exceptions_share_a_base():
    assert issubclass(rhedge.ConfigError, rhedge.Error)
    assert issubclass(rhedge.DataError, rhedge.Error)
    assert issubclass(rhedge.NumericError, rhedge.Error)


def test_robust_ratio():
    assert rhedge.robust_hedge_ratio(0.5, 1.0, 1.0) == pytest.approx(0.25)
    assert rhedge.robust_hedge_ratio(0.5, 1.0) == pytest.approx(0.5)
    with pytest.raises(rhedge.NumericError):
        rhedge.robust_hedge_ratio(0.5, 1.0, -1.0)


def test_ratio_minimizes_worst_case():
    box = dict(sigma_S_sq=1.0, sigma_F_sq=0.8, sigma_SF=0.6, theta_S=0.2, theta_F=0.3)
    h = rhedge.robust_hedge_ratio(box["sigma_SF"], box["sigma_F_sq"], box["theta_F"])
    grid = rhedge.grid_minmax_oracle(**box, step=1e-4)
    assert abs(h - grid) <= 1e-4
    wc = rhedge.worst_case_variance(h, **box)
    assert wc <= rhedge.worst_case_variance(h + 0.01, **box)
    assert wc <= rhedge.worst_case_variance(h - 0.01, **box)


def test_realized_variance():
    assert rhedge.realized_variance([0.01, -0.02], 2) == pytest.approx(0.0005)
    assert rhedge.realized_variance([], 66) is None
    rcv = rhedge.realized_covariance([(0, 0.01), (1, 0.02)], [(1, 0.03), (2, 0.5)], 2)
    assert rcv == pytest.approx(2 * 0.02 * 0.03)


def test_ar_fit_and_forecast():
    rng = random.Random(7)
    y, xs = 0.0, []
    for t in range(3000):
        y = 0.2 + 0.6 * y + rng.gauss(0.0, 1.0)
        if t >= 200:
            xs.append(y)
    m = rhedge.fit_ar(xs, 1)
    assert m.kind == "ar" and m.transform == "level"
    assert m.coeffs[0] == pytest.approx(0.6, abs=0.05)
    assert m.equilibrium() == pytest.approx(0.5, abs=0.15)
    f = rhedge.forecast(m, xs[-5:], 3)
    assert len(f["point"]) == 3
    assert f["integrated_point"] == pytest.approx(sum(f["point"]))
    assert f["theta"] > 0.0
    psi = rhedge.ma_coefficients(m, 3)
    assert psi[0] == 1.0 and psi[2] == pytest.approx(m.coeffs[0] ** 2)
    json.loads(m.to_json())


def test_backtest_and_bootstrap():
    rng = random.Random(11)
    r_F = [rng.gauss(0.0, 0.01) for _ in range(600)]
    r_S = [0.8 * f + rng.gauss(0.0, 0.005) for f in r_F]
    out = rhedge.hedged_returns(r_S, r_F, [0.8] * 600, 1, 0.0005)
    assert out["costs"][0] == pytest.approx(0.8 * 0.0005)
    rep = rhedge.performance_report(r_S, r_F, [0.8] * 600, 1, 0.0005)
    assert 0.5 < rep["he"] < 1.0
    assert rep["es95"] >= rep["var95"]

    shifted = [v + 0.001 for v in out["r_net"]]
    res = rhedge.block_bootstrap(shifted, out["r_net"], "pnl", replications=200, seed=3)
    assert res["mean_difference"] == pytest.approx(0.25)
    assert res["p_value"] == 0.0
    assert len(res["differences"]) == 200
    meb = rhedge.meb_bootstrap(shifted, out["r_net"], "pnl", replications=50, seed=3, threads=2)
    assert meb["scheme"] == "max_entropy"
    with pytest.raises(rhedge.ConfigError):
        rhedge.block_bootstrap(shifted, out["r_net"], "calmar")


def test_constant_sharpe_is_nan():
    r_S = [0.01 * math.sin(i) for i in range(40)]
    r_F = [v - 0.001 for v in r_S]
    rep = rhedge.performance_report(r_S, r_F, [1.0] * 40)
    assert rep["pnl"] == pytest.approx(0.04)
    assert math.isnan(rep["sharpe"])


def _cli():
    path = os.environ.get("RHEDGE_CLI")
    if not path:
        pytest.skip("RHEDGE_CLI not set")
    return path


def test_cli_synth_and_exit_codes(tmp_path):
    cli = _cli()
    ok = subprocess.run([cli, "synth", "--out", str(tmp_path / "data"), "--days", "60",
                         "--universe", "pair"], capture_output=True, text=True)
    assert ok.returncode == 0, ok.stderr
    assert (tmp_path / "data" / "truth.json").exists()

    bad_cfg = tmp_path / "bad.json"
    bad_cfg.write_text(json.dumps({"no_such_key": 1}))
    cfg_err = subprocess.run([cli, "fit", "--config", str(bad_cfg)], capture_output=True, text=True)
    assert cfg_err.returncode == 1

    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"data_dir": str(tmp_path / "nowhere"), "symbols": ["S", "F"],
                                   "pairs": "all", "asset_classes": {"S": "equity", "F": "equity"},
                                   "output_dir": str(tmp_path / "out")}))
    data_err = subprocess.run([cli, "fit", "--config", str(missing)], capture_output=True, text=True)
    assert data_err.returncode == 2


def test_pipeline_from_python(tmp_path):
    rhedge.generate_synthetic(tmp_path / "data", 300, seed=5, universe="pair")
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"data_dir": str(tmp_path / "data"), "symbols": ["S", "F"],
                               "pairs": "all", "asset_classes": {"S": "equity", "F": "equity"},
                               "output_dir": str(tmp_path / "out"), "tau": [1],
                               "cost_bp": [0, 5], "bootstrap": {"replications": 50}}))
    manifest = json.loads(rhedge.run_pipeline(cfg, "backtest"))
    assert manifest["config_hash"] == rhedge.config_hash(cfg.read_text())
    assert (tmp_path / "out" / "manifest.json").exists()
