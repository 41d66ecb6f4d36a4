import json
import math

import numpy as np
import pytest

import bdqsd


def test_logistic_landmarks():
    lm = bdqsd.landmarks(bdqsd.logistic(2.0, 1.0, 30.0))
    assert lm.x_star == pytest.approx(1.0)
    assert lm.n_star == 30


def test_validate_reports_all_checks():
    checks = bdqsd.validate(bdqsd.logistic(2.0, 1.0, 30.0))
    assert checks and all(c.passed for c in checks)


def test_invalid_model_raises():
    with pytest.raises(bdqsd.InvalidModel):
        bdqsd.analyze(bdqsd.logistic(1.0, 2.0, 30.0))
    with pytest.raises(bdqsd.Error):
        bdqsd.ModelSpec("gompertz", {}, 30.0)


def test_analysis_is_consistent():
    a = bdqsd.analyze(bdqsd.logistic(2.0, 1.0, 30.0))
    assert a.nu.sum() == pytest.approx(1.0, abs=1e-12)
    assert a.rho0 * a.t0_spectral == pytest.approx(1.0, rel=1e-12)
    assert a.t0_summed == pytest.approx(a.t0_spectral, rel=1e-10)
    assert a.phi[1] == 1.0
    assert np.all(np.diff(a.phi[1:]) >= 0)
    assert a.residual < 1e-6


def test_oracle_agrees():
    plain = bdqsd.analyze(bdqsd.logistic(2.0, 1.0, 30.0))
    oracle = bdqsd.analyze(bdqsd.logistic(2.0, 1.0, 30.0), oracle=True)
    assert oracle.rho0 == pytest.approx(plain.rho0, rel=1e-9)


def test_transient_survival_matches_nu_start_decay():
    a = bdqsd.analyze(bdqsd.logistic(2.0, 1.0, 15.0))
    laws = a.transient(1, [0.0, 1.0, 5.0])
    assert laws[0]["survival"] == pytest.approx(1.0)
    assert laws[2]["survival"] < laws[1]["survival"] < 1.0


def test_simulation_is_reproducible():
    spec = bdqsd.logistic(2.0, 1.0, 5.0)
    x = bdqsd.simulate(spec, n0=5, replicas=200, t_max=50.0, seed=7)
    y = bdqsd.simulate(spec, n0=5, replicas=200, t_max=50.0, seed=7, threads=2)
    assert np.array_equal(x.extinction_times, y.extinction_times)
    assert x.events > 0


def test_run_command_writes_outputs(tmp_path):
    cfg = tmp_path / "model.json"
    cfg.write_text(json.dumps({"family": "logistic", "params": {"lam": 2, "mu": 1}, "K": 30}))
    code, _ = bdqsd.run_command("analyze", str(cfg), str(tmp_path / "out"))
    assert code == 0
    assert any((tmp_path / "out").iterdir())
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert bdqsd.run_command("analyze", str(bad), str(tmp_path / "out2"))[0] == 2


def test_git_blob_sha1():
    assert bdqsd.git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391"
    assert math.isfinite(bdqsd.analyze(bdqsd.logistic(2.0, 1.0, 50.0)).log_rho0)
