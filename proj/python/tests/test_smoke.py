import json

import numpy as np
import pytest

import airyline


def test_airy_eval_at_origin():
    r = airyline.airy_eval(0j)
    assert abs(r["value"] - 0.35502805388781724) < 1e-15
    assert abs(r["derivative"] + 0.25881940379280680) < 1e-15


def test_airy_eval_out_of_range_keeps_log():
    r = airyline.airy_eval(-1000 + 0j)
    assert r["value"] is not None
    big = airyline.airy_eval(2000 + 0j)
    assert big["value"] is None
    assert big["log_abs"] < -1e4


def test_log_derivative_matches_eval():
    w = 0.3 + 0.7j
    r = airyline.airy_eval(w)
    assert abs(airyline.airy_log_derivative(w) + r["derivative"] / r["value"]) < 1e-13


def test_zeros():
    z = airyline.airy_zeros(3)
    assert z.shape == (3,)
    assert abs(z[0] + 2.338107410459767) < 1e-13
    assert np.all(np.diff(z) < 0)


def test_scaling_gaussian():
    s = airyline.scaling({"kind": "gaussian", "n": 1000, "beta": 2})
    assert s["E"] == pytest.approx(2 * 1000**0.5, rel=1e-14)
    assert s["zeta"] == pytest.approx(1000 ** (-1 / 3), rel=1e-14)


def test_sample_sorted_and_reproducible():
    cfg = {"kind": "gaussian", "n": 60, "beta": 1, "seed": 7}
    a = airyline.sample(cfg)
    b = airyline.sample(cfg)
    assert a.shape == (60,)
    assert np.all(np.diff(a) <= 0)
    assert np.array_equal(a, b)


def test_evolve_shapes():
    cfg = {"kind": "gaussian", "n": 20, "beta": 2, "seed": 1, "T": 0.01, "dt": 1e-3, "top_k": 4}
    times, snaps, log = airyline.evolve(cfg)
    assert times.shape[0] == snaps.shape[0] == 11
    assert snaps.shape[1] == 4
    assert set(log) == {"events", "retries", "sorts", "clamps"}


def test_check_airy_like_on_zeros():
    r = airyline.check_airy_like(list(airyline.airy_zeros(500)))
    assert r["poles_bounded"]
    assert r["fitted_constant"] < 10


def test_config_error():
    with pytest.raises(airyline.ConfigError):
        airyline.sample({"kind": "gaussian", "n": 10, "beta": -1})
    with pytest.raises(airyline.ConfigError):
        airyline.sample({"kind": "gaussian", "n": 10, "bogus": 1})


def test_experiment_and_verify(tmp_path):
    assert "tw" in airyline.experiment_names()
    rep = airyline.run_experiment("airy_deterministic", {"kind": "gaussian", "n": 1000, "beta": 2})
    assert rep["criteria"][0]["pass"]
    cfg = {"kind": "gaussian", "n": 500, "beta": 2, "seed": 3, "replicas": 2}
    out = airyline.verify("airy_like", cfg, str(tmp_path))
    assert (tmp_path / "report.json").exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["master_seed"] == 3
    assert out["name"] == "airy_like_at_equilibrium"
    with pytest.raises(airyline.ConfigError):
        airyline.run_experiment("nope", cfg)
