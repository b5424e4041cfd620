import math
import os

import pytest

import sgdlab

CONFIGS = os.environ.get("SGDLAB_CONFIG_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "configs"))


def config(name):
    return sgdlab.load_config(os.path.join(CONFIGS, name))


def test_piecewise_values():
    assert sgdlab.value(-0.5) == pytest.approx(1.25)
    assert sgdlab.value(2 * math.pi) == -1.0
    assert sgdlab.derivative(0.0) == 0.0
    kinds = [c["kind"] for c in sgdlab.catalog()]
    assert kinds == ["saddle", "global-min", "local-max", "local-min"]


def test_parse_error_is_value_error():
    with pytest.raises(ValueError):
        sgdlab.parse_config("[oracle]\nbogus = 1\n")


def test_config_round_trip():
    cfg = config("table3.toml")
    assert sgdlab.parse_config(cfg.to_toml()) == cfg
    assert cfg.level_values() == [10.0, 100.0]


def test_oracle_moments():
    cfg = config("table2.toml")
    a, b, c = sgdlab.moment_bounds(cfg, 10.0, 0)
    assert (a, c) == (0.0, 0.0)
    r = sgdlab.verify_oracle(cfg, 10.0, [-0.5], 0, n_draws=20000, seed=3)
    assert r["unbiased"] and r["moment_ok"]


def test_checks_and_conditional_value():
    checks = sgdlab.check_assumptions(config("table2.toml"), horizon=10000)
    assert all(c["derived"]["passed"] for c in checks)
    mean, se = sgdlab.conditional_value(config("table2.toml"), 10.0, [-0.5], 0, n_draws=50000)
    assert abs(mean - (0.25 * (0.8 + 0.32 / 3) + 1.0)) < 4 * se


def test_run_is_deterministic():
    cfg = config("exact.toml")
    r1 = sgdlab.run(cfg, [1.0], cfg.level_values()[0], seed=5)
    r2 = sgdlab.run(cfg, [1.0], cfg.level_values()[0], seed=5)
    assert r1 == r2
    assert r1["classification"]["label"] == "global-min"


def test_lojasiewicz_exponent():
    theta, r2 = sgdlab.lojasiewicz("3")
    assert 0.45 <= theta <= 0.55 and r2 > 0.99


def test_small_table():
    cfg = config("table2.toml")
    cfg.seeds = 4
    cfg.k_max = 2000
    t = sgdlab.table(cfg)
    assert len(t["rows"]) == 6
