import math

import numpy as np
import pytest

import volterra_lab as vl


def test_clock_values():
    n = vl.Nonlinearity.power(0.5)
    assert vl.eval_F(n, 4.0) == pytest.approx(2.0)
    assert vl.invert_F(n, 2.0) == pytest.approx(4.0)
    assert vl.eval_Phi(vl.Nonlinearity.logtype(), 1.0) == pytest.approx(0.0, abs=1e-12)


def test_ode_solution():
    tr = vl.solve(vl.MeasureKernel.dirac(), vl.Nonlinearity.power(0.5), vl.ForcingTerm.zero(), 1.0, 2.0, 1e-3)
    assert tr["x"][-1] == pytest.approx(4.0, abs=1e-4)
    assert tr["t"].shape == tr["x"].shape


def test_estimate_L_with_python_callable():
    est = vl.estimate_L(lambda t: (0.5 * 2.0 * t) ** 2, vl.Nonlinearity.power(0.5), 1.0, 1e6)
    assert est["flag"] == "finite"
    assert est["value"] == pytest.approx(2.0, rel=0.01)


def test_noise_reproducible():
    a = vl.sample_brownian(lambda t: 1.0, 10.0, 0.01, seed=3, stream=1)
    b = vl.sample_brownian(lambda t: 1.0, 10.0, 0.01, seed=3, stream=1)
    assert np.array_equal(a, b)
    assert a[0] == 0.0
    assert vl.power_envelope_integrable(2.0, 1.5)
    assert not vl.power_envelope_integrable(1 / 1.5, 1.5)


def test_validation_error():
    with pytest.raises(vl.ValidationError):
        vl.Nonlinearity.power(1.5)
    with pytest.raises(vl.ValidationError):
        vl.parse_config("bogus.key = 1\n")


def test_canned_golden():
    r = vl.reproduce("golden")
    assert r["passed"]
    assert r["metrics"]["clock"] == pytest.approx((1 + math.sqrt(5)) / 2, abs=0.08)


def test_small_ensemble_deterministic():
    cfg = "\n".join([
        "noise.kind = brownian", "noise.sigma = 1", "noise.paths = 6", "noise.seed = 4",
        "initial.psi = 0", "grid.T = 50", "grid.dt = 0.05", "analysis.L_horizon = 1e8",
    ])
    a = vl.ensemble(cfg, workers=1)
    b = vl.ensemble(cfg, workers=3)
    assert a["report"] == b["report"]
    assert len(a["paths"]) == 6


def test_convergence_order():
    c = vl.convergence(vl.canned_config("conv_logtype"))
    assert 1.8 <= c["fitted_order"] <= 2.2
