import math

import numpy as np
import pytest
import scipy.integrate

from genmarkov.errors import DeltaNotEvaluable, Unsupported
from genmarkov.kernel import (
    Delta,
    ExpDecay,
    ModulatedExp,
    Rational,
    eval_time,
    sample_process,
    to_rational,
)


def test_eval_exp():
    assert abs(eval_time(ExpDecay(1.0, 2.0), 1.0) - math.exp(-0.5)) < 1e-15


def test_modulated_nu_zero_is_exp():
    t = np.linspace(0, 5, 11)
    assert np.allclose(eval_time(ModulatedExp(1.0, 2.0, 0.0), t), eval_time(ExpDecay(1.0, 2.0), t))
    r = to_rational(ModulatedExp(1.5, 2.0, 0.0))
    assert r.p == (2.25,) and r.q == (1.0, 0.5)


def test_initial_value_is_b_squared():
    for k in (ExpDecay(1.7, 3.0), ModulatedExp(1.7, 3.0, 2.0)):
        assert abs(eval_time(k, 0.0) - 1.7**2) < 1e-14


def test_delta_not_evaluable():
    with pytest.raises(DeltaNotEvaluable):
        eval_time(Delta(1.0), 0.5)
    with pytest.raises(DeltaNotEvaluable):
        eval_time(to_rational(Delta(2.0)), 0.5)


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        eval_time(ExpDecay(1.0, 1.0), -0.1)


def test_to_rational_examples():
    r = to_rational(ExpDecay(2.0, 5.0))
    assert r.p == (4.0,) and np.allclose(r.q, (1.0, 0.2))
    r = to_rational(ModulatedExp(1.0, 1.0, 1.0))
    assert r.p == (1.0, 1.0) and r.q == (1.0, 2.0, 2.0)
    r = to_rational(Delta(1.0))
    assert r.constant and r.p == (1.0,) and r.q == (1.0,)


def test_total_weight():
    k = ExpDecay(1.3, 4.0)
    assert abs(to_rational(k)(0.0) - 1.3**2 * 4.0) < 1e-12


def test_laplace_matches_quadrature():
    for k in (ExpDecay(1.2, 2.0), ModulatedExp(0.8, 3.0, 1.7)):
        r = to_rational(k)
        for s in (0.5, 1.0, 2.0):
            val, _ = scipy.integrate.quad(lambda t: math.exp(-s * t) * eval_time(k, t), 0, np.inf, limit=400)
            assert abs(val - r(s)) < 1e-6


def test_rational_kernel_time_domain():
    # B^2 (s + a) / ((s + a)^2 + nu^2) inverts to the modulated kernel
    k = ModulatedExp(1.1, 2.0, 3.0)
    r = to_rational(k)
    t = np.linspace(0, 4, 9)
    assert np.allclose(eval_time(Rational(r.p, r.q), t), eval_time(k, t), atol=1e-12)


def test_rational_validation():
    with pytest.raises(ValueError):
        Rational((1.0, 0.0), (1.0, 1.0))
    with pytest.raises(ValueError):
        Rational((1.0, 1.0), (1.0, 3.0, 2.0))  # shared root -1
    with pytest.raises(ValueError):
        ExpDecay(1.0, 0.0)
    with pytest.raises(ValueError):
        ModulatedExp(1.0, 1.0, -1.0)
    with pytest.raises(ValueError):
        Delta(-1.0)


def test_sampler_zero_amplitude():
    path = sample_process(ExpDecay(0.0, 1.0), 0.1, 50, 3)
    assert np.array_equal(path.samples, np.zeros(50))


def test_sampler_deterministic():
    a = sample_process(ExpDecay(1.0, 2.0), 0.01, 1000, 42)
    b = sample_process(ExpDecay(1.0, 2.0), 0.01, 1000, 42)
    assert np.array_equal(a.samples, b.samples)
    c = sample_process(ExpDecay(1.0, 2.0), 0.01, 1000, 43)
    assert not np.array_equal(a.samples, c.samples)
    assert np.allclose(a.times[:3], [0, 0.01, 0.02])


def test_sampler_unsupported():
    with pytest.raises(Unsupported):
        sample_process(ModulatedExp(1.0, 1.0, 1.0), 0.1, 10, 0)
    with pytest.raises(ValueError):
        sample_process(ExpDecay(1.0, 1.0), 0.0, 10, 0)


def _acf(x, lag):
    return float(np.mean(x[: len(x) - lag] * x[lag:])) if lag else float(np.mean(x * x))


def test_sampler_single_path_statistics():
    # one path of 1e5 steps spans 500 memory times; the sample variance then
    # has standard deviation ~ sqrt(2 tau_k / T) ~ 0.063, so 3 sigma is used here
    # and the tighter 0.02 band is checked on a pooled ensemble below
    x = sample_process(ExpDecay(1.0, 2.0), 0.01, 100_000, 2024).samples
    sd = math.sqrt(2 * 2.0 / 1000)
    assert abs(_acf(x, 0) - 1) < 3 * sd
    assert abs(_acf(x, 100) - math.exp(-0.5)) < 3 * sd


def test_sampler_pooled_statistics():
    paths = [sample_process(ExpDecay(1.0, 2.0), 0.01, 100_000, (7, i)).samples for i in range(64)]
    var = np.mean([_acf(x, 0) for x in paths])
    lag = np.mean([_acf(x, 100) for x in paths])
    assert abs(var - 1) < 0.02
    assert abs(lag - math.exp(-0.5)) < 0.02


def test_sampler_autocorrelation_within_standard_errors():
    tk = 2.0
    dt = 0.05
    paths = np.array([sample_process(ExpDecay(1.5, tk), dt, 400, (11, i)).samples for i in range(4000)])
    for lag_t in (0.0, tk / 2, tk):
        m = int(round(lag_t / dt))
        prods = paths[:, 0] * paths[:, m]  # independent across paths
        se = prods.std(ddof=1) / math.sqrt(len(prods))
        assert abs(prods.mean() - 1.5**2 * math.exp(-lag_t / tk)) < 3 * se
