"""Monte Carlo validation of the entropy formula and variance scaling."""

from __future__ import annotations

import math

import numpy as np
import pytest

from infotherm import (
    DegenerateEnsembleError,
    InsufficientDataError,
    InvalidStateError,
    SamplingSpec,
    estimate_entropy,
    normality_check,
    simulate_estimator,
    validate_entropy_formula,
    validate_variance_scaling,
)

GAUSS_SPEC = SamplingSpec(family="gaussian", mu=0.0, sigma2=2.0, m=100,
                          sigma_r2=0.5, trials=10_000, seed=5)
POISSON_SPEC = SamplingSpec(family="poisson", mu=3.0, m=100, sigma_r2=0.5,
                            trials=10_000, seed=5)


# ------------------------------------------------------------ reproducibility

def test_simulation_is_bit_identical():
    a = simulate_estimator(GAUSS_SPEC)
    b = simulate_estimator(GAUSS_SPEC)
    assert np.array_equal(a, b)
    assert a.shape == (10_000,)


def test_different_seeds_differ():
    other = SamplingSpec(family="gaussian", mu=0.0, sigma2=2.0, m=100,
                         sigma_r2=0.5, trials=10_000, seed=6)
    assert not np.array_equal(simulate_estimator(GAUSS_SPEC),
                              simulate_estimator(other))


def test_poisson_simulation_is_bit_identical():
    assert np.array_equal(simulate_estimator(POISSON_SPEC),
                          simulate_estimator(POISSON_SPEC))


# -------------------------------------------------------------- sample means

def test_gaussian_ensemble_moments():
    ens = simulate_estimator(GAUSS_SPEC)
    # readout variance adds to the intrinsic sigma2 / m
    expect = 2.0 / 100 + 0.5
    assert abs(float(np.mean(ens)) - 0.0) < 0.03
    assert abs(float(np.var(ens)) / expect - 1.0) < 0.03


def test_poisson_ensemble_moments():
    ens = simulate_estimator(POISSON_SPEC)
    expect = 3.0 / 100 + 0.5
    assert abs(float(np.mean(ens)) - 3.0) < 0.03
    assert abs(float(np.var(ens)) / expect - 1.0) < 0.05


def test_intrinsic_variance():
    assert GAUSS_SPEC.intrinsic_variance == 2.0
    assert POISSON_SPEC.intrinsic_variance == 3.0


# ---------------------------------------------------------- entropy estimate

def test_entropy_estimators_on_a_standard_normal():
    x = np.random.default_rng(0).normal(0.0, 1.0, 100_000)
    truth = 0.5 * math.log(2.0 * math.pi * math.e)
    nn = estimate_entropy(x)
    mom = estimate_entropy(x, method="gaussian_moment")
    assert abs(nn - 1.4284613957685002) < 1e-12
    assert abs(mom - 1.419072029026879) < 1e-12
    assert abs(nn - truth) < 0.02
    assert abs(mom - truth) < 0.02
    assert abs(nn - mom) < 0.03


def test_entropy_estimate_needs_data():
    with pytest.raises(DegenerateEnsembleError):
        estimate_entropy(np.array([1.0, 2.0]))
    with pytest.raises(DegenerateEnsembleError):
        estimate_entropy(np.zeros(500))


def test_entropy_estimate_rejects_bad_options():
    x = np.random.default_rng(1).normal(size=500)
    with pytest.raises(InvalidStateError):
        estimate_entropy(x, method="histogram")
    with pytest.raises(InvalidStateError):
        estimate_entropy(x, k=0)


def test_entropy_neighbor_order_trades_bias_for_variance():
    x = np.random.default_rng(2).normal(size=20_000)
    truth = 0.5 * math.log(2.0 * math.pi * math.e)
    for k in (1, 4, 8):
        assert abs(estimate_entropy(x, k=k) - truth) < 0.03


# -------------------------------------------------------- formula validation

def test_validation_gaussian_worked_example():
    report = validate_entropy_formula(GAUSS_SPEC)
    assert abs(report.h_formula - 0.019610356576640647) < 1e-15
    assert abs(report.h_empirical - 0.022537396610848415) < 1e-12
    assert abs(report.gap - 0.0029270400342077674) < 1e-12
    assert report.tol == 0.02
    assert report.asymptotic
    assert report.passed is True
    assert abs(report.gap) < report.tol


def test_validation_poisson_worked_example():
    report = validate_entropy_formula(POISSON_SPEC)
    assert abs(report.gap - 0.007830315352150511) < 1e-12
    assert report.asymptotic
    assert report.passed is True


def test_validation_outside_the_asymptotic_regime_is_diagnostic():
    small = SamplingSpec(family="poisson", mu=3.0, m=2, sigma_r2=0.5,
                         trials=10_000, seed=5)
    report = validate_entropy_formula(small)
    assert not report.asymptotic
    assert report.passed is None
    assert math.isfinite(report.gap)


def test_validation_non_gaussian_needs_readout_noise():
    spec = SamplingSpec(family="poisson", mu=3.0, m=100, sigma_r2=0.0,
                        trials=10_000, seed=5)
    with pytest.raises(InvalidStateError):
        validate_entropy_formula(spec)


def test_validation_gap_is_signed():
    report = validate_entropy_formula(GAUSS_SPEC)
    assert report.gap == report.h_empirical - report.h_formula


def test_empirical_entropy_decreases_with_sampling():
    # the averaged-k estimator keeps the noise floor below the formula
    # differences over this m range, so the empirical trend is visible
    hs = []
    for m in (25, 100, 400):
        spec = SamplingSpec(family="gaussian", mu=0.0, sigma2=2.0, m=m,
                            sigma_r2=0.5, trials=20_000, seed=5)
        report = validate_entropy_formula(spec, k=8)
        hs.append(report.h_empirical)
        assert abs(report.gap) < 0.02
    assert hs[0] > hs[1] > hs[2]


# ---------------------------------------------------------- variance scaling

def test_variance_scaling_gaussian():
    points = validate_variance_scaling("gaussian", 0.0, [50, 100, 200],
                                       trials=4000, seed=7, sigma2=2.0)
    ratios = [pt.ratio for pt in points]
    assert abs(ratios[0] - 0.9906313356026066) < 1e-12
    assert all(abs(r - 1.0) < 0.03 for r in ratios)
    assert [pt.m for pt in points] == [50, 100, 200]
    assert all(pt.variance > 0 for pt in points)


def test_variance_scaling_poisson():
    points = validate_variance_scaling("poisson", 3.0, [50, 100, 200],
                                       trials=20_000, seed=5)
    assert all(abs(pt.ratio - 1.0) < 0.05 for pt in points)


def test_variance_scaling_validation():
    with pytest.raises(InsufficientDataError):
        validate_variance_scaling("gaussian", 0.0, [50, 100],
                                  trials=4000, seed=7, sigma2=2.0)
    with pytest.raises(InvalidStateError):
        validate_variance_scaling("gaussian", 0.0, [100, 50, 200],
                                  trials=4000, seed=7, sigma2=2.0)


# -------------------------------------------------------------- normality

def test_normality_of_a_large_gaussian_ensemble():
    spec = SamplingSpec(family="gaussian", mu=0.0, sigma2=1.0, m=50,
                        sigma_r2=0.5, trials=50_000, seed=9)
    report = normality_check(simulate_estimator(spec))
    assert report.passed
    assert abs(report.skewness) < 0.05
    assert abs(report.excess_kurtosis) < 0.1


def test_normality_flags_a_skewed_ensemble():
    spec = SamplingSpec(family="poisson", mu=0.5, m=1, sigma_r2=0.25,
                        trials=20_000, seed=3)
    report = normality_check(simulate_estimator(spec))
    assert not report.passed
    assert report.skewness > 0.05


def test_normality_needs_a_large_ensemble():
    with pytest.raises(InsufficientDataError):
        normality_check(np.random.default_rng(4).normal(size=5000))


# --------------------------------------------------------------- validation

def test_spec_validation():
    with pytest.raises(InvalidStateError):
        SamplingSpec(family="gamma", mu=1.0, m=10, sigma_r2=0.5,
                     trials=1000, seed=0)
    with pytest.raises(InvalidStateError):
        SamplingSpec(family="gaussian", mu=0.0, m=0, sigma_r2=0.5,
                     trials=1000, seed=0, sigma2=1.0)
    with pytest.raises(InvalidStateError):
        SamplingSpec(family="gaussian", mu=0.0, m=10, sigma_r2=0.5,
                     trials=50, seed=0, sigma2=1.0)
    with pytest.raises(InvalidStateError):
        SamplingSpec(family="gaussian", mu=0.0, m=10, sigma_r2=0.5,
                     trials=1000, seed=0)          # missing sigma2
    with pytest.raises(InvalidStateError):
        SamplingSpec(family="poisson", mu=0.0, m=10, sigma_r2=0.5,
                     trials=1000, seed=0)          # needs mu > 0
    with pytest.raises(InvalidStateError):
        SamplingSpec(family="poisson", mu=2.0, m=10, sigma_r2=0.5,
                     trials=1000, seed=0, sigma2=1.0)
