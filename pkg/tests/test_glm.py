"""IRLS GLM fitting: exact small cases, simulation recovery, invariances."""

import math

import numpy as np
import pytest

from softcredit.errors import DomainError, Singular
from softcredit.stats import GlmSpec, fit_glm
from softcredit.stats.special import std_normal_cdf


def simulate_nb(rng, X, beta, alpha):
    """Gamma-Poisson draw with mean exp(X beta) and variance mu + alpha*mu^2."""
    mu = np.exp(X @ beta)
    r = 1.0 / alpha
    return rng.negative_binomial(r, r / (r + mu)).astype(float)


def test_gaussian_intercept_only_recovers_log_mean():
    y = np.full(40, 7.389056)
    fit = fit_glm(np.ones((40, 1)), y, GlmSpec(family="gaussian"))
    assert fit.coefficients[0] == pytest.approx(2.0, abs=1e-6)
    assert fit.converged


def test_nb_intercept_only_is_log_mean_for_any_dispersion():
    y = np.array([3, 3, 3, 2, 4, 3, 3, 3] * 5, dtype=float)
    for alpha in (0.1, 0.5, 2.0):
        fit = fit_glm(
            np.ones((len(y), 1)),
            y,
            GlmSpec(family="negative_binomial", dispersion=alpha),
        )
        assert fit.coefficients[0] == pytest.approx(math.log(y.mean()), abs=1e-8)


def test_gaussian_log_link_zero_noise_exact():
    rng = np.random.default_rng(7)
    n = 200
    X = np.column_stack([np.ones(n), rng.uniform(-1, 1, n), rng.uniform(0, 2, n)])
    beta = np.array([0.5, -0.8, 0.3])
    y = np.exp(X @ beta)
    fit = fit_glm(X, y, GlmSpec(family="gaussian"))
    assert np.max(np.abs(fit.coefficients - beta)) < 1e-6


def test_nb_simulation_recovery():
    rng = np.random.default_rng(20240917)
    n = 5000
    beta = np.array([0.9, 0.08, 0.04, 0.40])
    X = np.column_stack(
        [
            np.ones(n),
            rng.uniform(-2.5, 2.5, n),
            rng.uniform(-7.5, 7.5, n),
            rng.uniform(-1.25, 1.25, n),
        ]
    )
    y = simulate_nb(rng, X, beta, alpha=0.5)
    fit = fit_glm(X, y, GlmSpec(family="negative_binomial", dispersion=0.5))
    assert fit.converged
    for true, est, se in zip(beta, fit.coefficients, fit.std_errors):
        assert abs(est - true) < 2 * se
        assert abs(est - true) / abs(true) < 0.10


def test_nb_dispersion_estimation_near_truth():
    rng = np.random.default_rng(99)
    n = 4000
    X = np.column_stack([np.ones(n), rng.uniform(-1, 1, n)])
    y = simulate_nb(rng, X, np.array([1.2, 0.5]), alpha=0.5)
    fit = fit_glm(X, y, GlmSpec(family="negative_binomial", dispersion="estimate"))
    assert fit.dispersion == pytest.approx(0.5, abs=0.12)


def test_column_rescaling_invariance():
    rng = np.random.default_rng(3)
    n = 600
    X = np.column_stack([np.ones(n), rng.uniform(0, 4, n)])
    y = simulate_nb(rng, X, np.array([0.8, 0.3]), alpha=0.4)
    spec = GlmSpec(family="negative_binomial", dispersion=0.4)
    base = fit_glm(X, y, spec)
    c = 10.0
    scaled_X = X.copy()
    scaled_X[:, 1] *= c
    scaled = fit_glm(scaled_X, y, spec)
    assert scaled.coefficients[1] == pytest.approx(base.coefficients[1] / c, rel=1e-8)
    assert scaled.std_errors[1] == pytest.approx(base.std_errors[1] / c, rel=1e-8)
    assert scaled.z_values[1] == pytest.approx(base.z_values[1], abs=1e-8)
    assert scaled.p_values[1] == pytest.approx(base.p_values[1], abs=1e-8)


def test_p_values_consistent_with_normal_cdf():
    rng = np.random.default_rng(11)
    n = 300
    X = np.column_stack([np.ones(n), rng.uniform(-1, 1, n)])
    y = simulate_nb(rng, X, np.array([1.0, 0.1]), alpha=0.5)
    fit = fit_glm(X, y, GlmSpec(family="negative_binomial", dispersion=0.5))
    for z, p in zip(fit.z_values, fit.p_values):
        assert p == pytest.approx(2.0 * (1.0 - std_normal_cdf(abs(z))), abs=1e-12)


def test_ci_brackets_coefficient():
    rng = np.random.default_rng(5)
    n = 250
    X = np.column_stack([np.ones(n), rng.uniform(0, 1, n)])
    y = simulate_nb(rng, X, np.array([0.7, 0.2]), alpha=1.0)
    fit = fit_glm(X, y, GlmSpec(family="negative_binomial", dispersion=1.0))
    assert np.all(fit.ci_low <= fit.coefficients)
    assert np.all(fit.coefficients <= fit.ci_high)


def test_singular_design_raises():
    n = 50
    x = np.linspace(0, 1, n)
    X = np.column_stack([np.ones(n), x, 2 * x])
    with pytest.raises(Singular):
        fit_glm(X, np.ones(n), GlmSpec(family="gaussian"))


def test_negative_nb_response_raises():
    X = np.ones((10, 1))
    y = np.array([1, 2, -1, 3, 2, 1, 0, 4, 2, 1], dtype=float)
    with pytest.raises(DomainError):
        fit_glm(X, y, GlmSpec(family="negative_binomial", dispersion=1.0))


def test_non_integer_nb_response_raises():
    X = np.ones((10, 1))
    y = np.full(10, 2.5)
    with pytest.raises(DomainError):
        fit_glm(X, y, GlmSpec(family="negative_binomial", dispersion=1.0))


def test_too_few_rows_rejected():
    with pytest.raises(ValueError):
        fit_glm(np.ones((3, 3)), np.ones(3), GlmSpec(family="gaussian"))


def test_iteration_cap_flags_not_converged():
    rng = np.random.default_rng(2)
    n = 500
    X = np.column_stack([np.ones(n), rng.uniform(0, 2, n)])
    y = simulate_nb(rng, X, np.array([1.0, 0.4]), alpha=0.5)
    fit = fit_glm(
        X, y, GlmSpec(family="negative_binomial", dispersion=0.5, max_iterations=2)
    )
    assert not fit.converged
    assert fit.iterations == 2
