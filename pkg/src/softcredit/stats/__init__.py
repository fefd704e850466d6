"""From-scratch statistical engine: GLMs, tests, and special functions."""

from .glm import GlmFit, GlmSpec, fit_glm, negative_binomial_loglik
from .special import regularized_lower_gamma, regularized_upper_gamma, std_normal_cdf
from .tests import (
    TestResult,
    binomial_test_two_sided,
    bonferroni,
    chi_square_independence,
    coef_pct_change,
    cohens_kappa,
)

__all__ = [
    "GlmFit",
    "GlmSpec",
    "fit_glm",
    "negative_binomial_loglik",
    "regularized_lower_gamma",
    "regularized_upper_gamma",
    "std_normal_cdf",
    "TestResult",
    "binomial_test_two_sided",
    "bonferroni",
    "chi_square_independence",
    "coef_pct_change",
    "cohens_kappa",
]
