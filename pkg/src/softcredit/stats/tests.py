"""Inference kernels: chi-square, exact binomial, Bonferroni, kappa."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DegenerateAgreement, DegenerateTable
from .special import regularized_upper_gamma

# Relative slack in the small-pmf rule so that exactly symmetric cases
# (pmf(n-k) == pmf(k) at p0 = 0.5) survive floating-point noise.
_PMF_SLACK = 1e-12


@dataclass
class TestResult:
    statistic: float
    p_value: float
    dof: int | None = None
    p_corrected: float | None = None


def chi_square_independence(table: Sequence[Sequence[float]]) -> TestResult:
    """Pearson chi-square test of independence on an r x c count table."""
    obs = np.asarray(table, dtype=float)
    if obs.ndim != 2 or obs.shape[0] < 2 or obs.shape[1] < 2:
        raise ValueError("table must be at least 2x2")
    if np.any(obs < 0):
        raise ValueError("counts must be non-negative")
    row = obs.sum(axis=1)
    col = obs.sum(axis=0)
    if np.any(row == 0) or np.any(col == 0):
        raise DegenerateTable("table has a zero marginal")
    total = obs.sum()
    expected = np.outer(row, col) / total
    stat = float(np.sum((obs - expected) ** 2 / expected))
    dof = (obs.shape[0] - 1) * (obs.shape[1] - 1)
    p = regularized_upper_gamma(dof / 2.0, stat / 2.0)
    return TestResult(statistic=stat, p_value=min(max(p, 0.0), 1.0), dof=dof)


def _log_binom_pmf(k: int, n: int, p0: float) -> float:
    return (
        math.lgamma(n + 1)
        - math.lgamma(k + 1)
        - math.lgamma(n - k + 1)
        + k * math.log(p0)
        + (n - k) * math.log1p(-p0)
    )


def binomial_test_two_sided(k: int, n: int, p0: float) -> TestResult:
    """Exact two-sided binomial test by the small-pmf method.

    Sums the probability of every outcome no more likely than the
    observed one (with a tiny relative slack so mirror-image outcomes
    at p0 = 0.5 count exactly).
    """
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    if not 0.0 < p0 < 1.0:
        raise ValueError("p0 must lie strictly between 0 and 1")
    log_cut = _log_binom_pmf(k, n, p0) + math.log1p(_PMF_SLACK)
    total = 0.0
    for i in range(n + 1):
        log_pi = _log_binom_pmf(i, n, p0)
        if log_pi <= log_cut:
            total += math.exp(log_pi)
    return TestResult(statistic=float(k), p_value=min(total, 1.0))


def bonferroni(p: float, m: int) -> float:
    """Family-wise correction: min(1, m*p)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if m < 1:
        raise ValueError("family size must be positive")
    return min(1.0, m * p)


def cohens_kappa(labels_a: Sequence, labels_b: Sequence) -> float:
    """Chance-corrected agreement between two equal-length label vectors."""
    if len(labels_a) != len(labels_b):
        raise ValueError("label vectors must have equal length")
    n = len(labels_a)
    if n == 0:
        raise ValueError("label vectors must be non-empty")
    observed = sum(1 for a, b in zip(labels_a, labels_b) if a == b) / n
    counts_a: dict = {}
    counts_b: dict = {}
    for a in labels_a:
        counts_a[a] = counts_a.get(a, 0) + 1
    for b in labels_b:
        counts_b[b] = counts_b.get(b, 0) + 1
    expected = sum(
        (counts_a[c] / n) * (counts_b.get(c, 0) / n) for c in counts_a
    )
    if expected >= 1.0:
        if observed >= 1.0:
            return 1.0
        raise DegenerateAgreement("expected agreement is 1 but observed is not")
    return (observed - expected) / (1.0 - expected)


def coef_pct_change(coef: float) -> float:
    """Log-link coefficient as a signed percentage change in the mean."""
    return (math.exp(coef) - 1.0) * 100.0
