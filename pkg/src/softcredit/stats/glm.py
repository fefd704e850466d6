"""Log-link GLMs fitted by iteratively reweighted least squares.

Two families are supported: negative binomial (count responses,
variance mu + alpha*mu^2) and Gaussian (variance constant).  Each IRLS
step solves the weighted least-squares problem through a QR
factorization of sqrt(W)X rather than the normal equations, which
keeps ill-conditioned designs honest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, Singular
from .special import std_normal_cdf

FAMILIES = ("negative_binomial", "gaussian")

_lgamma = np.frompyfunc(math.lgamma, 1, 1)

# Linear predictors are clamped to keep exp() finite during early,
# badly-scaled iterations; the bound is far outside any sane fit.
_ETA_CAP = 300.0
_MU_FLOOR = 1e-10

_Z_975 = 1.96  # the interval convention is coef +- 1.96*SE


@dataclass
class GlmSpec:
    family: str = "negative_binomial"
    dispersion: float | str = 1.0  # NB only; "estimate" profiles it out
    max_iterations: int = 100
    tolerance: float = 1e-8

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family: {self.family!r}")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if isinstance(self.dispersion, str):
            if self.dispersion != "estimate":
                raise ValueError(f"dispersion must be positive or 'estimate'")
        elif self.dispersion <= 0:
            raise ValueError("fixed dispersion must be positive")


@dataclass
class GlmFit:
    coefficients: np.ndarray
    std_errors: np.ndarray
    z_values: np.ndarray
    p_values: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    converged: bool
    iterations: int
    dispersion: float | None = None
    family: str = "negative_binomial"
    column_names: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.coefficients)


def _as_design(design, response) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    if X.ndim != 2:
        raise ValueError("design must be a 2-d matrix")
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValueError("response length must match design rows")
    n, p = X.shape
    if n <= p:
        raise ValueError(f"need more observations than columns (n={n}, p={p})")
    return X, y


def _check_rank(X: np.ndarray) -> None:
    r = np.linalg.qr(X, mode="r")
    diag = np.abs(np.diag(r))
    if diag.min() <= diag.max() * 1e-12:
        raise Singular("design matrix is rank deficient")


def _nb_weights(mu: np.ndarray, alpha: float) -> np.ndarray:
    return mu / (1.0 + alpha * mu)


def _gaussian_weights(mu: np.ndarray) -> np.ndarray:
    return mu * mu


def _irls(
    X: np.ndarray,
    y: np.ndarray,
    weight_fn,
    max_iterations: int,
    tolerance: float,
) -> tuple[np.ndarray, np.ndarray, bool, int]:
    """Run IRLS; returns (beta, R from the final QR, converged, iterations)."""
    mu = y + 0.5
    eta = np.log(mu)
    beta = None
    converged = False
    iterations = 0
    R = None
    for iterations in range(1, max_iterations + 1):
        w = weight_fn(mu)
        z = eta + (y - mu) / mu
        sw = np.sqrt(w)
        Q, R = np.linalg.qr(sw[:, None] * X)
        diag = np.abs(np.diag(R))
        if diag.min() <= diag.max() * 1e-12:
            raise Singular("weighted design became rank deficient")
        beta_new = np.linalg.solve(R, Q.T @ (sw * z))
        if beta is not None:
            rel = np.max(np.abs(beta_new - beta) / (1.0 + np.abs(beta_new)))
            if rel < tolerance:
                beta = beta_new
                converged = True
                break
        beta = beta_new
        eta = np.clip(X @ beta, -_ETA_CAP, _ETA_CAP)
        mu = np.maximum(np.exp(eta), _MU_FLOOR)
    assert beta is not None and R is not None
    return beta, R, converged, iterations


def negative_binomial_loglik(y: np.ndarray, mu: np.ndarray, alpha: float) -> float:
    """NB2 log-likelihood with dispersion alpha (variance mu + alpha*mu^2)."""
    r = 1.0 / alpha
    y = np.asarray(y, dtype=float)
    mu = np.maximum(np.asarray(mu, dtype=float), _MU_FLOOR)
    terms = (
        _lgamma(y + r).astype(float)
        - math.lgamma(r)
        - _lgamma(y + 1.0).astype(float)
        + r * np.log(r / (r + mu))
        + y * np.log(mu / (r + mu))
    )
    return float(np.sum(terms))


def _golden_section_alpha(X, y, spec: GlmSpec, lo=1e-6, hi=10.0, tol=1e-5) -> float:
    """Maximize the NB profile log-likelihood over the dispersion."""

    def profile(alpha: float) -> float:
        beta, _, _, _ = _irls(
            X, y, lambda mu: _nb_weights(mu, alpha), spec.max_iterations, spec.tolerance
        )
        mu = np.maximum(np.exp(np.clip(X @ beta, -_ETA_CAP, _ETA_CAP)), _MU_FLOOR)
        return negative_binomial_loglik(y, mu, alpha)

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = profile(c), profile(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = profile(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = profile(d)
    return 0.5 * (a + b)


def fit_glm(design, response, spec: GlmSpec | None = None, column_names=None) -> GlmFit:
    """Fit a log-link GLM and return Wald-style inference for every column.

    The design must already contain its intercept column.  Standard
    errors come from the inverse weighted normal-equations matrix at
    convergence; p-values are two-sided normal; the 95% interval is
    coef +- 1.96*SE.  A fit that hits the iteration cap is returned
    with converged=False rather than raised.
    """
    spec = spec or GlmSpec()
    X, y = _as_design(design, response)
    _check_rank(X)

    if spec.family == "negative_binomial":
        if np.any(y < 0):
            raise DomainError("negative binomial responses must be non-negative")
        if not np.allclose(y, np.round(y)):
            raise DomainError("negative binomial responses must be integers")
        if spec.dispersion == "estimate":
            alpha = _golden_section_alpha(X, y, spec)
        else:
            alpha = float(spec.dispersion)
        weight_fn = lambda mu: _nb_weights(mu, alpha)
        dispersion = alpha
    else:
        weight_fn = _gaussian_weights
        dispersion = None

    beta, R, converged, iterations = _irls(
        X, y, weight_fn, spec.max_iterations, spec.tolerance
    )

    # cov = (X'WX)^-1 = R^-1 R^-T from the last weighted QR
    rinv = np.linalg.solve(R, np.eye(R.shape[0]))
    cov = rinv @ rinv.T

    if spec.family == "gaussian":
        # quasi-likelihood scale: Pearson dispersion of the response
        mu = np.maximum(np.exp(np.clip(X @ beta, -_ETA_CAP, _ETA_CAP)), _MU_FLOOR)
        n, p = X.shape
        scale = float(np.sum((y - mu) ** 2) / (n - p))
        cov = cov * scale

    se = np.sqrt(np.diag(cov))
    z = beta / se
    p = np.array([2.0 * (1.0 - std_normal_cdf(abs(zi))) for zi in z])
    p = np.clip(p, 0.0, 1.0)
    return GlmFit(
        coefficients=beta,
        std_errors=se,
        z_values=z,
        p_values=p,
        ci_low=beta - _Z_975 * se,
        ci_high=beta + _Z_975 * se,
        converged=converged,
        iterations=iterations,
        dispersion=dispersion,
        family=spec.family,
        column_names=list(column_names or []),
    )
