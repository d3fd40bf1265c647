"""Classical (non-private) test statistics and least-squares fitting."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


class RankDeficientError(ValueError):
    """Raised when a design matrix does not have full column rank."""


@dataclass(frozen=True)
class BoundedSample:
    """A sample of reals with a declared magnitude bound |x| <= bound."""

    values: np.ndarray
    bound: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("sample must be a nonempty 1-d array")
        if not self.bound > 0:
            raise ValueError(f"bound must be positive, got {self.bound}")
        if not np.all(np.isfinite(values)):
            raise ValueError("sample contains non-finite values")
        worst = float(np.max(np.abs(values)))
        if worst > self.bound:
            raise ValueError(f"value magnitude {worst} exceeds declared bound {self.bound}")

    @property
    def n(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class ChiSquareInput:
    """Observed counts against positive expected counts for k >= 2 groups."""

    observed: np.ndarray
    expected: np.ndarray

    def __post_init__(self):
        obs = np.asarray(self.observed, dtype=float)
        exp = np.asarray(self.expected, dtype=float)
        object.__setattr__(self, "observed", obs)
        object.__setattr__(self, "expected", exp)
        if obs.ndim != 1 or exp.ndim != 1 or obs.size != exp.size:
            raise ValueError("observed and expected must be 1-d arrays of equal length")
        if obs.size < 2:
            raise ValueError("need at least 2 groups")
        if np.any(obs < 0):
            raise ValueError("observed counts must be nonnegative")
        if np.any(exp <= 0):
            raise ValueError("expected counts must be positive")

    @property
    def k(self) -> int:
        return int(self.observed.size)


@dataclass(frozen=True)
class LinearModel:
    design: np.ndarray
    response: np.ndarray
    coefficients: np.ndarray
    rss: float
    n_obs: int
    n_params: int


@dataclass(frozen=True)
class FTestInput:
    """Residual sums of squares of nested models: reduced within full."""

    rss_reduced: float
    rss_full: float
    n_obs: int
    dims_full: int
    dims_reduced: int

    def __post_init__(self):
        if not self.rss_full > 0:
            raise ValueError(f"rss_full must be positive, got {self.rss_full}")
        if self.rss_reduced < self.rss_full * (1.0 - 1e-12):
            raise ValueError(
                f"nested models require rss_reduced >= rss_full "
                f"({self.rss_reduced} < {self.rss_full})"
            )
        if not self.dims_reduced >= 1:
            raise ValueError("reduced model needs at least one dimension")
        if not self.dims_full > self.dims_reduced:
            raise ValueError("full model must have more dimensions than the reduced model")
        if not self.n_obs > self.dims_full:
            raise ValueError("need more observations than full-model dimensions")


def z_statistic(observed_mean: float, expected_mean: float, sigma: float) -> float:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return (observed_mean - expected_mean) / sigma


def chi_square_statistic(inp: ChiSquareInput) -> float:
    """Sum over groups of (observed - expected)^2 / expected."""
    if float(np.min(inp.expected)) < 5.0:
        warnings.warn(
            "expected count below 5 in some group; the large-sample "
            "approximation behind the chi-square test may be poor",
            stacklevel=2,
        )
    delta = inp.observed - inp.expected
    return float(np.sum(delta * delta / inp.expected))


def ols_fit(design, response) -> LinearModel:
    """Least squares via QR factorization.

    Rank deficiency is reported, never silently regularized.
    """
    x = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    if x.ndim != 2:
        raise ValueError("design must be a 2-d matrix")
    n, p = x.shape
    if y.shape != (n,):
        raise ValueError(f"response length {y.shape} does not match design rows {n}")
    if n < p:
        raise ValueError(f"need at least as many rows ({n}) as columns ({p})")
    q, r = np.linalg.qr(x, mode="reduced")
    diag = np.abs(np.diag(r))
    if diag.min() <= max(n, p) * np.finfo(float).eps * diag.max():
        raise RankDeficientError("design matrix is rank deficient")
    coef = np.linalg.solve(r, q.T @ y)
    resid = y - x @ coef
    return LinearModel(
        design=x,
        response=y,
        coefficients=coef,
        rss=float(resid @ resid),
        n_obs=n,
        n_params=p,
    )


def partial_f_statistic(inp: FTestInput) -> float:
    """(rss_reduced/rss_full - 1) * (n - p) / (p - r) for nested models."""
    ratio = inp.rss_reduced / inp.rss_full
    mult = (inp.n_obs - inp.dims_full) / (inp.dims_full - inp.dims_reduced)
    return max(0.0, (ratio - 1.0) * mult)


def sample_std(values) -> float:
    """Sample standard deviation with the n-1 denominator."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("need at least 2 values")
    return float(np.sqrt(np.sum((arr - arr.mean()) ** 2) / (arr.size - 1)))
