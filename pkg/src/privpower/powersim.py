"""Monte Carlo power estimation for private and non-private tests.

Every simulation draws its variates from a counter-based Philox stream
keyed by (seed, n), with normal variates produced by an inverse-CDF
transform of the uniforms. Because each repetition's variates sit at
fixed offsets in the stream, estimates are bit-identical for a fixed
seed regardless of the worker count; `workers` is accepted for
interface symmetry and bounds nothing but memory.

Private z/t tests reject against a critical value built from the total
variance sigma^2/n + noise^2 of the noisy difference; in stderr mode
the quantile multiplies the square root of that variance (the variant
that keeps the null rejection rate at alpha), in paper mode it
multiplies the variance itself. Non-private tests always use the
standard standard-error rule. Private chi-square and F tests reject
against the noiseless reference distribution's critical value, so their
Type 1 inflation is observable by simulating under the null rather than
hidden behind an invented adjusted null.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .distributions import ChiSquare, FDist, Normal, StudentT, quantile
from .dpcore import PrivacyParams
from .privstats import BigOConstants
from .samplesize import PowerSpec, SizingMode


class InfeasibleSearchError(RuntimeError):
    """The target power is not reached below the search ceiling."""


@dataclass(frozen=True)
class ChiSquareTruth:
    """Cell probabilities under the null and under the simulated truth."""

    null_probs: tuple
    true_probs: tuple

    def __post_init__(self):
        null_p = tuple(float(p) for p in self.null_probs)
        true_p = tuple(float(p) for p in self.true_probs)
        object.__setattr__(self, "null_probs", null_p)
        object.__setattr__(self, "true_probs", true_p)
        if len(null_p) != len(true_p) or len(null_p) < 2:
            raise ValueError("need matching probability vectors of length >= 2")
        if min(null_p) <= 0 or min(true_p) < 0:
            raise ValueError("null probabilities must be positive, true ones nonnegative")
        for name, probs in [("null_probs", null_p), ("true_probs", true_p)]:
            if abs(sum(probs) - 1.0) > 1e-9:
                raise ValueError(f"{name} must sum to 1, got {sum(probs)}")


@dataclass(frozen=True)
class PartialFTruth:
    """Full-model coefficients for a random design with intercept; the
    reduced model keeps the first dims_reduced columns."""

    coefficients: tuple
    dims_reduced: int
    sigma: float = 1.0
    effect_bound: float = 0.0

    def __post_init__(self):
        coef = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coef)
        if len(coef) < 2:
            raise ValueError("full model needs at least 2 coefficients")
        if not 1 <= self.dims_reduced < len(coef):
            raise ValueError("dims_reduced must be in [1, dims_full)")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.effect_bound < 0:
            raise ValueError("effect_bound must be nonnegative")


@dataclass(frozen=True)
class SimPlan:
    """One power simulation: which test, the truth it samples from, the
    optional privacy configuration, and the stream seed."""

    test: str
    n: int
    reps: int
    seed: int
    spec: PowerSpec | None = None
    privacy: PrivacyParams | None = None
    constants: BigOConstants = BigOConstants()
    chi_square: ChiSquareTruth | None = None
    partial_f: PartialFTruth | None = None
    alpha: float | None = None

    def __post_init__(self):
        if self.test not in ("z", "t", "chisq", "f"):
            raise ValueError(f"unknown test kind: {self.test!r}")
        if not self.n >= 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not self.reps >= 1000:
            raise ValueError(f"reps must be >= 1000, got {self.reps}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if self.test in ("z", "t") and self.spec is None:
            raise ValueError(f"{self.test} test needs a PowerSpec")
        if self.test == "chisq" and self.chi_square is None:
            raise ValueError("chisq test needs ChiSquareTruth")
        if self.test == "f" and self.partial_f is None:
            raise ValueError("f test needs PartialFTruth")
        if self.alpha is not None and not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.test in ("chisq", "f") and self.alpha is None:
            raise ValueError(f"{self.test} test needs an explicit alpha")

    @property
    def effective_alpha(self) -> float:
        if self.alpha is not None:
            return self.alpha
        return self.spec.alpha


@dataclass(frozen=True)
class PowerEstimate:
    power_hat: float
    std_err: float
    reps: int
    n: int
    seed: int


# Acklam's rational approximation, vectorized; |abs err| < 1.2e-9,
# plenty below Monte Carlo resolution at any feasible rep count.
_A = np.array([-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
               1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00])
_B = np.array([-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
               6.680131188771972e+01, -1.328068155288572e+01])
_C = np.array([-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
               -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00])
_D = np.array([7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
               3.754408661907416e+00])
_PLOW = 0.02425


def _std_normal_from_uniform(u: np.ndarray) -> np.ndarray:
    """Inverse-CDF transform of uniforms in [0, 1) to standard normals."""
    u = np.clip(u, 1e-300, 1.0 - 1.1e-16)
    out = np.empty_like(u)

    low = u < _PLOW
    high = u > 1.0 - _PLOW
    mid = ~(low | high)

    if np.any(low):
        q = np.sqrt(-2.0 * np.log(u[low]))
        out[low] = np.polyval(_C, q) / np.polyval(np.append(_D, 1.0), q)
    if np.any(high):
        q = np.sqrt(-2.0 * np.log(1.0 - u[high]))
        out[high] = -np.polyval(_C, q) / np.polyval(np.append(_D, 1.0), q)
    if np.any(mid):
        q = u[mid] - 0.5
        r = q * q
        out[mid] = np.polyval(_A, r) * q / np.polyval(np.append(_B, 1.0), r)
    return out


def _stream(seed: int, n: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, n], dtype=np.uint64)))


def _noise_sigma(plan: SimPlan) -> float:
    # Per-query Gaussian scale on the mean difference: 2 c sqrt(k) s / (n eps).
    if plan.privacy is None:
        return 0.0
    return 2.0 * plan.privacy.composed_constant * plan.spec.bound / (plan.n * plan.privacy.epsilon)


def _mean_tests(plan: SimPlan) -> np.ndarray:
    spec = plan.spec
    alpha = plan.effective_alpha
    private = plan.privacy is not None
    noise = _noise_sigma(plan)
    rng = _stream(plan.seed, plan.n)

    if plan.test == "z":
        u = rng.random((plan.reps, 2 if private else 1))
        diff = spec.effect + (spec.sigma / math.sqrt(plan.n)) * _std_normal_from_uniform(u[:, 0])
        if private:
            diff = diff + noise * _std_normal_from_uniform(u[:, 1])
            total_var = spec.sigma ** 2 / plan.n + noise ** 2
            zq = quantile(Normal(), 1.0 - alpha / 2.0)
            crit = zq * (total_var if spec.mode is SizingMode.PAPER else math.sqrt(total_var))
        else:
            crit = quantile(Normal(), 1.0 - alpha / 2.0) * spec.sigma / math.sqrt(plan.n)
        return np.abs(diff) > crit

    u = rng.random((plan.reps, plan.n + (1 if private else 0)))
    data = spec.effect + spec.sigma * _std_normal_from_uniform(u[:, : plan.n])
    xbar = data.mean(axis=1)
    s = data.std(axis=1, ddof=1)
    diff = xbar
    tq = quantile(StudentT(plan.n - 1), 1.0 - alpha / 2.0)
    if private:
        diff = diff + noise * _std_normal_from_uniform(u[:, plan.n])
        total_var = s ** 2 / plan.n + noise ** 2
        crit = tq * (total_var if spec.mode is SizingMode.PAPER else np.sqrt(total_var))
    else:
        crit = tq * s / math.sqrt(plan.n)
    return np.abs(diff) > crit


def _chisq_test(plan: SimPlan) -> np.ndarray:
    truth = plan.chi_square
    k = len(truth.null_probs)
    rng = _stream(plan.seed, plan.n)
    u = rng.random(plan.reps) if plan.privacy is not None else None
    counts = rng.multinomial(plan.n, truth.true_probs, size=plan.reps).astype(float)
    expected = plan.n * np.asarray(truth.null_probs)
    dev = counts - expected
    stat = np.sum(dev * dev / expected, axis=1)
    if plan.privacy is not None:
        top = np.argmax(dev, axis=1)
        max_dev = dev[np.arange(plan.reps), top]
        e_top = expected[top]
        ref = np.maximum(stat, plan.constants.chi_sq_floor)
        scale = plan.constants.chi_sq_const * np.abs(max_dev) / (plan.privacy.epsilon * e_top * ref)
        stat = stat + scale * _std_normal_from_uniform(u)
    crit = quantile(ChiSquare(k - 1), 1.0 - plan.effective_alpha)
    return stat > crit


def _partial_f_test(plan: SimPlan) -> np.ndarray:
    truth = plan.partial_f
    p = len(truth.coefficients)
    r = truth.dims_reduced
    if plan.n <= p:
        raise ValueError(f"n must exceed the full-model dimension {p}")
    design_rng = np.random.default_rng([plan.seed, plan.n, 0xD5])
    x = np.empty((plan.n, p))
    x[:, 0] = 1.0
    x[:, 1:] = design_rng.standard_normal((plan.n, p - 1))
    q_full = np.linalg.qr(x, mode="reduced")[0]
    q_red = np.linalg.qr(x[:, :r], mode="reduced")[0]

    rng = _stream(plan.seed, plan.n)
    private = plan.privacy is not None
    u = rng.random((plan.reps, plan.n + (1 if private else 0)))
    y = (x @ np.asarray(truth.coefficients))[None, :] + truth.sigma * _std_normal_from_uniform(u[:, : plan.n])
    total = np.sum(y * y, axis=1)
    rss_full = total - np.sum((y @ q_full) ** 2, axis=1)
    rss_red = total - np.sum((y @ q_red) ** 2, axis=1)
    ratio = rss_red / rss_full
    if private:
        scale = plan.constants.f_const * truth.effect_bound / plan.privacy.epsilon
        ratio = ratio + scale * _std_normal_from_uniform(u[:, plan.n])
    stat = (ratio - 1.0) * (plan.n - p) / (p - r)
    crit = quantile(FDist(p - r, plan.n - p), 1.0 - plan.effective_alpha)
    return stat > crit


def simulate_power(plan: SimPlan, workers: int = 1) -> PowerEstimate:
    """Estimated rejection probability with its binomial standard error."""
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if plan.test in ("z", "t"):
        reject = _mean_tests(plan)
    elif plan.test == "chisq":
        reject = _chisq_test(plan)
    else:
        reject = _partial_f_test(plan)
    p_hat = float(np.mean(reject))
    return PowerEstimate(
        power_hat=p_hat,
        std_err=math.sqrt(p_hat * (1.0 - p_hat) / plan.reps),
        reps=plan.reps,
        n=plan.n,
        seed=plan.seed,
    )


def empirical_sample_size(
    plan: SimPlan,
    target_power: float,
    n_min: int = 2,
    n_max: int = 1 << 20,
    workers: int = 1,
) -> int:
    """Smallest n on the search grid whose estimated power reaches
    target_power - 2 * std_err, found by doubling then integer bisection.

    Every candidate n is evaluated on its own fixed stream (seed, n), so
    the search path cannot perturb any estimate and reruns are exact.
    """
    if not 0.0 < target_power < 1.0:
        raise ValueError(f"target power must be in (0, 1), got {target_power}")

    def reaches(n: int) -> bool:
        est = simulate_power(replace(plan, n=n), workers=workers)
        return est.power_hat >= target_power - 2.0 * est.std_err

    lo = max(2, n_min)
    if reaches(lo):
        return lo
    hi = lo
    while True:
        hi = min(2 * hi, n_max)
        if reaches(hi):
            break
        if hi >= n_max:
            est = simulate_power(replace(plan, n=n_max), workers=workers)
            raise InfeasibleSearchError(
                f"power {est.power_hat:.4f} +- {est.std_err:.4f} at the "
                f"search ceiling n={n_max} is below the target {target_power}"
            )
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if reaches(mid):
            hi = mid
        else:
            lo = mid
    return hi
