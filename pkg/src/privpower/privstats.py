"""Privatized test statistics.

Each statistic is its classical value plus Gaussian noise at a scale
derived from a registered sensitivity:

  z/t difference   sigma = const * sqrt(k) * (2 bound / n) / epsilon
  chi-square       sigma = a * max_dev / (epsilon * expected_at_max * ref_stat)
  partial F ratio  sigma = b * effect_bound / epsilon
  sample std       sigma = const * sqrt(k) * (2 bound / sqrt(n - 1)) / epsilon

The chi-square and F scales carry unspecified multiplicative constants
(a, b); BigOConstants makes them explicit, mandatory configuration that
results always echo rather than a hidden choice. The chi-square scale
depends on the realized data, so its output is tagged "heuristic-DP" in
the metadata: a strict DP accountant cannot treat it as calibrated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dpcore import (
    Mechanism,
    NoisyStatistic,
    PrivacyParams,
    Sensitivity,
    add_noise,
    gaussian_noise_scale,
    mean_sensitivity,
)
from .stattests import (
    BoundedSample,
    ChiSquareInput,
    FTestInput,
    chi_square_statistic,
    partial_f_statistic,
    sample_std,
    z_statistic,
)


@dataclass(frozen=True)
class BigOConstants:
    """Explicit values for the unspecified constants in the data-dependent
    noise scales, plus a floor keeping the chi-square denominator away
    from zero at a perfect fit."""

    chi_sq_const: float = 1.0
    f_const: float = 1.0
    chi_sq_floor: float = 1e-6

    def __post_init__(self):
        if not (self.chi_sq_const > 0 and self.f_const > 0 and self.chi_sq_floor > 0):
            raise ValueError("all constants must be positive")

    def as_dict(self) -> dict:
        return {
            "chi_sq_const": self.chi_sq_const,
            "f_const": self.f_const,
            "chi_sq_floor": self.chi_sq_floor,
        }


def std_sensitivity(bound: float, n: int) -> Sensitivity:
    """Replace-one sensitivity bound of the sample standard deviation."""
    if not bound > 0:
        raise ValueError(f"bound must be positive, got {bound}")
    if not n >= 2:
        raise ValueError(f"need at least 2 values, got {n}")
    s = 2.0 * bound / math.sqrt(n - 1.0)
    return Sensitivity(l2=s, l1=s, description=f"sample std of {n} values in [-{bound}, {bound}]")


def private_z_statistic(
    observed_mean: float,
    expected_mean: float,
    sigma: float,
    sample: BoundedSample,
    params: PrivacyParams,
    rng: np.random.Generator,
) -> NoisyStatistic:
    """z statistic plus Gaussian noise calibrated to the mean's sensitivity."""
    stat = z_statistic(observed_mean, expected_mean, sigma)
    sens = mean_sensitivity(sample.bound, sample.n)
    scale = gaussian_noise_scale(sens, params)
    out = add_noise(stat, scale, Mechanism.GAUSSIAN, rng, params.epsilon)
    out.meta.update(statistic="z", n=sample.n, sensitivity_l2=sens.l2)
    return out


def private_chi_square(
    inp: ChiSquareInput,
    consts: BigOConstants,
    params: PrivacyParams,
    rng: np.random.Generator,
    pilot_statistic: float | None = None,
) -> NoisyStatistic:
    """Chi-square statistic with data-dependent noise.

    The scale divides by a reference value of the statistic itself:
    `pilot_statistic` if supplied (e.g. from a private pilot study), else
    the realized statistic. The two choices differ whenever the pilot is
    off; both are accepted because neither is canonical.
    """
    stat = chi_square_statistic(inp)
    deviations = inp.observed - inp.expected
    top = int(np.argmax(deviations))
    max_dev = float(deviations[top])
    ref = float(pilot_statistic) if pilot_statistic is not None else stat
    if pilot_statistic is not None and ref <= 0:
        raise ValueError(f"pilot statistic must be positive, got {pilot_statistic}")
    denom = params.epsilon * float(inp.expected[top]) * max(ref, consts.chi_sq_floor)
    scale = consts.chi_sq_const * abs(max_dev) / denom
    out = add_noise(stat, scale, Mechanism.GAUSSIAN, rng, params.epsilon)
    out.meta.update(
        statistic="chi_square",
        argmax_index=top,
        max_deviation=max_dev,
        reference_statistic=ref,
        reference_source="pilot" if pilot_statistic is not None else "realized",
        chi_sq_const=consts.chi_sq_const,
        privacy="heuristic-DP",
    )
    return out


def private_f_statistic(
    inp: FTestInput,
    effect_bound: float,
    consts: BigOConstants,
    params: PrivacyParams,
    rng: np.random.Generator,
    n_scaled: bool = False,
) -> NoisyStatistic:
    """Partial F statistic with Gaussian noise injected on the RSS ratio.

    noise_sigma reports the ratio-level scale b * effect_bound / epsilon;
    the degrees-of-freedom multiplier is deterministic post-processing
    (meta carries the resulting value-level sigma). With zero noise this
    reduces exactly to partial_f_statistic. `n_scaled` switches the
    multiplier to n_obs, a cruder fidelity variant that does not.
    """
    if not effect_bound >= 0:
        raise ValueError(f"effect bound must be nonnegative, got {effect_bound}")
    scale = consts.f_const * effect_bound / params.epsilon
    ratio = inp.rss_reduced / inp.rss_full
    noisy_ratio = add_noise(ratio, scale, Mechanism.GAUSSIAN, rng, params.epsilon)
    if n_scaled:
        mult = float(inp.n_obs)
    else:
        mult = (inp.n_obs - inp.dims_full) / (inp.dims_full - inp.dims_reduced)
    value = (noisy_ratio.value - 1.0) * mult
    out = NoisyStatistic(
        value=value,
        noise_sigma=noisy_ratio.noise_sigma,
        mechanism=noisy_ratio.mechanism,
        epsilon_spent=noisy_ratio.epsilon_spent,
    )
    out.meta.update(
        statistic="partial_f",
        multiplier=mult,
        n_scaled=n_scaled,
        value_noise_sigma=noisy_ratio.noise_sigma * mult,
        noiseless_value=partial_f_statistic(inp),
        f_const=consts.f_const,
        effect_bound=effect_bound,
        privacy="heuristic-DP",
    )
    return out


def private_sample_std(
    sample: BoundedSample,
    params: PrivacyParams,
    rng: np.random.Generator,
) -> NoisyStatistic:
    """Sample standard deviation plus Gaussian noise; meta also carries
    the implied noisy variance-of-the-mean value and its noise scale."""
    sd = sample_std(sample.values)
    n = sample.n
    sens = std_sensitivity(sample.bound, n)
    scale = gaussian_noise_scale(sens, params)
    out = add_noise(sd, scale, Mechanism.GAUSSIAN, rng, params.epsilon)
    out.meta.update(
        statistic="sample_std",
        n=n,
        sensitivity_l2=sens.l2,
        noisy_variance_of_mean=out.value ** 2 / n,
        variance_of_mean_noise_sigma=scale / math.sqrt(n),
    )
    return out
