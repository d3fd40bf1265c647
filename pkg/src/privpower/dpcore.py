"""Privacy primitives: parameters, sensitivities, noise calibration, budget.

The Gaussian mechanism is calibrated as sigma = const * sqrt(k) * l2 / epsilon
with const = sqrt(2 ln(1.25/delta)) and k the number of composed queries;
the Laplace comparison utility scales linearly in k because it composes
under L1 sensitivity. Neighboring datasets differ by replacing a single
element, which is the convention all sensitivities here assume.

All randomness flows through an explicit numpy Generator, so every
operation is pure given its stream and safe for concurrent use as long
as each worker owns an independent stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Mechanism(str, Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"
    NONE = "none"


def gaussian_constant(delta: float) -> float:
    """Calibration constant sqrt(2 ln(1.25/delta)) of the Gaussian mechanism."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    return math.sqrt(2.0 * math.log(1.25 / delta))


@dataclass(frozen=True)
class PrivacyParams:
    """Per-query privacy budget plus the number of queries composed into it.

    delta has no default on purpose: it is a required modelling choice,
    typically much smaller than 1/N.
    """

    epsilon: float
    delta: float
    num_queries: int = 1

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")
        if not (isinstance(self.num_queries, (int, np.integer)) and self.num_queries >= 1):
            raise ValueError(f"num_queries must be an integer >= 1, got {self.num_queries}")

    @property
    def gaussian_constant(self) -> float:
        return gaussian_constant(self.delta)

    @property
    def composed_constant(self) -> float:
        """Gaussian constant after sqrt-composition over num_queries."""
        return self.gaussian_constant * math.sqrt(self.num_queries)


@dataclass(frozen=True)
class Sensitivity:
    """L2 and L1 sensitivity bounds of one query; equal for scalar queries."""

    l2: float
    l1: float
    description: str = ""

    def __post_init__(self):
        if self.l2 < 0 or self.l1 < 0:
            raise ValueError("sensitivities must be nonnegative")
        if self.l2 > self.l1 * (1.0 + 1e-12):
            raise ValueError(f"l2 ({self.l2}) cannot exceed l1 ({self.l1})")


def mean_sensitivity(bound: float, n: int) -> Sensitivity:
    """Replace-one sensitivity of the mean of n values with |x| <= bound."""
    if not bound > 0:
        raise ValueError(f"bound must be positive, got {bound}")
    if not n >= 1:
        raise ValueError(f"n must be >= 1, got {n}")
    s = 2.0 * bound / n
    return Sensitivity(l2=s, l1=s, description=f"mean of {n} values in [-{bound}, {bound}]")


def gaussian_noise_scale(sens: Sensitivity, params: PrivacyParams) -> float:
    """Noise sigma for the Gaussian mechanism; 0 iff the query has zero sensitivity."""
    return params.composed_constant * sens.l2 / params.epsilon


def laplace_noise_scale(sens: Sensitivity, params: PrivacyParams) -> float:
    """Laplace scale b per query under num_queries-fold L1 composition."""
    return params.num_queries * sens.l1 / params.epsilon


@dataclass(frozen=True)
class NoisyStatistic:
    """A privatized statistic with the noise that produced it.

    noise_sigma is 0 exactly when no mechanism ran, and epsilon_spent is
    positive exactly when one did.
    """

    value: float
    noise_sigma: float
    mechanism: Mechanism
    epsilon_spent: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be nonnegative, got {self.noise_sigma}")
        if (self.noise_sigma == 0) != (self.mechanism is Mechanism.NONE):
            raise ValueError("noise_sigma must be 0 iff mechanism is NONE")
        if self.mechanism is Mechanism.NONE:
            if self.epsilon_spent != 0:
                raise ValueError("epsilon_spent must be 0 without a mechanism")
        elif not self.epsilon_spent > 0:
            raise ValueError("epsilon_spent must be positive when a mechanism ran")


def add_noise(
    value: float,
    scale: float,
    mechanism: Mechanism,
    rng: np.random.Generator,
    epsilon_spent: float,
) -> NoisyStatistic:
    """Apply calibrated noise to a scalar.

    A zero scale degrades to the identity: no draw is consumed from the
    stream, the mechanism is recorded as NONE and no budget is spent.
    """
    if scale < 0:
        raise ValueError(f"noise scale must be nonnegative, got {scale}")
    if scale == 0 or mechanism is Mechanism.NONE:
        return NoisyStatistic(float(value), 0.0, Mechanism.NONE, 0.0)
    if mechanism is Mechanism.GAUSSIAN:
        noisy = float(value) + scale * float(rng.standard_normal())
    elif mechanism is Mechanism.LAPLACE:
        noisy = float(value) + float(rng.laplace(0.0, scale))
    else:
        raise ValueError(f"unknown mechanism: {mechanism!r}")
    return NoisyStatistic(noisy, float(scale), mechanism, float(epsilon_spent))


def compose_budget(per_query_epsilon: float, max_uses: int) -> float:
    """Total privacy cost epsilon * k where k is the maximum number of
    times any data point is used."""
    if not per_query_epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {per_query_epsilon}")
    if not (isinstance(max_uses, (int, np.integer)) and max_uses >= 1):
        raise ValueError(f"max_uses must be an integer >= 1, got {max_uses}")
    return per_query_epsilon * max_uses
