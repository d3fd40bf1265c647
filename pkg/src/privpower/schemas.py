"""Request models for the four job types.

These are the wire format of the service and the shape of a CLI job
config. Privacy-touching jobs require explicit epsilon and delta; there
are deliberately no defaults for either, any job that would spend budget
without both named fails validation.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class JobRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    workers: int = Field(default=1, ge=1)
    # shared across all jobs; only sizing and private z/t tests read it
    mode: Literal["paper", "stderr"] = "stderr"


class PowerRequest(JobRequest):
    """Monte Carlo power estimation for one test at one sample size."""

    test: Literal["z", "t", "chisq", "f"] = "z"
    n: int = Field(ge=2)
    reps: int = Field(default=100_000, ge=1000)
    alpha: float = Field(default=0.05, gt=0, lt=1)
    # z/t truth; effect 0 simulates the null
    effect: Optional[float] = Field(default=None, ge=0)
    sigma: float = Field(default=1.0, gt=0)
    bound: Optional[float] = Field(default=None, gt=0)
    power_target: float = Field(default=0.8, gt=0, lt=1)
    # privacy (both required as soon as either appears)
    epsilon: Optional[float] = Field(default=None, gt=0)
    delta: Optional[float] = Field(default=None, gt=0, lt=1)
    num_queries: int = Field(default=1, ge=1)
    chi_sq_const: float = Field(default=1.0, gt=0)
    f_const: float = Field(default=1.0, gt=0)
    chi_sq_floor: float = Field(default=1e-6, gt=0)
    # chi-square truth
    null_probs: Optional[list[float]] = None
    true_probs: Optional[list[float]] = None
    # partial-F truth
    coefficients: Optional[list[float]] = None
    dims_reduced: Optional[int] = Field(default=None, ge=1)
    f_sigma: float = Field(default=1.0, gt=0)
    effect_bound: Optional[float] = Field(default=None, ge=0)

    @property
    def private(self) -> bool:
        return self.epsilon is not None

    @model_validator(mode="after")
    def _check(self):
        if (self.epsilon is None) != (self.delta is None):
            raise ValueError("privacy requires both epsilon and delta, explicitly")
        if self.test in ("z", "t"):
            if self.effect is None:
                raise ValueError(f"{self.test} test needs an effect size")
            if self.private and self.bound is None:
                raise ValueError("private z/t tests need the data bound")
        elif self.test == "chisq":
            if self.null_probs is None or self.true_probs is None:
                raise ValueError("chisq test needs null_probs and true_probs")
        else:
            if self.coefficients is None or self.dims_reduced is None:
                raise ValueError("f test needs coefficients and dims_reduced")
            if self.private and self.effect_bound is None:
                raise ValueError("private f tests need effect_bound")
        return self


class SampleSizeRequest(JobRequest):
    """Privacy-corrected sample size; epsilon and delta are always required."""

    test: Literal["z", "t", "chisq", "f"] = "z"
    epsilon: float = Field(gt=0)
    delta: float = Field(gt=0, lt=1)
    num_queries: int = Field(default=1, ge=1)
    # z/t
    alpha: float = Field(default=0.05, gt=0, lt=1)
    power: float = Field(default=0.8, gt=0, lt=1)
    effect: Optional[float] = Field(default=None, gt=0)
    sigma: float = Field(default=1.0, gt=0)
    bound: Optional[float] = Field(default=None, gt=0)
    df: Optional[float] = Field(default=None, gt=0)
    # chi-square
    n_nonprivate: float = Field(default=1.0, gt=0)
    max_deviation: Optional[float] = Field(default=None, gt=0)
    expected_at_max: Optional[float] = Field(default=None, gt=0)
    chi_sq_value: Optional[float] = Field(default=None, gt=0)
    chi_sq_source: Literal["pilot-private", "user-supplied"] = "user-supplied"
    # partial F
    effect_bound: Optional[float] = Field(default=None, ge=0)
    chi_sq_const: float = Field(default=1.0, gt=0)
    f_const: float = Field(default=1.0, gt=0)
    chi_sq_floor: float = Field(default=1e-6, gt=0)

    @model_validator(mode="after")
    def _check(self):
        if self.test in ("z", "t"):
            if self.effect is None or self.bound is None:
                raise ValueError(f"{self.test} sizing needs effect and bound")
            if self.test == "t" and self.df is None:
                raise ValueError("t sizing needs df for the t quantiles")
        elif self.test == "chisq":
            missing = [k for k in ("max_deviation", "expected_at_max", "chi_sq_value")
                       if getattr(self, k) is None]
            if missing:
                raise ValueError(f"chisq sizing needs {', '.join(missing)}")
        elif self.effect_bound is None:
            raise ValueError("f sizing needs effect_bound")
        return self


class PrivStatRequest(JobRequest):
    """Private statistic from raw data, via the histogram release or the
    direct vanilla baseline."""

    method: Literal["privhist", "vanilla"] = "privhist"
    statistic: Literal["mean", "std", "chisq-pilot"] = "mean"
    values: list[float] = Field(min_length=1)
    bound: float = Field(gt=0)
    epsilon: float = Field(gt=0)
    delta: float = Field(gt=0, lt=1)
    subsets: int = Field(default=10, ge=2)
    bins: int = Field(default=10, ge=2)
    lo: Optional[float] = None
    hi: Optional[float] = None
    sensitivity_mode: Literal["swap-one", "fixed-h"] = "swap-one"
    vanilla_sensitivity: Literal["swap-one", "range"] = "swap-one"
    num_histograms: int = Field(default=1, ge=1)
    bin_representative: Literal["center", "within-mean"] = "center"
    expected_probs: Optional[list[float]] = None

    @model_validator(mode="after")
    def _check(self):
        if self.method == "privhist":
            if self.lo is None or self.hi is None:
                raise ValueError("privhist needs the statistic range lo/hi")
            if self.statistic == "chisq-pilot" and self.expected_probs is None:
                raise ValueError("chisq-pilot needs expected_probs")
        elif self.statistic == "chisq-pilot":
            raise ValueError("vanilla method supports mean and std only")
        return self


class CompareRequest(JobRequest):
    """Paired-error comparison of the histogram release against the
    vanilla baseline on synthetic uniform data."""

    n: int = Field(default=10_000, ge=2)
    trials: int = Field(default=200, ge=50)
    statistic: Literal["mean", "std", "both"] = "both"
    epsilon: float = Field(gt=0)
    delta: float = Field(gt=0, lt=1)
    subsets: int = Field(default=100, ge=2)
    bins: int = Field(default=20, ge=2)
    lo: float = 0.0
    hi: float = 1.0
    data_lo: float = 0.0
    data_hi: float = 1.0
    sensitivity_mode: Literal["swap-one", "fixed-h"] = "swap-one"
    num_histograms: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check(self):
        if not self.hi > self.lo:
            raise ValueError("statistic range must be increasing")
        if not self.data_hi > self.data_lo:
            raise ValueError("data range must be increasing")
        return self
