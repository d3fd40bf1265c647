"""Differentially private statistics, power analysis, and sample-size planning."""

__version__ = "0.1.0"

from .dpcore import (  # noqa: E402,F401
    Mechanism,
    NoisyStatistic,
    PrivacyParams,
    Sensitivity,
    add_noise,
    compose_budget,
    gaussian_constant,
    gaussian_noise_scale,
    laplace_noise_scale,
    mean_sensitivity,
)
from .samplesize import (  # noqa: F401
    InfeasibleCorrectionError,
    PowerSpec,
    SampleSizeResult,
    SizingMode,
    baseline_n,
    corrected_n_chisquare,
    corrected_n_ftest,
    corrected_n_ztest,
    critical_size_quadratic_oracle,
    quantile_sum,
)
from .privstats import (  # noqa: F401
    BigOConstants,
    private_chi_square,
    private_f_statistic,
    private_sample_std,
    private_z_statistic,
)
from .powersim import (  # noqa: F401
    PowerEstimate,
    SimPlan,
    empirical_sample_size,
    simulate_power,
)
from .privhist import (  # noqa: F401
    CompareConfig,
    EstimateUndefinedError,
    PrivHistPlan,
    PrivHistResult,
    compare_errors,
    partition_disjoint,
    priv_histogram_statistic,
    vanilla_private_statistic,
)
