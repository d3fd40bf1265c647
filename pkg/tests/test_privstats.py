import math

import numpy as np
import pytest

from privpower.dpcore import Mechanism, PrivacyParams, gaussian_noise_scale, mean_sensitivity
from privpower.privstats import (
    BigOConstants,
    private_chi_square,
    private_f_statistic,
    private_sample_std,
    private_z_statistic,
    std_sensitivity,
)
from privpower.stattests import (
    BoundedSample,
    ChiSquareInput,
    FTestInput,
    chi_square_statistic,
    partial_f_statistic,
    sample_std,
    z_statistic,
)

PARAMS = PrivacyParams(1.0, 1e-5, 1)
CONSTS = BigOConstants()


def _sample(n=100, bound=1.0, seed=0):
    rng = np.random.default_rng(seed)
    return BoundedSample(rng.uniform(-bound, bound, n), bound)


class TestPinnedZeroNoise:
    """Every private statistic equals its classical counterpart when the
    injected noise is pinned to zero."""

    def test_z(self, zero_rng):
        sample = _sample()
        out = private_z_statistic(0.3, 0.0, 0.12, sample, PARAMS, zero_rng)
        assert out.value == pytest.approx(z_statistic(0.3, 0.0, 0.12), abs=0)

    def test_chi_square(self, zero_rng):
        inp = ChiSquareInput([10, 20, 30], [20, 20, 20])
        out = private_chi_square(inp, CONSTS, PARAMS, zero_rng)
        assert out.value == pytest.approx(chi_square_statistic(inp), abs=0)

    def test_partial_f(self, zero_rng):
        inp = FTestInput(2.0, 1.0, 12, 4, 2)
        out = private_f_statistic(inp, 0.5, CONSTS, PARAMS, zero_rng)
        assert out.value == pytest.approx(partial_f_statistic(inp), abs=0)

    def test_sample_std(self, zero_rng):
        sample = _sample()
        out = private_sample_std(sample, PARAMS, zero_rng)
        assert out.value == pytest.approx(sample_std(sample.values), abs=0)


class TestScaleClosedForms:
    """Noise scales follow the stated closed forms exactly; no sampling."""

    def test_z_scale(self, zero_rng):
        sample = _sample(n=100, bound=1.0)
        out = private_z_statistic(0.0, 0.0, 1.0, sample, PARAMS, zero_rng)
        assert out.noise_sigma == pytest.approx(0.096896105252107788, rel=1e-12)
        assert out.noise_sigma == pytest.approx(
            gaussian_noise_scale(mean_sensitivity(1.0, 100), PARAMS), rel=0
        )

    def test_chi_square_scale(self, zero_rng):
        inp = ChiSquareInput([10, 20, 30], [20, 20, 20])
        out = private_chi_square(inp, CONSTS, PARAMS, zero_rng)
        # max deviation 10 at the third group, reference statistic 10
        assert out.noise_sigma == pytest.approx(10.0 / (1.0 * 20.0 * 10.0), rel=1e-12)
        assert out.meta["argmax_index"] == 2
        assert out.meta["max_deviation"] == pytest.approx(10.0)

    def test_chi_square_scale_decreases_in_epsilon(self, zero_rng):
        inp = ChiSquareInput([10, 20, 30], [20, 20, 20])
        scales = [
            private_chi_square(inp, CONSTS, PrivacyParams(e, 1e-5), zero_rng).noise_sigma
            for e in (0.5, 1.0, 2.0, 4.0)
        ]
        for a, b in zip(scales, scales[1:]):
            assert a == pytest.approx(2 * b, rel=1e-12)

    def test_f_scale_identity(self, zero_rng):
        inp = FTestInput(2.0, 1.0, 12, 4, 2)
        out = private_f_statistic(inp, 0.5, CONSTS, PARAMS, zero_rng)
        assert out.noise_sigma == pytest.approx(1.0 * 0.5 / 1.0, rel=0)

    def test_std_scale(self, zero_rng):
        sample = _sample(n=101, bound=1.0)
        out = private_sample_std(sample, PARAMS, zero_rng)
        assert out.noise_sigma == pytest.approx(0.96896105252107788, rel=1e-12)
        assert out.meta["variance_of_mean_noise_sigma"] == pytest.approx(
            out.noise_sigma / math.sqrt(101), rel=1e-12
        )


class TestForcedNoise:
    def test_f_statistic_with_forced_ratio_noise(self, pinned_rng):
        # scale is 1.0 (const * bound / eps = 1), so the pinned standard
        # normal value is the injected ratio noise itself
        inp = FTestInput(2.0, 1.0, 12, 4, 2)
        out = private_f_statistic(inp, 1.0, CONSTS, PARAMS, pinned_rng(0.5))
        assert out.value == pytest.approx((2.0 + 0.5 - 1.0) * 4.0)

    def test_f_statistic_n_scaled_variant(self, pinned_rng):
        inp = FTestInput(2.0, 1.0, 12, 4, 2)
        out = private_f_statistic(inp, 1.0, CONSTS, PARAMS, pinned_rng(0.5), n_scaled=True)
        assert out.value == pytest.approx((2.0 + 0.5 - 1.0) * 12.0)


class TestVanishingNoise:
    def test_z_near_exact_at_huge_epsilon(self):
        sample = _sample()
        params = PrivacyParams(1e9, 1e-5)
        out = private_z_statistic(0.3, 0.0, 0.12, sample, params, np.random.default_rng(1))
        assert abs(out.value - 2.5) < 1e-6

    def test_std_near_exact_at_huge_epsilon(self):
        sample = _sample(n=50)
        out = private_sample_std(sample, PrivacyParams(1e9, 1e-5), np.random.default_rng(2))
        assert abs(out.value - sample_std(sample.values)) < 1e-6


class TestCalibrationAndUnbiasedness:
    N_REPS = 20_000

    def _draws(self, fn):
        rng = np.random.default_rng(77)
        return np.array([fn(rng) for _ in range(self.N_REPS)])

    def test_z_monte_carlo(self):
        sample = _sample()
        base = z_statistic(0.3, 0.0, 0.12)
        diff = self._draws(
            lambda rng: private_z_statistic(0.3, 0.0, 0.12, sample, PARAMS, rng).value
        ) - base
        scale = 0.096896105252107788
        assert abs(diff.std() - scale) < 0.02 * scale
        assert abs(diff.mean()) < 3 * scale / math.sqrt(self.N_REPS)

    def test_std_monte_carlo(self):
        sample = _sample(n=101)
        base = sample_std(sample.values)
        diff = self._draws(
            lambda rng: private_sample_std(sample, PARAMS, rng).value
        ) - base
        scale = 0.96896105252107788
        assert abs(diff.std() - scale) < 0.02 * scale
        assert abs(diff.mean()) < 3 * scale / math.sqrt(self.N_REPS)


class TestRegisteredSensitivities:
    def test_gaussian_scales_derive_from_registered_sensitivities(self, zero_rng):
        # no ad hoc scales: every Gaussian query's sigma is
        # composed_constant * l2 / epsilon of its declared sensitivity
        sample = _sample(n=80)
        z_out = private_z_statistic(0.0, 0.0, 1.0, sample, PARAMS, zero_rng)
        assert z_out.noise_sigma == gaussian_noise_scale(
            mean_sensitivity(sample.bound, sample.n), PARAMS
        )
        sd_out = private_sample_std(sample, PARAMS, zero_rng)
        assert sd_out.noise_sigma == gaussian_noise_scale(
            std_sensitivity(sample.bound, sample.n), PARAMS
        )
        assert z_out.meta["sensitivity_l2"] == mean_sensitivity(sample.bound, sample.n).l2
        assert sd_out.meta["sensitivity_l2"] == std_sensitivity(sample.bound, sample.n).l2


class TestSqrtCompositionLaw:
    def test_quadrupling_queries_doubles_gaussian_scales(self, zero_rng):
        sample = _sample(n=64)
        q1 = PrivacyParams(1.0, 1e-5, 1)
        q4 = PrivacyParams(1.0, 1e-5, 4)
        z1 = private_z_statistic(0.0, 0.0, 1.0, sample, q1, zero_rng).noise_sigma
        z4 = private_z_statistic(0.0, 0.0, 1.0, sample, q4, zero_rng).noise_sigma
        assert z4 == pytest.approx(2 * z1, rel=1e-12)
        s1 = private_sample_std(sample, q1, zero_rng).noise_sigma
        s4 = private_sample_std(sample, q4, zero_rng).noise_sigma
        assert s4 == pytest.approx(2 * s1, rel=1e-12)


class TestChiSquareDetails:
    def test_perfect_fit_degenerates(self, zero_rng):
        inp = ChiSquareInput([20, 20, 20], [20, 20, 20])
        out = private_chi_square(inp, CONSTS, PARAMS, zero_rng)
        assert out.value == 0.0
        assert out.noise_sigma == 0.0
        assert out.mechanism is Mechanism.NONE

    def test_pilot_reference_used_when_given(self, zero_rng):
        inp = ChiSquareInput([10, 20, 30], [20, 20, 20])
        out = private_chi_square(inp, CONSTS, PARAMS, zero_rng, pilot_statistic=5.0)
        assert out.noise_sigma == pytest.approx(10.0 / (1.0 * 20.0 * 5.0))
        assert out.meta["reference_source"] == "pilot"

    def test_heuristic_label_present(self, zero_rng):
        inp = ChiSquareInput([10, 20, 30], [20, 20, 20])
        out = private_chi_square(inp, CONSTS, PARAMS, zero_rng)
        assert out.meta["privacy"] == "heuristic-DP"


def test_std_sensitivity_formula():
    assert std_sensitivity(1.0, 101).l2 == pytest.approx(0.2)
    with pytest.raises(ValueError):
        std_sensitivity(1.0, 1)


def test_big_o_constants_validated():
    with pytest.raises(ValueError):
        BigOConstants(chi_sq_const=0.0)
    with pytest.raises(ValueError):
        BigOConstants(f_const=-1.0)
