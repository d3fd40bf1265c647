"""Acceptance suite.

Each test implements one acceptance criterion at its stated tolerance
and runtime budget, and prints a single PASS/FAIL line (run with
`pytest -s tests/test_acceptance.py` to see them live).
"""

import json
import math
import pathlib
import time

import numpy as np
import pytest

from privpower.cli import main as cli_main
from privpower.distributions import Normal, cdf, normal_cdf, quantile, sf
from privpower.dpcore import (
    Mechanism,
    PrivacyParams,
    add_noise,
    gaussian_noise_scale,
    mean_sensitivity,
)
from privpower.jobs import plot_csv_for, run_compare_job
from privpower.powersim import SimPlan, simulate_power
from privpower.privhist import partition_disjoint, priv_histogram_statistic, PrivHistPlan
from privpower.privstats import (
    BigOConstants,
    private_chi_square,
    private_f_statistic,
    private_sample_std,
    private_z_statistic,
)
from privpower.samplesize import (
    InfeasibleCorrectionError,
    PowerSpec,
    SizingMode,
    baseline_n,
    corrected_n_chisquare,
    corrected_n_ftest,
    corrected_n_ztest,
    critical_size_quadratic_oracle,
)
from privpower.schemas import CompareRequest
from privpower.stattests import (
    BoundedSample,
    ChiSquareInput,
    FTestInput,
    chi_square_statistic,
    partial_f_statistic,
    sample_std,
    z_statistic,
)

TABLE = pathlib.Path(__file__).parent / "data" / "reference_quantiles.csv"


def _report(number, name, ok, detail, budget, elapsed):
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {number:02d} {name}: {status} ({detail}; {elapsed:.1f}s / {budget:.0f}s budget)")
    assert ok, f"criterion {number} ({name}): {detail}"
    assert elapsed < budget, f"criterion {number} exceeded its {budget}s budget ({elapsed:.1f}s)"


def test_criterion_01_closed_form_vs_quadratic_oracle():
    start = time.time()
    rng = np.random.default_rng(1001)
    worst = 0.0
    for _ in range(1000):
        spec = PowerSpec(
            alpha=float(rng.choice([0.01, 0.05])),
            power=float(rng.choice([0.8, 0.9])),
            effect=float(rng.uniform(0.05, 2.0)),
            sigma=float(rng.uniform(0.1, 10.0)),
            bound=float(rng.uniform(0.1, 10.0)),
            mode=SizingMode.PAPER,
        )
        params = PrivacyParams(
            epsilon=float(rng.uniform(0.1, 10.0)),
            delta=float(10.0 ** rng.uniform(-8.0, -2.0)),
            num_queries=int(rng.integers(1, 11)),
        )
        closed = corrected_n_ztest(spec, params).n_corrected
        oracle = critical_size_quadratic_oracle(spec, params)
        worst = max(worst, abs(closed - oracle) / oracle)
    _report(1, "closed form vs quadratic oracle", worst <= 1e-9,
            f"worst relative difference {worst:.2e} over 1000 tuples", 5.0, time.time() - start)


def test_criterion_02_limit_laws_and_infeasibility_boundary():
    start = time.time()
    params = PrivacyParams(1e6, 1e-5)
    consts = BigOConstants()
    spec = PowerSpec(alpha=0.05, power=0.8, effect=0.5, sigma=1.0, bound=1.0, mode=SizingMode.PAPER)
    gaps = [
        abs(corrected_n_ztest(spec, params).correction - 1.0),
        abs(corrected_n_chisquare(1.0, 10.0, 20.0, 10.0, consts, params).correction - 1.0),
        abs(corrected_n_ftest(0.5, consts, params).correction - 1.0),
    ]
    boundary_ok = True
    one = PrivacyParams(1.0, 1e-5)
    for ratio in (1.0, 1.5, 10.0):
        try:
            corrected_n_ftest(ratio, consts, one)
            boundary_ok = False
        except InfeasibleCorrectionError:
            pass
    try:
        corrected_n_ftest(1.0 - 1e-9, consts, one)
    except InfeasibleCorrectionError:
        boundary_ok = False
    ok = max(gaps) <= 1e-6 and boundary_ok
    _report(2, "limit laws at eps=1e6 and the infeasibility pole", ok,
            f"max |correction-1| {max(gaps):.2e}, pole behavior {'exact' if boundary_ok else 'wrong'}",
            1.0, time.time() - start)


def test_criterion_03_noise_calibration_all_four_statistics():
    start = time.time()
    reps = 100_000
    params = PrivacyParams(1.0, 1e-5, 1)
    consts = BigOConstants()
    rng = np.random.default_rng(3003)
    sample = BoundedSample(np.linspace(-1.0, 1.0, 100), 1.0)
    sample_sd = BoundedSample(np.linspace(-1.0, 1.0, 101), 1.0)
    chi_inp = ChiSquareInput([10.0, 20.0, 30.0], [20.0, 20.0, 20.0])
    f_inp = FTestInput(2.0, 1.0, 12, 4, 2)
    f_mult = (12 - 4) / (4 - 2)

    base_z = z_statistic(0.3, 0.0, 0.12)
    base_chi = chi_square_statistic(chi_inp)
    base_f = partial_f_statistic(f_inp)
    base_sd = sample_std(sample_sd.values)

    draws = {"z": np.empty(reps), "chisq": np.empty(reps), "f": np.empty(reps), "std": np.empty(reps)}
    for i in range(reps):
        draws["z"][i] = private_z_statistic(0.3, 0.0, 0.12, sample, params, rng).value - base_z
        draws["chisq"][i] = private_chi_square(chi_inp, consts, params, rng).value - base_chi
        draws["f"][i] = (private_f_statistic(f_inp, 0.5, consts, params, rng).value - base_f) / f_mult
        draws["std"][i] = private_sample_std(sample_sd, params, rng).value - base_sd

    scales = {
        "z": 2 * params.composed_constant * 1.0 / (100 * params.epsilon),
        "chisq": consts.chi_sq_const * 10.0 / (params.epsilon * 20.0 * base_chi),
        "f": consts.f_const * 0.5 / params.epsilon,
        "std": 2 * params.composed_constant * 1.0 / (params.epsilon * math.sqrt(100)),
    }
    rel = {k: abs(draws[k].std() - scales[k]) / scales[k] for k in scales}
    ok = max(rel.values()) <= 0.02
    detail = ", ".join(f"{k}: {v:.4f}" for k, v in rel.items())
    _report(3, "realized noise std within 2% of formula scales", ok, detail, 30.0, time.time() - start)


def test_criterion_04_power_engine_calibration():
    start = time.time()
    spec = PowerSpec(alpha=0.05, power=0.8, effect=0.5, sigma=1.0, bound=1.0)
    est = simulate_power(SimPlan(test="z", n=32, reps=100_000, seed=404, spec=spec))
    zq = quantile(Normal(), 0.975)
    analytic = normal_cdf(0.5 * math.sqrt(32) - zq) + normal_cdf(-0.5 * math.sqrt(32) - zq)
    null_spec = PowerSpec(alpha=0.05, power=0.8, effect=0.0, sigma=1.0, bound=1.0)
    null_est = simulate_power(SimPlan(test="z", n=32, reps=100_000, seed=405, spec=null_spec))
    ok = abs(est.power_hat - analytic) <= 0.01 and 0.045 <= null_est.power_hat <= 0.055
    _report(4, "power engine vs analytic oracle", ok,
            f"power {est.power_hat:.4f} vs {analytic:.4f}, null rate {null_est.power_hat:.4f}",
            20.0, time.time() - start)


def test_criterion_05_end_to_end_power_restoration():
    start = time.time()
    params = PrivacyParams(1.0, 1e-5, 1)
    spec = PowerSpec(alpha=0.05, power=0.8, effect=0.5, sigma=1.0, bound=1.0,
                     mode=SizingMode.STDERR)
    corrected = corrected_n_ztest(spec, params).n_corrected
    n_corrected = math.ceil(corrected)
    n_baseline = math.ceil(baseline_n(spec))

    at_corrected = simulate_power(
        SimPlan(test="z", n=n_corrected, reps=100_000, seed=505, spec=spec, privacy=params)
    )
    at_baseline = simulate_power(
        SimPlan(test="z", n=n_baseline, reps=100_000, seed=506, spec=spec, privacy=params)
    )
    separation = (at_corrected.power_hat - at_baseline.power_hat) / math.hypot(
        at_corrected.std_err, at_baseline.std_err
    )
    ok = abs(at_corrected.power_hat - 0.8) <= 0.03 and separation >= 3.0
    _report(5, "corrected size restores 0.8 power, baseline does not", ok,
            f"corrected n={n_corrected} power {at_corrected.power_hat:.4f}, "
            f"baseline n={n_baseline} power {at_baseline.power_hat:.4f}, "
            f"separation {separation:.1f} sigma", 60.0, time.time() - start)


def test_criterion_06_histogram_release_beats_vanilla(tmp_path):
    start = time.time()
    req = CompareRequest(
        n=10_000, trials=200, statistic="both", epsilon=1.0, delta=1e-5,
        subsets=100, bins=20, lo=0.0, hi=1.0, data_lo=0.0, data_hi=1.0,
        sensitivity_mode="swap-one", seed=606,
    )
    record = run_compare_job(req)
    csv_path = tmp_path / "comparison.csv"
    csv_path.write_text(plot_csv_for(record))
    ok = True
    details = []
    for statistic in ("mean", "std"):
        summary = record.outputs["summaries"][statistic]
        hist = summary[f"privhist-{statistic}"]["mean_abs_error"]
        van = summary[f"vanilla-{statistic}"]["mean_abs_error"]
        t_stat = summary["paired_t"]
        ok = ok and hist < van and t_stat >= 3.0
        details.append(f"{statistic}: {hist:.4f} vs {van:.4f} (t={t_stat:.1f})")
    rows = csv_path.read_text().strip().split("\n")
    ok = ok and len(rows) == 1 + 2 * 200 * 2
    _report(6, "histogram release beats range-calibrated vanilla", ok,
            "; ".join(details), 60.0, time.time() - start)


def test_criterion_07_bookkeeping_and_reconstruction_floor(zero_rng):
    start = time.time()
    ok = True
    details = []
    rng = np.random.default_rng(707)
    for n, subsets in [(100, 10), (101, 10), (1000, 40), (64, 64), (30, 2)]:
        data = BoundedSample(rng.uniform(0, 1, n), 1.0)
        parts = partition_disjoint(data, subsets, np.random.default_rng(7))
        flat = np.concatenate(parts)
        uses_once = flat.size == np.unique(flat).size or flat.size == n // subsets * subsets
        plan = PrivHistPlan(subsets=max(subsets, 2), bins=20, lo=0.0, hi=1.0,
                            epsilon=0.7, delta=1e-5)
        release = priv_histogram_statistic(data, plan, zero_rng)
        budget_ok = release.max_uses == 1 and release.epsilon_total == pytest.approx(0.7)
        recon_ok = abs(release.estimate - release.exact_statistic) <= 1.0 / (2 * 20) + 1e-12
        if not (uses_once and budget_ok and recon_ok):
            ok = False
            details.append(f"(n={n}, S={subsets}) failed")
    detail = "k=1 and eps_total=eps on all grids, zero-noise error within half a bin" \
        if ok else "; ".join(details)
    _report(7, "bookkeeping and reconstruction floor", ok, detail, 5.0, time.time() - start)


def test_criterion_08_distribution_kernel_round_trip():
    import csv as csv_mod

    from privpower.distributions import ChiSquare, FDist, StudentT

    start = time.time()
    worst_norm = 0.0
    worst_rel = 0.0
    count = 0
    with TABLE.open() as fh:
        for row in csv_mod.DictReader(fh):
            count += 1
            p = float(row["p"])
            x_ref = float(row["x"])
            family = row["family"]
            if family == "normal":
                dist = Normal()
            elif family == "student_t":
                dist = StudentT(float(row["param1"]))
            elif family == "chi_square":
                dist = ChiSquare(float(row["param1"]))
            else:
                dist = FDist(float(row["param1"]), float(row["param2"]))
            q = quantile(dist, p)
            if family == "normal":
                worst_norm = max(worst_norm, abs(cdf(dist, q) - p), abs(q - x_ref))
            else:
                err = abs(cdf(dist, q) - p) if p <= 0.5 else abs(sf(dist, q) - (1 - p))
                worst_rel = max(worst_rel, err / min(p, 1 - p))
                worst_rel = max(worst_rel, abs(q - x_ref) / max(abs(x_ref), 1e-6))
    ok = count >= 200 and worst_norm <= 1e-9 and worst_rel <= 1e-8
    _report(8, "quantile/CDF round trip against the reference table", ok,
            f"{count} points, normal worst {worst_norm:.1e}, others worst rel {worst_rel:.1e}",
            5.0, time.time() - start)


def test_criterion_09_cli_determinism(tmp_path):
    start = time.time()
    cfg = tmp_path / "job.cfg"
    cfg.write_text(
        "epsilon = 1.0\ndelta = 1e-5\neffect = 0.5\nsigma = 1\nbound = 1\nmode = stderr\n"
    )
    data = tmp_path / "d.csv"
    data.write_text("x\n" + "\n".join(f"{v / 200:.6f}" for v in range(200)) + "\n")
    jobs = {
        "samplesize": ["samplesize", "--config", str(cfg), "--seed", "11"],
        "power": ["power", "--config", str(cfg), "--n", "32", "--reps", "5000",
                  "--seed", "12"],
        "privstat": ["privstat", "--data", str(data), "--column", "x", "--bound", "1",
                     "--epsilon", "5", "--delta", "1e-5", "--subsets", "20",
                     "--bins", "8", "--lo", "0", "--hi", "1", "--seed", "13"],
        "compare": ["compare", "--n", "400", "--trials", "50", "--statistic", "mean",
                    "--subsets", "20", "--bins", "10", "--epsilon", "1",
                    "--delta", "1e-5", "--seed", "14"],
    }
    ok = True
    sizes = []
    for name, args in jobs.items():
        artifacts = []
        for tag in ("a", "b"):
            out = tmp_path / f"{name}-{tag}.json"
            plot = tmp_path / f"{name}-{tag}.csv"
            code = cli_main(args + ["--workers", "1", "--out", str(out),
                                    "--plot-csv", str(plot)])
            assert code == 0, name
            artifacts.append(out.read_bytes() + plot.read_bytes())
        ok = ok and artifacts[0] == artifacts[1]
        sizes.append(f"{name} {len(artifacts[0])}B")
    _report(9, "byte-identical CLI reruns (records and CSVs)", ok,
            "all four job types: " + ", ".join(sizes), 10.0, time.time() - start)


def test_criterion_10_small_domain_dp_frequency_check():
    start = time.time()
    eps, delta = 1.0, 1e-5
    params = PrivacyParams(eps, delta, 1)
    grid = np.array([-1.0, 0.0, 1.0])
    base = np.array([-1.0, 0.0, 1.0, 1.0])
    n = base.size
    scale = gaussian_noise_scale(mean_sensitivity(1.0, n), params)

    neighbors = []
    for pos in range(n):
        for repl in grid:
            if repl != base[pos]:
                other = base.copy()
                other[pos] = repl
                neighbors.append(other)

    draws_per = 1_000_000
    cells = 40
    means = [base.mean()] + [nb.mean() for nb in neighbors]
    lo = min(means) - 5 * scale
    hi = max(means) + 5 * scale

    def frequencies(dataset, seed):
        rng = np.random.default_rng(seed)
        out = dataset.mean() + scale * rng.standard_normal(draws_per)
        idx = np.clip(((out - lo) / (hi - lo) * cells).astype(int), 0, cells - 1)
        return np.bincount(idx, minlength=cells) / draws_per

    base_freq = frequencies(base, 10_000)
    ok = True
    worst_margin = -np.inf
    for j, nb in enumerate(neighbors):
        nb_freq = frequencies(nb, 10_001 + j)
        for p_hat, q_hat in ((base_freq, nb_freq), (nb_freq, base_freq)):
            se = np.sqrt(
                p_hat * (1 - p_hat) / draws_per
                + math.exp(2 * eps) * q_hat * (1 - q_hat) / draws_per
            )
            excess = p_hat - (math.exp(eps) * q_hat + delta + 5 * se)
            worst_margin = max(worst_margin, float(excess.max()))
            if np.any(excess > 0):
                ok = False
    _report(10, "small-domain frequency check of the Gaussian mechanism", ok,
            f"{len(neighbors)} neighbor pairs x {cells} cells, worst excess {worst_margin:.2e}",
            120.0, time.time() - start)
