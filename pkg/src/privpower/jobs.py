"""Job runner shared by the service endpoints and the CLI.

Every job produces a ResultRecord that echoes its inputs, seed, and
provenance tags, and serializes canonically: keys sorted, floats at 17
significant digits, no whitespace variation. Re-running a job with the
inputs echoed in a record reproduces the record byte for byte (single
worker), which is the reproducibility contract the record format exists
to serve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from .distributions import Normal, StudentT
from .dpcore import PrivacyParams
from .privstats import BigOConstants
from .privhist import (
    CompareConfig,
    ComparisonResult,
    PrivHistPlan,
    compare_errors,
    comparison_csv,
    priv_histogram_statistic,
    vanilla_private_statistic,
)
from .samplesize import (
    PowerSpec,
    SizingMode,
    corrected_n_chisquare,
    corrected_n_ftest,
    corrected_n_ztest,
)
from .schemas import CompareRequest, PowerRequest, PrivStatRequest, SampleSizeRequest
from .powersim import ChiSquareTruth, PartialFTruth, SimPlan, simulate_power
from .stattests import BoundedSample


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits."""
    return _encode(obj)


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            raise ValueError(f"cannot serialize non-finite float {value}")
        return format(value, ".17g")
    if isinstance(obj, str):
        import json

        return json.dumps(obj, ensure_ascii=True)
    if isinstance(obj, Mapping):
        items = sorted((str(k), v) for k, v in obj.items())
        body = ",".join(f"{_encode(k)}:{_encode(v)}" for k, v in items)
        return "{" + body + "}"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (list, tuple)) or (
        isinstance(obj, Sequence) and not isinstance(obj, (str, bytes))
    ):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__} canonically")


@dataclass(frozen=True)
class ResultRecord:
    job: str
    inputs: dict
    outputs: dict
    provenance: dict
    seed: int
    tool_version: str = __version__

    def to_json(self) -> str:
        return canonical_json(
            {
                "inputs": self.inputs,
                "job": self.job,
                "outputs": self.outputs,
                "provenance": self.provenance,
                "seed": self.seed,
                "tool_version": self.tool_version,
            }
        )


def _privacy(req) -> PrivacyParams:
    return PrivacyParams(req.epsilon, req.delta, req.num_queries)


def _constants(req) -> BigOConstants:
    return BigOConstants(
        chi_sq_const=req.chi_sq_const,
        f_const=req.f_const,
        chi_sq_floor=req.chi_sq_floor,
    )


def run_power_job(req: PowerRequest) -> ResultRecord:
    privacy = _privacy(req) if req.private else None
    spec = None
    chi = f_truth = None
    if req.test in ("z", "t"):
        spec = PowerSpec(
            alpha=req.alpha,
            power=req.power_target,
            effect=req.effect,
            sigma=req.sigma,
            bound=req.bound if req.bound is not None else 1.0,
            mode=SizingMode(req.mode),
        )
    elif req.test == "chisq":
        chi = ChiSquareTruth(tuple(req.null_probs), tuple(req.true_probs))
    else:
        f_truth = PartialFTruth(
            coefficients=tuple(req.coefficients),
            dims_reduced=req.dims_reduced,
            sigma=req.f_sigma,
            effect_bound=req.effect_bound if req.effect_bound is not None else 0.0,
        )
    plan = SimPlan(
        test=req.test,
        n=req.n,
        reps=req.reps,
        seed=req.seed,
        spec=spec,
        privacy=privacy,
        constants=_constants(req),
        chi_square=chi,
        partial_f=f_truth,
        alpha=req.alpha if req.test in ("chisq", "f") else None,
    )
    est = simulate_power(plan, workers=req.workers)
    outputs = {
        "power_hat": est.power_hat,
        "std_err": est.std_err,
        "reps": est.reps,
        "n": est.n,
        "private": req.private,
    }
    provenance = {"mode": req.mode, "big_o_constants": _constants(req).as_dict()}
    return ResultRecord("power", req.model_dump(mode="json"), outputs, provenance, req.seed)


def run_samplesize_job(req: SampleSizeRequest) -> ResultRecord:
    privacy = _privacy(req)
    consts = _constants(req)
    if req.test in ("z", "t"):
        spec = PowerSpec(
            alpha=req.alpha,
            power=req.power,
            effect=req.effect,
            sigma=req.sigma,
            bound=req.bound,
            mode=SizingMode(req.mode),
        )
        dist = StudentT(req.df) if req.test == "t" else Normal()
        result = corrected_n_ztest(spec, privacy, dist)
    elif req.test == "chisq":
        result = corrected_n_chisquare(
            n_nonprivate=req.n_nonprivate,
            max_deviation=req.max_deviation,
            expected_at_max=req.expected_at_max,
            chi_sq_value=req.chi_sq_value,
            consts=consts,
            params=privacy,
            chi_sq_source=req.chi_sq_source,
        )
    else:
        result = corrected_n_ftest(
            effect_bound=req.effect_bound,
            consts=consts,
            params=privacy,
            n_nonprivate=req.n_nonprivate,
        )
    outputs = {
        "n_baseline": result.n_baseline,
        "correction": result.correction,
        "n_corrected": result.n_corrected,
        "n_corrected_ceil": int(math.ceil(result.n_corrected)),
        "diagnostics": result.diagnostics,
    }
    provenance = {"mode": result.mode.value, "big_o_constants": consts.as_dict()}
    return ResultRecord("samplesize", req.model_dump(mode="json"), outputs, provenance, req.seed)


def run_privstat_job(req: PrivStatRequest) -> ResultRecord:
    data = BoundedSample(np.asarray(req.values, dtype=float), req.bound)
    rng = np.random.default_rng([req.seed, 0])
    if req.method == "privhist":
        plan = PrivHistPlan(
            subsets=req.subsets,
            bins=req.bins,
            lo=req.lo,
            hi=req.hi,
            epsilon=req.epsilon,
            delta=req.delta,
            statistic=req.statistic,
            sensitivity_mode=req.sensitivity_mode,
            num_histograms=req.num_histograms,
            bin_representative=req.bin_representative,
            expected_probs=tuple(req.expected_probs) if req.expected_probs else None,
        )
        release = priv_histogram_statistic(data, plan, rng)
        # exact_statistic is internal-only diagnostic state; never emitted.
        outputs = {
            "estimate": release.estimate,
            "epsilon_total": release.epsilon_total,
            "max_uses": release.max_uses,
            "noise_sigma": release.noise_sigma,
            "clamped": release.clamped,
            "dropped": release.dropped,
            "subset_size": release.subset_size,
            "noisy_heights": release.noisy_heights,
            "bin_values": release.bin_values,
        }
        provenance = {
            "method": "privhist",
            "statistic": req.statistic,
            "sensitivity_mode": req.sensitivity_mode,
            "bin_representative": req.bin_representative,
            "meta": release.meta,
        }
    else:
        stat = vanilla_private_statistic(
            data, req.statistic, req.epsilon, req.delta, rng,
            sensitivity_mode=req.vanilla_sensitivity,
        )
        outputs = {
            "estimate": stat.value,
            "epsilon_total": stat.epsilon_spent,
            "noise_sigma": stat.noise_sigma,
            "mechanism": stat.mechanism.value,
        }
        provenance = {
            "method": "vanilla",
            "statistic": req.statistic,
            "sensitivity_mode": req.vanilla_sensitivity,
            "meta": stat.meta,
        }
    return ResultRecord("privstat", req.model_dump(mode="json"), outputs, provenance, req.seed)


def run_compare_job(req: CompareRequest) -> ResultRecord:
    statistics = ["mean", "std"] if req.statistic == "both" else [req.statistic]
    rows = []
    summaries = {}
    for offset, statistic in enumerate(statistics):
        plan = PrivHistPlan(
            subsets=req.subsets,
            bins=req.bins,
            lo=req.lo,
            hi=req.hi,
            epsilon=req.epsilon,
            delta=req.delta,
            statistic=statistic,
            sensitivity_mode=req.sensitivity_mode,
            num_histograms=req.num_histograms,
        )
        config = CompareConfig(
            n=req.n,
            trials=req.trials,
            plan=plan,
            data_lo=req.data_lo,
            data_hi=req.data_hi,
            seed=req.seed + offset,
        )
        result = compare_errors(config)
        rows.extend(result.rows)
        summaries[statistic] = result.summary
    outputs = {
        "summaries": summaries,
        "rows": [
            {
                "method": r.method,
                "trial": r.trial,
                "n": r.n,
                "epsilon_total": r.epsilon_total,
                "abs_error": r.abs_error,
            }
            for r in rows
        ],
    }
    provenance = {"sensitivity_mode": req.sensitivity_mode, "statistic": req.statistic}
    return ResultRecord("compare", req.model_dump(mode="json"), outputs, provenance, req.seed)


def plot_csv_for(record: ResultRecord) -> str:
    """Plot-ready CSV projection of a record's outputs."""
    out = record.outputs
    if record.job == "compare":
        return comparison_csv(out["rows"])
    if record.job == "power":
        return (
            "n,power_hat,std_err\n"
            f"{out['n']},{format(out['power_hat'], '.17g')},{format(out['std_err'], '.17g')}\n"
        )
    if record.job == "samplesize":
        return (
            "n_baseline,correction,n_corrected\n"
            f"{format(out['n_baseline'], '.17g')},{format(out['correction'], '.17g')},"
            f"{format(out['n_corrected'], '.17g')}\n"
        )
    if record.job == "privstat":
        return (
            "estimate,noise_sigma,epsilon_total\n"
            f"{format(out['estimate'], '.17g')},{format(out['noise_sigma'], '.17g')},"
            f"{format(out['epsilon_total'], '.17g')}\n"
        )
    raise ValueError(f"no plot projection for job {record.job!r}")
