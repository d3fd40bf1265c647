"""Command-line front end.

A thin client over the job runner the service also uses: flags and an
optional key=value config file are merged (flags win), validated through
the request models, run in process, and the canonical ResultRecord is
written to --out or stdout. `privpower serve` starts the HTTP service.

Exit codes: 0 success, 2 invalid input or config, 3 infeasible
correction or search, 4 undefined estimate, 1 anything unexpected. On
failure a machine-readable {"error": class, "message": ...} object is
printed to stderr.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np
from pydantic import ValidationError

from .jobs import (
    ResultRecord,
    canonical_json,
    plot_csv_for,
    run_compare_job,
    run_power_job,
    run_privstat_job,
    run_samplesize_job,
)
from .privhist import EstimateUndefinedError
from .powersim import InfeasibleSearchError
from .samplesize import InfeasibleCorrectionError
from .schemas import CompareRequest, PowerRequest, PrivStatRequest, SampleSizeRequest
from .stattests import BoundedSample

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_UNDEFINED = 4

_LIST_KEYS = {"null_probs", "true_probs", "coefficients", "expected_probs", "values"}

_RUNNERS = {
    "power": (PowerRequest, run_power_job),
    "samplesize": (SampleSizeRequest, run_samplesize_job),
    "privstat": (PrivStatRequest, run_privstat_job),
    "compare": (CompareRequest, run_compare_job),
}


def ingest_csv(path: str, column: str, bound: float) -> BoundedSample:
    """Read one numeric column from a headered CSV into a BoundedSample.

    Values outside [-bound, bound] are rejected with their row numbers;
    the bound is a declared, non-private input.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise ValueError(f"column {column!r} not found in {path}")
        values = []
        bad_rows = []
        for line, row in enumerate(reader, start=2):
            cell = row[column]
            try:
                value = float(cell)
            except (TypeError, ValueError):
                raise ValueError(f"row {line}: non-numeric value {cell!r} in column {column!r}")
            if abs(value) > bound:
                bad_rows.append((line, value))
            values.append(value)
    if bad_rows:
        detail = ", ".join(f"row {line}: {value}" for line, value in bad_rows[:5])
        raise ValueError(
            f"{len(bad_rows)} value(s) outside [-{bound}, {bound}] ({detail})"
        )
    if not values:
        raise ValueError(f"no data rows in {path}")
    return BoundedSample(np.asarray(values), bound)


def load_config(path: str) -> dict:
    """Parse a key = value config file; '#' starts a comment line."""
    config: dict = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            config[key.strip().replace("-", "_")] = value.strip()
    return config


def _coerce_lists(payload: dict) -> dict:
    for key in _LIST_KEYS & payload.keys():
        value = payload[key]
        if isinstance(value, str):
            payload[key] = [float(part) for part in value.split(",") if part.strip()]
    return payload


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file; flags override it")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out", help="write the result record here instead of stdout")
    parser.add_argument("--plot-csv", dest="plot_csv", help="write plot-ready CSV rows here")
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--delta", type=float)
    parser.add_argument("--mode", choices=["paper", "stderr"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privpower",
        description="Differentially private statistics and study planning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("power", help="Monte Carlo power estimate")
    _add_common(p)
    p.add_argument("--test", choices=["z", "t", "chisq", "f"])
    p.add_argument("--n", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--effect", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--bound", type=float)
    p.add_argument("--num-queries", dest="num_queries", type=int)
    p.add_argument("--null-probs", dest="null_probs")
    p.add_argument("--true-probs", dest="true_probs")
    p.add_argument("--coefficients")
    p.add_argument("--dims-reduced", dest="dims_reduced", type=int)
    p.add_argument("--f-sigma", dest="f_sigma", type=float)
    p.add_argument("--effect-bound", dest="effect_bound", type=float)
    p.add_argument("--chi-sq-const", dest="chi_sq_const", type=float)
    p.add_argument("--f-const", dest="f_const", type=float)
    p.add_argument("--chi-sq-floor", dest="chi_sq_floor", type=float)

    p = sub.add_parser("samplesize", help="privacy-corrected sample size")
    _add_common(p)
    p.add_argument("--test", choices=["z", "t", "chisq", "f"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--power", type=float)
    p.add_argument("--effect", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--bound", type=float)
    p.add_argument("--df", type=float)
    p.add_argument("--num-queries", dest="num_queries", type=int)
    p.add_argument("--n-nonprivate", dest="n_nonprivate", type=float)
    p.add_argument("--max-deviation", dest="max_deviation", type=float)
    p.add_argument("--expected-at-max", dest="expected_at_max", type=float)
    p.add_argument("--chi-sq-value", dest="chi_sq_value", type=float)
    p.add_argument("--chi-sq-source", dest="chi_sq_source",
                   choices=["pilot-private", "user-supplied"])
    p.add_argument("--effect-bound", dest="effect_bound", type=float)
    p.add_argument("--chi-sq-const", dest="chi_sq_const", type=float)
    p.add_argument("--f-const", dest="f_const", type=float)
    p.add_argument("--chi-sq-floor", dest="chi_sq_floor", type=float)

    p = sub.add_parser("privstat", help="private statistic from a CSV column")
    _add_common(p)
    p.add_argument("--data", help="input CSV path")
    p.add_argument("--column", help="CSV column to privatize")
    p.add_argument("--bound", type=float)
    p.add_argument("--method", choices=["privhist", "vanilla"])
    p.add_argument("--statistic", choices=["mean", "std", "chisq-pilot"])
    p.add_argument("--subsets", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--sensitivity-mode", dest="sensitivity_mode",
                   choices=["swap-one", "fixed-h"])
    p.add_argument("--vanilla-sensitivity", dest="vanilla_sensitivity",
                   choices=["swap-one", "range"])
    p.add_argument("--num-histograms", dest="num_histograms", type=int)
    p.add_argument("--bin-representative", dest="bin_representative",
                   choices=["center", "within-mean"])
    p.add_argument("--expected-probs", dest="expected_probs")

    p = sub.add_parser("compare", help="histogram release vs vanilla baseline")
    _add_common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--statistic", choices=["mean", "std", "both"])
    p.add_argument("--subsets", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--data-lo", dest="data_lo", type=float)
    p.add_argument("--data-hi", dest="data_hi", type=float)
    p.add_argument("--sensitivity-mode", dest="sensitivity_mode",
                   choices=["swap-one", "fixed-h"])
    p.add_argument("--num-histograms", dest="num_histograms", type=int)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _build_payload(args: argparse.Namespace) -> dict:
    payload = dict(load_config(args.config)) if args.config else {}
    skip = {"command", "config", "out", "plot_csv", "data", "column"}
    for key, value in vars(args).items():
        if key in skip or value is None:
            continue
        payload[key] = value
    return _coerce_lists(payload)


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "wb") as fh:
            fh.write(text.encode("utf-8"))


def _fail(error: str, message: str, code: int) -> int:
    sys.stderr.write(canonical_json({"error": error, "message": message}) + "\n")
    return code


def _run(args: argparse.Namespace) -> int:
    payload = _build_payload(args)
    if args.command == "privstat":
        path = payload.pop("data", getattr(args, "data", None))
        column = payload.pop("column", getattr(args, "column", None))
        if "values" not in payload:
            if path is None or column is None:
                raise ValueError("privstat needs --data and --column (or inline values)")
            bound = payload.get("bound")
            if bound is None:
                raise ValueError("privstat needs --bound to validate ingested data")
            payload["values"] = ingest_csv(path, column, float(bound)).values.tolist()
    model, runner = _RUNNERS[args.command]
    record: ResultRecord = runner(model(**payload))
    _write(args.out, record.to_json() + "\n")
    if args.plot_csv is not None:
        _write(args.plot_csv, plot_csv_for(record))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK
    try:
        return _run(args)
    except (InfeasibleCorrectionError, InfeasibleSearchError) as exc:
        return _fail("infeasible", str(exc), EXIT_INFEASIBLE)
    except EstimateUndefinedError as exc:
        return _fail("estimate-undefined", str(exc), EXIT_UNDEFINED)
    except ValidationError as exc:
        return _fail("invalid-config", str(exc), EXIT_INVALID)
    except (ValueError, OSError) as exc:
        return _fail("invalid-config", str(exc), EXIT_INVALID)
    except Exception as exc:  # pragma: no cover - defensive
        return _fail("internal-error", f"{type(exc).__name__}: {exc}", EXIT_INTERNAL)


if __name__ == "__main__":
    sys.exit(main())
