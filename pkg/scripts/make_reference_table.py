"""Generate the checked-in quantile reference table.

Computes high-precision quantiles for the normal, Student-t, chi-square,
and F families with mpmath (50 decimal digits, bisection to ~1e-40) and
writes tests/data/reference_quantiles.csv. The table is the independent
oracle the test suite asserts the distribution kernel against; it is
generated once and committed, so mpmath is not a package dependency.

Usage: python scripts/make_reference_table.py
"""

from __future__ import annotations

import csv
import pathlib

import mpmath as mp

mp.mp.dps = 50

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data" / "reference_quantiles.csv"

P_GRID = [1e-8, 1e-6, 1e-4, 1e-3, 0.01, 0.025, 0.05, 0.1, 0.25, 0.5,
          0.75, 0.9, 0.95, 0.975, 0.99, 0.999, 0.9999, 1 - 1e-6, 1 - 1e-8]

T_DFS = [1, 2, 5, 30, 200]
CHI_DFS = [1, 2, 5, 30, 200]
F_DFS = [(1, 1), (2, 10), (5, 2), (10, 50), (200, 200)]


def t_cdf(df, x):
    z = df / (df + x * x)
    tail = mp.betainc(df / mp.mpf(2), mp.mpf("0.5"), 0, z, regularized=True) / 2
    return 1 - tail if x >= 0 else tail


def chi2_cdf(df, x):
    if x <= 0:
        return mp.mpf(0)
    return mp.gammainc(df / mp.mpf(2), 0, x / mp.mpf(2), regularized=True)


def f_cdf(df1, df2, x):
    if x <= 0:
        return mp.mpf(0)
    w = df1 * x / (df1 * x + df2)
    return mp.betainc(df1 / mp.mpf(2), df2 / mp.mpf(2), 0, w, regularized=True)


def bisect_quantile(cdf, p, lo, hi, iters=220):
    p = mp.mpf(p)
    while cdf(hi) < p:
        lo, hi = hi, hi * 2
    while lo > 0 and cdf(lo) > p:
        lo, hi = lo / 2, lo
    for _ in range(iters):
        mid = (lo + hi) / 2
        if cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def t_quantile(df, p):
    p = mp.mpf(p)
    if p == mp.mpf("0.5"):
        return mp.mpf(0)
    if p < 0.5:
        return -t_quantile(df, 1 - p)
    return bisect_quantile(lambda x: t_cdf(df, x), p, mp.mpf(0), mp.mpf(2))


def main():
    OUT.parent.mkdir(parents=True, exist_ok=True)
    rows = []
    for p in P_GRID:
        q = mp.sqrt(2) * mp.erfinv(2 * mp.mpf(p) - 1)
        rows.append(("normal", "", "", repr(p), mp.nstr(q, 22)))
    for df in T_DFS:
        for p in P_GRID:
            q = t_quantile(df, p)
            rows.append(("student_t", str(df), "", repr(p), mp.nstr(q, 22)))
    for df in CHI_DFS:
        for p in P_GRID:
            q = bisect_quantile(lambda x: chi2_cdf(df, x), p, mp.mpf(0), mp.mpf(df))
            rows.append(("chi_square", str(df), "", repr(p), mp.nstr(q, 22)))
    for df1, df2 in F_DFS:
        for p in P_GRID:
            q = bisect_quantile(lambda x: f_cdf(df1, df2, x), p, mp.mpf(0), mp.mpf(1))
            rows.append(("f", str(df1), str(df2), repr(p), mp.nstr(q, 22)))
    with OUT.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["family", "param1", "param2", "p", "x"])
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {OUT}")


if __name__ == "__main__":
    main()
