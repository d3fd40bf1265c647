"""Distribution kernel: CDFs, survival functions, and quantiles.

Normal, Student-t, chi-square, and F distributions implemented on top of
three scalar special functions: log-gamma (stdlib), the regularized
incomplete gamma function, and the regularized incomplete beta function.
Quantiles are solved by bracketing plus safeguarded Newton iteration on
the CDF, with initial guesses from the usual asymptotic approximations
(Acklam for the normal, Cornish-Fisher for t, Wilson-Hilferty for
chi-square).

Each family exposes a numerically direct survival function so that both
tails keep relative accuracy; the quantile solver works on whichever
tail is smaller. Accuracy targets: 1e-10 absolute for the normal,
1e-8 relative (to the tail mass) for the other families.

Random variate generation is out of scope here; simulation code draws
its own variates from uniform streams.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Callable, Union

_EPS = sys.float_info.epsilon
_FPMIN = sys.float_info.min / _EPS
_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)
_MAX_SF_ITER = 600


# ---------------------------------------------------------------------------
# distribution specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Normal:
    """Standard normal distribution."""


@dataclass(frozen=True)
class StudentT:
    df: float

    def __post_init__(self):
        if not self.df > 0:
            raise ValueError(f"degrees of freedom must be positive, got {self.df}")


@dataclass(frozen=True)
class ChiSquare:
    df: float

    def __post_init__(self):
        if not self.df > 0:
            raise ValueError(f"degrees of freedom must be positive, got {self.df}")


@dataclass(frozen=True)
class FDist:
    df1: float
    df2: float

    def __post_init__(self):
        if not (self.df1 > 0 and self.df2 > 0):
            raise ValueError(
                f"degrees of freedom must be positive, got ({self.df1}, {self.df2})"
            )


DistSpec = Union[Normal, StudentT, ChiSquare, FDist]


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

def log_gamma(x: float) -> float:
    return math.lgamma(x)


def _gamma_series(a: float, x: float) -> float:
    # Series expansion of P(a, x); converges fastest for x < a + 1.
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_MAX_SF_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete gamma series failed for a={a}, x={x}")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a: float, x: float) -> float:
    # Modified Lentz continued fraction for Q(a, x); use for x >= a + 1.
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_SF_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete gamma fraction failed for a={a}, x={x}")
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x)."""
    if a <= 0:
        raise ValueError(f"shape parameter must be positive, got {a}")
    if x < 0:
        raise ValueError(f"argument must be nonnegative, got {x}")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_cf(a, x)


def regularized_gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    if a <= 0:
        raise ValueError(f"shape parameter must be positive, got {a}")
    if x < 0:
        raise ValueError(f"argument must be nonnegative, got {x}")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cf(a, x)


def _beta_cf(a: float, b: float, x: float) -> float:
    # Modified Lentz continued fraction for the incomplete beta function.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_SF_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete beta fraction failed for a={a}, b={b}, x={x}")
    return h


def regularized_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError(f"shape parameters must be positive, got ({a}, {b})")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


# ---------------------------------------------------------------------------
# CDF / survival / density per family
# ---------------------------------------------------------------------------

def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def normal_sf(x: float) -> float:
    return 0.5 * math.erfc(x / _SQRT2)


def normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT2PI


def _t_tail(df: float, x: float) -> float:
    # One-sided tail mass beyond |x|; relative accuracy preserved in the tail.
    z = df / (df + x * x)
    return 0.5 * regularized_beta(0.5 * df, 0.5, z)


def _t_cdf_sf(df: float, x: float) -> tuple[float, float]:
    tail = _t_tail(df, x)
    if x >= 0:
        return 1.0 - tail, tail
    return tail, 1.0 - tail


def _t_pdf(df: float, x: float) -> float:
    ln = (
        math.lgamma(0.5 * (df + 1.0)) - math.lgamma(0.5 * df)
        - 0.5 * math.log(df * math.pi)
        - 0.5 * (df + 1.0) * math.log1p(x * x / df)
    )
    return math.exp(ln)


def _chi2_cdf_sf(df: float, x: float) -> tuple[float, float]:
    if x <= 0:
        return 0.0, 1.0
    a = 0.5 * df
    xg = 0.5 * x
    if xg < a + 1.0:
        p = _gamma_series(a, xg)
        return p, 1.0 - p
    q = _gamma_cf(a, xg)
    return 1.0 - q, q


def _chi2_pdf(df: float, x: float) -> float:
    if x <= 0:
        return 0.0
    a = 0.5 * df
    ln = (a - 1.0) * math.log(x) - 0.5 * x - math.lgamma(a) - a * math.log(2.0)
    return math.exp(ln)


def _f_cdf_sf(df1: float, df2: float, x: float) -> tuple[float, float]:
    if x <= 0:
        return 0.0, 1.0
    w = df1 * x / (df1 * x + df2)
    wc = df2 / (df1 * x + df2)
    # Each tail gets its own incomplete-beta evaluation: the lower tail can
    # be tiny even at w near 1 when df1 >> df2, so choosing a branch by the
    # size of w alone would compute the small tail as 1 minus the large one
    # and lose it to cancellation.
    p = regularized_beta(0.5 * df1, 0.5 * df2, w)
    if p < 0.5:
        return p, 1.0 - p
    q = regularized_beta(0.5 * df2, 0.5 * df1, wc)
    return 1.0 - q, q


def _f_pdf(df1: float, df2: float, x: float) -> float:
    if x <= 0:
        return 0.0
    ln_b = math.lgamma(0.5 * df1) + math.lgamma(0.5 * df2) - math.lgamma(0.5 * (df1 + df2))
    ln = (
        0.5 * df1 * math.log(df1 / df2)
        + (0.5 * df1 - 1.0) * math.log(x)
        - 0.5 * (df1 + df2) * math.log1p(df1 * x / df2)
        - ln_b
    )
    return math.exp(ln)


def _cdf_sf(dist: DistSpec, x: float) -> tuple[float, float]:
    if isinstance(dist, Normal):
        return normal_cdf(x), normal_sf(x)
    if isinstance(dist, StudentT):
        return _t_cdf_sf(dist.df, x)
    if isinstance(dist, ChiSquare):
        return _chi2_cdf_sf(dist.df, x)
    if isinstance(dist, FDist):
        return _f_cdf_sf(dist.df1, dist.df2, x)
    raise TypeError(f"unknown distribution spec: {dist!r}")


def cdf(dist: DistSpec, x: float) -> float:
    """Cumulative distribution function of `dist` at `x`."""
    if not math.isfinite(x):
        raise ValueError(f"argument must be finite, got {x}")
    return _cdf_sf(dist, x)[0]


def sf(dist: DistSpec, x: float) -> float:
    """Survival function 1 - cdf, computed without cancellation in the tail."""
    if not math.isfinite(x):
        raise ValueError(f"argument must be finite, got {x}")
    return _cdf_sf(dist, x)[1]


def pdf(dist: DistSpec, x: float) -> float:
    if isinstance(dist, Normal):
        return normal_pdf(x)
    if isinstance(dist, StudentT):
        return _t_pdf(dist.df, x)
    if isinstance(dist, ChiSquare):
        return _chi2_pdf(dist.df, x)
    if isinstance(dist, FDist):
        return _f_pdf(dist.df1, dist.df2, x)
    raise TypeError(f"unknown distribution spec: {dist!r}")


# ---------------------------------------------------------------------------
# quantiles
# ---------------------------------------------------------------------------

# Acklam's rational approximation to the normal quantile (|rel err| < 1.2e-9),
# refined below with Halley steps to full double precision.
_ACK_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
          1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ACK_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
          6.680131188771972e+01, -1.328068155288572e+01)
_ACK_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
          -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ACK_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
          3.754408661907416e+00)
_ACK_PLOW = 0.02425


def _acklam(p: float) -> float:
    a, b, c, d = _ACK_A, _ACK_B, _ACK_C, _ACK_D
    if p < _ACK_PLOW:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    if p > 1.0 - _ACK_PLOW:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    q = p - 0.5
    r = q * q
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)


def normal_quantile(p: float) -> float:
    """Standard normal quantile, accurate to roughly machine precision."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must be in (0, 1), got {p}")
    x = _acklam(p)
    for _ in range(2):
        if p <= 0.5:
            err = normal_cdf(x) - p
        else:
            err = (1.0 - p) - normal_sf(x)
        u = err * _SQRT2PI * math.exp(0.5 * x * x)
        x -= u / (1.0 + 0.5 * x * u)
    return x


def _initial_guess(dist: DistSpec, p: float) -> float:
    z = _acklam(p)
    if isinstance(dist, StudentT):
        df = dist.df
        if df <= 2.0:
            return math.tan(math.pi * (p - 0.5))
        return z + (z ** 3 + z) / (4.0 * df)
    if isinstance(dist, ChiSquare):
        df = dist.df
        cube = 1.0 - 2.0 / (9.0 * df) + z * math.sqrt(2.0 / (9.0 * df))
        guess = df * cube ** 3 if cube > 0 else df * math.exp(z / math.sqrt(df))
        return max(guess, 1e-300)
    if isinstance(dist, FDist):
        num = ChiSquare(dist.df1)
        den = ChiSquare(dist.df2)
        top = max(_initial_guess(num, p), 1e-300) / dist.df1
        bot = max(_initial_guess(den, 1.0 - p), 1e-300) / dist.df2
        return max(top / bot, 1e-300)
    raise TypeError(f"unknown distribution spec: {dist!r}")


def _bracket(g: Callable[[float], float], x0: float, positive: bool):
    g0 = g(x0)
    if g0 == 0.0:
        return x0, x0
    if positive:
        if g0 < 0.0:
            lo, hi = x0, x0 * 4.0
            for _ in range(_MAX_SF_ITER):
                if g(hi) >= 0.0:
                    return lo, hi
                lo, hi = hi, hi * 4.0
        else:
            lo, hi = x0 / 4.0, x0
            for _ in range(_MAX_SF_ITER):
                if lo == 0.0 or g(lo) <= 0.0:
                    return lo, hi
                lo, hi = lo / 4.0, lo
    else:
        step = max(1.0, 0.5 * abs(x0))
        if g0 < 0.0:
            lo, hi = x0, x0 + step
            for _ in range(_MAX_SF_ITER):
                if g(hi) >= 0.0:
                    return lo, hi
                step *= 2.0
                lo, hi = hi, hi + step
        else:
            lo, hi = x0 - step, x0
            for _ in range(_MAX_SF_ITER):
                if g(lo) <= 0.0:
                    return lo, hi
                step *= 2.0
                lo, hi = lo - step, lo
    raise ArithmeticError("quantile bracketing failed")


def quantile(dist: DistSpec, p: float) -> float:
    """Inverse CDF of `dist` at probability `p`.

    Solved by safeguarded Newton iteration inside a hard bracket; every
    step either improves the Newton iterate or bisects, so convergence
    does not depend on the quality of the initial guess.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must be in (0, 1), got {p}")
    if isinstance(dist, Normal):
        return normal_quantile(p)

    tail = min(p, 1.0 - p)

    def g(x: float) -> float:
        # cdf(x) - p, evaluated on the numerically dominant tail.
        c, s = _cdf_sf(dist, x)
        if p <= 0.5:
            return c - p
        return (1.0 - p) - s

    positive = isinstance(dist, (ChiSquare, FDist))
    x0 = _initial_guess(dist, p)
    lo, hi = _bracket(g, x0, positive)
    if lo == hi:
        return lo

    tol = 1e-10 * tail
    x = 0.5 * (lo + hi)
    for _ in range(300):
        gx = g(x)
        if abs(gx) <= tol:
            return x
        if gx > 0.0:
            hi = x
        else:
            lo = x
        if hi - lo <= 4.0 * _EPS * max(abs(lo), abs(hi)):
            return x
        deriv = pdf(dist, x)
        if deriv > 0.0 and math.isfinite(deriv):
            xn = x - gx / deriv
        else:
            xn = 0.5 * (lo + hi)
        if not lo < xn < hi:
            xn = 0.5 * (lo + hi)
        x = xn
    raise ArithmeticError(f"quantile solver did not converge for {dist!r} at p={p}")
