"""Special functions and distribution kernels.

Everything downstream (chi-square p-values, K-S p-values, model CDFs)
goes through these few functions, so they are kept small and pure.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "std_normal_cdf",
    "std_normal_sf",
    "std_normal_quantile",
    "regularized_gamma_q",
    "chi_square_sf",
    "chi_square_quantile",
    "ks_exact_cdf",
    "ks_exact_pvalue",
]

_SQRT2 = math.sqrt(2.0)
_EPS = 1e-16
_TINY = 1e-300


def _clamp01(v: float) -> float:
    return min(1.0, max(0.0, v))


def _check_real(x: float, name: str = "x") -> float:
    x = float(x)
    if math.isnan(x):
        raise ValueError(f"{name} must not be NaN")
    return x


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF, accurate in both tails (uses erfc)."""
    x = _check_real(x)
    return _clamp01(0.5 * math.erfc(-x / _SQRT2))


def std_normal_sf(x: float) -> float:
    """Upper tail 1 - Phi(x) without cancellation."""
    x = _check_real(x)
    return _clamp01(0.5 * math.erfc(x / _SQRT2))


def _normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def std_normal_quantile(p: float) -> float:
    """Inverse of :func:`std_normal_cdf` for ``0 < p < 1``.

    Starts from a rational approximation and polishes with Halley steps
    on the smaller tail so that relative accuracy survives for tiny ``p``.
    """
    p = _check_real(p, "p")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie strictly inside (0, 1), got {p!r}")
    if p == 0.5:
        return 0.0
    # work on the lower tail q = min(p, 1-p) and flip the sign at the end
    upper = p > 0.5
    q = 1.0 - p if upper else p
    t = math.sqrt(-2.0 * math.log(q))
    # Abramowitz & Stegun 26.2.23, |error| < 4.5e-4
    x = -(t - (2.515517 + 0.802853 * t + 0.010328 * t * t)
          / (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t ** 3))
    for _ in range(50):
        f = 0.5 * math.erfc(-x / _SQRT2) - q
        d = _normal_pdf(x)
        if d == 0.0:
            break
        # Halley step; curvature term -x for the normal density
        step = f / d
        step = step / (1.0 + 0.5 * x * step)
        x -= step
        if abs(step) <= 1e-15 * max(1.0, abs(x)):
            break
    return -x if upper else x


def _gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by power series."""
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(10_000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_contfrac(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by modified Lentz."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma_q(a: float, x: float) -> float:
    """Q(a, x) = Gamma(a, x) / Gamma(a) for a > 0, x >= 0."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return _clamp01(1.0 - _gamma_series(a, x))
    return _clamp01(_gamma_contfrac(a, x))


def chi_square_sf(x: float, df: int) -> float:
    """P(chi2_df > x)."""
    x = _check_real(x)
    if x < 0:
        raise ValueError(f"chi-square statistic must be >= 0, got {x!r}")
    if int(df) != df or df < 1:
        raise ValueError(f"df must be a positive integer, got {df!r}")
    if math.isinf(x):
        return 0.0
    return regularized_gamma_q(0.5 * df, 0.5 * x)


def chi_square_quantile(p: float, df: int) -> float:
    """The ``p`` quantile of chi2_df, i.e. x with P(chi2_df <= x) = p."""
    p = _check_real(p, "p")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie strictly inside (0, 1), got {p!r}")
    if int(df) != df or df < 1:
        raise ValueError(f"df must be a positive integer, got {df!r}")
    tail = 1.0 - p
    if df == 1:
        z = std_normal_quantile(1.0 - 0.5 * tail)
        return z * z
    # bracket then bisect; sf is strictly decreasing
    lo, hi = 0.0, max(1.0, float(df))
    while chi_square_sf(hi, df) > tail:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chi_square_sf(mid, df) > tail:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            break
    return 0.5 * (lo + hi)


def _matpow_scaled(h: np.ndarray, n: int) -> tuple[np.ndarray, int]:
    """Return (M, e) with h**n == M * 2**e, rescaling to avoid overflow."""
    result = np.eye(h.shape[0])
    res_exp = 0
    base = h.copy()
    base_exp = 0
    while n:
        if n & 1:
            result = result @ base
            res_exp += base_exp
            m, e = np.frexp(np.max(np.abs(result)))
            if m:
                result = np.ldexp(result, -int(e))
                res_exp += int(e)
        n >>= 1
        if n:
            base = base @ base
            base_exp *= 2
            m, e = np.frexp(np.max(np.abs(base)))
            if m:
                base = np.ldexp(base, -int(e))
                base_exp += int(e)
    return result, res_exp


def ks_exact_cdf(d: float, n: int) -> float:
    """P(D_n < d) for the two-sided one-sample K-S statistic.

    Durbin's matrix formula as arranged by Marsaglia, Tsang and Wang
    (2003): with k = floor(n d) + 1 and h = k - n d, the probability is
    n!/n^n times the (k, k) entry of H^n for an m x m matrix H, m = 2k - 1.
    """
    d = _check_real(d, "d")
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"d must lie in [0, 1], got {d!r}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    if d <= 0.5 / n:
        # D_n >= 1/(2n) always
        return 0.0
    if d >= 1.0:
        return 1.0
    k = int(n * d) + 1
    m = 2 * k - 1
    h = k - n * d
    idx = np.arange(m)
    diff = idx[:, None] - idx[None, :] + 1
    hm = np.where(diff >= 0, 1.0, 0.0)
    powers = h ** np.arange(1, m + 1)
    hm[:, 0] -= powers
    hm[m - 1, :] -= powers[::-1]
    if 2 * h - 1 > 0:
        hm[m - 1, 0] += (2 * h - 1) ** m
    # divide entry (i, j) by (i - j + 1)! where that is positive;
    # reciprocal factorials by recursion underflow quietly instead of overflowing
    inv_fact = np.ones(m + 1)
    for v in range(1, m + 1):
        inv_fact[v] = inv_fact[v - 1] / v
    pos = diff > 0
    hm[pos] *= inv_fact[diff[pos]]
    q, e = _matpow_scaled(hm, n)
    s = q[k - 1, k - 1]
    # multiply by n!/n^n in log space
    log_s = math.log(s) if s > 0 else -math.inf
    log_s += e * math.log(2.0) + math.lgamma(n + 1) - n * math.log(n)
    return _clamp01(math.exp(log_s))


def _ks_one_sided_sf(d: float, n: int) -> float:
    """Smirnov's exact P(D_n^+ >= d), summed in log space."""
    total = 0.0
    for j in range(int(math.floor(n * (1.0 - d))) + 1):
        a = 1.0 - d - j / n
        b = d + j / n
        if a <= 0.0:
            continue
        log_t = (math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1)
                 + (n - j) * math.log(a) + (j - 1) * math.log(b))
        total += math.exp(log_t)
    return d * total


def ks_exact_pvalue(d: float, n: int) -> float:
    """P(D_n >= d) under a continuous, fully specified null."""
    d = _check_real(d, "d")
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"d must lie in [0, 1], got {d!r}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if d >= 0.5 and d < 1.0:
        # the two one-sided events are disjoint once d >= 1/2
        return _clamp01(2.0 * _ks_one_sided_sf(d, int(n)))
    return _clamp01(1.0 - ks_exact_cdf(d, n))
