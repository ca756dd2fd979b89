"""Closed-form moments of the recorded statistic under Model A.

With Q1, Q2 independent chi2_1 and c the (1 - alpha) quantile of chi2_1,
the recorded statistic is Q1 when Q1 <= c and min(Q1, Q2) otherwise.  Its
mean and variance have closed forms in c and k = exp(-c)/pi; the sum over
m experiments is then approximated by a normal distribution.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from scipy import integrate

from .numerics import chi_square_quantile, chi_square_sf, std_normal_sf

__all__ = [
    "ModelAMoments",
    "model_a_moments",
    "approx_total_pvalue",
    "qstar_density",
    "qstar_moments_quadrature",
    "table10",
    "TABLE10_ALPHAS",
]

TABLE10_ALPHAS = (0.094, 0.201, 0.362)


@dataclass(frozen=True)
class ModelAMoments:
    alpha: float
    c_alpha: float
    k_alpha: float
    mu_star: float
    sigma2_star: float

    def to_dict(self) -> dict:
        return asdict(self)


def _threshold(alpha: float) -> float:
    if alpha <= 0.0:
        return math.inf
    if alpha >= 1.0:
        return 0.0
    return chi_square_quantile(1.0 - alpha, 1)


def model_a_moments(alpha: float) -> ModelAMoments:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    c = _threshold(alpha)
    if math.isinf(c):
        # no selection: plain chi2_1
        return ModelAMoments(alpha, c, 0.0, 1.0, 2.0)
    k = math.exp(-c) / math.pi
    r = math.sqrt(2.0 * c * k)
    mu = 1.0 - (2.0 * k + (1.0 - alpha) * r)
    var = 2.0 - (4.0 * k * k
                 + (1.0 - alpha) * r * (4.0 * k + 1.0 + c)
                 + 2.0 * (2.0 + c * (2.0 - 2.0 * alpha + alpha * alpha)) * k)
    return ModelAMoments(alpha, c, k, mu, var)


def approx_total_pvalue(alpha: float, q_observed: float = 41.3376, m: int = 84) -> float:
    """P(sum of m recorded statistics > q_observed), normal approximation."""
    if m < 1:
        raise ValueError("m must be >= 1")
    mom = model_a_moments(alpha)
    if mom.sigma2_star <= 0:
        raise ArithmeticError(f"non-positive variance {mom.sigma2_star!r} at alpha={alpha!r}")
    z = (q_observed - m * mom.mu_star) / math.sqrt(m * mom.sigma2_star)
    return std_normal_sf(z)


def _chi2_1_pdf(x: float) -> float:
    return math.exp(-0.5 * x) / math.sqrt(2.0 * math.pi * x)


def qstar_density(alpha: float, x: float) -> float:
    """Density of the recorded statistic at ``x > 0``."""
    if x <= 0:
        raise ValueError("x must be positive")
    c = _threshold(alpha)
    f = _chi2_1_pdf(x)
    if x <= c:
        return (1.0 + alpha) * f
    return 2.0 * f * chi_square_sf(x, 1)


def qstar_moments_quadrature(alpha: float, upper: float = 80.0) -> tuple[float, float, float]:
    """(total mass, mean, variance) of :func:`qstar_density` by adaptive quadrature.

    Substituting x = t^2 removes the 1/sqrt(x) singularity at the origin;
    the integral is split at the selection threshold where the density jumps.
    """
    c = _threshold(alpha)

    def moment(power: int) -> float:
        g = lambda t: qstar_density(alpha, t * t) * (t * t) ** power * 2.0 * t
        top = math.sqrt(upper)
        pts = [0.0]
        if 0.0 < c < upper:
            pts.append(math.sqrt(c))
        pts.append(top)
        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            val, _ = integrate.quad(g, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
            total += val
        return total

    mass, m1, m2 = moment(0), moment(1), moment(2)
    return mass, m1, m2 - m1 * m1


def table10(q_observed: float = 41.3376, m: int = 84,
            alphas=TABLE10_ALPHAS) -> list[dict]:
    rows = []
    for a in alphas:
        mom = model_a_moments(a)
        rows.append({
            "alpha": a,
            "c_alpha": mom.c_alpha,
            "mu_star": mom.mu_star,
            "sigma2_star": mom.sigma2_star,
            "p_normal": approx_total_pvalue(a, q_observed, m),
        })
    return rows
