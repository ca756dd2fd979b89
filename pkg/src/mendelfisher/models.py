"""Selection models for reported p-values.

``ModelA(alpha)``
    repeat an experiment when its p-value is below ``alpha`` and report
    the larger of the two p-values.
``ModelB(beta)``
    repeat with probability ``beta`` regardless of the outcome, report the
    larger p-value.
``BiasedTheory(n, p0, p1, alpha)``
    Model A applied to a binomial test of ``p0`` when the data actually
    come from ``p1`` (normal approximation to the binomial).

All CDFs are plain functions of ``x`` in [0, 1]; ``as_cdf`` turns a model
into a one-argument callable for the K-S machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .numerics import std_normal_cdf, std_normal_quantile, std_normal_sf

__all__ = [
    "Null",
    "ModelA",
    "ModelB",
    "BiasedTheory",
    "SelectionModel",
    "model_a_cdf",
    "model_b_cdf",
    "model_quantile",
    "uniform_cdf",
    "f0_cdf",
    "fstar_cdf",
    "as_cdf",
    "vectorized_cdf",
    "parse_model",
]


def _check_unit(value: float, name: str) -> float:
    value = float(value)
    if math.isnan(value) or not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class Null:
    """No selection: every experiment reported once."""

    def cdf(self, x: float) -> float:
        return uniform_cdf(x)


@dataclass(frozen=True)
class ModelA:
    alpha: float

    def __post_init__(self):
        _check_unit(self.alpha, "alpha")

    def cdf(self, x: float) -> float:
        return model_a_cdf(self, x)


@dataclass(frozen=True)
class ModelB:
    beta: float

    def __post_init__(self):
        _check_unit(self.beta, "beta")

    def cdf(self, x: float) -> float:
        return model_b_cdf(self, x)


@dataclass(frozen=True)
class BiasedTheory:
    n: int
    p0: float
    p1: float
    alpha: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        for name in ("p0", "p1"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie strictly inside (0, 1), got {v!r}")
        _check_unit(self.alpha, "alpha")

    @property
    def delta(self) -> float:
        """Standardized shift of the true mean under the null scaling."""
        return self.n * (self.p1 - self.p0) / math.sqrt(self.n * self.p0 * (1 - self.p0))

    @property
    def eta(self) -> float:
        """Ratio of true to null binomial standard deviations."""
        return math.sqrt(self.p1 * (1 - self.p1) / (self.p0 * (1 - self.p0)))

    def cdf(self, x: float) -> float:
        return fstar_cdf(self, x)


SelectionModel = Union[Null, ModelA, ModelB, BiasedTheory]


def uniform_cdf(x: float) -> float:
    return _check_unit(x, "x")


def model_a_cdf(m: ModelA, x: float) -> float:
    x = _check_unit(x, "x")
    a = m.alpha
    if x <= a:
        return x * x
    # (1 + a) x - a, arranged to be exact at x = 1
    return x - a * (1.0 - x)


def model_b_cdf(m: ModelB, x: float) -> float:
    x = _check_unit(x, "x")
    b = m.beta
    return x - b * x * (1.0 - x)


def model_quantile(model: SelectionModel, u: float) -> float:
    """Inverse CDF of the reported p-value under ``model``."""
    u = _check_unit(u, "u")
    if isinstance(model, Null):
        return u
    if isinstance(model, ModelA):
        a = model.alpha
        if u <= a * a:
            return math.sqrt(u)
        return (u + a) / (1.0 + a)
    if isinstance(model, ModelB):
        b = model.beta
        if b == 0.0:
            return u
        # b x^2 + (1 - b) x - u = 0, positive root in stable form
        disc = (1.0 - b) ** 2 + 4.0 * b * u
        if u == 0.0:
            return 0.0
        return min(1.0, 2.0 * u / ((1.0 - b) + math.sqrt(disc)))
    raise TypeError(f"no closed-form quantile for {model!r}")


def f0_cdf(t: BiasedTheory, x: float) -> float:
    """CDF of the chi-square test p-value when the true success rate is ``p1``."""
    x = _check_unit(x, "x")
    if 0.5 * x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    # z = quantile(1 - x/2), taken from the lower tail to keep precision for small x
    z = -std_normal_quantile(0.5 * x)
    delta, eta = t.delta, t.eta
    return min(1.0, std_normal_cdf((-z - delta) / eta) + std_normal_sf((z - delta) / eta))


def fstar_cdf(t: BiasedTheory, x: float) -> float:
    """Model A selection applied on top of :func:`f0_cdf`."""
    f = f0_cdf(t, x)
    if x <= t.alpha:
        return f * f
    fa = f0_cdf(t, t.alpha)
    return f - fa * (1.0 - f)


def as_cdf(model: SelectionModel) -> Callable[[float], float]:
    return model.cdf


def vectorized_cdf(model: SelectionModel, x: np.ndarray) -> np.ndarray:
    """Array version of the closed-form CDFs (Null, A, B only)."""
    x = np.asarray(x, dtype=float)
    if isinstance(model, Null):
        return x.copy()
    if isinstance(model, ModelA):
        a = model.alpha
        return np.where(x <= a, x * x, x - a * (1.0 - x))
    if isinstance(model, ModelB):
        b = model.beta
        return x - b * x * (1.0 - x)
    return np.array([model.cdf(v) for v in x.ravel()]).reshape(x.shape)


def parse_model(spec: str) -> SelectionModel:
    """Parse ``uniform``/``null``, ``model-a:ALPHA`` or ``model-b:BETA``."""
    s = spec.strip().lower()
    if s in ("uniform", "null"):
        return Null()
    kind, _, value = s.partition(":")
    if not value:
        raise ValueError(f"model {spec!r} needs a parameter, e.g. model-a:0.2")
    v = float(value)
    if kind in ("model-a", "a"):
        return ModelA(v)
    if kind in ("model-b", "b"):
        return ModelB(v)
    raise ValueError(f"unknown model {spec!r}")
