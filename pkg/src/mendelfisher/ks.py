"""Empirical CDFs and one-sample Kolmogorov-Smirnov tests.

The supremum distance is evaluated at the sample points only (both
one-sided gaps), which is exact for the continuous CDFs used here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import rng
from .numerics import ks_exact_pvalue

__all__ = [
    "EcdfResult",
    "KsResult",
    "ecdf",
    "jitter_ties",
    "ks_statistic",
    "ks_statistic_sorted",
    "ks_test",
    "JITTER_SD",
]

JITTER_SD = 1e-7


@dataclass(frozen=True)
class EcdfResult:
    x: np.ndarray          # sorted sample
    heights: np.ndarray    # i/n at the i-th order statistic

    def steps(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.heights.tolist()))

    def __call__(self, t: float) -> float:
        return np.searchsorted(self.x, t, side="right") / len(self.x)


@dataclass(frozen=True)
class KsResult:
    d: float
    n: int
    p: float
    jitter_seed: int | None = None


def ecdf(sample: Sequence[float]) -> EcdfResult:
    x = np.sort(np.asarray(sample, dtype=float))
    if x.size == 0:
        raise ValueError("empty sample")
    n = x.size
    return EcdfResult(x, np.arange(1, n + 1) / n)


def jitter_ties(sample: Sequence[float], sd: float = JITTER_SD,
                seed: int = rng.DEFAULT_SEED, index: int = 0) -> np.ndarray:
    """Add N(0, sd^2) noise to every point to break ties.

    ``index`` selects an independent noise stream under the same seed.
    """
    x = np.asarray(sample, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("sample must be finite")
    gen = rng.block_generator(seed, rng.STREAM_JITTER, index)
    return x + sd * gen.standard_normal(x.shape)


def ks_statistic_sorted(fx: np.ndarray) -> float:
    """D from CDF values at the sorted sample points."""
    n = fx.shape[-1]
    i = np.arange(1, n + 1)
    upper = np.max(i / n - fx, axis=-1)
    lower = np.max(fx - (i - 1) / n, axis=-1)
    return np.maximum(upper, lower)


def ks_statistic(sample: Sequence[float], cdf: Callable[[float], float]) -> float:
    """sup |F_n - F| for a continuous, nondecreasing ``cdf``."""
    x = np.sort(np.asarray(sample, dtype=float))
    if x.size == 0:
        raise ValueError("empty sample")
    fx = np.array([cdf(v) for v in x])
    return float(ks_statistic_sorted(fx))


def ks_test(sample: Sequence[float], cdf: Callable[[float], float], *,
            jitter_seed: int | None = rng.DEFAULT_SEED,
            domain: tuple[float, float] | None = (0.0, 1.0)) -> KsResult:
    """Jitter (unless ``jitter_seed`` is None), compute D and its exact p-value.

    Jittered points are clipped back into ``domain`` so that p-values at
    0 or 1 stay valid inputs for the model CDFs.
    """
    x = np.asarray(sample, dtype=float)
    if jitter_seed is not None:
        x = jitter_ties(x, seed=jitter_seed)
        if domain is not None:
            x = np.clip(x, *domain)
    d = ks_statistic(x, cdf)
    return KsResult(d, x.size, ks_exact_pvalue(min(d, 1.0), x.size), jitter_seed)
