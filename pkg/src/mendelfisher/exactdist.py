"""Exact discrete distribution of chi-square test p-values.

Under binomial sampling an experiment with ``n`` trials can only produce
``n + 1`` p-values.  Listing them with their binomial probabilities gives
the exact distribution; pooling the lists of all experiments with equal
weights gives the distribution of a p-value drawn from a random
experiment.

Atoms are keyed by the double-precision p-value, computed the way a
two-cell Pearson test computes it in floating point: distinct outcomes
whose p-values agree to the last bit are one atom.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .dataset import Dataset
from .numerics import chi_square_sf

__all__ = [
    "DiscretePValueDistribution",
    "outcome_table",
    "per_experiment_distribution",
    "mixture_distribution",
    "max_of_two_distribution",
]


@dataclass(frozen=True)
class DiscretePValueDistribution:
    pvalues: np.ndarray    # strictly increasing support
    masses: np.ndarray
    truncated_mass: float = 0.0
    truncated_atoms: int = 0

    def __post_init__(self):
        if self.pvalues.shape != self.masses.shape:
            raise ValueError("support and masses differ in length")
        if np.any(self.masses < 0):
            raise ValueError("negative mass")
        if self.pvalues.size > 1 and np.any(np.diff(self.pvalues) <= 0):
            raise ValueError("support must be strictly increasing")

    def __len__(self):
        return self.pvalues.size

    @property
    def cdf_values(self) -> np.ndarray:
        """CDF at each support point, including the truncated mass."""
        return self.truncated_mass + np.cumsum(self.masses)

    def cdf(self, x: float) -> float:
        k = np.searchsorted(self.pvalues, x, side="right")
        return float(self.truncated_mass + self.masses[:k].sum())

    def rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.pvalues.tolist(), self.masses.tolist(), self.cdf_values.tolist()))


def _binomial_pmf(n: int, p: float) -> np.ndarray:
    # saddle-point evaluation keeps the total within a few ulps of 1 for large n
    return stats.binom.pmf(np.arange(n + 1), n, p)


def outcome_table(n: int, p0: float, p_true: float | None = None):
    """Per-outcome arrays (y, chi-square, p-value, probability).

    ``p_true`` is the success probability generating the data; by default
    the null ``p0`` itself.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    p0 = float(p0)
    if not 0.0 < p0 < 1.0:
        raise ValueError("p0 must lie strictly inside (0, 1)")
    p_true = p0 if p_true is None else float(p_true)
    if not 0.0 < p_true < 1.0:
        raise ValueError("p_true must lie strictly inside (0, 1)")
    y = np.arange(n + 1, dtype=float)
    e1, e2 = n * p0, n * (1.0 - p0)
    stat = (y - e1) ** 2 / e1 + ((n - y) - e2) ** 2 / e2
    pval = np.array([chi_square_sf(s, 1) for s in stat])
    return y.astype(int), stat, pval, _binomial_pmf(n, p_true)


def _collapse(pvals: np.ndarray, masses: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    support, inverse = np.unique(pvals, return_inverse=True)
    return support, np.bincount(inverse, weights=masses, minlength=support.size)


def per_experiment_distribution(n: int, p0: float,
                                p_true: float | None = None) -> DiscretePValueDistribution:
    """Exact p-value distribution of one binomial experiment."""
    _, _, pval, pmf = outcome_table(n, p0, p_true)
    support, masses = _collapse(pval, pmf)
    return DiscretePValueDistribution(support, masses)


def _truncate(support, masses, truncation_mass):
    cum = np.cumsum(masses)
    k = int(np.count_nonzero(cum < truncation_mass))
    dropped = float(cum[k - 1]) if k else 0.0
    return DiscretePValueDistribution(support[k:], masses[k:], dropped, k)


def mixture_distribution(dataset: Dataset | Iterable[tuple[int, float]],
                         truncation_mass: float = 0.001,
                         max_of_two: bool = False) -> DiscretePValueDistribution:
    """Equal-weight pool of the per-experiment distributions.

    Atoms are dropped from the smallest p-value upward while their
    cumulative mass stays below ``truncation_mass``.  With ``max_of_two``
    the pooled distribution is squared before truncating.
    """
    if isinstance(dataset, Dataset):
        pairs = [(b.n, float(b.p0)) for b in dataset.binomials]
    else:
        pairs = list(dataset)
    if not pairs:
        raise ValueError("no experiments")
    w = 1.0 / len(pairs)
    pv, ms = [], []
    for n, p0 in pairs:
        _, _, pval, pmf = outcome_table(n, p0)
        pv.append(pval)
        ms.append(pmf * w)
    support, masses = _collapse(np.concatenate(pv), np.concatenate(ms))
    if max_of_two:
        full = DiscretePValueDistribution(support, masses)
        squared = max_of_two_distribution(full)
        support, masses = squared.pvalues, squared.masses
    if truncation_mass > 0:
        return _truncate(support, masses, truncation_mass)
    return DiscretePValueDistribution(support, masses)


def max_of_two_distribution(dist: DiscretePValueDistribution) -> DiscretePValueDistribution:
    """Distribution of the larger of two independent draws: CDF squared."""
    cdf = dist.cdf_values
    sq = cdf * cdf
    trunc = dist.truncated_mass ** 2
    masses = np.diff(np.concatenate([[trunc], sq]))
    masses = np.maximum(masses, 0.0)
    return DiscretePValueDistribution(dist.pvalues.copy(), masses, trunc, dist.truncated_atoms)
