"""Pearson chi-square statistics and Fisher-style aggregation.

No continuity correction is applied anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

from .dataset import (GROUP_ORDER, BinomialExperiment, Dataset, ExperimentGroup,
                      MultinomialExperiment)
from .numerics import chi_square_sf

__all__ = [
    "ChiSquareStat",
    "AggregateRow",
    "Table5Row",
    "signed_chi",
    "binomial_chisq",
    "binomial_pvalue",
    "observed_pvalues",
    "observed_signed_chis",
    "multinomial_chisq",
    "aggregate",
    "fisher_group_stats",
    "edwards_group_stats",
    "table5_deterministic",
    "table_v",
]


class ChiSquareStat(NamedTuple):
    value: float
    df: int


@dataclass(frozen=True)
class AggregateRow:
    label: str
    df: int
    chisq: float
    p_chisq: float


def signed_chi(exp: BinomialExperiment) -> float:
    """(n1 - n p0) / sqrt(n p0 (1 - p0)), with p0 kept exact until the end."""
    num = exp.n1 - exp.n * exp.p0
    var = exp.n * exp.p0 * (1 - exp.p0)
    if num == 0:
        return 0.0
    # square exactly, then one float sqrt
    return math.copysign(math.sqrt(num * num / var), num)


def binomial_chisq(exp: BinomialExperiment) -> ChiSquareStat:
    num = exp.n1 - exp.n * exp.p0
    return ChiSquareStat(float(num * num / (exp.n * exp.p0 * (1 - exp.p0))), 1)


def binomial_pvalue(exp: BinomialExperiment) -> float:
    return chi_square_sf(binomial_chisq(exp).value, 1)


def observed_pvalues(dataset: Dataset) -> list[float]:
    """The 84 per-experiment p-values, ordered by experiment id."""
    return [binomial_pvalue(b) for b in sorted(dataset.binomials, key=lambda b: b.id)]


def observed_signed_chis(dataset: Dataset) -> list[float]:
    return [signed_chi(b) for b in sorted(dataset.binomials, key=lambda b: b.id)]


def multinomial_chisq(exp: MultinomialExperiment) -> ChiSquareStat:
    """Sum of (O - E)^2 / E with E = total * ratio / sum(ratios), exactly."""
    total = exp.total
    if total <= 0:
        raise ValueError(f"{exp.label}: zero total count")
    stat = Fraction(0)
    for count, prob in zip(exp.counts, exp.probabilities):
        e = total * prob
        stat += (count - e) ** 2 / e
    return ChiSquareStat(float(stat), exp.df)


def aggregate(rows: Iterable[ChiSquareStat], label: str = "") -> AggregateRow:
    """Sum statistics and degrees of freedom; p-value from chi2 with summed df."""
    rows = list(rows)
    if not rows:
        raise ValueError("cannot aggregate an empty set of statistics")
    # fsum keeps the sum independent of row order
    total = math.fsum(r.value for r in rows)
    df = sum(r.df for r in rows)
    return AggregateRow(label, df, total, chi_square_sf(total, df))


def fisher_group_stats(dataset: Dataset) -> dict[ExperimentGroup, list[ChiSquareStat]]:
    return {g: [multinomial_chisq(m) for m in dataset.fisher_group(g)] for g in GROUP_ORDER}


def edwards_group_stats(dataset: Dataset) -> dict[ExperimentGroup, list[ChiSquareStat]]:
    return {g: [binomial_chisq(b) for b in dataset.group(g)] for g in GROUP_ORDER}


def _rows_with_totals(stats: dict[ExperimentGroup, list[ChiSquareStat]]) -> list[AggregateRow]:
    rows = [aggregate(stats[g], g.short) for g in GROUP_ORDER[:5]]
    without_pv = [s for g in GROUP_ORDER[:5] for s in stats[g]]
    rows.append(aggregate(without_pv, "Tot64"))
    rows.append(aggregate(stats[ExperimentGroup.PLANT_VARIATION], "PV"))
    rows.append(aggregate(without_pv + stats[ExperimentGroup.PLANT_VARIATION], "Tot84"))
    return rows


def table_v(dataset: Dataset) -> list[AggregateRow]:
    """Fisher's grouping: five experiment types, subtotal, plant variation, total."""
    return _rows_with_totals(fisher_group_stats(dataset))


@dataclass(frozen=True)
class Table5Row:
    label: str
    df: int
    fisher: AggregateRow
    edwards: AggregateRow


def table5_deterministic(dataset: Dataset) -> list[Table5Row]:
    """Deterministic columns of the summary table: both groupings side by side."""
    fisher = _rows_with_totals(fisher_group_stats(dataset))
    edwards = _rows_with_totals(edwards_group_stats(dataset))
    out = []
    for f, e in zip(fisher, edwards):
        assert f.label == e.label and f.df == e.df
        out.append(Table5Row(f.label, f.df, f, e))
    return out

