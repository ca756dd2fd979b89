"""Monte Carlo replication of Mendel's experiments.

Each replicate regenerates every experiment from its null distribution
(binomial by CDF inversion, or multinomial for Fisher's grouping) and
recomputes the grouped chi-square totals.  Under a selection model each
binomial experiment may be drawn a second time, in which case the smaller
of the two statistics (the larger p-value) is the one recorded.

Replicates are processed in fixed-size blocks, each with its own Philox
stream, so counts are identical for any number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np

from . import rng
from .chisq import edwards_group_stats, fisher_group_stats, aggregate
from .dataset import GROUP_ORDER, BinomialExperiment, Dataset, ExperimentGroup
from .models import ModelA, ModelB, Null, SelectionModel
from .numerics import chi_square_sf, std_normal_quantile

__all__ = [
    "SimConfig",
    "McEstimate",
    "ConfigError",
    "simulate_pvalues",
    "sample_pvalue_set",
    "sample_pvalue_sets",
    "sample_selected_statistics",
    "edwards_qq_samples",
    "QQSamples",
    "BLOCK_SIZE",
    "ROW_LABELS",
]

BLOCK_SIZE = 10_000
ROW_LABELS = ("3:1", "2:1", "BF", "GR", "TF", "Tot64", "PV", "Tot84")


class ConfigError(ValueError):
    """Unsupported simulation configuration."""


@dataclass(frozen=True)
class SimConfig:
    model: SelectionModel = Null()
    reps: int = 1_000_000
    master_seed: int = rng.DEFAULT_SEED
    grouping: str = "edwards"

    def __post_init__(self):
        if int(self.reps) != self.reps or self.reps < 1:
            raise ConfigError(f"reps must be a positive integer, got {self.reps!r}")
        if self.grouping not in ("fisher", "edwards"):
            raise ConfigError(f"grouping must be 'fisher' or 'edwards', got {self.grouping!r}")
        if not isinstance(self.model, (Null, ModelA, ModelB)):
            raise ConfigError(f"cannot simulate model {self.model!r}")
        if self.grouping == "fisher" and not isinstance(self.model, Null):
            raise ConfigError("selection models are defined on the binomial (edwards) grouping only")


@dataclass(frozen=True)
class McEstimate:
    label: str
    df: int
    chisq_obs: float
    exceed_count: int
    reps: int

    @property
    def p(self) -> float:
        return self.exceed_count / self.reps

    @property
    def se(self) -> float:
        p = self.p
        return math.sqrt(p * (1.0 - p) / self.reps)


# ---------------------------------------------------------------------------
# per-experiment lookup tables


@dataclass(frozen=True)
class _Tables:
    """Binomial CDFs, statistics and p-values indexed by outcome y."""

    cdf: tuple[np.ndarray, ...]
    stat: tuple[np.ndarray, ...]
    pval: tuple[np.ndarray, ...]
    chi: tuple[np.ndarray, ...]


def _binomial_cdf(n: int, p: float) -> np.ndarray:
    y = np.arange(n + 1)
    lg = np.array([math.lgamma(k + 1) for k in range(n + 1)])
    logpmf = lg[n] - lg - lg[::-1] + y * math.log(p) + (n - y) * math.log1p(-p)
    pmf = np.exp(logpmf - logpmf.max())
    cdf = np.cumsum(pmf)
    return cdf / cdf[-1]


def _experiment_tables(b: BinomialExperiment):
    a, d = b.p0.numerator, b.p0.denominator
    y = np.arange(b.n + 1, dtype=np.int64)
    # (y d - n a)^2 / (n a (d - a)), numerator and denominator exact integers
    num = (y * d - b.n * a).astype(float)
    den = float(b.n * a * (d - a))
    stat = num * num / den
    chi = num / math.sqrt(den)
    pval = np.array([chi_square_sf(s, 1) for s in stat])
    return _binomial_cdf(b.n, float(b.p0)), stat, pval, chi


@lru_cache(maxsize=8)
def _tables(binomials: tuple[BinomialExperiment, ...]) -> _Tables:
    parts = [_experiment_tables(b) for b in binomials]
    return _Tables(*(tuple(p[i] for p in parts) for i in range(4)))


def _invert(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Binomial outcomes by inversion: smallest y with cdf[y] > u."""
    y = np.searchsorted(cdf, u, side="right")
    return np.minimum(y, len(cdf) - 1)


def _selected_draws(tables: _Tables, model: SelectionModel, u: np.ndarray):
    """Outcome indices reported under ``model``.

    ``u`` has shape (reps, n_exp, 3): first draw, repeat decision, second
    draw.  The decision uniform is consumed whether or not it is used.
    Returns the reported outcome index per (rep, experiment).
    """
    reps, n_exp, _ = u.shape
    out = np.empty((reps, n_exp), dtype=np.int64)
    for e in range(n_exp):
        y1 = _invert(tables.cdf[e], u[:, e, 0])
        if isinstance(model, Null):
            out[:, e] = y1
            continue
        if isinstance(model, ModelA):
            repeat = tables.pval[e][y1] < model.alpha
        else:
            repeat = u[:, e, 1] < model.beta
        y2 = _invert(tables.cdf[e], u[:, e, 2])
        # keep the draw with the smaller statistic, first draw on ties
        better2 = tables.stat[e][y2] < tables.stat[e][y1]
        out[:, e] = np.where(repeat & better2, y2, y1)
    return out


def _edwards_block(dataset, tables, group_index, model, seed, block, size):
    gen = rng.block_generator(seed, rng.STREAM_MC, block)
    n_exp = len(dataset.binomials)
    u = gen.random((size, n_exp, 3))
    ys = _selected_draws(tables, model, u)
    stats = np.empty((size, n_exp))
    for e in range(n_exp):
        stats[:, e] = tables.stat[e][ys[:, e]]
    return {g: stats[:, idx].sum(axis=1) for g, idx in group_index.items()}


def _fisher_block(dataset, tables, group_index, seed, block, size):
    gen = rng.block_generator(seed, rng.STREAM_MC, block)
    n_exp = len(dataset.binomials)
    # binomial units use the same inversion path as the edwards grouping
    u = gen.random((size, n_exp, 3))
    ys = _selected_draws(tables, Null(), u)
    sums = {}
    for g in GROUP_ORDER:
        units = dataset.fisher_group(g)
        total = np.zeros(size)
        if all(len(m.counts) == 2 for m in units):
            for e in group_index[g]:
                total += tables.stat[e][ys[:, e]]
        else:
            for m in units:
                probs = np.array([float(p) for p in m.probabilities])
                counts = gen.multinomial(m.total, probs, size=size)
                expected = m.total * probs
                total += (((counts - expected) ** 2) / expected).sum(axis=1)
        sums[g] = total
    return sums


def _observed_rows(dataset: Dataset, grouping: str) -> dict[str, tuple[int, float]]:
    stats = fisher_group_stats(dataset) if grouping == "fisher" else edwards_group_stats(dataset)
    rows = {}
    for g in GROUP_ORDER:
        r = aggregate(stats[g])
        rows[g.short] = (r.df, r.chisq)
    sub = aggregate([s for g in GROUP_ORDER[:5] for s in stats[g]])
    rows["Tot64"] = (sub.df, sub.chisq)
    tot = aggregate([s for g in GROUP_ORDER for s in stats[g]])
    rows["Tot84"] = (tot.df, tot.chisq)
    return rows


def simulate_pvalues(dataset: Dataset, config: SimConfig,
                     threads: int | None = None) -> dict[str, McEstimate]:
    """Estimate P(simulated total > observed total) for every table row.

    Returns a mapping from row label (``3:1``, ``2:1``, ``BF``, ``GR``,
    ``TF``, ``Tot64``, ``PV``, ``Tot84``) to its estimate.
    """
    if not isinstance(config, SimConfig):
        raise ConfigError("config must be a SimConfig")
    binomials = tuple(sorted(dataset.binomials, key=lambda b: b.id))
    ordered = Dataset(binomials, dataset.fisher_multinomials)
    tables = _tables(binomials)
    group_index = {g: [i for i, b in enumerate(binomials) if b.group == g] for g in GROUP_ORDER}
    observed = _observed_rows(ordered, config.grouping)

    n_blocks = -(-config.reps // BLOCK_SIZE)

    def run(block: int) -> dict[str, int]:
        size = min(BLOCK_SIZE, config.reps - block * BLOCK_SIZE)
        if config.grouping == "fisher":
            sums = _fisher_block(ordered, tables, group_index, config.master_seed, block, size)
        else:
            sums = _edwards_block(ordered, tables, group_index, config.model,
                                  config.master_seed, block, size)
        by_label = {g.short: sums[g] for g in GROUP_ORDER}
        by_label["Tot64"] = sum(sums[g] for g in GROUP_ORDER[:5])
        by_label["Tot84"] = by_label["Tot64"] + sums[ExperimentGroup.PLANT_VARIATION]
        return {k: int(np.count_nonzero(v > observed[k][1])) for k, v in by_label.items()}

    workers = threads if threads and threads > 0 else None
    if workers == 1 or n_blocks == 1:
        results = [run(b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(n_blocks)))

    out = {}
    for label in ROW_LABELS:
        df, obs = observed[label]
        count = sum(r[label] for r in results)
        out[label] = McEstimate(label, df, obs, count, config.reps)
    return out


# ---------------------------------------------------------------------------
# single replicates of the 84 reported p-values


def _check_binomial_model(model: SelectionModel) -> None:
    if not isinstance(model, (Null, ModelA, ModelB)):
        raise ConfigError(f"cannot simulate model {model!r}")


def sample_pvalue_sets(dataset: Dataset, model: SelectionModel, seed: int,
                       count: int, start: int = 0) -> np.ndarray:
    """``count`` replicates of the reported p-values, shape (count, n_exp).

    Replicate ``i`` depends only on ``(seed, start + i)``.
    """
    _check_binomial_model(model)
    binomials = tuple(sorted(dataset.binomials, key=lambda b: b.id))
    tables = _tables(binomials)
    out = np.empty((count, len(binomials)))
    for i in range(count):
        gen = rng.block_generator(seed, rng.STREAM_PVALUE_SET, start + i)
        u = gen.random((1, len(binomials), 3))
        ys = _selected_draws(tables, model, u)[0]
        out[i] = [tables.pval[e][y] for e, y in enumerate(ys)]
    return out


def sample_pvalue_set(dataset: Dataset, model: SelectionModel, seed: int,
                      index: int = 0) -> np.ndarray:
    """One replicate of the 84 reported p-values under ``model``."""
    return sample_pvalue_sets(dataset, model, seed, 1, start=index)[0]


def sample_selected_statistics(dataset: Dataset, model: SelectionModel, seed: int,
                               reps: int) -> np.ndarray:
    """Recorded per-experiment chi-square statistics, shape (reps, n_exp)."""
    _check_binomial_model(model)
    binomials = tuple(sorted(dataset.binomials, key=lambda b: b.id))
    tables = _tables(binomials)
    chunks = []
    for block in range(-(-reps // BLOCK_SIZE)):
        size = min(BLOCK_SIZE, reps - block * BLOCK_SIZE)
        gen = rng.block_generator(seed, rng.STREAM_MISC, block)
        ys = _selected_draws(tables, model, gen.random((size, len(binomials), 3)))
        chunks.append(np.column_stack([tables.stat[e][ys[:, e]] for e in range(len(binomials))]))
    return np.vstack(chunks)


# ---------------------------------------------------------------------------
# normal QQ data for signed chi values


@dataclass(frozen=True)
class QQSamples:
    quantiles: np.ndarray      # standard-normal plotting positions, length n_exp
    samples: np.ndarray        # (n_samples, n_exp), each row sorted
    synthetic: np.ndarray      # element-wise mean of the sorted rows
    observed: np.ndarray       # sorted observed signed chi values


def normal_plotting_positions(n: int) -> np.ndarray:
    """Blom positions Phi^{-1}((i - 3/8) / (n + 1/4))."""
    return np.array([std_normal_quantile((i - 0.375) / (n + 0.25)) for i in range(1, n + 1)])


def edwards_qq_samples(dataset: Dataset, model: SelectionModel | str, n_samples: int = 100,
                       seed: int = rng.DEFAULT_SEED) -> QQSamples:
    """Simulated signed chi values for a normal QQ comparison.

    ``model`` may be the string ``"normal"`` for draws straight from the
    standard normal instead of binomial sampling.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    binomials = tuple(sorted(dataset.binomials, key=lambda b: b.id))
    n_exp = len(binomials)
    gen = rng.block_generator(seed, rng.STREAM_QQ, 0)
    if isinstance(model, str):
        if model != "normal":
            raise ConfigError(f"unknown model {model!r}")
        samples = gen.standard_normal((n_samples, n_exp))
    else:
        _check_binomial_model(model)
        tables = _tables(binomials)
        ys = _selected_draws(tables, model, gen.random((n_samples, n_exp, 3)))
        samples = np.column_stack([tables.chi[e][ys[:, e]] for e in range(n_exp)])
    samples = np.sort(samples, axis=1)
    tables = _tables(binomials)
    observed = np.sort([tables.chi[e][b.n1] for e, b in enumerate(binomials)])
    return QQSamples(normal_plotting_positions(n_exp), samples, samples.mean(axis=0), observed)
