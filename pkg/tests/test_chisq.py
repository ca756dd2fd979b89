import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from mendelfisher.chisq import (ChiSquareStat, aggregate, binomial_chisq, binomial_pvalue,
                                edwards_group_stats, fisher_group_stats, multinomial_chisq,
                                signed_chi, table5_deterministic, table_v)
from mendelfisher.dataset import BinomialExperiment, ExperimentGroup, MultinomialExperiment

G3 = ExperimentGroup.RATIO_3_TO_1


def test_signed_chi_examples(ds):
    assert signed_chi(ds.by_id(1)) == pytest.approx(-0.513, abs=5e-4)
    assert signed_chi(ds.by_id(59)) == pytest.approx(1.581, abs=5e-4)
    assert binomial_pvalue(ds.by_id(1)) == pytest.approx(0.608, abs=1e-3)
    assert binomial_pvalue(ds.by_id(22)) == pytest.approx(0.155, abs=1e-3)


def test_centered_experiment():
    b = BinomialExperiment(1, G3, "x", 40, 30, Fraction(3, 4))
    assert signed_chi(b) == 0.0
    assert binomial_pvalue(b) == 1.0


def test_pvalues_match_scipy(ds):
    for b in ds.binomials:
        s = binomial_chisq(b)
        assert s.df == 1
        assert binomial_pvalue(b) == pytest.approx(stats.chi2.sf(s.value, 1), rel=1e-12)


def test_signed_chi_squared_equals_two_cell_multinomial(ds):
    for b in ds.binomials:
        m = MultinomialExperiment(str(b.id), b.group, (b.n1, b.n - b.n1),
                                  (b.p0.numerator, b.p0.denominator - b.p0.numerator))
        assert signed_chi(b) ** 2 == pytest.approx(multinomial_chisq(m).value, abs=1e-10)
        assert binomial_chisq(b).value == pytest.approx(multinomial_chisq(m).value, abs=1e-10)


def test_multinomial_examples(ds):
    bf = ds.fisher_group(ExperimentGroup.BIFACTORIAL)[0]
    tf = ds.fisher_group(ExperimentGroup.TRIFACTORIAL)[0]
    assert multinomial_chisq(bf).value == pytest.approx(2.8110, abs=5e-5)
    assert multinomial_chisq(bf).df == 8
    assert multinomial_chisq(tf).value == pytest.approx(15.3224, abs=5e-5)
    assert multinomial_chisq(tf).df == 26
    perfect = MultinomialExperiment("p", ExperimentGroup.BIFACTORIAL, (1, 2, 1, 2, 4, 2, 1, 2, 1),
                                    (1, 2, 1, 2, 4, 2, 1, 2, 1))
    assert multinomial_chisq(perfect) == (0.0, 8)


def test_multinomial_matches_scipy(ds):
    for m in ds.fisher_multinomials:
        obs = np.array(m.counts, float)
        exp = obs.sum() * np.array(m.ratios, float) / sum(m.ratios)
        ref = stats.chisquare(obs, exp).statistic
        assert multinomial_chisq(m).value == pytest.approx(ref, rel=1e-12)


def test_multinomial_zero_total():
    m = MultinomialExperiment("z", ExperimentGroup.GAMETIC_RATIOS, (0, 0, 0, 0), (1, 1, 1, 1))
    with pytest.raises(ValueError):
        multinomial_chisq(m)


def test_aggregate_examples(ds):
    fisher = [s for rows in fisher_group_stats(ds).values() for s in rows]
    no_pv = [s for g, rows in fisher_group_stats(ds).items()
             if g is not ExperimentGroup.PLANT_VARIATION for s in rows]
    sub = aggregate(no_pv)
    assert sub.df == 64 and abs(sub.chisq - 29.1186) <= 1e-3
    assert sub.p_chisq == pytest.approx(0.99995, abs=5e-6)
    edw = aggregate([s for rows in edwards_group_stats(ds).values() for s in rows])
    assert edw.df == 84
    assert edw.chisq == pytest.approx(41.3376, abs=5e-5)
    assert edw.p_chisq == pytest.approx(0.99998, abs=5e-6)
    one = aggregate([ChiSquareStat(3.5, 2)])
    assert (one.chisq, one.df) == (3.5, 2)
    assert aggregate(fisher).df == 84
    with pytest.raises(ValueError):
        aggregate([])


@given(st.lists(st.tuples(st.floats(0, 50), st.integers(1, 10)), min_size=1, max_size=20),
       st.randoms())
def test_aggregate_order_independent(rows, rnd):
    stats_ = [ChiSquareStat(v, d) for v, d in rows]
    shuffled = stats_[:]
    rnd.shuffle(shuffled)
    a, b = aggregate(stats_), aggregate(shuffled)
    assert a.df == b.df
    assert a.chisq == b.chisq        # fsum is exactly rounded
    assert a.p_chisq == b.p_chisq


def test_table5_rows(ds):
    rows = {r.label: r for r in table5_deterministic(ds)}
    assert list(rows) == ["3:1", "2:1", "BF", "GR", "TF", "Tot64", "PV", "Tot84"]
    assert rows["2:1"].fisher.chisq == pytest.approx(5.1733, abs=5e-5)
    assert rows["2:1"].df == 8
    assert rows["2:1"].fisher.p_chisq == pytest.approx(0.7389, abs=5e-5)
    assert rows["GR"].edwards.chisq == pytest.approx(3.6277, abs=5e-5)
    assert rows["GR"].edwards.p_chisq == pytest.approx(0.9987, abs=5e-5)
    assert rows["PV"].fisher.chisq == pytest.approx(12.4870, abs=5e-5)
    assert rows["PV"].df == 20
    assert rows["PV"].fisher.p_chisq == pytest.approx(0.8983, abs=5e-5)
    for label in ("3:1", "2:1", "PV"):
        assert rows[label].fisher.chisq == rows[label].edwards.chisq


def test_table_v(ds):
    rows = table_v(ds)
    assert [r.label for r in rows] == ["3:1", "2:1", "BF", "GR", "TF", "Tot64", "PV", "Tot84"]
    by = {r.label: r for r in rows}
    assert by["Tot84"].chisq == pytest.approx(by["Tot64"].chisq + by["PV"].chisq, rel=1e-14)
    assert by["GR"].chisq == pytest.approx(3.6730, abs=5e-5)
