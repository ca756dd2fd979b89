"""Acceptance criteria 1-9, one test each.

Every test records a PASS/FAIL verdict with the measured values, printed
in the terminal summary, and then asserts the same condition.
"""

import math
import time

import numpy as np
import pytest

from mendelfisher import rng
from mendelfisher.approx import model_a_moments, qstar_moments_quadrature
from mendelfisher.chisq import binomial_pvalue, observed_pvalues, signed_chi, table5_deterministic
from mendelfisher.estimation import estimate, validate_estimator
from mendelfisher.exactdist import (max_of_two_distribution, mixture_distribution, outcome_table,
                                    per_experiment_distribution)
from mendelfisher.ks import ks_test
from mendelfisher.models import ModelA, ModelB, Null, as_cdf, model_a_cdf, uniform_cdf
from mendelfisher.montecarlo import SimConfig, sample_pvalue_sets, simulate_pvalues

ROWS = ("3:1", "2:1", "BF", "GR", "TF", "Tot64", "PV", "Tot84")


def _report(verdict, number, failures, detail):
    passed = not failures
    verdict(number, passed, detail if passed else f"{detail}; " + "; ".join(failures[:6])
            + (f" (+{len(failures) - 6} more)" if len(failures) > 6 else ""))
    assert passed, failures


# ---------------------------------------------------------------------------
# 1

REF_GROUP_CHISQ = {  # (Fisher, Edwards) as printed, four decimals
    "3:1": (2.1389, 2.1389), "2:1": (5.1733, 5.1733), "BF": (2.8110, 2.7778),
    "GR": (3.6730, 3.6277), "TF": (15.3224, 15.1329), "PV": (12.4870, 12.4870),
    "Tot64": (29.1186, 28.8506), "Tot84": (41.6055, 41.3376),
}
REF_GROUP_P = {
    "3:1": (0.9518, 0.9518), "2:1": (0.7389, 0.7389), "BF": (0.9457, 0.9475),
    "GR": (0.9986, 0.9987), "TF": (0.9511, 0.9549), "PV": (0.8983, 0.8983),
    "Tot64": (0.99995, 0.99995), "Tot84": (0.99997, 0.99998),
}
# the Fisher subtotal carries an explicit wider tolerance
CHISQ_TOL = {("Tot64", 0): 1e-3}


def test_criterion_1_group_chisq(ds, verdict):
    t0 = time.perf_counter()
    rows = {r.label: r for r in table5_deterministic(ds)}
    elapsed = time.perf_counter() - t0
    failures = []
    for label, refs in REF_GROUP_CHISQ.items():
        for k, agg in enumerate((rows[label].fisher, rows[label].edwards)):
            tol = CHISQ_TOL.get((label, k), 5e-5)
            if abs(agg.chisq - refs[k]) > tol:
                failures.append(f"{label} {'FE'[k]} chisq {agg.chisq:.6f} vs {refs[k]}")
            if abs(agg.p_chisq - REF_GROUP_P[label][k]) > 5e-5:
                failures.append(f"{label} {'FE'[k]} p {agg.p_chisq:.6f} vs {REF_GROUP_P[label][k]}")
    if elapsed >= 1.0:
        failures.append(f"runtime {elapsed:.2f}s")
    tot = rows["Tot84"]
    _report(verdict, 1, failures,
            f"Tot84 chisq {tot.fisher.chisq:.4f}/{tot.edwards.chisq:.4f}, {elapsed * 1e3:.0f} ms")


# ---------------------------------------------------------------------------
# 2

def test_criterion_2_per_experiment(ds, experiment_reference, verdict):
    t0 = time.perf_counter()
    got = {b.id: (signed_chi(b), binomial_pvalue(b)) for b in ds.binomials}
    elapsed = time.perf_counter() - t0
    failures = []
    worst_chi = worst_p = 0.0
    for i, ref in sorted(experiment_reference.items()):
        chi, p = got[i]
        dchi, dp = abs(chi - float(ref["chi"])), abs(p - float(ref["p_value"]))
        worst_chi, worst_p = max(worst_chi, dchi), max(worst_p, dp)
        if dchi > 5e-4:
            failures.append(f"id {i} chi {chi:.5f} vs {ref['chi']}")
        if dp > 1e-3:
            failures.append(f"id {i} p {p:.5f} vs {ref['p_value']}")
    if len(experiment_reference) != 84:
        failures.append("reference table incomplete")
    if elapsed >= 1.0:
        failures.append(f"runtime {elapsed:.2f}s")
    _report(verdict, 2, failures,
            f"max |chi err| {worst_chi:.2e}, max |p err| {worst_p:.2e}")


# ---------------------------------------------------------------------------
# 3

REF_MC = {  # null Fisher, null Edwards, A .094 .201 .362, B .261 .455 .634
    "3:1": (.9519, .9517, .9069, .8286, .6579, .9023, .8446, .7701),
    "2:1": (.7401, .7393, .4955, .2374, .1156, .6044, .4826, .3586),
    "BF": (.9462, .9482, .8838, .7839, .5926, .8914, .8248, .7376),
    "GR": (.9987, .9987, .9950, .9811, .9063, .9939, .9827, .9584),
    "TF": (.9512, .9555, .6973, .2917, .0812, .8493, .6941, .4847),
    "Tot64": (.99995, .99995, .9917, .8175, .2965, .9980, .9800, .8887),
    "PV": (.9000, .9003, .5932, .2196, .0684, .7582, .5922, .4028),
    "Tot84": (.99998, .99998, .9860, .6577, .1176, .9980, .9733, .8348),
}
MC_COLUMNS = (
    ("null/Fisher", Null(), "fisher"), ("null/Edwards", Null(), "edwards"),
    ("A .094", ModelA(0.094), "edwards"), ("A .201", ModelA(0.201), "edwards"),
    ("A .362", ModelA(0.362), "edwards"), ("B .261", ModelB(0.261), "edwards"),
    ("B .455", ModelB(0.455), "edwards"), ("B .634", ModelB(0.634), "edwards"),
)


@pytest.mark.slow
def test_criterion_3_monte_carlo(ds, verdict):
    reps = 100_000
    t0 = time.perf_counter()
    failures = []
    for k, (name, model, grouping) in enumerate(MC_COLUMNS):
        res = simulate_pvalues(ds, SimConfig(model, reps, rng.DEFAULT_SEED, grouping))
        for label in ROWS:
            ref = REF_MC[label][k]
            se = math.sqrt(ref * (1 - ref) / reps)
            got = res[label].p
            if abs(got - ref) > 4 * se:
                failures.append(f"{name} {label} {got:.4f} vs {ref} ({abs(got - ref) / se:.1f} se)")
    elapsed = time.perf_counter() - t0
    if elapsed >= 120:
        failures.append(f"runtime {elapsed:.0f}s")
    _report(verdict, 3, failures, f"64 MC p-values at 1e5 reps in {elapsed:.0f} s")


# ---------------------------------------------------------------------------
# 4

def test_criterion_4_ks_uniform(ds, verdict):
    r = ks_test(observed_pvalues(ds), uniform_cdf)
    failures = []
    if not 0.190 <= r.d <= 0.192:
        failures.append(f"D {r.d:.5f}")
    if not 0.003 <= r.p <= 0.005:
        failures.append(f"p {r.p:.5f}")
    _report(verdict, 4, failures, f"D {r.d:.5f}, p {r.p:.5f}")


# ---------------------------------------------------------------------------
# 5

def test_criterion_5_estimation(ds, verdict):
    pv = observed_pvalues(ds)
    t0 = time.perf_counter()
    a = estimate(pv, "a")
    b = estimate(pv, "b")
    elapsed = time.perf_counter() - t0
    failures = []
    if abs(a.param_hat - 0.201) > 0.002 + 1e-12:
        failures.append(f"alpha {a.param_hat}")
    if abs(a.d_at_hat - 0.0623) > 0.001:
        failures.append(f"D {a.d_at_hat:.5f}")
    if abs(a.p_at_hat - 0.8804) > 0.01:
        failures.append(f"p {a.p_at_hat:.4f}")
    if a.ci is None or abs(a.ci[0] - 0.094) > 0.005 + 1e-12 or abs(a.ci[1] - 0.362) > 0.005 + 1e-12:
        failures.append(f"alpha CI {a.ci}")
    if not 0.44 <= b.param_hat <= 0.46:
        failures.append(f"beta {b.param_hat}")
    if b.ci is None or abs(b.ci[0] - 0.261) > 0.01 + 1e-12 or abs(b.ci[1] - 0.634) > 0.01 + 1e-12:
        failures.append(f"beta CI {b.ci}")
    if elapsed >= 10:
        failures.append(f"runtime {elapsed:.1f}s")
    _report(verdict, 5, failures,
            f"alpha {a.param_hat:.3f} CI {a.ci}, D {a.d_at_hat:.5f}, p {a.p_at_hat:.4f}; "
            f"beta {b.param_hat:.3f} CI {b.ci}; {elapsed:.1f} s")


# ---------------------------------------------------------------------------
# 6

@pytest.mark.slow
def test_criterion_6_validation(ds, verdict):
    s = validate_estimator(ds, true_alpha=0.2, n_samples=200, seed=rng.DEFAULT_SEED)
    failures = []
    if abs(s.mean - 0.2077) > 0.025:
        failures.append(f"mean {s.mean:.4f}")
    if abs(s.sd - 0.101) > 0.02:
        failures.append(f"sd {s.sd:.4f}")
    if abs(s.coverage - 0.895) > 0.05:
        failures.append(f"coverage {s.coverage:.3f}")
    _report(verdict, 6, failures,
            f"mean {s.mean:.4f}, sd {s.sd:.4f}, coverage {s.coverage:.3f}, empty {s.empty_count}")


# ---------------------------------------------------------------------------
# 7

REF_OUTCOMES = {  # y: (chi-square, p-value or None)
    0: (105.00, None), 1: (97.15, None), 25: (0.24, 0.626), 26: (0.0095, 0.922),
    27: (0.086, 0.770), 33: (6.94, 0.008), 34: (9.15, 0.002), 35: (11.67, 0.0006),
}
REF_TOP_CDF = [(0.001, 0.002), (0.002, 0.003), (0.005, 0.007), (0.008, 0.010), (0.015, 0.019),
          (0.025, 0.029), (0.040, 0.050), (0.064, 0.077), (0.097, 0.117), (0.143, 0.173),
          (0.205, 0.240), (0.283, 0.334), (0.380, 0.434), (0.495, 0.564), (0.626, 0.696),
          (0.770, 0.848), (0.922, 1.000)]


def _decimals(text: str) -> int:
    return len(text.split(".")[1]) if "." in text else 0


def test_criterion_7_exact_distribution(ds, verdict):
    failures = []
    _, stat, pval, _ = outcome_table(35, 0.75)
    for y, (q, p) in REF_OUTCOMES.items():
        if round(stat[y], _decimals(repr(q))) != q:
            failures.append(f"y={y} chisq {stat[y]:.5f} vs {q}")
        if p is not None and round(pval[y], _decimals(repr(p))) != p:
            failures.append(f"y={y} p {pval[y]:.5f} vs {p}")
    d = per_experiment_distribution(35, 0.75)
    top = list(zip(d.pvalues[-17:], d.cdf_values[-17:]))
    for (p_ref, cdf_ref), (p, cdf) in zip(REF_TOP_CDF, top):
        if round(p, 3) != p_ref or abs(cdf - cdf_ref) > 1e-3 + 5e-4:
            failures.append(f"atom {p:.4f} cdf {cdf:.4f} vs {p_ref} {cdf_ref}")
    full = mixture_distribution(ds, truncation_mass=0.0)
    trunc = mixture_distribution(ds)
    if len(full) != 14218:
        failures.append(f"support {len(full)} vs 14218")
    if trunc.truncated_atoms != 12110:
        failures.append(f"truncated atoms {trunc.truncated_atoms} vs 12110")
    _report(verdict, 7, failures,
            f"outcome table and top-atom CDF checked; support {len(full)}, truncated atoms {trunc.truncated_atoms}")


# ---------------------------------------------------------------------------
# 8

REF_MOMENTS = [(0.094, 2.805, 0.6636, 0.5685, 0.9814),
           (0.201, 1.635, 0.5160, 0.3662, 0.6412),
           (0.362, 0.831, 0.4164, 0.3135, 0.1076)]


def test_criterion_8_closed_form(verdict):
    from mendelfisher.approx import approx_total_pvalue
    failures = []
    worst_quad = 0.0
    for alpha, c, mu, var, p in REF_MOMENTS:
        m = model_a_moments(alpha)
        for name, got, ref in (("c", m.c_alpha, c), ("mu", m.mu_star, mu), ("var", m.sigma2_star, var)):
            if abs(got - ref) > 5e-4 + 1e-12:
                failures.append(f"alpha {alpha} {name} {got:.5f} vs {ref}")
        pn = approx_total_pvalue(alpha)
        if abs(pn - p) > 1e-3:
            failures.append(f"alpha {alpha} p {pn:.5f} vs {p}")
        _, mu_q, _ = qstar_moments_quadrature(alpha)
        worst_quad = max(worst_quad, abs(mu_q - m.mu_star))
    if worst_quad > 1e-6:
        failures.append(f"quadrature gap {worst_quad:.1e}")
    _report(verdict, 8, failures, f"moment rows match; quadrature gap {worst_quad:.1e}")


# ---------------------------------------------------------------------------
# 9

def _cdf_axiom_failures():
    out = []
    x = np.linspace(0.0, 1.0, 2001)
    models = [Null()] + [ModelA(a) for a in (0, 0.094, 0.2, 0.5, 1)] \
        + [ModelB(b) for b in (0, 0.261, 0.5, 1)]
    for m in models:
        f = np.array([as_cdf(m)(v) for v in x])
        if f[0] != 0.0 or f[-1] != 1.0 or np.any(np.diff(f) < 0) or np.any((f < 0) | (f > 1)):
            out.append(f"CDF axioms {m}")
    return out


def _exactdist_failures(ds):
    from fractions import Fraction
    out = []
    for n, p0 in ((7324, 0.75), (8023, 0.75), (35, 0.75), (100, 0.5)):
        if abs(per_experiment_distribution(n, p0).masses.sum() - 1) > 1e-12:
            out.append(f"mass ({n}, {p0})")
    mix = mixture_distribution(ds, truncation_mass=0.0)
    if abs(mix.masses.sum() - 1) > 1e-12 or abs(max_of_two_distribution(mix).masses.sum() - 1) > 1e-12:
        out.append("mixture mass")
    for p0 in (Fraction(1, 2), Fraction(2, 3), Fraction(3, 4)):
        for n in range(1, 21):
            groups = {}
            for y in range(n + 1):
                s = (y - n * p0) ** 2 / (n * p0 * (1 - p0))
                groups[s] = groups.get(s, 0) + math.comb(n, y) * p0 ** y * (1 - p0) ** (n - y)
            d = per_experiment_distribution(n, float(p0))
            from scipy import stats
            ref_p = np.array([stats.chi2.sf(float(s), 1) for s in groups])
            ref_m = np.array([float(m) for m in groups.values()])
            idx = np.array([np.argmin(np.abs(ref_p - v)) for v in d.pvalues])
            merged = np.bincount(idx, weights=d.masses, minlength=ref_p.size)
            if (not np.allclose(d.pvalues, ref_p[idx], rtol=1e-11)
                    or not np.allclose(merged, ref_m, rtol=1e-11, atol=1e-300)):
                out.append(f"brute force n={n} p0={p0}")
    return out


def _mc_closed_form_failures():
    out = []
    gen = rng.block_generator(rng.DEFAULT_SEED, rng.STREAM_MISC, 990)
    size = 1_000_000
    u1, u2 = gen.random((2, size))
    for alpha in (0.094, 0.2, 0.5):
        reported = np.where(u1 < alpha, np.maximum(u1, u2), u1)
        for x in (0.05, 0.15, 0.3, 0.6, 0.9):
            ref = model_a_cdf(ModelA(alpha), x)
            se = math.sqrt(ref * (1 - ref) / size)
            if abs(np.mean(reported <= x) - ref) > 4 * se:
                out.append(f"model A MC alpha={alpha} x={x}")
    q = np.minimum(gen.chisquare(1, size), gen.chisquare(1, size))
    if abs(q.mean() - (1 - 2 / math.pi)) > 4 * q.std() / math.sqrt(size):
        out.append(f"mu*(1) MC {q.mean():.5f}")
    if abs(model_a_moments(1.0).mu_star - (1 - 2 / math.pi)) > 1e-12:
        out.append("mu*(1) closed form")
    return out


def _determinism_failures(ds):
    out = []
    for model, grouping in ((Null(), "fisher"), (ModelA(0.2), "edwards"), (ModelB(0.4), "edwards")):
        cfg = SimConfig(model, 50_000, 11, grouping)
        runs = [simulate_pvalues(ds, cfg, threads=t) for t in (1, 2, 5)]
        counts = [{k: v.exceed_count for k, v in r.items()} for r in runs]
        if any(c != counts[0] for c in counts):
            out.append(f"thread dependence {model} {grouping}")
    if not np.array_equal(sample_pvalue_sets(ds, ModelA(0.2), 5, 4),
                          sample_pvalue_sets(ds, ModelA(0.2), 5, 4)):
        out.append("p-value sets not reproducible")
    a = validate_estimator(ds, 0.2, 5, seed=9, grid_width=0.01)
    b = validate_estimator(ds, 0.2, 5, seed=9, grid_width=0.01)
    if not np.array_equal(a.estimates, b.estimates):
        out.append("validation not reproducible")
    return out


def test_criterion_9_property_suite(ds, verdict):
    failures = (_cdf_axiom_failures() + _exactdist_failures(ds)
                + _mc_closed_form_failures() + _determinism_failures(ds))
    _report(verdict, 9, failures,
            "CDF axioms, mass normalization, brute force n <= 20, MC vs closed form, "
            "thread-count determinism")
