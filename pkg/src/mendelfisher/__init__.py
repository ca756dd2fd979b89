"""Statistical re-analysis of Mendel's pea experiments.

Chi-square aggregation over the 84 binomial experiments, Monte Carlo
p-values, Kolmogorov-Smirnov analysis of the p-value sample, selection
models for repeated experiments, minimum-distance estimation, exact
discrete p-value distributions and a closed-form normal approximation.
"""

__version__ = "0.1.0"

from .dataset import (BinomialExperiment, Dataset, DatasetError, ExperimentGroup,
                      MultinomialExperiment, load_embedded, parse_csv, export_csv, export_json)
from .chisq import (binomial_chisq, binomial_pvalue, multinomial_chisq, observed_pvalues,
                    signed_chi, table5_deterministic, table_v)
from .models import (BiasedTheory, ModelA, ModelB, Null, model_a_cdf, model_b_cdf,
                     parse_model)
from .montecarlo import SimConfig, McEstimate, simulate_pvalues, sample_pvalue_set
from .ks import KsResult, ecdf, ks_statistic, ks_test
from .estimation import EstimationResult, estimate, validate_estimator
from .exactdist import (DiscretePValueDistribution, mixture_distribution,
                        per_experiment_distribution)
from .approx import approx_total_pvalue, model_a_moments

__all__ = [
    "__version__",
    "BinomialExperiment", "Dataset", "DatasetError", "ExperimentGroup",
    "MultinomialExperiment", "load_embedded", "parse_csv", "export_csv", "export_json",
    "binomial_chisq", "binomial_pvalue", "multinomial_chisq", "observed_pvalues",
    "signed_chi", "table5_deterministic", "table_v",
    "BiasedTheory", "ModelA", "ModelB", "Null", "model_a_cdf", "model_b_cdf", "parse_model",
    "SimConfig", "McEstimate", "simulate_pvalues", "sample_pvalue_set",
    "KsResult", "ecdf", "ks_statistic", "ks_test",
    "EstimationResult", "estimate", "validate_estimator",
    "DiscretePValueDistribution", "mixture_distribution", "per_experiment_distribution",
    "approx_total_pvalue", "model_a_moments",
]
