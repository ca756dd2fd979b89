"""Exact discrete distribution of a binomial experiment's chi-square p-value.

Run: python3 demos/exact_distribution.py
"""

import numpy as np

from mendelfisher import load_embedded, mixture_distribution, per_experiment_distribution
from mendelfisher.exactdist import outcome_table

y, stat, pval, pmf = outcome_table(35, 0.75)
print("35 trials at 3:1, outcomes near the expectation:")
for k in range(23, 30):
    print(f"  y={k:2d}  chisq={stat[k]:8.4f}  p={pval[k]:.4f}  P(y)={pmf[k]:.4f}")

d = per_experiment_distribution(35, 0.75)
print(f"\n{len(d)} distinct p-values; CDF at the top five atoms:")
for p, m, c in d.rows()[-5:]:
    print(f"  p={p:.4f}  mass={m:.4f}  cdf={c:.4f}")

ds = load_embedded()
mix = mixture_distribution(ds)
print(f"\npooled over all experiments: {len(mix) + mix.truncated_atoms} atoms, "
      f"{mix.truncated_atoms} dropped below mass {mix.truncated_mass:.5f}")
grid = np.array([0.1, 0.25, 0.5, 0.75, 0.9])
print("pooled CDF vs uniform: " + ", ".join(f"{x:.2f}->{mix.cdf(x):.3f}" for x in grid))
