"""Moments of the selected statistic under model A and the normal approximation.

Run: python3 demos/closed_form.py
"""

import numpy as np

from mendelfisher import approx_total_pvalue, model_a_moments
from mendelfisher.approx import qstar_moments_quadrature

print(f"{'alpha':>6} {'c':>7} {'mu*':>7} {'var*':>7} {'p(84)':>7}")
for alpha in (0.0, 0.094, 0.201, 0.362, 1.0):
    m = model_a_moments(alpha)
    print(f"{alpha:6.3f} {m.c_alpha:7.3f} {m.mu_star:7.4f} {m.sigma2_star:7.4f} "
          f"{approx_total_pvalue(alpha):7.4f}")

# numerical integration of the density agrees with the closed forms
gaps = [abs(qstar_moments_quadrature(a)[1] - model_a_moments(a).mu_star)
        for a in np.linspace(0.05, 0.95, 10)]
print(f"\nlargest quadrature gap in the mean: {max(gaps):.1e}")
print(f"mean at alpha = 1 is 1 - 2/pi = {1 - 2 / np.pi:.6f}")
