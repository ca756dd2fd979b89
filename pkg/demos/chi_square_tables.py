"""Chi-square aggregation over the 84 pea experiments, in both groupings.

Run: python3 demos/chi_square_tables.py
"""

from mendelfisher import load_embedded, signed_chi, binomial_pvalue, table5_deterministic

ds = load_embedded()
print(f"{len(ds)} binomial experiments, {len(ds.fisher_multinomials)} multinomial units\n")

# totals sit far below their degrees of freedom: the fit is unusually close
print(f"{'group':6} {'df':>3} {'chisq F':>9} {'p F':>8} {'chisq E':>9} {'p E':>8}")
for r in table5_deterministic(ds):
    print(f"{r.label:6} {r.df:3d} {r.fisher.chisq:9.4f} {r.fisher.p_chisq:8.5f} "
          f"{r.edwards.chisq:9.4f} {r.edwards.p_chisq:8.5f}")

print("\nfirst five experiments:")
for b in sorted(ds.binomials, key=lambda b: b.id)[:5]:
    print(f"  id {b.id:2d}  n={b.n:5d}  n1={b.n1:5d}  chi={signed_chi(b):+.4f}  p={binomial_pvalue(b):.4f}")
