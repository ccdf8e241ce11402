"""
Monte Carlo check of the hierarchical covering lemma
====================================================

Codebooks are drawn level by level and searched for a jointly typical
tuple.  With every excess rate a margin above its covering bound the
failure probability falls as the blocklength grows; pushing one binding
constraint below its bound keeps it high.
"""

from bcregion import constraints, mcsim, models
from bcregion.infodist import build_joint

d = build_joint(models.bundled("k3_bsbc"))
eps = mcsim.default_eps(3, base=0.5)

# rates with 0.15 bits of slack on every nontrivial covering constraint
above = mcsim.margin_rates(d, 0.15)
for ineq in mcsim.binding_constraints(d, above, 0.15):
    print("binding:", constraints.provenance_tag(ineq.provenance, 3), f"rhs {ineq.bound:.4f}")

for n in (8, 12, 16, 20):
    est = mcsim.estimate_cover_failure(d, mcsim.CoverTrialConfig(n, above, eps, trials=300, seed=1))
    print(f"n={n:2d} failure {est.estimate:.3f}  95% CI [{est.low:.3f}, {est.high:.3f}]")

# undercut the largest binding constraint by 0.15 bits
target = max(mcsim.binding_constraints(d, above, 0.15), key=lambda i: i.bound)
below = mcsim.undercut_rates(above, target, 0.15)
est = mcsim.estimate_cover_failure(d, mcsim.CoverTrialConfig(20, below, eps, trials=300, seed=1))
print(f"below the bound, n=20: failure {est.estimate:.3f}")
