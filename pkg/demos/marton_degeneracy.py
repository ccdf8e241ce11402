"""
Pinning the pairwise auxiliaries recovers Marton coding
=======================================================

Setting U_12, U_13 and U_23 to constants leaves a common auxiliary and one
private auxiliary per receiver.  The resulting region sits inside the
region reachable by optimizing the full pmf, starting from that same point.
"""

import numpy as np

from bcregion import constraints, models, region
from bcregion.infodist import build_joint
from bcregion.setfam import subset as S

full = models.random_model(3, np.random.default_rng(6))
small, embedded = models.degenerate_slice(full, (S(1, 2), S(1, 3), S(2, 3)))
small_sys = constraints.theorem1_system(build_joint(small))

for j, w in enumerate(region.random_directions(3, 5, seed=0)):
    pinned = region.support(small_sys, w).value
    opt = region.optimize_pmf(full.with_pmf(embedded), w, budget=1000, seed=j)
    print(f"w={np.round(w, 3)}  pinned {pinned:.4f}  optimized {opt.value:.4f}")
