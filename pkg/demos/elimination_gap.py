"""
Projecting the split-rate system versus the closed-form region
==============================================================

Before elimination, each receiver's rate is split over the codebooks it
decodes and every covering index carries an excess rate r_S.  Projecting
that system onto (R_1, R_2) with a linear program should reproduce the
closed-form sum-rate region.  It does, except for pmfs where the excess
rates cannot satisfy covering and packing at once: there the split-rate
system is empty while the closed form still has positive rates.
"""

import logging

import numpy as np

from bcregion import constraints, models, region
from bcregion.infodist import aux_var, build_joint, mutual_info, output_var
from bcregion.setfam import subset as S

logging.getLogger("bcregion").setLevel(logging.CRITICAL)

rng = np.random.default_rng(5)
for m in range(50):
    d = build_joint(models.random_model(2, rng))
    closed = region.support(constraints.theorem1_system(d), [1.0, 1.0]).value
    proj = region.projected_support(d, [1.0, 1.0])
    if proj.ok:
        continue
    # the condition dropped by the closed form
    u1, u2, u12 = aux_var(S(1)), aux_var(S(2)), aux_var(S(1, 2))
    lhs = mutual_info(d, [u1], [output_var(1)], [u12]) + mutual_info(d, [u2], [output_var(2)], [u12])
    rhs = mutual_info(d, [u1], [u2], [u12])
    print(f"model {m}: split-rate system infeasible, closed-form R1+R2 <= {closed:.4f}; "
          f"I(U1;Y1|U12)+I(U2;Y2|U12) = {lhs:.4f} < I(U1;U2|U12) = {rhs:.4f}")

# a model where the condition holds: the two agree
d = build_joint(models.bundled("k2_product"))
for w in ([1.0, 0.0], [0.0, 1.0], [1.0, 1.0]):
    print(w, "projected", round(region.projected_support(d, w).value, 9),
          "closed form", round(region.support(constraints.theorem1_system(d), w).value, 9))
