"""
Searching the auxiliary pmf on channels with known capacity
===========================================================

For a fixed channel and encoder map, the region depends on the auxiliary
pmf.  A random-restart coordinate ascent over the pmf should recover the
known sum capacity of two noiseless channels: 1 bit when both receivers
see the same binary input, 2 bits when each sees its own bit.
"""

from bcregion import models, region

for name, capacity in (("k2_noiseless", 1.0), ("k2_product", 2.0)):
    spec = models.bundled(name)
    start = region.model_support(spec, [1.0, 1.0])
    res = region.optimize_pmf(spec, [1.0, 1.0], budget=2000, seed=8)
    print(f"{name}: start {start:.4f}, after {res.evaluations} evaluations {res.value:.6f} "
          f"(capacity {capacity})")

# the best value never decreases with a larger budget for a fixed seed
values = [region.optimize_pmf(models.bundled("k2_product"), [1.0, 1.0], b, seed=8).value
          for b in (10, 100, 1000)]
print("budget 10 / 100 / 1000:", [round(v, 4) for v in values])
