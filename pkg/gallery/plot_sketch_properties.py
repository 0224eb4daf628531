"""
Certifying sketch properties
============================

Monte Carlo checks of subspace embedding, approximate matrix products and
norm preservation. Each check returns a report with the pass rate.
"""

import math

from gmapprox.verify import check_embedding, check_fro_norm, check_product

# %%
# Subspace embeddings for an 8-dimensional subspace of R^2000 at eps = 1/2.
d, eps = 8, 0.5
for family, s in [("sparse", 4 * d * d / eps**2), ("leverage", 4 * d * math.log(d + 1) / eps**2),
                  ("gaussian", 4 * d / eps**2), ("gaussian", 8 * d / eps**2)]:
    print(check_embedding(family, 2000, d, eps, math.ceil(s), trials=100).line(), f"s={math.ceil(s)}")

# %%
# The Gaussian sketch at ``s = 4d/eps^2`` falls short: the largest squared
# singular value concentrates near ``(1 + sqrt(d/s))^2 = 1 + eps + eps^2/4``,
# just beyond the allowed ``1 + eps``. Doubling ``s`` fixes it.

# %%
# Approximate matrix products, ``||A^T S^T S B - A^T B||_F <= eps ||A||_F ||B||_F``.
for family in ("sparse", "gaussian", "leverage", "composed"):
    print(check_product(family, epsilon=0.25, trials=100).line())

# %%
# Frobenius norm preservation.
for family in ("sparse", "gaussian"):
    print(check_fro_norm(family, epsilon=0.25, trials=100).line())
