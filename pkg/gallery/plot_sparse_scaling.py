"""
Sparse embeddings run in time proportional to nnz
=================================================

Applying a sparse embedding touches each stored entry once, so the cost
grows linearly with ``nnz(A)`` and not with ``m * n``.
"""

import time

import numpy as np
import scipy.sparse

from gmapprox.sketch import TouchCounter, apply_sparse_embedding_left, build_sparse_embedding

rng = np.random.default_rng(0)
m, k = 5000, 2000
S = build_sparse_embedding(m, 20, seed=0)

# %%
for nnz in (10**4, 10**5, 10**6):
    A = scipy.sparse.random_array((m, k), density=nnz / (m * k), rng=rng, format="csr")
    apply_sparse_embedding_left(S, A)
    counter = TouchCounter()
    t0 = time.perf_counter()
    apply_sparse_embedding_left(S, A, counter)
    dt = time.perf_counter() - t0
    print(f"nnz={A.nnz:>8}  entries touched={counter.entries:>8}  {dt * 1e3:7.2f} ms")
