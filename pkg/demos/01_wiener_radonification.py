"""
Radonifying a cylindrical Wiener process
========================================

A cylindrical Wiener process on a Hilbert space has no values in the space
itself: the squared norm of its first n coordinates grows like n.  Passing it
through a Hilbert-Schmidt operator produces a genuine vector-valued process
whose mean squared norm is t times the squared Hilbert-Schmidt norm.
"""

import numpy as np

from radonlevy import CoordinateLevyModel, TimeGrid, bare_series_norm, diagonal_operator, radonify_series
from radonlevy.cylindrical import simulate_bundles

# singular values 2**-k, so sum(lambda**2) = 4/3 in the limit
K = 128
S = diagonal_operator(2.0 ** -np.arange(20), K)
grid = TimeGrid.uniform(1.0, 1)
R = 2000

bare = {n: 0.0 for n in (16, 32, 64, 128)}
radon = 0.0
for bundle in simulate_bundles(CoordinateLevyModel.wiener(), grid, K, seed=1, replications=R):
    for n in bare:
        bare[n] += bare_series_norm(bundle, n, 1.0) ** 2 / R
    radon += np.sum(radonify_series(bundle, S).value_at(1.0) ** 2) / R

print("mean squared norm of the bare series at t = 1")
for n, value in bare.items():
    print(f"  n = {n:4d}: {value:8.2f}")
print(f"radonified: {radon:.4f}   (t * ||S||_HS^2 = {S.hs_norm_sq:.4f})")
