"""
Convergence of the partial sums
===============================

The sup-norm distance between two partial sums of the radonified series is
controlled by the singular value tail.  For a Wiener sequence Doob's
inequality gives P(sup_t ||Y_n - Y_m|| > eps) <= tail(m) T / eps**2.
"""

import numpy as np

from radonlevy import CoordinateLevyModel, TimeGrid, diagonal_operator
from radonlevy.cylindrical import simulate_bundles
from radonlevy.radonify import cauchy_probes

S = diagonal_operator(2.0 ** -np.arange(16), 16)
bundles = list(simulate_bundles(CoordinateLevyModel.wiener(), TimeGrid.uniform(1.0, 100), 16, seed=3, replications=1000))

eps = 0.05
print(f"{'m':>3} {'n':>3} {'tail':>10} {'P(gap > eps)':>13} {'Doob bound':>11}")
for r in cauchy_probes(bundles, S, [(m, 16) for m in range(0, 8)], [eps]):
    print(f"{r.m:3d} {r.n:3d} {r.tail_sq:10.2e} {r.empirical_prob:13.3f} {min(1.0, r.tail_sq / eps**2):11.3f}")
