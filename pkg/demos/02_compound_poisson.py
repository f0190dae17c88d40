"""
A cylindrical compound Poisson process
======================================

All coordinates share one Poisson clock; each arrival adds an independent
jump vector.  The radonified process is piecewise constant, jumps exactly at
the arrival times and is zero until the first arrival.
"""

import numpy as np

from radonlevy import CoordinateLevyModel, TimeGrid, random_operator, radonify_series, simulate_bundle

model = CoordinateLevyModel.compound_poisson(intensity=3.0)
S = random_operator(2.0 ** -np.arange(6), 16, 8, np.random.default_rng(0))
bundle = simulate_bundle(model, TimeGrid.uniform(1.0, 10), K=16, seed=5)
Y = radonify_series(bundle, S)

print("arrival times:", np.round(bundle.event_times, 4))
norms = np.linalg.norm(Y.values, axis=1)
changes = Y.grid.times[1:][np.diff(norms) != 0]
print("times where ||Y_t|| changes:", np.round(changes, 4))

# empirical no-arrival probability against exp(-lambda t)
R = 5000
zero = sum(not radonify_series(simulate_bundle(model, TimeGrid.uniform(0.5, 1), 16, 6, r), S).values[-1].any() for r in range(R))
print(f"P(Y_0.5 = 0): {zero / R:.4f}   exp(-1.5) = {np.exp(-1.5):.4f}")
