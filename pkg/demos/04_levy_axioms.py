"""
Checking the Levy axioms on simulated paths
===========================================

Zero start, stationary and independent increments and stochastic
continuity, each checked on finite-dimensional projections of the
radonified process.
"""

import numpy as np

from radonlevy import CoordinateLevyModel, TimeGrid, random_operator, radonify_ensemble
from radonlevy import stats

S = random_operator(2.0 ** -np.arange(6), 12, 8, np.random.default_rng(2))
proj = stats.FiniteDimensionalProjection([S.codomain.basis(0), S.codomain.basis(1)])

for model in (CoordinateLevyModel.wiener(), CoordinateLevyModel.compound_poisson(2.0)):
    paths = radonify_ensemble(model, S, TimeGrid.uniform(1.0, 32), replications=3000, seed=4)
    eps = 1e-6 if model.kind.value == "compound_poisson" else 1.0
    reports = [
        stats.test_zero_start(paths),
        stats.test_stationary_increments(paths, 0.0, 0.5, 0.25, proj),
        stats.test_independent_increments(paths, [(0.0, 0.5), (0.5, 1.0)], proj, np.linspace(-3, 3, 7)),
        stats.test_stochastic_continuity(paths, 0.5, [eps], floor=0.1),
    ]
    print(model.kind.value)
    for r in reports:
        print(f"  {r.name:24s} statistic={r.statistic:.4g}  passed={r.passed}")
