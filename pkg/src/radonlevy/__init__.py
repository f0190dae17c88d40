"""Simulation and statistical verification of radonified cylindrical Levy processes."""

from .cylindrical import (
    CoordinateLevyModel,
    CylindricalPathBundle,
    TimeGrid,
    closed_form_cf,
    evaluate,
    poisson_clock,
    simulate_bundle,
)
from .hilbert import (
    CoordinateVector,
    HilbertSchmidtOp,
    Space,
    diagonal_operator,
    hs_adjoint,
    hs_apply,
    hs_tail_norm_sq,
    inner,
    random_operator,
)
from .radonify import (
    CauchyProbeReport,
    VectorPath,
    bare_series_norm,
    cauchy_bound_value,
    partial_sum_gap,
    radonify_ensemble,
    radonify_series,
    version_defect,
)

__version__ = "0.1.0"
