"""Stochastic geometry of s-concave functions.

Random majorants built from lifted convex hulls, sup-convolutions as
Minkowski combinations of epigraphs and hypographs, lifted-measure
integration, shadow systems, and Monte Carlo checks of rearrangement
inequalities. Base dimension 1 and 2.
"""
from .convex_kernel import (
    BodyKind,
    CoefficientBody,
    LiftedBody,
    VPolytope,
    hull,
    matrix_times,
    measure,
    minkowski_lambda,
    slice,
)
from .lift import combine_lifted, exact_body, lift_points, m_combination, nu_measure, unlift_eval
from .random_approx import RandomApprox, SampleCloud, build_approx, integral_approx, sample_under_graph
from .shadow import LpsSpec, ShadowEpiSpec, brunn_profile, lps_at, project_shadow, scan_convexity, steiner_convexity_probe
from .smeans import (
    GridFn,
    SConcaveFn,
    SParam,
    evaluate,
    integral_closed_form,
    m_mean,
    power_mean,
    rearrange,
    steiner_symmetral,
    sup_convolution_grid,
)

__version__ = "0.1.0"
