"""Spectral mean estimation for noisy, mis-aligned point samples of closed curves."""
from .align import AlignmentParams, AlignmentResult, AlignOptions, align, average_error
from .diffeo import DiffeoSpec, FlowConfig, flow, flow_sensitivity, inverse_flow
from .estimator import (
    ContourStack,
    IseBudget,
    MleFit,
    discrete_offsets,
    estimate_curve,
    expected_ise,
    fit,
    ise_budget,
    realized_ise,
)
from .noise import NoiseSpectrum, covariance, p_order_spectrum, sample_gp
from .spectral import (
    ContourSamples,
    FourierCoeffs,
    Grid,
    analyze,
    make_grid,
    parseval_distance,
    synthesize,
    trig_interpolate,
    trig_interpolate_deriv,
)

__version__ = "0.1.0"
