"""Predictor-feedback delay-robustness toolkit."""

from ._core import (
    DecayEnvelope,
    DecayFit,
    MarginReport,
    PlantModel,
    RootEstimate,
    SimTrace,
    StabilityWindow,
    ToolkitError,
    certificate_json,
    certify_envelope,
    char_eval_scalar,
    closed_loop_margin,
    crossing_curve,
    decay_envelope,
    example_plant,
    figure1_sweep,
    fit_decay,
    is_hurwitz,
    mat_exp,
    max_epsilon,
    parse_model,
    rightmost_root_scalar,
    scalar_bound,
    simulate,
    spectral_norm,
)

__all__ = [
    "DecayEnvelope",
    "DecayFit",
    "MarginReport",
    "PlantModel",
    "RootEstimate",
    "SimTrace",
    "StabilityWindow",
    "ToolkitError",
    "certificate_json",
    "certify_envelope",
    "char_eval_scalar",
    "closed_loop_margin",
    "crossing_curve",
    "decay_envelope",
    "example_plant",
    "figure1_sweep",
    "fit_decay",
    "is_hurwitz",
    "mat_exp",
    "max_epsilon",
    "parse_model",
    "rightmost_root_scalar",
    "scalar_bound",
    "simulate",
    "spectral_norm",
]
