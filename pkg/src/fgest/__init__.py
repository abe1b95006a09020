"""Foreground and background color estimation for alpha matting."""

from .closedform import CfParams, assemble_system, cf_foreground_background, solve_pcg
from .colorspace import (
    GammaParams,
    apply_white_point,
    fit_white_point,
    linear_to_srgb,
    prepare_ground_truth,
    srgb_to_linear,
)
from .imagecore import compose, compose_naive, resize
from .metrics import GradParams, MetricReport, evaluate, grad_error, mse, sad
from .multilevel import MlParams, level_schedule, ml_foreground_background, solve_pixel

__all__ = [
    "CfParams", "assemble_system", "cf_foreground_background", "solve_pcg",
    "GammaParams", "apply_white_point", "fit_white_point", "linear_to_srgb",
    "prepare_ground_truth", "srgb_to_linear",
    "compose", "compose_naive", "resize",
    "GradParams", "MetricReport", "evaluate", "grad_error", "mse", "sad",
    "MlParams", "level_schedule", "ml_foreground_background", "solve_pixel",
]
