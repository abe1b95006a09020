"""Foreground error as a function of the multi-level regularization weights."""

from dataclasses import dataclass

import numpy as np

from .metrics import mse
from .multilevel import MlParams, ml_foreground_background
from .synthetic import random_composite

EPS_R_GRID = (1e-4, 3e-4, 1e-3, 3e-3, 5e-3, 1e-2, 3e-2, 1e-1)
OMEGA_GRID = (0.0, 0.1, 1.0)


@dataclass(frozen=True)
class SweepConfig:
    size: int = 96
    seeds: tuple = (0, 1, 2, 3)
    noise: float = 0.0
    eps_r: tuple = EPS_R_GRID
    omega: tuple = OMEGA_GRID


def regularization_sweep(config=SweepConfig()):
    """Mean foreground MSE over the synthetic composites for each (omega, eps_r).

    Returns a dict mapping omega to an array aligned with ``config.eps_r``.
    """
    scenes = [random_composite(config.size, config.size, seed=s, noise=config.noise)
              for s in config.seeds]
    curves = {}
    for omega in config.omega:
        curve = []
        for eps_r in config.eps_r:
            params = MlParams(omega=omega, eps_r=eps_r)
            errs = [mse(ml_foreground_background(c.image, c.alpha, params)[0], c.fg, c.alpha)
                    for c in scenes]
            curve.append(np.mean(errs))
        curves[omega] = np.array(curve)
    return curves
