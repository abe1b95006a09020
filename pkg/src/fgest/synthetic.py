"""Synthetic composites with known foreground, background and matte."""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imagecore import compose


@dataclass
class Composite:
    image: np.ndarray
    alpha: np.ndarray
    fg: np.ndarray
    bg: np.ndarray


def two_color_ramp(width, height, fg_color=(0.9, 0.1, 0.1), bg_color=(0.1, 0.1, 0.9)):
    """Constant foreground and background blended by a left-to-right alpha ramp."""
    alpha = np.broadcast_to(np.linspace(0.0, 1.0, width), (height, width)).copy()
    fg = np.broadcast_to(np.asarray(fg_color, float), (height, width, 3)).copy()
    bg = np.broadcast_to(np.asarray(bg_color, float), (height, width, 3)).copy()
    return Composite(compose(fg, bg, alpha), alpha, fg, bg)


def _smooth_field(rng, shape, scale):
    field = ndimage.gaussian_filter(rng.standard_normal(shape), scale, mode="wrap")
    field -= field.min()
    peak = field.max()
    return field / peak if peak > 0 else field


def smooth_colors(rng, width, height, scale, lo=0.1, hi=0.9):
    """Random smooth RGB image with values in ``[lo, hi]``."""
    chans = [_smooth_field(rng, (height, width), scale) for _ in range(3)]
    return lo + (hi - lo) * np.stack(chans, axis=-1)


def soft_matte(rng, width, height, scale, softness=0.15):
    """Random blob matte: mostly 0 or 1 with a wide translucent boundary band."""
    field = _smooth_field(rng, (height, width), scale)
    return np.clip((field - 0.5) / softness + 0.5, 0.0, 1.0)


def random_composite(width, height, seed=0, noise=0.0, color_scale=None, matte_scale=None):
    """Smooth random foreground/background composited through a soft blob matte.

    ``noise`` adds Gaussian noise of that standard deviation to the observed
    image (clipped to [0, 1]); fg, bg and alpha stay noise free.
    """
    rng = np.random.default_rng(seed)
    size = max(width, height)
    color_scale = size / 8 if color_scale is None else color_scale
    matte_scale = size / 6 if matte_scale is None else matte_scale
    fg = smooth_colors(rng, width, height, color_scale)
    bg = smooth_colors(rng, width, height, color_scale)
    alpha = soft_matte(rng, width, height, matte_scale)
    image = compose(fg, bg, alpha)
    if noise > 0:
        image = np.clip(image + noise * rng.standard_normal(image.shape), 0.0, 1.0)
    return Composite(image, alpha, fg, bg)
