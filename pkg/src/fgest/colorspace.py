"""sRGB / linear RGB conversion and least-squares white point correction.

Used to turn linear-RGB ground truth foregrounds into sRGB images that
match a white-balanced reference capture.
"""

from dataclasses import dataclass

import numpy as np

from .imagecore import as_image, check_same_size

SRGB_KNEE = 0.04045
LINEAR_KNEE = 0.0031308


@dataclass(frozen=True)
class GammaParams:
    gamma: float = 2.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")


@dataclass(frozen=True)
class WhitePointFit:
    M: np.ndarray
    residual: float


def srgb_to_linear(s, params=GammaParams()):
    """Inverse gamma correction (works elementwise on arrays)."""
    s = np.clip(np.asarray(s, dtype=np.float64), 0.0, 1.0)
    return np.where(s <= SRGB_KNEE, s / 12.92, ((s + 0.055) / 1.055) ** params.gamma)


def linear_to_srgb(l, params=GammaParams()):
    """Gamma correction (works elementwise on arrays).

    With the standard sRGB knee constants the two branches only meet for
    gamma ~= 2.4; for other exponents the curve jumps at the knee.
    """
    l = np.clip(np.asarray(l, dtype=np.float64), 0.0, 1.0)
    p = l ** (1.0 / params.gamma)
    # p + 0.055 (p - 1) == 1.055 p - 0.055, but exact at p == 1
    upper = p + 0.055 * (p - 1.0)
    return np.clip(np.where(l <= LINEAR_KNEE, 12.92 * l, upper), 0.0, 1.0)


def white_point_residual(M, V, W):
    diff = M @ V.T - W.T
    return float(np.sum(diff * diff))


def fit_white_point(V, W):
    """Least-squares 3x3 matrix ``M`` with ``M v ~= w`` for the rows of V and W.

    Parameters
    ----------
    V, W : arrays of shape (n, 3)
        Source and target colors, one row per pixel.
    """
    V = np.asarray(V, dtype=np.float64).reshape(-1, 3)
    W = np.asarray(W, dtype=np.float64).reshape(-1, 3)
    if V.shape != W.shape:
        raise ValueError(f"V and W differ in shape: {V.shape} vs {W.shape}")
    if V.shape[0] < 3:
        raise ValueError(f"need at least 3 color pairs, got {V.shape[0]}")
    VtV = V.T @ V
    rank = np.linalg.matrix_rank(VtV)
    if rank < 3:
        raise np.linalg.LinAlgError(
            f"source colors are rank deficient (rank {rank} < 3); they do not span RGB"
        )
    WtV = W.T @ V
    # M = (W^T V)(V^T V)^-1, computed as a solve against the symmetric V^T V
    M = np.linalg.solve(VtV, WtV.T).T
    return WhitePointFit(M=M, residual=white_point_residual(M, V, W))


def apply_white_point(image, fit, clamp=True):
    image = as_image(image)
    if image.shape[2] != 3:
        raise ValueError(f"white point correction needs 3 channels, got {image.shape[2]}")
    out = image @ np.asarray(fit.M).T
    return np.clip(out, 0.0, 1.0) if clamp else out


def prepare_ground_truth(fg_linear, img_linear, img_srgb_wp, params=GammaParams()):
    """Bring linear ground truth into white-balanced sRGB.

    The white point matrix maps ``img_linear`` onto the linearized
    ``img_srgb_wp``; it is then applied to both linear inputs, which are
    gamma corrected. Returns ``(fg_gt, img_input, fit)``.
    """
    fg_linear = as_image(fg_linear, "fg_linear")
    img_linear = as_image(img_linear, "img_linear")
    img_srgb_wp = as_image(img_srgb_wp, "img_srgb_wp")
    check_same_size(fg_linear=fg_linear, img_linear=img_linear, img_srgb_wp=img_srgb_wp)
    target = srgb_to_linear(img_srgb_wp, params)
    fit = fit_white_point(img_linear.reshape(-1, 3), target.reshape(-1, 3))
    fg_gt = linear_to_srgb(apply_white_point(fg_linear, fit, clamp=False), params)
    img_input = linear_to_srgb(apply_white_point(img_linear, fit, clamp=False), params)
    return fg_gt, img_input, fit
