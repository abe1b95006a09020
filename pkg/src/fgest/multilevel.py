"""Multi-level local foreground/background estimation.

The image is solved coarse to fine. At every level each pixel solves a
small 2x2 least-squares problem that balances the compositing equation
against agreement with its four neighbors, and the result is written back
in place (Gauss-Seidel scanline sweeps).
"""

import math
from dataclasses import dataclass

import numba
import numpy as np

from .imagecore import as_alpha, as_image, check_same_size, resize


@dataclass(frozen=True)
class MlParams:
    """Controls for :func:`ml_foreground_background`.

    omega weights the alpha-gradient part of the neighbor coupling, eps_r is
    the uniform neighbor regularizer. Levels whose larger side is at most
    ``low_res_threshold`` get ``iters_low`` sweeps, all others ``iters_high``.
    """

    omega: float = 0.1
    eps_r: float = 5e-3
    low_res_threshold: int = 32
    iters_low: int = 10
    iters_high: int = 2

    def __post_init__(self):
        if not self.omega >= 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")
        if not self.eps_r > 0:
            raise ValueError(f"eps_r must be > 0, got {self.eps_r}")
        if self.iters_low < 1 or self.iters_high < 1:
            raise ValueError("iteration counts must be >= 1")
        if self.low_res_threshold < 1:
            raise ValueError("low_res_threshold must be >= 1")


@dataclass(frozen=True)
class Level:
    width: int
    height: int
    iterations: int


@dataclass(frozen=True)
class LevelSchedule:
    levels: tuple

    def __len__(self):
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)


def _level_sizes(full, n_levels):
    sizes = [int(round(full ** (l / n_levels))) for l in range(1, n_levels + 1)]
    sizes[-1] = full
    # plain rounding can jump by more than 2x (e.g. 7 -> 15); raise earlier levels
    for i in range(n_levels - 2, -1, -1):
        sizes[i] = max(sizes[i], -(-sizes[i + 1] // 2))
    return sizes


def level_schedule(full_width, full_height, params=MlParams()):
    """Sizes and sweep counts of the coarse-to-fine pyramid.

    There are ``ceil(log2(max(w, h)))`` levels with sizes ``round(w**(l/n))``;
    the last level is the full size and no side more than doubles between
    consecutive levels (starting from 1x1).
    """
    full_width = int(full_width)
    full_height = int(full_height)
    if full_width < 1 or full_height < 1:
        raise ValueError(f"size must be at least 1x1, got {full_width}x{full_height}")
    n_levels = math.ceil(math.log2(max(full_width, full_height)))
    if n_levels == 0:
        widths, heights = [1], [1]
    else:
        widths = _level_sizes(full_width, n_levels)
        heights = _level_sizes(full_height, n_levels)
    levels = []
    for w, h in zip(widths, heights):
        low = max(w, h) <= params.low_res_threshold
        levels.append(Level(w, h, params.iters_low if low else params.iters_high))
    return LevelSchedule(tuple(levels))


def _solve_2x2(a00, a01, a11, r0, r1):
    # adjugate inverse of the SPD matrix [[a00, a01], [a01, a11]]
    det = a00 * a11 - a01 * a01
    inv = 1.0 / det
    return (a11 * r0 - a01 * r1) * inv, (a00 * r1 - a01 * r0) * inv


_solve_2x2_jit = numba.njit(inline="always")(_solve_2x2)


def _neighbor_weight(alpha_i, alpha_j, omega, eps_r):
    beta_i = 1.0 - alpha_i
    beta_j = 1.0 - alpha_j
    return eps_r + omega * 0.5 * (abs(alpha_i - alpha_j) + abs(beta_i - beta_j))


def solve_pixel(alpha_i, intensity, neighbor_alphas, neighbor_fg, neighbor_bg,
                params=MlParams(), clamp=True):
    """Solve the local 2x2 system of one pixel for all color channels.

    Returns ``(fg, bg)`` as arrays of shape ``(channels,)``. With ``clamp=False``
    the raw solution is returned (used for checking against a dense solver).
    """
    intensity = np.asarray(intensity, dtype=np.float64)
    na = np.asarray(neighbor_alphas, dtype=np.float64).ravel()
    nf = np.asarray(neighbor_fg, dtype=np.float64).reshape(len(na), -1)
    nb = np.asarray(neighbor_bg, dtype=np.float64).reshape(len(na), -1)
    if len(na) < 1:
        raise ValueError("need at least one neighbor")
    for arr in (intensity, na, nf, nb, alpha_i):
        if not np.all(np.isfinite(arr)):
            raise ValueError("solve_pixel inputs must be finite")
    u0 = alpha_i
    u1 = 1.0 - alpha_i
    weights = _neighbor_weight(alpha_i, na, params.omega, params.eps_r)
    s = weights.sum()
    a00 = u0 * u0 + s
    a01 = u0 * u1
    a11 = u1 * u1 + s
    r0 = u0 * intensity + weights @ nf
    r1 = u1 * intensity + weights @ nb
    det = a00 * a11 - a01 * a01
    if not (np.isfinite(det) and det > 0):
        raise np.linalg.LinAlgError(f"local system is singular (det={det})")
    fg, bg = _solve_2x2(a00, a01, a11, r0, r1)
    if clamp:
        fg = np.clip(fg, 0.0, 1.0)
        bg = np.clip(bg, 0.0, 1.0)
    return fg, bg


@numba.njit(cache=True)
def _sweep(image, alpha, beta, fg, bg, omega, eps_r):
    h, w, nc = image.shape
    dx = (-1, 1, 0, 0)
    dy = (0, 0, -1, 1)
    rf = np.empty(nc)
    rb = np.empty(nc)
    for y in range(h):
        for x in range(w):
            a_i = alpha[y, x]
            b_i = beta[y, x]
            a00 = a_i * a_i
            a01 = a_i * b_i
            a11 = b_i * b_i
            for c in range(nc):
                rf[c] = a_i * image[y, x, c]
                rb[c] = b_i * image[y, x, c]
            for k in range(4):
                xj = min(max(x + dx[k], 0), w - 1)
                yj = min(max(y + dy[k], 0), h - 1)
                # symmetric in (alpha, 1 - alpha) so swapping the matte swaps F and B exactly
                grad = 0.5 * (abs(a_i - alpha[yj, xj]) + abs(b_i - beta[yj, xj]))
                da = eps_r + omega * grad
                a00 += da
                a11 += da
                for c in range(nc):
                    rf[c] += da * fg[yj, xj, c]
                    rb[c] += da * bg[yj, xj, c]
            for c in range(nc):
                f, b = _solve_2x2_jit(a00, a01, a11, rf[c], rb[c])
                fg[y, x, c] = min(max(f, 0.0), 1.0)
                bg[y, x, c] = min(max(b, 0.0), 1.0)


def ml_foreground_background(image, alpha, params=MlParams(), schedule=None):
    """Estimate foreground and background colors from an image and its matte.

    Parameters
    ----------
    image : array of shape (h, w, 3)
        Observed composite, values in [0, 1].
    alpha : array of shape (h, w)
        Alpha matte, values in [0, 1].
    params : MlParams
        Regularization weights and sweep counts.
    schedule : LevelSchedule, optional
        Overrides the default pyramid from :func:`level_schedule`.

    Returns
    -------
    fg, bg : arrays of shape (h, w, 3)
        Estimated colors, clamped to [0, 1].
    """
    image = as_image(image)
    alpha = as_alpha(alpha)
    check_same_size(image=image, alpha=alpha)
    if image.shape[2] != 3:
        raise ValueError(f"image must have 3 channels, got {image.shape[2]}")
    image = np.clip(image, 0.0, 1.0)
    alpha = np.clip(alpha, 0.0, 1.0)
    beta = 1.0 - alpha
    h, w = alpha.shape
    if schedule is None:
        schedule = level_schedule(w, h, params)

    fg = np.zeros((1, 1, 3))
    bg = np.zeros((1, 1, 3))
    for level in schedule:
        lw, lh = level.width, level.height
        img_l = np.ascontiguousarray(resize(image, lw, lh))
        alpha_l = np.ascontiguousarray(resize(alpha, lw, lh))
        beta_l = np.ascontiguousarray(resize(beta, lw, lh))
        fg = np.ascontiguousarray(resize(fg, lw, lh))
        bg = np.ascontiguousarray(resize(bg, lw, lh))
        for _ in range(level.iterations):
            _sweep(img_l, alpha_l, beta_l, fg, bg, params.omega, params.eps_r)
    if fg.shape[:2] != (h, w):
        fg = resize(fg, w, h)
        bg = resize(bg, w, h)
    return fg, bg
