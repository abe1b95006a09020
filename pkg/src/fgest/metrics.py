"""Alpha-weighted foreground error measures over the translucent region."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .imagecore import as_alpha, as_image, check_same_size


@dataclass(frozen=True)
class GradParams:
    sigma: float = 1.4
    kernel_radius: Optional[int] = None  # None means ceil(4 * sigma)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if self.kernel_radius is not None and self.kernel_radius < 1:
            raise ValueError("kernel_radius must be >= 1")

    @property
    def radius(self):
        if self.kernel_radius is not None:
            return self.kernel_radius
        return max(1, math.ceil(4 * self.sigma))


@dataclass(frozen=True)
class MetricReport:
    sad: float
    mse: float
    grad: float
    translucent_pixel_count: int

    CSV_FIELDS = ("sad", "mse", "grad", "translucent_pixel_count")

    def csv_header(self):
        return ",".join(self.CSV_FIELDS)

    def csv_row(self):
        return f"{self.sad!r},{self.mse!r},{self.grad!r},{self.translucent_pixel_count}"

    @classmethod
    def from_csv_row(cls, row):
        sad, mse, grad, count = row.strip().split(",")
        return cls(float(sad), float(mse), float(grad), int(count))

    def __str__(self):
        return (f"SAD  {self.sad:.6g}\nMSE  {self.mse:.6g}\nGRAD {self.grad:.6g}\n"
                f"translucent pixels {self.translucent_pixel_count}")


def _prepare(est, gt, alpha_gt):
    est = as_image(est, "est")
    gt = as_image(gt, "gt")
    alpha_gt = as_alpha(alpha_gt, "alpha_gt")
    check_same_size(est=est, gt=gt, alpha_gt=alpha_gt)
    if est.shape[2] != gt.shape[2]:
        raise ValueError(f"channel mismatch: est has {est.shape[2]}, gt has {gt.shape[2]}")
    return est, gt, alpha_gt


def translucent_weights(alpha):
    """Alpha where ``0 < alpha < 1`` and zero elsewhere."""
    return np.where((alpha > 0) & (alpha < 1), alpha, 0.0)


def sad(est, gt, alpha_gt):
    """Sum of absolute differences weighted by alpha over translucent pixels."""
    est, gt, alpha_gt = _prepare(est, gt, alpha_gt)
    per_pixel = np.abs(est - gt).sum(axis=2)
    return float(np.sum(translucent_weights(alpha_gt) * per_pixel))


def mse(est, gt, alpha_gt):
    """Alpha-weighted sum of squared color differences over translucent pixels.

    Note this is a weighted *sum*, not divided by the pixel count.
    """
    est, gt, alpha_gt = _prepare(est, gt, alpha_gt)
    per_pixel = ((est - gt) ** 2).sum(axis=2)
    return float(np.sum(translucent_weights(alpha_gt) * per_pixel))


def gaussian_derivative_kernel(sigma=1.4, radius=None):
    """Sampled first derivative of a Gaussian, as a correlation kernel.

    Scaled so a unit-slope ramp gives a response of exactly 1 (the kernel is
    antisymmetric, so it also sums to 0).
    """
    if radius is None:
        radius = max(1, math.ceil(4 * sigma))
    m = np.arange(-radius, radius + 1, dtype=np.float64)
    k = m * np.exp(-0.5 * (m / sigma) ** 2)
    return k / np.sum(m * k)


def gaussian_kernel(sigma=1.4, radius=None):
    if radius is None:
        radius = max(1, math.ceil(4 * sigma))
    m = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (m / sigma) ** 2)
    return k / k.sum()


def gradients(img, params=GradParams()):
    """x and y Gaussian-derivative responses of every channel (edge clamped)."""
    img = as_image(img)
    deriv = gaussian_derivative_kernel(params.sigma, params.radius)
    smooth = gaussian_kernel(params.sigma, params.radius)
    gx = ndimage.correlate1d(img, deriv, axis=1, mode="nearest")
    gx = ndimage.correlate1d(gx, smooth, axis=0, mode="nearest")
    gy = ndimage.correlate1d(img, deriv, axis=0, mode="nearest")
    gy = ndimage.correlate1d(gy, smooth, axis=1, mode="nearest")
    return gx, gy


def grad_error(est, gt, alpha_gt, params=GradParams()):
    est, gt, alpha_gt = _prepare(est, gt, alpha_gt)
    ex, ey = gradients(est, params)
    gx, gy = gradients(gt, params)
    per_pixel = ((ex - gx) ** 2 + (ey - gy) ** 2).sum(axis=2)
    return float(np.sum(translucent_weights(alpha_gt) * per_pixel))


def evaluate(est, gt, alpha_gt, params=GradParams()):
    """All three measures at once."""
    alpha = as_alpha(alpha_gt, "alpha_gt")
    count = int(np.count_nonzero((alpha > 0) & (alpha < 1)))
    return MetricReport(
        sad=sad(est, gt, alpha),
        mse=mse(est, gt, alpha),
        grad=grad_error(est, gt, alpha, params),
        translucent_pixel_count=count,
    )
