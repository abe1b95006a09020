import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fgest.metrics import (
    GradParams,
    MetricReport,
    evaluate,
    gaussian_derivative_kernel,
    grad_error,
    gradients,
    mse,
    sad,
)

unit = st.floats(0.0, 1.0, allow_nan=False)
METRICS = [sad, mse, grad_error]


def single_pixel_case():
    gt = np.full((3, 3, 3), 0.5)
    est = gt.copy()
    est[1, 1] += [0.1, -0.2, 0.3]
    alpha = np.ones((3, 3))
    alpha[1, 1] = 0.5
    return est, gt, alpha


@pytest.mark.parametrize("metric", METRICS)
def test_zero_on_identical(metric, rng):
    img = rng.random((8, 9, 3))
    assert metric(img, img, rng.random((8, 9))) == 0.0


@pytest.mark.parametrize("metric", METRICS)
def test_zero_for_binary_alpha(metric, rng):
    alpha = (rng.random((6, 6)) > 0.5).astype(float)
    assert metric(rng.random((6, 6, 3)), rng.random((6, 6, 3)), alpha) == 0.0


def test_sad_single_pixel():
    est, gt, alpha = single_pixel_case()
    assert sad(est, gt, alpha) == pytest.approx(0.3, abs=1e-15)


def test_mse_single_pixel():
    est, gt, alpha = single_pixel_case()
    assert mse(est, gt, alpha) == pytest.approx(0.07, abs=1e-15)


def test_mse_homogeneous_degree_two(rng):
    gt = np.full((5, 5, 3), 0.5)
    diff = 0.2 * (rng.random((5, 5, 3)) - 0.5)
    alpha = rng.random((5, 5))
    assert mse(gt + 2 * diff, gt, alpha) == pytest.approx(4 * mse(gt + diff, gt, alpha), rel=1e-12)


def test_grad_constant_images():
    alpha = np.full((10, 10), 0.5)
    assert grad_error(np.full((10, 10, 3), 0.2), np.full((10, 10, 3), 0.9), alpha) == pytest.approx(0, abs=1e-25)


class TestKernel:
    def test_sums_to_zero(self):
        for sigma in (0.5, 1.4, 3.0):
            assert abs(gaussian_derivative_kernel(sigma).sum()) <= 1e-12

    def test_unit_ramp_response(self):
        k = gaussian_derivative_kernel(1.4)
        r = (len(k) - 1) // 2
        assert r == 6
        m = np.arange(-r, r + 1)
        assert abs(np.sum(k * m) - 1) <= 1e-6

    def test_ramp_gradient_interior(self):
        s = 0.01
        h, w = 20, 40
        est = np.broadcast_to((np.arange(w) * s)[None, :, None], (h, w, 3)).copy()
        gx, gy = gradients(est)
        np.testing.assert_allclose(gx[7:13, 10:30], s, rtol=1e-12)
        np.testing.assert_allclose(gy[7:13, 10:30], 0, atol=1e-15)

        gt = np.full((h, w, 3), 0.3)
        alpha = np.zeros((h, w))
        alpha[10, 20] = 0.4
        assert grad_error(est, gt, alpha) == pytest.approx(0.4 * s ** 2 * 3, rel=1e-10)


@pytest.mark.parametrize("metric", [sad, mse])
def test_invariant_to_opaque_edits(metric, rng):
    alpha = rng.random((7, 7))
    alpha[:3] = 1.0
    alpha[5:] = 0.0
    est, gt = rng.random((7, 7, 3)), rng.random((7, 7, 3))
    base = metric(est, gt, alpha)
    edited = est.copy()
    edited[:3] = rng.random((3, 7, 3))
    edited[5:] = rng.random((2, 7, 3))
    assert metric(edited, gt, alpha) == base


@given(arrays(np.float64, (6, 5, 3), elements=unit),
       arrays(np.float64, (6, 5, 3), elements=unit),
       arrays(np.float64, (6, 5), elements=unit))
def test_symmetric_and_nonnegative(a, b, alpha):
    for metric in METRICS:
        v = metric(a, b, alpha)
        assert v >= 0
        assert v == pytest.approx(metric(b, a, alpha), rel=1e-12, abs=1e-300)


def test_dimension_mismatch():
    for metric in METRICS:
        with pytest.raises(ValueError):
            metric(np.zeros((3, 3, 3)), np.zeros((3, 4, 3)), np.zeros((3, 3)))


def test_report_csv_roundtrip(rng):
    est, gt, alpha = rng.random((9, 9, 3)), rng.random((9, 9, 3)), rng.random((9, 9))
    report = evaluate(est, gt, alpha)
    assert report == MetricReport.from_csv_row(report.csv_row())
    assert report.sad == sad(est, gt, alpha)
    assert report.grad == grad_error(est, gt, alpha, GradParams())
    assert report.translucent_pixel_count == np.count_nonzero((alpha > 0) & (alpha < 1))
