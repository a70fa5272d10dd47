"""Quality indices checked against naive from-the-definition references.

The reference implementations below loop over bands and window positions and
compute every statistic directly, sharing no code with the module under test.
"""

import numpy as np
import pytest

from trfuse.metrics import (MetricsReport, ergas, metrics_report, psnr,
                            psnr_per_band, rescale_pair, sam, ssim, uiqi,
                            uiqi_per_band)

PEAK = 255.0


def _pair(shape, seed, spread=60.0):
    rng = np.random.default_rng(seed)
    ref = rng.uniform(10.0, 250.0, size=shape)
    est = ref + rng.normal(0.0, spread / 10.0, size=shape)
    return ref, est


def _naive_psnr(ref, est):
    vals = []
    for b in range(ref.shape[2]):
        acc = 0.0
        for i in range(ref.shape[0]):
            for j in range(ref.shape[1]):
                d = ref[i, j, b] - est[i, j, b]
                acc += d * d
        mse = acc / (ref.shape[0] * ref.shape[1])
        vals.append(np.inf if mse == 0 else 10.0 * np.log10(PEAK * PEAK / mse))
    return float(np.mean(vals))


def _naive_ergas(ref, est, factor):
    acc = 0.0
    for b in range(ref.shape[2]):
        diff = ref[:, :, b] - est[:, :, b]
        rmse = np.sqrt(np.mean(diff * diff))
        acc += (rmse / np.mean(ref[:, :, b])) ** 2
    return float(100.0 / factor * np.sqrt(acc / ref.shape[2]))


def _naive_ssim(ref, est):
    x1 = np.arange(11) - 5.0
    g = np.exp(-(x1 * x1) / (2.0 * 1.5 * 1.5))
    win = np.outer(g, g)
    win /= win.sum()
    c1 = (0.01 * PEAK) ** 2
    c2 = (0.03 * PEAK) ** 2
    vals = []
    for b in range(ref.shape[2]):
        x, y = ref[:, :, b], est[:, :, b]
        scores = []
        for i in range(x.shape[0] - 10):
            for j in range(x.shape[1] - 10):
                px = x[i:i + 11, j:j + 11]
                py = y[i:i + 11, j:j + 11]
                mu1 = float((win * px).sum())
                mu2 = float((win * py).sum())
                v1 = float((win * px * px).sum()) - mu1 * mu1
                v2 = float((win * py * py).sum()) - mu2 * mu2
                cov = float((win * px * py).sum()) - mu1 * mu2
                num = (2 * mu1 * mu2 + c1) * (2 * cov + c2)
                den = (mu1 * mu1 + mu2 * mu2 + c1) * (v1 + v2 + c2)
                scores.append(num / den)
        vals.append(float(np.mean(scores)))
    return float(np.mean(vals))


def _naive_uiqi(ref, est, w):
    vals = []
    for b in range(ref.shape[2]):
        x, y = ref[:, :, b], est[:, :, b]
        scores = []
        for i in range(x.shape[0] - w + 1):
            for j in range(x.shape[1] - w + 1):
                px = x[i:i + w, j:j + w]
                py = y[i:i + w, j:j + w]
                mu1, mu2 = float(px.mean()), float(py.mean())
                v1 = float((px * px).mean()) - mu1 * mu1
                v2 = float((py * py).mean()) - mu2 * mu2
                cov = float((px * py).mean()) - mu1 * mu2
                num = 4.0 * cov * mu1 * mu2
                den = (v1 + v2) * (mu1 * mu1 + mu2 * mu2)
                if abs(den) > 1e-12:
                    scores.append(num / den)
        vals.append(float(np.mean(scores)) if scores else np.nan)
    return float(np.nanmean(vals))


def test_psnr_matches_naive_reference():
    for shape, seed in (((16, 18, 3), 0), ((25, 21, 4), 1), ((40, 33, 2), 2)):
        ref, est = _pair(shape, seed)
        assert abs(psnr(ref, est) - _naive_psnr(ref, est)) < 1e-8


def test_psnr_identical_is_infinite_and_bands_mix():
    ref, est = _pair((16, 16, 3), 3)
    est[:, :, 1] = ref[:, :, 1]  # one perfect band
    per = psnr_per_band(ref, est)
    assert per[1] == np.inf and np.isfinite(per[0]) and np.isfinite(per[2])
    assert psnr(ref, ref) == np.inf


def test_ergas_matches_naive_reference():
    for shape, seed, factor in (((16, 16, 3), 4, 4.0), ((30, 26, 5), 5, 2.0)):
        ref, est = _pair(shape, seed)
        got = ergas(ref, est, factor)
        assert abs(got - _naive_ergas(ref, est, factor)) < 1e-8
    ref, est = _pair((8, 8, 2), 6)
    with pytest.raises(ValueError):
        ergas(ref, est, 0.0)
    ref[:, :, 0] = 0.0
    with pytest.raises(ValueError):
        ergas(ref, est, 4.0)


def test_ssim_matches_naive_reference():
    for shape, seed in (((16, 17, 2), 7), ((24, 20, 3), 8)):
        ref, est = _pair(shape, seed)
        assert abs(ssim(ref, est) - _naive_ssim(ref, est)) < 1e-8
    ref, est = _pair((20, 20, 2), 9)
    assert abs(ssim(ref, ref) - 1.0) < 1e-12


def test_ssim_small_image_uses_global_stats():
    ref, est = _pair((8, 8, 2), 10)
    c1 = (0.01 * PEAK) ** 2
    c2 = (0.03 * PEAK) ** 2
    vals = []
    for b in range(2):
        x, y = ref[:, :, b], est[:, :, b]
        mu1, mu2 = x.mean(), y.mean()
        cov = float(np.mean((x - mu1) * (y - mu2)))
        num = (2 * mu1 * mu2 + c1) * (2 * cov + c2)
        den = (mu1 ** 2 + mu2 ** 2 + c1) * (x.var() + y.var() + c2)
        vals.append(num / den)
    assert abs(ssim(ref, est) - float(np.mean(vals))) < 1e-10


def test_uiqi_matches_naive_reference_windowed():
    ref, est = _pair((36, 34, 3), 11)
    assert abs(uiqi(ref, est) - _naive_uiqi(ref, est, 32)) < 1e-8
    # custom smaller window on a smaller image
    ref, est = _pair((16, 18, 2), 12)
    assert abs(uiqi(ref, est, window=8) - _naive_uiqi(ref, est, 8)) < 1e-8


def test_uiqi_small_image_global_window_and_nan_band():
    ref, est = _pair((10, 10, 2), 13)
    # constant band: denominator vanishes everywhere, band skipped as nan
    ref[:, :, 1] = 42.0
    est[:, :, 1] = 42.0
    per = uiqi_per_band(ref, est)
    assert np.isnan(per[1]) and np.isfinite(per[0])
    assert abs(uiqi(ref, est) - per[0]) < 1e-12
    flat_ref = np.full((10, 10, 1), 7.0)
    with pytest.raises(ValueError):
        uiqi(flat_ref, flat_ref.copy())
    with pytest.raises(ValueError):
        uiqi_per_band(ref, est, window=0)


def test_uiqi_perfect_match_on_varied_image():
    ref, _ = _pair((33, 33, 2), 14)
    assert abs(uiqi(ref, ref.copy()) - 1.0) < 1e-10


def test_sam_reference_angles_exact():
    # spectra with perfect-square norms keep the cosine arithmetic exact;
    # expected angles 0 (colinear), 90 (orthogonal), 0 (identical) -> mean 30
    ref = np.zeros((3, 1, 2))
    est = np.zeros((3, 1, 2))
    ref[0, 0] = [3.0, 4.0]
    est[0, 0] = [6.0, 8.0]
    ref[1, 0] = [3.0, 0.0]
    est[1, 0] = [0.0, 4.0]
    ref[2, 0] = [3.0, 4.0]
    est[2, 0] = [3.0, 4.0]
    assert sam(ref, est) == 30.0
    rng = np.random.default_rng(15)
    cube = rng.uniform(1.0, 2.0, size=(9, 9, 4))
    assert sam(cube, cube.copy()) == 0.0
    # generic positive scaling is colinear only up to rounding in the norms
    assert abs(sam(cube, 3.0 * cube)) < 1e-5


def test_sam_forty_five_degrees():
    ref = np.zeros((1, 1, 2))
    est = np.zeros((1, 1, 2))
    ref[0, 0] = [1.0, 0.0]
    est[0, 0] = [1.0, 1.0]
    assert abs(sam(ref, est) - 45.0) < 1e-10


def test_sam_skips_zero_spectra():
    ref = np.ones((2, 2, 3))
    est = np.ones((2, 2, 3))
    ref[0, 0] = 0.0          # zero reference spectrum
    est[1, 1] = 0.0          # zero estimate spectrum
    report = metrics_report(ref, est, factor=2.0)
    assert report.sam_skipped == 2
    assert report.sam == 0.0
    with pytest.raises(ValueError):
        sam(np.zeros((2, 2, 2)), np.zeros((2, 2, 2)))


def test_rescale_pair_affine_map():
    rng = np.random.default_rng(16)
    ref = rng.uniform(-3.0, 5.0, size=(12, 11, 3))
    est = rng.uniform(-4.0, 6.0, size=(12, 11, 3))
    ref2, est2 = rescale_pair(ref, est)
    assert abs(ref2.min() - 0.0) < 1e-12
    assert abs(ref2.max() - PEAK) < 1e-12
    scale = PEAK / (ref.max() - ref.min())
    np.testing.assert_allclose(est2, (est - ref.min()) * scale, atol=1e-10)
    with pytest.raises(ValueError):
        rescale_pair(np.ones((2, 2, 2)), np.zeros((2, 2, 2)))


def test_shape_validation():
    with pytest.raises(ValueError):
        psnr(np.zeros((2, 2)), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        ssim(np.zeros((2, 2, 2)), np.zeros((2, 2, 3)))


def test_metrics_report_wires_everything_together():
    ref, est = _pair((36, 33, 3), 17)
    report = metrics_report(ref, est, factor=4.0)
    assert isinstance(report, MetricsReport)
    assert abs(report.psnr - psnr(ref, est)) < 1e-12
    assert abs(report.ssim - ssim(ref, est)) < 1e-12
    assert abs(report.ergas - ergas(ref, est, 4.0)) < 1e-12
    assert abs(report.sam - sam(ref, est)) < 1e-12
    assert abs(report.uiqi - uiqi(ref, est)) < 1e-12
    assert report.sam_skipped == 0
    assert len(report.psnr_per_band) == 3
    assert len(report.uiqi_per_band) == 3
    scalars = report.scalars()
    assert set(scalars) == {"psnr", "ssim", "ergas", "sam", "uiqi",
                            "sam_skipped"}
