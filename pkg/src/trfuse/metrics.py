"""Full-reference quality indices for image cubes on the 0..255 convention.

All functions take two equally shaped 3-way arrays (width, height, bands).
Callers are expected to rescale both cubes with :func:`rescale_pair` first so
the reference spans [0, 255]; the indices themselves are plain arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PEAK = 255.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
UIQI_WINDOW = 32
_DENOM_FLOOR = 1e-12


def _check_pair(ref: np.ndarray, est: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ref = np.asarray(ref, dtype=float)
    est = np.asarray(est, dtype=float)
    if ref.ndim != 3 or est.ndim != 3:
        raise ValueError("metrics expect 3-way tensors")
    if ref.shape != est.shape:
        raise ValueError(f"shape mismatch {ref.shape} vs {est.shape}")
    return ref, est


def rescale_pair(ref: np.ndarray, est: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Affinely map the reference range onto [0, 255]; apply the same map to est."""
    ref, est = _check_pair(ref, est)
    lo, hi = float(ref.min()), float(ref.max())
    if hi == lo:
        raise ValueError("reference tensor is constant; rescale undefined")
    scale = PEAK / (hi - lo)
    return (ref - lo) * scale, (est - lo) * scale


def psnr_per_band(ref: np.ndarray, est: np.ndarray) -> np.ndarray:
    ref, est = _check_pair(ref, est)
    mse = np.mean((ref - est) ** 2, axis=(0, 1))
    out = np.full(ref.shape[2], np.inf)
    nz = mse > 0
    out[nz] = 10.0 * np.log10(PEAK * PEAK / mse[nz])
    return out


def psnr(ref: np.ndarray, est: np.ndarray) -> float:
    """Band-averaged peak signal-to-noise ratio; +inf for identical inputs."""
    return float(np.mean(psnr_per_band(ref, est)))


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    w = np.outer(g, g)
    return w / w.sum()


def _windowed_mean(x: np.ndarray, win: np.ndarray) -> np.ndarray:
    view = np.lib.stride_tricks.sliding_window_view(x, win.shape)
    return np.einsum("ijkl,kl->ij", view, win)


def _ssim_from_stats(mu1, mu2, var1, var2, cov):
    c1 = (0.01 * PEAK) ** 2
    c2 = (0.03 * PEAK) ** 2
    num = (2.0 * mu1 * mu2 + c1) * (2.0 * cov + c2)
    den = (mu1 * mu1 + mu2 * mu2 + c1) * (var1 + var2 + c2)
    return num / den


def ssim(ref: np.ndarray, est: np.ndarray) -> float:
    """Band-averaged structural similarity, 11x11 Gaussian window (sigma 1.5).

    Bands narrower than the window fall back to global statistics.
    """
    ref, est = _check_pair(ref, est)
    vals = []
    windowed = min(ref.shape[0], ref.shape[1]) >= SSIM_WINDOW
    win = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    for band in range(ref.shape[2]):
        x, y = ref[:, :, band], est[:, :, band]
        if windowed:
            mu1 = _windowed_mean(x, win)
            mu2 = _windowed_mean(y, win)
            var1 = _windowed_mean(x * x, win) - mu1 * mu1
            var2 = _windowed_mean(y * y, win) - mu2 * mu2
            cov = _windowed_mean(x * y, win) - mu1 * mu2
            vals.append(float(np.mean(_ssim_from_stats(mu1, mu2, var1, var2, cov))))
        else:
            mu1, mu2 = x.mean(), y.mean()
            var1, var2 = x.var(), y.var()
            cov = float(np.mean((x - mu1) * (y - mu2)))
            vals.append(float(_ssim_from_stats(mu1, mu2, var1, var2, cov)))
    return float(np.mean(vals))


def ergas(ref: np.ndarray, est: np.ndarray, factor: float) -> float:
    """Relative global dimensionless synthesis error at resolution ratio ``factor``."""
    ref, est = _check_pair(ref, est)
    if factor <= 0:
        raise ValueError("resolution factor must be positive")
    rmse = np.sqrt(np.mean((ref - est) ** 2, axis=(0, 1)))
    means = np.mean(ref, axis=(0, 1))
    if np.any(means == 0):
        raise ValueError("ergas undefined: a reference band has zero mean")
    return float(100.0 / factor * np.sqrt(np.mean((rmse / means) ** 2)))


def _spectral_angles(ref: np.ndarray, est: np.ndarray) -> tuple[np.ndarray, int]:
    ref, est = _check_pair(ref, est)
    a = ref.reshape(-1, ref.shape[2])
    b = est.reshape(-1, est.shape[2])
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    keep = (na > 0) & (nb > 0)
    skipped = int(np.size(na) - np.count_nonzero(keep))
    if not np.any(keep):
        raise ValueError("sam undefined: every spectral vector is zero")
    cosang = np.sum(a[keep] * b[keep], axis=1) / (na[keep] * nb[keep])
    angles = np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))
    # arccos near 1 cannot resolve the zero angle of bit-equal spectra
    angles[np.all(a[keep] == b[keep], axis=1)] = 0.0
    return angles, skipped


def sam(ref: np.ndarray, est: np.ndarray) -> float:
    """Mean spectral angle in degrees; zero-spectrum pixels are skipped."""
    angles, _ = _spectral_angles(ref, est)
    return float(np.mean(angles))


def _box_sums(x: np.ndarray, w: int) -> np.ndarray:
    c = np.zeros((x.shape[0] + 1, x.shape[1] + 1))
    c[1:, 1:] = x.cumsum(axis=0).cumsum(axis=1)
    return c[w:, w:] - c[:-w, w:] - c[w:, :-w] + c[:-w, :-w]


def _uiqi_from_stats(mu1, mu2, var1, var2, cov):
    num = 4.0 * cov * mu1 * mu2
    den = (var1 + var2) * (mu1 * mu1 + mu2 * mu2)
    return num, den


def uiqi_per_band(ref: np.ndarray, est: np.ndarray,
                  window: int = UIQI_WINDOW) -> np.ndarray:
    """Universal image quality index per band over sliding windows (stride 1).

    Vanishing-denominator windows are skipped; bands narrower than the window
    use one global window. A band with no usable window yields nan.
    """
    ref, est = _check_pair(ref, est)
    if window < 1:
        raise ValueError("window must be positive")
    w = window
    windowed = min(ref.shape[0], ref.shape[1]) >= w
    out = np.empty(ref.shape[2])
    for band in range(ref.shape[2]):
        x, y = ref[:, :, band], est[:, :, band]
        if windowed:
            area = float(w * w)
            mu1 = _box_sums(x, w) / area
            mu2 = _box_sums(y, w) / area
            var1 = _box_sums(x * x, w) / area - mu1 * mu1
            var2 = _box_sums(y * y, w) / area - mu2 * mu2
            cov = _box_sums(x * y, w) / area - mu1 * mu2
        else:
            mu1, mu2 = np.array([[x.mean()]]), np.array([[y.mean()]])
            var1, var2 = np.array([[x.var()]]), np.array([[y.var()]])
            cov = np.array([[float(np.mean((x - x.mean()) * (y - y.mean())))]])
        num, den = _uiqi_from_stats(mu1, mu2, var1, var2, cov)
        valid = np.abs(den) > _DENOM_FLOOR
        out[band] = float(np.mean(num[valid] / den[valid])) if np.any(valid) else np.nan
    return out


def uiqi(ref: np.ndarray, est: np.ndarray, window: int = UIQI_WINDOW) -> float:
    per_band = uiqi_per_band(ref, est, window)
    if np.all(np.isnan(per_band)):
        raise ValueError("uiqi undefined: no band has a usable window")
    return float(np.nanmean(per_band))


@dataclass(frozen=True)
class MetricsReport:
    psnr: float
    ssim: float
    ergas: float
    sam: float
    uiqi: float
    sam_skipped: int
    psnr_per_band: tuple[float, ...]
    uiqi_per_band: tuple[float, ...]

    def scalars(self) -> dict:
        return {"psnr": self.psnr, "ssim": self.ssim, "ergas": self.ergas,
                "sam": self.sam, "uiqi": self.uiqi,
                "sam_skipped": self.sam_skipped}


def metrics_report(ref: np.ndarray, est: np.ndarray, factor: float) -> MetricsReport:
    """All five indices plus per-band psnr/uiqi curves, on already scaled cubes."""
    ref, est = _check_pair(ref, est)
    angles, skipped = _spectral_angles(ref, est)
    return MetricsReport(
        psnr=psnr(ref, est),
        ssim=ssim(ref, est),
        ergas=ergas(ref, est, factor),
        sam=float(np.mean(angles)),
        uiqi=uiqi(ref, est),
        sam_skipped=skipped,
        psnr_per_band=tuple(float(v) for v in psnr_per_band(ref, est)),
        uiqi_per_band=tuple(float(v) for v in uiqi_per_band(ref, est)),
    )
