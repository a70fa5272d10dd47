"""Proximal pieces of the solver: weighted soft shrinkage and the logarithmic
tensor nuclear norm (LTNN) of ring cores.

The LTNN of a core G (R, S, R') is the mean over its S frequency slices, after
a DFT along mode 1, of sum_j log(sigma_j + eps). Its threshold operator acts
on each slice's singular values through :func:`log_threshold_scalar`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import dft_mode2, idft_mode2

IMAG_RESIDUAL_TOL = 1e-8


def soft_shrink_weighted(j: np.ndarray, tau: float, w: np.ndarray) -> np.ndarray:
    """Elementwise sign(j) * max(|j| - tau*w, 0); weights must be nonnegative."""
    j = np.asarray(j, dtype=float)
    w = np.asarray(w, dtype=float)
    if tau < 0:
        raise ValueError("shrinkage scale must be nonnegative")
    if np.any(w < 0):
        raise ValueError("shrinkage weights must be nonnegative")
    return np.sign(j) * np.maximum(np.abs(j) - tau * w, 0.0)


def update_weights(j: np.ndarray, varsigma: float) -> np.ndarray:
    """Reweighting map 1 / (|j| + varsigma); varsigma must be positive."""
    if varsigma <= 0:
        raise ValueError("varsigma must be positive")
    return 1.0 / (np.abs(np.asarray(j, dtype=float)) + varsigma)


@dataclass(frozen=True)
class LateralSVD:
    """Batched SVD of the frequency slices of a core: u (S, R, K), s (S, K), vh (S, K, R')."""

    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray


def lateral_tsvd(g: np.ndarray) -> LateralSVD:
    """SVD of every lateral slice of the mode-1 DFT of ``g``."""
    g = np.asarray(g)
    if g.ndim != 3:
        raise ValueError("lateral_tsvd expects a 3-way core")
    slices = dft_mode2(g).transpose(1, 0, 2)
    u, s, vh = np.linalg.svd(slices, full_matrices=False)
    return LateralSVD(u=u, s=s, vh=vh)


def ltnn_value(g: np.ndarray, eps: float) -> float:
    """Mean over frequency slices of sum_j log(sigma_j + eps)."""
    g = np.asarray(g)
    if g.ndim != 3:
        raise ValueError("ltnn_value expects a 3-way core")
    if eps <= 0:
        raise ValueError("log offset eps must be positive")
    slices = dft_mode2(g).transpose(1, 0, 2)
    s = np.linalg.svd(slices, compute_uv=False)
    return float(np.sum(np.log(s + eps)) / g.shape[1])


def log_threshold_scalar(s, t: float, eps: float):
    """Threshold for the scaled log penalty t*log(x + eps) at input s.

    With c1 = |s| - eps and c2 = c1^2 - 4*(t - eps*|s|), returns 0 when
    c2 <= 0 and sign(s)*(c1 + sqrt(c2))/2 otherwise, which is the larger
    stationary point of t*log(x+eps) + (x-s)^2/2. No objective comparison
    against x = 0 is made, so for small |s| with large eps the output can
    undershoot zero. t = 0 returns s exactly. Accepts scalars or arrays.
    """
    if t < 0:
        raise ValueError("threshold scale t must be nonnegative")
    if eps <= 0:
        raise ValueError("log offset eps must be positive")
    s_arr = np.asarray(s, dtype=float)
    a = np.abs(s_arr)
    c1 = a - eps
    c2 = c1 * c1 - 4.0 * (t - eps * a)
    out = np.where(c2 > 0,
                   np.sign(s_arr) * (c1 + np.sqrt(np.maximum(c2, 0.0))) / 2.0,
                   0.0)
    if np.isscalar(s) or np.ndim(s) == 0:
        return float(out)
    return out


def ltnn_prox(a: np.ndarray, t: float, eps: float) -> np.ndarray:
    """Slice-wise singular value thresholding in the mode-1 spectral domain.

    Rebuilds each frequency slice as U * diag(thresholded sigma) * Vh and
    inverts the DFT; a real input keeps conjugate slice symmetry, so the
    imaginary residual must stay tiny (scaled tolerance, else raises).
    """
    a = np.asarray(a, dtype=float)
    lsvd = lateral_tsvd(a)
    s_new = log_threshold_scalar(lsvd.s, t, eps)
    rebuilt = lsvd.u @ (s_new[..., None] * lsvd.vh)
    out, resid = idft_mode2(rebuilt.transpose(1, 0, 2))
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
    if resid > IMAG_RESIDUAL_TOL * scale:
        raise ValueError(f"imaginary residual {resid:.3e} after inverse DFT; "
                         "spectral slices lost conjugate symmetry")
    return out
