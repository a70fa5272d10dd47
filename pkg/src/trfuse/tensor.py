"""Dense tensor algebra: matricizations, mode products, cyclic shifts, mode-2 DFT.

Tensors are plain numpy arrays (float64, or complex128 in the spectral domain)
with 0-based mode indices. Two matricization conventions appear throughout:

* ``unfold_first``: rows are the unfolded mode; columns run over the remaining
  modes in natural order, earliest mode varying fastest.
* ``unfold_cyclic``: rows are the unfolded mode; columns run over the remaining
  modes in cyclic order starting right after the unfolded mode, with that next
  mode varying fastest.

Both are inverted by :func:`fold` given the original extents.
"""

from __future__ import annotations

import numpy as np


def _check_mode(ndim: int, mode: int) -> None:
    if not 0 <= mode < ndim:
        raise ValueError(f"mode {mode} out of range for a {ndim}-way tensor")


def _column_modes(ndim: int, mode: int, convention: str) -> list[int]:
    if convention == "first":
        return [ax for ax in range(ndim) if ax != mode]
    if convention == "cyclic":
        return [(mode + k) % ndim for k in range(1, ndim)]
    raise ValueError(f"unknown unfolding convention {convention!r}")


def unfold(t: np.ndarray, mode: int, convention: str = "first") -> np.ndarray:
    """Matricize ``t`` along ``mode`` under the given column convention.

    The first listed column mode varies fastest, so the result equals a
    Fortran-order reshape of the suitably permuted tensor.
    """
    t = np.asarray(t)
    _check_mode(t.ndim, mode)
    perm = [mode] + _column_modes(t.ndim, mode, convention)
    return np.transpose(t, perm).reshape(t.shape[mode], -1, order="F")


def unfold_first(t: np.ndarray, mode: int) -> np.ndarray:
    return unfold(t, mode, "first")


def unfold_cyclic(t: np.ndarray, mode: int) -> np.ndarray:
    return unfold(t, mode, "cyclic")


def fold(m: np.ndarray, mode: int, dims: tuple[int, ...],
         convention: str = "first") -> np.ndarray:
    """Invert :func:`unfold`: rebuild the tensor with extents ``dims``."""
    m = np.asarray(m)
    dims = tuple(int(d) for d in dims)
    _check_mode(len(dims), mode)
    perm = [mode] + _column_modes(len(dims), mode, convention)
    expected = (dims[mode], int(np.prod([dims[p] for p in perm[1:]], dtype=np.int64)))
    if m.shape != expected:
        raise ValueError(f"matrix shape {m.shape} does not match extents {dims} "
                         f"for mode {mode} (expected {expected})")
    t_perm = m.reshape([dims[p] for p in perm], order="F")
    return np.ascontiguousarray(np.transpose(t_perm, np.argsort(perm)))


def mode_n_product(t: np.ndarray, m: np.ndarray, mode: int) -> np.ndarray:
    """Contract matrix ``m`` (J x I_mode) with ``t`` along ``mode``."""
    t = np.asarray(t)
    m = np.asarray(m)
    _check_mode(t.ndim, mode)
    if m.ndim != 2 or m.shape[1] != t.shape[mode]:
        raise ValueError(f"matrix {m.shape} incompatible with mode {mode} "
                         f"extent {t.shape[mode]}")
    out = np.tensordot(m, t, axes=(1, mode))
    return np.ascontiguousarray(np.moveaxis(out, 0, mode))


def cyclic_shift(t: np.ndarray, steps: int) -> np.ndarray:
    """Rotate the mode order by ``steps``: mode ``steps`` becomes mode 0.

    A shift by ``t.ndim`` (full rotation) is the identity.
    """
    t = np.asarray(t)
    if steps < 0:
        raise ValueError("shift steps must be nonnegative")
    s = steps % t.ndim
    if s == 0:
        return t.copy()
    perm = list(range(s, t.ndim)) + list(range(s))
    return np.ascontiguousarray(np.transpose(t, perm))


def dft_mode2(t: np.ndarray) -> np.ndarray:
    """Unnormalized DFT along mode 1 of a 3-way tensor."""
    t = np.asarray(t)
    if t.ndim != 3:
        raise ValueError("dft_mode2 expects a 3-way tensor")
    return np.fft.fft(t, axis=1)


def idft_mode2(ct: np.ndarray) -> tuple[np.ndarray, float]:
    """Inverse of :func:`dft_mode2`.

    Returns the real part plus the maximum absolute imaginary residual, which
    callers use to detect loss of conjugate symmetry upstream.
    """
    ct = np.asarray(ct)
    if ct.ndim != 3:
        raise ValueError("idft_mode2 expects a 3-way tensor")
    x = np.fft.ifft(ct, axis=1)
    resid = float(np.max(np.abs(x.imag))) if x.size else 0.0
    return np.ascontiguousarray(x.real), resid


def frobenius_norm(t: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(t).ravel()))


def l1_norm(t: np.ndarray) -> float:
    return float(np.sum(np.abs(t)))


def rel_change(a: np.ndarray, b: np.ndarray) -> float:
    """||a - b||_F / ||a||_F, raising when the reference ``a`` is zero."""
    denom = frobenius_norm(a)
    if denom == 0.0:
        raise ValueError("relative change undefined for a zero reference tensor")
    return frobenius_norm(np.asarray(a) - np.asarray(b)) / denom
