"""Tensor-ring factor algebra: composition, subchains, and initializations.

A 3-way tensor X of extents (I1, I2, I3) is represented by three cores
G1 (R1, I1, R2), G2 (R2, I2, R3), G3 (R3, I3, R1); the entry at (i1, i2, i3)
is the trace of the product of the three lateral slices. Ranks close
cyclically, so the last rank of core 3 must equal the first rank of core 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .tensor import fold, unfold_cyclic, unfold_first


@dataclass(frozen=True)
class TRFactors:
    """An ordered triple of ring cores with cyclically consistent ranks."""

    cores: tuple[np.ndarray, np.ndarray, np.ndarray]

    def __post_init__(self):
        cores = tuple(np.asarray(c, dtype=float) for c in self.cores)
        object.__setattr__(self, "cores", cores)
        if len(cores) != 3:
            raise ValueError("expected exactly three ring cores")
        for n, c in enumerate(cores):
            if c.ndim != 3:
                raise ValueError(f"core {n} must be 3-way, got {c.ndim}-way")
        for n in range(3):
            left = cores[n].shape[2]
            right = cores[(n + 1) % 3].shape[0]
            if left != right:
                raise ValueError(f"rank mismatch between core {n} (last rank {left}) "
                                 f"and core {(n + 1) % 3} (first rank {right})")

    @property
    def ranks(self) -> tuple[int, int, int]:
        return tuple(c.shape[0] for c in self.cores)

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(c.shape[1] for c in self.cores)

    def replace_core(self, n: int, core: np.ndarray) -> "TRFactors":
        cores = list(self.cores)
        cores[n] = core
        return TRFactors(tuple(cores))


def merge_cores(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Contract two adjacent cores into one.

    Lateral slice s of the result, with s = j * Ia + i, is the matrix product
    of slice i of ``a`` and slice j of ``b`` (first core's index fastest).
    """
    ra, ia, mid = a.shape
    mid2, ib, rb = b.shape
    if mid != mid2:
        raise ValueError(f"cores not adjacent: {a.shape} vs {b.shape}")
    out = np.einsum("ria,ajq->rjiq", a, b)
    return np.ascontiguousarray(out.reshape(ra, ia * ib, rb))


def subchain(f: TRFactors, skip: int) -> np.ndarray:
    """Merge the two cores other than ``skip`` in cyclic order.

    The result has shape (R_{skip+1}, product of the other extents, R_skip).
    """
    if not 0 <= skip < 3:
        raise ValueError(f"skip index {skip} out of range")
    a = f.cores[(skip + 1) % 3]
    b = f.cores[(skip + 2) % 3]
    return merge_cores(a, b)


def evaluate_entry(f: TRFactors, idx: tuple[int, int, int]) -> float:
    g1, g2, g3 = f.cores
    i1, i2, i3 = idx
    return float(np.trace(g1[:, i1, :] @ g2[:, i2, :] @ g3[:, i3, :]))


def compose(f: TRFactors) -> np.ndarray:
    """Evaluate the full tensor from its ring cores.

    Uses the ring unfolding identity: the cyclic mode-0 unfolding of the full
    tensor equals the mode-1 unfolding of core 0 times the transposed cyclic
    mode-1 unfolding of the complementary subchain.
    """
    m = unfold_first(f.cores[0], 1) @ unfold_cyclic(subchain(f, 0), 1).T
    return fold(m, 0, f.dims, convention="cyclic")


def random_init(dims: tuple[int, int, int], ranks: tuple[int, int, int],
                seed: int = 0) -> TRFactors:
    """Gaussian cores scaled by 1/sqrt(R_n * R_{n+1}) to keep entries O(1)."""
    _validate_ranks(ranks)
    rng = np.random.default_rng(seed)
    cores = []
    for n in range(3):
        rn, rn1 = ranks[n], ranks[(n + 1) % 3]
        cores.append(rng.standard_normal((rn, dims[n], rn1)) / np.sqrt(rn * rn1))
    return TRFactors(tuple(cores))


def _validate_ranks(ranks) -> tuple[int, int, int]:
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != 3 or any(r < 1 for r in ranks):
        raise ValueError(f"ranks must be three positive integers, got {ranks}")
    return ranks


def _als_polish(t: np.ndarray, f: TRFactors, nrm: float,
                max_sweeps: int, tol: float) -> tuple[TRFactors, float]:
    """Alternating exact least-squares sweeps over the cores.

    Each core update solves its block subproblem exactly, so the fit error
    never increases. Stops at ``tol`` relative error or when 50 sweeps
    improve the error by less than two percent.
    """
    err = float(np.linalg.norm(compose(f) - t)) / nrm
    checkpoint = err
    for sweep in range(max_sweeps):
        for n in range(3):
            smat = unfold_cyclic(subchain(f, n), 1)
            rhs = unfold_cyclic(t, n)
            g, *_ = np.linalg.lstsq(smat, rhs.T, rcond=None)
            f = f.replace_core(n, fold(g.T, 1, f.cores[n].shape, "first"))
        err = float(np.linalg.norm(compose(f) - t)) / nrm
        if err < tol:
            break
        if (sweep + 1) % 50 == 0:
            if checkpoint < err * 1.02:
                break
            checkpoint = err
    return f, err


_EXACT_FIT_TOL = 1e-9
_RESTART_SEED = 7919


def tr_svd_init(t: np.ndarray, ranks: tuple[int, int, int]) -> TRFactors:
    """Sequential SVD initialization of ring cores.

    Steps: matricize ``t`` along mode 0 (columns in natural order, i2 fastest),
    take a rank R1*R2 truncated SVD, split U's column index as (r1 fastest, r2)
    into core 1, then reshape S*Vt to (R2*I2) x (I3*R1) and split again with a
    rank R3 truncated SVD into cores 2 and 3. Requested ranks that exceed what
    the matricizations support are clamped (with a warning).

    The sequential pass alone cannot recover an exactly low-rank tensor: the
    first SVD mixes the two ring indices sharing its rank bound, which breaks
    the second split. The cores are therefore polished by alternating exact
    least-squares sweeps, with deterministic restarts when the discarded
    spectrum of the first SVD shows an exact fit is attainable.
    """
    t = np.asarray(t, dtype=float)
    if t.ndim != 3:
        raise ValueError("tr_svd_init expects a 3-way tensor")
    r1, r2, r3 = _validate_ranks(ranks)
    i1, i2, i3 = t.shape

    kmax = min(i1, i2 * i3)
    if r1 * r2 > kmax:
        if r1 > kmax:
            r1, r2 = kmax, 1
        else:
            r2 = max(1, kmax // r1)
        warnings.warn(f"ring ranks clamped to ({r1}, {r2}, {r3}) for extents {t.shape}")

    nrm = float(np.linalg.norm(t))
    if nrm == 0.0:
        r3z = min(r3, i2 * r2, r1 * i3)
        return TRFactors((np.zeros((r1, i1, r2)), np.zeros((r2, i2, r3z)),
                          np.zeros((r3z, i3, r1))))

    m = unfold_first(t, 0)
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    k = r1 * r2
    core1 = u[:, :k].reshape(i1, r2, r1).transpose(2, 0, 1)
    z = s[:k, None] * vt[:k]

    # regroup rows (r1 fastest, r2) and columns (i2 fastest, i3) into the
    # split (r2, i2) x (i3, r1) used by the second factorization
    z4 = z.reshape(r2, r1, i3, i2)
    m2 = z4.transpose(3, 0, 1, 2).reshape(i2 * r2, r1 * i3)

    r3c = min(r3, m2.shape[0], m2.shape[1])
    if r3c < r3:
        warnings.warn(f"ring ranks clamped to ({r1}, {r2}, {r3c}) for extents {t.shape}")
    u2, s2, v2t = np.linalg.svd(m2, full_matrices=False)
    core2 = u2[:, :r3c].reshape(i2, r2, r3c).transpose(1, 0, 2)
    w = s2[:r3c, None] * v2t[:r3c]
    core3 = w.reshape(r3c, r1, i3).transpose(0, 2, 1)

    f = TRFactors((np.ascontiguousarray(core1),
                   np.ascontiguousarray(core2),
                   np.ascontiguousarray(core3)))

    # the discarded first-SVD tail lower-bounds the fit error of any factor
    # set at these ranks, so it decides how hard the polish should try
    exact_attainable = float(np.linalg.norm(s[k:])) / nrm < _EXACT_FIT_TOL
    sweeps = 2000 if exact_attainable else 40
    f, err = _als_polish(t, f, nrm, sweeps, tol=_EXACT_FIT_TOL / 10.0)
    if exact_attainable:
        restart = 0
        while err > _EXACT_FIT_TOL and restart < 24:
            cand = random_init(t.shape, f.ranks, seed=_RESTART_SEED + restart)
            cand, cand_err = _als_polish(t, cand, nrm, 2000, tol=_EXACT_FIT_TOL / 10.0)
            if cand_err < err:
                f, err = cand, cand_err
            restart += 1
    return f
