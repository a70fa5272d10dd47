"""Alternating block solver for ring-factored image fusion.

Given a spatially degraded cube y and a spectrally degraded cube z, the
solver seeks ring cores G1, G2, G3 minimizing

    0.5 * ||y - compose(G1 x U1, G2 x U2, G3)||_F^2
  + 0.5 * lam * ||z - compose(G1, G2, G3 x U3)||_F^2
  + sum_n [ alpha * ||W_n o (G_n x D_n)||_1 + beta_n * LTNN(G_n) ]

where x denotes the product along each core's extent mode, D_n is a forward
difference, W_n a reweighting, and LTNN the logarithmic tensor nuclear norm.

The outer loop is a proximal alternating minimization over the cores with
anchor weight eta. Each block runs a small ADMM whose auxiliaries and
multipliers are re-zeroed at block entry; the quadratic step is a
generalized Sylvester system solved by warm-started conjugate gradients.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .degradation import DegradationModel
from .prox import ltnn_prox, ltnn_value, soft_shrink_weighted, update_weights
from .ring import TRFactors, compose, merge_cores, random_init, tr_svd_init
from .tensor import (fold, frobenius_norm, l1_norm, mode_n_product, rel_change,
                     unfold_cyclic, unfold_first)


class SolverDivergenceError(RuntimeError):
    """Raised when iterates stop being finite (or collapse to zero)."""


@dataclass
class SolverConfig:
    """Model coefficients, penalty parameters, and iteration controls.

    beta_scales lets individual cores opt out of the LTNN term (used by the
    ablation grid); the effective weight on core n is beta * beta_scales[n].
    """

    ranks: tuple[int, int, int] = (2, 4, 2)
    lam: float = 1.0
    alpha: float = 1e-4
    beta: float = 0.5
    eta: float = 1.0
    mu: float = 0.1
    eps_log: float = 1e-2
    varsigma: float = 1e-3
    k_max: int = 50
    inner_max: int = 10
    inner_tol: float = 1e-3
    cg_tol: float = 1e-6
    cg_max: int = 300
    stop_tol: float = 1e-4
    init: str = "tr_svd"
    seed: int = 0
    beta_scales: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        self.ranks = tuple(int(r) for r in self.ranks)
        if len(self.ranks) != 3 or any(r < 1 for r in self.ranks):
            raise ValueError(f"ranks must be three positive integers, got {self.ranks}")
        for name in ("lam", "eta", "mu", "eps_log", "varsigma",
                     "inner_tol", "cg_tol", "stop_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("alpha", "beta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.k_max < 0:
            raise ValueError("k_max must be nonnegative")
        if self.inner_max < 1 or self.cg_max < 1:
            raise ValueError("inner_max and cg_max must be at least 1")
        if self.init not in ("tr_svd", "random"):
            raise ValueError(f"unknown init scheme {self.init!r}")
        self.beta_scales = tuple(float(s) for s in self.beta_scales)
        if len(self.beta_scales) != 3 or any(s < 0 for s in self.beta_scales):
            raise ValueError("beta_scales must be three nonnegative floats")


@dataclass
class IterationRecord:
    k: int
    objective: float
    rel_change: float
    seconds: float


@dataclass
class FusionResult:
    fused: np.ndarray
    factors: TRFactors
    history: list[IterationRecord]


@dataclass
class SolverState:
    """Cores plus the last auxiliaries/multipliers of each block's ADMM."""

    cores: list[np.ndarray]
    aux_r: list = field(default_factory=lambda: [None, None, None])
    aux_v: list = field(default_factory=lambda: [None, None, None])
    mult_m: list = field(default_factory=lambda: [None, None, None])
    mult_n: list = field(default_factory=lambda: [None, None, None])
    weights: list = field(default_factory=lambda: [None, None, None])


def build_difference_matrix(extent: int) -> np.ndarray:
    """Forward difference rows (-1, +1), last row all zeros."""
    extent = int(extent)
    if extent < 2:
        raise ValueError("difference matrix needs extent >= 2")
    d = np.zeros((extent, extent))
    idx = np.arange(extent - 1)
    d[idx, idx] = -1.0
    d[idx, idx + 1] = 1.0
    return d


def cg_solve(apply, rhs: np.ndarray, tol: float = 1e-6, max_iter: int = 300,
             x0: np.ndarray | None = None) -> tuple[np.ndarray, int, float]:
    """Conjugate gradients on matrices under the trace inner product.

    Returns (x, iterations, relative residual); stops at
    ||apply(x) - rhs|| <= tol * ||rhs|| or at max_iter.
    """
    rhs = np.asarray(rhs, dtype=float)
    bnorm = float(np.linalg.norm(rhs))
    x = np.zeros_like(rhs) if x0 is None else np.array(x0, dtype=float)
    if bnorm == 0.0:
        return np.zeros_like(rhs), 0, 0.0
    r = rhs - apply(x)
    p = r.copy()
    rs = float(np.sum(r * r))
    relres = math.sqrt(rs) / bnorm
    iters = 0
    while relres > tol and iters < max_iter:
        ap = apply(p)
        denom = float(np.sum(p * ap))
        if denom <= 0.0:
            break
        step = rs / denom
        x = x + step * p
        r = r - step * ap
        rs_new = float(np.sum(r * r))
        if not math.isfinite(rs_new):
            raise SolverDivergenceError("non-finite residual in conjugate gradients")
        p = r + (rs_new / rs) * p
        rs = rs_new
        relres = math.sqrt(rs) / bnorm
        iters += 1
    return x, iters, relres


@dataclass(frozen=True)
class SylvesterOperator:
    """Positive definite map g -> a1 g b1 + scale2 * g b2 + mu * dtd g + shift * g."""

    a1: np.ndarray
    b1: np.ndarray
    scale2: float
    b2: np.ndarray
    dtd: np.ndarray
    mu: float
    shift: float

    def apply(self, g: np.ndarray) -> np.ndarray:
        return (self.a1 @ g @ self.b1 + self.scale2 * (g @ self.b2)
                + self.mu * (self.dtd @ g) + self.shift * g)


def _subchain_factors(n: int, cores, model: DegradationModel):
    """Transposed cyclic unfoldings of block n's complementary subchains.

    The first factor folds the spatial degradations in (matching y), the
    second folds the spectral one in (matching z); through them the cyclic
    unfolding of each observation factors over the unknown core's mode-1
    unfolding.
    """
    g1, g2, g3 = cores
    u1, u2, u3 = model.u1, model.u2, model.u3
    if n == 0:
        py = unfold_cyclic(merge_cores(mode_n_product(g2, u2, 1), g3), 1).T
        pz = unfold_cyclic(merge_cores(g2, mode_n_product(g3, u3, 1)), 1).T
    elif n == 1:
        py = unfold_cyclic(merge_cores(g3, mode_n_product(g1, u1, 1)), 1).T
        pz = unfold_cyclic(merge_cores(mode_n_product(g3, u3, 1), g1), 1).T
    else:
        py = unfold_cyclic(merge_cores(mode_n_product(g1, u1, 1),
                                       mode_n_product(g2, u2, 1)), 1).T
        pz = unfold_cyclic(merge_cores(g1, g2), 1).T
    return py, pz


def _assemble_operator(n: int, model: DegradationModel, cfg: SolverConfig,
                       py: np.ndarray, pz: np.ndarray,
                       d: np.ndarray) -> SylvesterOperator:
    if n == 0:
        a1, b1, s2, b2 = model.u1.T @ model.u1, py @ py.T, cfg.lam, pz @ pz.T
    elif n == 1:
        a1, b1, s2, b2 = model.u2.T @ model.u2, py @ py.T, cfg.lam, pz @ pz.T
    else:
        a1, b1, s2, b2 = cfg.lam * (model.u3.T @ model.u3), pz @ pz.T, 1.0, py @ py.T
    return SylvesterOperator(a1=a1, b1=b1, scale2=s2, b2=b2, dtd=d.T @ d,
                             mu=cfg.mu, shift=cfg.eta + cfg.mu)


def build_sylvester_operator(n: int, cores, model: DegradationModel,
                             cfg: SolverConfig) -> SylvesterOperator:
    """Quadratic-step operator of block n at the given companion cores."""
    py, pz = _subchain_factors(n, cores, model)
    d = build_difference_matrix(cores[n].shape[1])
    return _assemble_operator(n, model, cfg, py, pz, d)


def _block_rhs_data(n: int, y, z, model: DegradationModel, lam: float, py, pz):
    """Data part of block n's right-hand side."""
    if n == 0:
        return (model.u1.T @ unfold_cyclic(y, 0) @ py.T
                + lam * (unfold_cyclic(z, 0) @ pz.T))
    if n == 1:
        return (model.u2.T @ unfold_cyclic(y, 1) @ py.T
                + lam * (unfold_cyclic(z, 1) @ pz.T))
    return (unfold_cyclic(y, 2) @ py.T
            + lam * (model.u3.T @ unfold_cyclic(z, 2) @ pz.T))


def update_block(n: int, state: SolverState, y: np.ndarray, z: np.ndarray,
                 model: DegradationModel, cfg: SolverConfig) -> int:
    """One proximal block update of core n via ADMM sweeps.

    Per sweep: shrink the weighted differences, solve the quadratic system by
    warm-started CG, threshold the low-rank auxiliary, then take a multiplier
    ascent step. Weights are recomputed from the current split variable every
    sweep. Returns the number of sweeps run.
    """
    cores = state.cores
    core = cores[n]
    shape = core.shape
    anchor_mat = unfold_first(core, 1)
    d = build_difference_matrix(shape[1])
    py, pz = _subchain_factors(n, cores, model)
    op = _assemble_operator(n, model, cfg, py, pz, d)
    rhs_data = _block_rhs_data(n, y, z, model, cfg.lam, py, pz)
    mu = cfg.mu
    beta_eff = cfg.beta * cfg.beta_scales[n]
    rhs_static = rhs_data + cfg.eta * anchor_mat

    v = np.zeros(shape)
    m = np.zeros(shape)
    nn = np.zeros(shape)
    g_mat = anchor_mat.copy()
    r = np.zeros(shape)
    weights = None
    sweeps = 0
    for _ in range(cfg.inner_max):
        sweeps += 1
        j = mode_n_product(core, d, 1) - m / mu
        weights = update_weights(j, cfg.varsigma)
        r = soft_shrink_weighted(j, cfg.alpha / mu, weights)
        rhs = (rhs_static
               + mu * (d.T @ unfold_first(r + m / mu, 1))
               + mu * unfold_first(v + nn / mu, 1))
        g_mat, _, _ = cg_solve(op.apply, rhs, cfg.cg_tol, cfg.cg_max, x0=g_mat)
        core_new = fold(g_mat, 1, shape)
        v = ltnn_prox(core_new - nn / mu, beta_eff / mu, cfg.eps_log)
        m = m + mu * (r - mode_n_product(core_new, d, 1))
        nn = nn + mu * (v - core_new)
        new_norm = frobenius_norm(core_new)
        if new_norm == 0.0:
            step = 0.0 if frobenius_norm(core) == 0.0 else math.inf
        else:
            step = rel_change(core_new, core)
        core = core_new
        if step < cfg.inner_tol:
            break

    state.cores[n] = core
    state.aux_r[n] = r
    state.aux_v[n] = v
    state.mult_m[n] = m
    state.mult_n[n] = nn
    state.weights[n] = weights
    return sweeps


def objective(factors, y: np.ndarray, z: np.ndarray, model: DegradationModel,
              cfg: SolverConfig, weights=None) -> float:
    """Model objective at the given cores.

    ``weights`` may carry the three reweighting tensors; when omitted they
    are recomputed from the cores' own differences, which is the reweighting
    fixed point the inner loops drive toward.
    """
    f = factors if isinstance(factors, TRFactors) else TRFactors(tuple(factors))
    g1, g2, g3 = f.cores
    y_hat = compose(TRFactors((mode_n_product(g1, model.u1, 1),
                               mode_n_product(g2, model.u2, 1), g3)))
    z_hat = compose(TRFactors((g1, g2, mode_n_product(g3, model.u3, 1))))
    val = 0.5 * frobenius_norm(np.asarray(y) - y_hat) ** 2
    val += 0.5 * cfg.lam * frobenius_norm(np.asarray(z) - z_hat) ** 2
    for n, g in enumerate(f.cores):
        diff = mode_n_product(g, build_difference_matrix(g.shape[1]), 1)
        if cfg.alpha != 0.0:
            w = weights[n] if weights is not None else update_weights(diff, cfg.varsigma)
            val += cfg.alpha * l1_norm(w * diff)
        beta_eff = cfg.beta * cfg.beta_scales[n]
        if beta_eff != 0.0:
            val += beta_eff * ltnn_value(g, cfg.eps_log)
    return float(val)


def _pad_core(core: np.ndarray, shape: tuple[int, int, int]) -> np.ndarray:
    if core.shape == shape:
        return core
    if core.shape[1] != shape[1] or core.shape[0] > shape[0] or core.shape[2] > shape[2]:
        raise ValueError(f"cannot pad core {core.shape} to {shape}")
    out = np.zeros(shape)
    out[:core.shape[0], :, :core.shape[2]] = core
    return out


def initial_factors(y: np.ndarray, z: np.ndarray, cfg: SolverConfig) -> TRFactors:
    """Starting cores: sequential-SVD cores 1 and 2 from z, core 3 from y.

    Clamped decompositions are zero-padded back to the requested ranks so
    adjacent ranks always agree.
    """
    r1, r2, r3 = cfg.ranks
    big_w, big_h, _ = z.shape
    bands = y.shape[2]
    if cfg.init == "random":
        return random_init((big_w, big_h, bands), cfg.ranks, cfg.seed)
    fz = tr_svd_init(z, cfg.ranks)
    fy = tr_svd_init(y, cfg.ranks)
    return TRFactors((_pad_core(fz.cores[0], (r1, big_w, r2)),
                      _pad_core(fz.cores[1], (r2, big_h, r3)),
                      _pad_core(fy.cores[2], (r3, bands, r1))))


def solve(y: np.ndarray, z: np.ndarray, model: DegradationModel,
          cfg: SolverConfig, init_factors_override: TRFactors | None = None
          ) -> FusionResult:
    """Run the full outer loop and return the fused cube with its history.

    Stops when the relative change of the composed estimate falls to
    stop_tol, or after k_max outer iterations. k_max = 0 returns the
    composed initialization with an empty history. Non-finite objectives or
    a collapsed estimate raise SolverDivergenceError.
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if y.ndim != 3 or z.ndim != 3:
        raise ValueError("solve expects 3-way tensors y and z")
    if model.u1.shape != (y.shape[0], z.shape[0]):
        raise ValueError(f"u1 shape {model.u1.shape} does not map extents "
                         f"{z.shape[0]} -> {y.shape[0]}")
    if model.u2.shape != (y.shape[1], z.shape[1]):
        raise ValueError(f"u2 shape {model.u2.shape} does not map extents "
                         f"{z.shape[1]} -> {y.shape[1]}")
    if model.u3.shape != (z.shape[2], y.shape[2]):
        raise ValueError(f"u3 shape {model.u3.shape} does not map extents "
                         f"{y.shape[2]} -> {z.shape[2]}")

    if init_factors_override is not None:
        f = init_factors_override
        if f.dims != (z.shape[0], z.shape[1], y.shape[2]):
            raise ValueError(f"initial factors compose to {f.dims}, expected "
                             f"{(z.shape[0], z.shape[1], y.shape[2])}")
    else:
        f = initial_factors(y, z, cfg)
    state = SolverState(cores=list(f.cores))

    x_prev = compose(TRFactors(tuple(state.cores)))
    history: list[IterationRecord] = []
    t0 = time.perf_counter()
    for k in range(1, cfg.k_max + 1):
        for n in range(3):
            update_block(n, state, y, z, model, cfg)
        x_new = compose(TRFactors(tuple(state.cores)))
        if frobenius_norm(x_new) == 0.0:
            raise SolverDivergenceError(f"estimate collapsed to zero at outer {k}")
        rel = rel_change(x_new, x_prev)
        obj = objective(TRFactors(tuple(state.cores)), y, z, model, cfg)
        if not (math.isfinite(obj) and math.isfinite(rel)):
            raise SolverDivergenceError(f"non-finite objective at outer {k} "
                                        f"(objective={obj}, rel_change={rel})")
        history.append(IterationRecord(k=k, objective=obj, rel_change=rel,
                                       seconds=time.perf_counter() - t0))
        x_prev = x_new
        if rel < cfg.stop_tol:
            break
    return FusionResult(fused=x_prev, factors=TRFactors(tuple(state.cores)),
                        history=history)
