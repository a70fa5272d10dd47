"""Experiment drivers behind the CLI: simulate, fuse, ablate, metrics.

Every run is deterministic under a fixed configuration and seed; the one
exception is the wall-clock seconds column of convergence.csv.
"""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, to_solver_config
from .degradation import DegradationModel, add_noise, degrade
from .metrics import MetricsReport, metrics_report, rescale_pair
from .solver import FusionResult, solve
from .tensor import mode_n_product
from .tnsr import read_tnsr, write_tnsr


class DataError(Exception):
    """Shape or content problem in loaded tensors."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise DataError(msg)


def build_model(dims: tuple[int, int, int], cfg: ExperimentConfig) -> DegradationModel:
    response = None
    if cfg.spectral_response is not None:
        response = read_tnsr(cfg.spectral_response)
        _require(response.ndim == 2, "spectral response must be a 2-way tensor")
    try:
        return DegradationModel.build(
            dims, cfg.factor, kernel_size=cfg.kernel_size, sigma=cfg.sigma,
            band_groups=cfg.band_groups,
            out_bands=None if cfg.band_groups is not None else cfg.msi_bands,
            response=response)
    except ValueError as exc:
        raise DataError(str(exc)) from exc


def simulate_pair(gt: np.ndarray, cfg: ExperimentConfig
                  ) -> tuple[DegradationModel, np.ndarray, np.ndarray]:
    """Degrade the ground truth and add seeded noise on independent streams."""
    _require(gt.ndim == 3, "ground truth must be a 3-way tensor")
    model = build_model(gt.shape, cfg)
    y0, z0 = degrade(gt, model)
    stream_y, stream_z = np.random.SeedSequence(cfg.seed).spawn(2)
    y = add_noise(y0, cfg.snr_y_db, np.random.default_rng(stream_y))
    z = add_noise(z0, cfg.snr_z_db, np.random.default_rng(stream_z))
    return model, y, z


def load_inputs(cfg: ExperimentConfig
                ) -> tuple[np.ndarray | None, DegradationModel, np.ndarray, np.ndarray]:
    """Resolve the configured inputs to (ground truth or None, model, y, z)."""
    if cfg.ground_truth is not None:
        gt = read_tnsr(cfg.ground_truth)
        model, y, z = simulate_pair(gt, cfg)
        return gt, model, y, z
    y = read_tnsr(cfg.y)
    z = read_tnsr(cfg.z)
    _require(y.ndim == 3 and z.ndim == 3, "y and z must be 3-way tensors")
    _require(z.shape[0] == y.shape[0] * cfg.factor
             and z.shape[1] == y.shape[1] * cfg.factor,
             f"z spatial extents {z.shape[:2]} are not factor {cfg.factor} "
             f"times y extents {y.shape[:2]}")
    model = build_model((z.shape[0], z.shape[1], y.shape[2]), cfg)
    _require(model.u3.shape[0] == z.shape[2],
             f"spectral operator yields {model.u3.shape[0]} bands but z has "
             f"{z.shape[2]}")
    return None, model, y, z


def spectral_lift_baseline(z: np.ndarray, model: DegradationModel) -> np.ndarray:
    """Naive full-band estimate: pseudo-inverse of the spectral operator on z."""
    return mode_n_product(z, np.linalg.pinv(model.u3), 2)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _write_convergence(path: Path, result: FusionResult) -> None:
    lines = ["k,objective,rel_change,seconds"]
    for rec in result.history:
        lines.append(f"{rec.k},{rec.objective!r},{rec.rel_change!r},"
                     f"{rec.seconds:.6f}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_per_band(path: Path, report: MetricsReport) -> None:
    lines = ["band,psnr,uiqi"]
    for band, (p, q) in enumerate(zip(report.psnr_per_band, report.uiqi_per_band)):
        lines.append(f"{band},{p!r},{q!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _prepare_out(out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_simulate(cfg: ExperimentConfig, out_dir) -> dict:
    if cfg.ground_truth is None:
        raise ConfigError("simulate requires a ground_truth path")
    gt, model, y, z = load_inputs(cfg)
    out = _prepare_out(out_dir)
    write_tnsr(out / "y.tnsr", y)
    write_tnsr(out / "z.tnsr", z)
    echo = {"config": cfg.as_dict(),
            "ground_truth_shape": list(gt.shape),
            "y_shape": list(y.shape),
            "z_shape": list(z.shape),
            "band_groups": [list(g) for g in model.band_groups]
            if model.band_groups is not None else None}
    _write_json(out / "model.json", echo)
    return {"out": str(out), "y_shape": y.shape, "z_shape": z.shape}


def _metrics_against(gt: np.ndarray, est: np.ndarray, factor: int) -> MetricsReport:
    try:
        ref255, est255 = rescale_pair(gt, est)
        return metrics_report(ref255, est255, factor)
    except ValueError as exc:
        raise DataError(str(exc)) from exc


def run_fuse(cfg: ExperimentConfig, out_dir) -> dict:
    gt, model, y, z = load_inputs(cfg)
    try:
        result = solve(y, z, model, to_solver_config(cfg))
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    out = _prepare_out(out_dir)
    write_tnsr(out / "xhat.tnsr", result.fused)
    _write_convergence(out / "convergence.csv", result)
    summary: dict = {"out": str(out), "iterations": len(result.history),
                     "effective_ranks": list(result.factors.ranks)}
    if gt is not None:
        report = _metrics_against(gt, result.fused, cfg.factor)
        _write_json(out / "metrics.json",
                    {"metrics": report.scalars(),
                     "effective_ranks": list(result.factors.ranks),
                     "config": cfg.as_dict()})
        _write_per_band(out / "per_band.csv", report)
        write_tnsr(out / "error_tensor.tnsr", result.fused - gt)
        baseline = spectral_lift_baseline(z, model)
        base_report = _metrics_against(gt, baseline, cfg.factor)
        _write_json(out / "baseline.json",
                    {"metrics": base_report.scalars(),
                     "method": "spectral pseudo-inverse lift"})
        summary["metrics"] = report.scalars()
        summary["baseline"] = base_report.scalars()
    return summary


ABLATION_VARIANTS = (
    ("full", {}),
    ("ban_spe", {"disable_ltnn_spectral": True}),
    ("ban_spa", {"disable_ltnn_spatial": True}),
    ("no_tv", {"disable_tv": True}),
    ("trkj", {"baseline_trkj": True}),
)


def run_ablate(cfg: ExperimentConfig, out_dir) -> list[dict]:
    """Coefficient-zeroing grid over the regularizers, one row per variant.

    All variants share the same simulated inputs and initialization, so the
    rows differ only through the zeroed coefficients.
    """
    if cfg.ground_truth is None:
        raise ConfigError("ablate requires a ground_truth path")
    gt, model, y, z = load_inputs(cfg)
    rows = []
    for name, overrides in ABLATION_VARIANTS:
        vcfg = replace(cfg, **overrides)
        scfg = to_solver_config(vcfg)
        try:
            result = solve(y, z, model, scfg)
        except ValueError as exc:
            raise DataError(str(exc)) from exc
        report = _metrics_against(gt, result.fused, cfg.factor)
        row = {"variant": name, "alpha": scfg.alpha}
        for i in range(3):
            row[f"beta_core{i + 1}"] = scfg.beta * scfg.beta_scales[i]
        row.update(report.scalars())
        rows.append(row)
    out = _prepare_out(out_dir)
    cols = ["variant", "alpha", "beta_core1", "beta_core2", "beta_core3",
            "psnr", "ssim", "ergas", "sam", "uiqi"]
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(str(row[c]) if c == "variant" else repr(float(row[c]))
                              for c in cols))
    (out / "ablation.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return rows


def run_metrics(ref_path, est_path, factor: int, out_dir=None) -> dict:
    ref = read_tnsr(ref_path)
    est = read_tnsr(est_path)
    _require(ref.ndim == 3 and est.ndim == 3, "metrics expect 3-way tensors")
    _require(ref.shape == est.shape,
             f"shape mismatch {ref.shape} vs {est.shape}")
    report = _metrics_against(ref, est, factor)
    payload = {"metrics": report.scalars(), "ref": str(ref_path),
               "est": str(est_path), "factor": factor}
    if out_dir is not None:
        out = _prepare_out(out_dir)
        _write_json(out / "metrics.json", payload)
    return payload
