"""Synthetic dimensionality-reduction benchmark: rank sweeps, SNR vs parameters.

Generates a planted three-factor product plus Gaussian noise, fits the
sum-of-terms model and the CP/Tucker baselines over rank grids, and reports
per-run SNR (against both the noiseless signal and the observed tensor)
together with parameter counts.  Output is deterministic for a fixed config.
"""
from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from statistics import median

import numpy as np

from .tensor import DenseTensor
from .ops import bsum
from .decomposition import (
    BDFactors,
    FitConfig,
    bd_param_count,
    reconstruct,
    snr_db,
    sum_bd_hals,
)
from .baselines import cp_als, param_count, tucker_hooi
from .btf import write_btf

__all__ = [
    "ExperimentConfig",
    "ReportRow",
    "ExperimentReport",
    "generate_synthetic",
    "run_experiment",
    "write_report",
    "CSV_HEADER",
]

CSV_HEADER = "method,rank_param,n_params,snr_signal_db,snr_observed_db,iterations,seed"


@dataclass(frozen=True)
class ExperimentConfig:
    dims: tuple[int, int, int] = (16, 16, 16)
    sigma: float = 0.1
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    bd_R_grid: tuple[int, ...] = (1, 2)
    cp_R_grid: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64)
    tucker_rank_grid: tuple[int, ...] = tuple(range(1, 17))
    fit: FitConfig = field(default_factory=FitConfig)
    output_dir: str = "experiment_out"

    def __post_init__(self):
        if any(d < 1 for d in self.dims) or len(self.dims) != 3:
            raise ValueError(f"dims must be three positive integers, got {self.dims}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not (self.seeds and self.bd_R_grid and self.cp_R_grid and self.tucker_rank_grid):
            raise ValueError("seeds and rank grids must be non-empty")


@dataclass(frozen=True)
class ReportRow:
    method: str
    rank_param: int
    n_params: int
    snr_signal_db: float
    snr_observed_db: float
    iterations: int
    seed: int


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list[ReportRow]


def generate_synthetic(
    dims: tuple[int, int, int], sigma: float, seed: int
) -> tuple[DenseTensor, DenseTensor]:
    """Planted signal A . B . C plus sigma-scaled i.i.d. Gaussian noise.

    Factors and noise are standard normal, drawn in the order A, B, C, E from
    one seeded generator, so results are reproducible per seed.
    """
    i, j, k = dims
    rng = np.random.default_rng(seed)
    a = DenseTensor(rng.standard_normal((i, j, 1)))
    b = DenseTensor(rng.standard_normal((i, 1, k)))
    c = DenseTensor(rng.standard_normal((1, j, k)))
    e = rng.standard_normal((i, j, k))
    signal = reconstruct(BDFactors(a, b, c))
    observed = bsum(signal, DenseTensor(sigma * e))
    return signal, observed


def _snrs(signal, observed, model) -> tuple[float, float]:
    return snr_db(signal, model), snr_db(observed, model)


def _write_matrix_btf(mat: np.ndarray, path: str) -> None:
    write_btf(DenseTensor(mat), path)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run the full sweep and write report.csv, plot data, and factor files."""
    factors_dir = os.path.join(cfg.output_dir, "factors")
    os.makedirs(factors_dir, exist_ok=True)
    rows: list[ReportRow] = []

    for seed in cfg.seeds:
        signal, observed = generate_synthetic(cfg.dims, cfg.sigma, seed)
        fit = dataclasses.replace(cfg.fit, seed=seed)

        for R in cfg.bd_R_grid:
            try:
                terms, trace = sum_bd_hals(observed, R, fit)
                model = _sum_reconstruct(terms)
                s_sig, s_obs = _snrs(signal, observed, model)
                for t, f in enumerate(terms):
                    write_btf(f.a, os.path.join(factors_dir, f"bd_R{R}_seed{seed}_t{t}_A.btf"))
                    write_btf(f.b, os.path.join(factors_dir, f"bd_R{R}_seed{seed}_t{t}_B.btf"))
                    write_btf(f.c, os.path.join(factors_dir, f"bd_R{R}_seed{seed}_t{t}_C.btf"))
                rows.append(ReportRow("bd", R, bd_param_count(cfg.dims, R),
                                      s_sig, s_obs, trace.iterations_run, seed))
            except Exception:
                rows.append(ReportRow("bd", R, bd_param_count(cfg.dims, R),
                                      math.nan, math.nan, 0, seed))

        for R in cfg.cp_R_grid:
            try:
                model, trace = cp_als(observed, R, fit)
                s_sig, s_obs = _snrs(signal, observed, model.reconstruct())
                for n, u in enumerate((model.u1, model.u2, model.u3), start=1):
                    _write_matrix_btf(u, os.path.join(factors_dir, f"cp_R{R}_seed{seed}_U{n}.btf"))
                rows.append(ReportRow("cp", R, param_count(model),
                                      s_sig, s_obs, trace.iterations_run, seed))
            except Exception:
                i, j, k = cfg.dims
                rows.append(ReportRow("cp", R, R * (i + j + k), math.nan, math.nan, 0, seed))

        for r in cfg.tucker_rank_grid:
            try:
                model, trace = tucker_hooi(observed, (r, r, r), fit)
                s_sig, s_obs = _snrs(signal, observed, model.reconstruct())
                _write_matrix_btf(model.core, os.path.join(
                    factors_dir, f"tucker_r{r}_seed{seed}_core.btf"))
                for n, u in enumerate((model.u1, model.u2, model.u3), start=1):
                    _write_matrix_btf(u, os.path.join(
                        factors_dir, f"tucker_r{r}_seed{seed}_U{n}.btf"))
                rows.append(ReportRow("tucker", r, param_count(model),
                                      s_sig, s_obs, trace.iterations_run, seed))
            except Exception:
                i, j, k = cfg.dims
                n_params = r ** 3 + r * (i + j + k)
                rows.append(ReportRow("tucker", r, n_params, math.nan, math.nan, 0, seed))

    rows.sort(key=lambda r: (r.method, r.rank_param, r.seed))
    report = ExperimentReport(cfg, rows)
    write_report(report)
    return report


def _sum_reconstruct(terms: list[BDFactors]) -> DenseTensor:
    total = reconstruct(terms[0]).to_array().copy()
    for t in terms[1:]:
        total = total + reconstruct(t).to_array()
    return DenseTensor(total)


def _fmt(v: float) -> str:
    return format(v, ".17g")


def write_report(report: ExperimentReport) -> None:
    """Write report.csv and per-method gnuplot data (n_params, median SNR)."""
    cfg = report.config
    os.makedirs(cfg.output_dir, exist_ok=True)
    csv_path = os.path.join(cfg.output_dir, "report.csv")
    with open(csv_path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in report.rows:
            fh.write(
                f"{r.method},{r.rank_param},{r.n_params},"
                f"{_fmt(r.snr_signal_db)},{_fmt(r.snr_observed_db)},"
                f"{r.iterations},{r.seed}\n"
            )

    for method in sorted({r.method for r in report.rows}):
        by_rank: dict[tuple[int, int], list[float]] = {}
        for r in report.rows:
            if r.method == method:
                by_rank.setdefault((r.rank_param, r.n_params), []).append(r.snr_signal_db)
        path = os.path.join(cfg.output_dir, f"plotdata_{method}.dat")
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(f"# method={method} sigma={_fmt(cfg.sigma)} dims={cfg.dims}\n")
            fh.write("# n_params median_snr_signal_db\n")
            for (rank, n_params), snrs in sorted(by_rank.items()):
                fh.write(f"{n_params} {_fmt(median(snrs))}\n")
