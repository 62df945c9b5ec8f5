"""File formats: CSV/JSON writers, config ingestion, provenance sidecars.

CSV numbers carry 12 significant digits; JSON numbers are written with full
round-trip fidelity.  Every writer is deterministic, so identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import PopulationSizes
from .phase import EquilibriumPoint, SweepRow
from .simulate import EnsembleStats, Trajectory
from .validation import LlnReport

__all__ = [
    "CONFIG_KEYS",
    "load_config",
    "write_sidecar",
    "write_json",
    "write_trajectory_csv",
    "write_ensemble_csv",
    "write_distribution_csv",
    "write_sweep_csv",
    "write_lln_csv",
    "equilibria_to_json",
]

CONFIG_KEYS = {
    "alpha": float,
    "j11": float,
    "j12": float,
    "j22": float,
    "h1": float,
    "h2": float,
    "n": int,
    "lambda_plus": float,
    "t_end": float,
    "dt": float,
    "seed": int,
    "trials": int,
}


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def load_config(path: str | Path) -> dict:
    """Read a JSON config; unknown keys are rejected by name."""
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("config file must contain a JSON object")
    out = {}
    for key, value in raw.items():
        if key not in CONFIG_KEYS:
            raise ValueError(f"unknown config key: {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](value)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"config key {key!r} has invalid value {value!r}") from exc
    return out


def write_sidecar(output_path: str | Path, effective: dict) -> Path:
    """Echo the effective configuration next to an output file."""
    sidecar = Path(f"{output_path}.config.json")
    with open(sidecar, "w") as fh:
        json.dump(effective, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return sidecar


def write_json(path: str | Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def write_trajectory_csv(path: str | Path, times: np.ndarray, m: np.ndarray) -> None:
    """Schema: t,m1,m2 (shared by stochastic and ODE paths, so they overlay)."""
    with open(path, "w") as fh:
        fh.write("t,m1,m2\n")
        for t, (m1, m2) in zip(times, m):
            fh.write(f"{_fmt(t)},{_fmt(m1)},{_fmt(m2)}\n")


def write_ensemble_csv(path: str | Path, stats: EnsembleStats) -> None:
    """Schema: t,mean_m1,mean_m2,var_m1,var_m2,trials."""
    with open(path, "w") as fh:
        fh.write("t,mean_m1,mean_m2,var_m1,var_m2,trials\n")
        for i, t in enumerate(stats.times):
            fh.write(
                f"{_fmt(t)},{_fmt(stats.mean[i, 0])},{_fmt(stats.mean[i, 1])},"
                f"{_fmt(stats.var[i, 0])},{_fmt(stats.var[i, 1])},{stats.trials}\n"
            )


def write_distribution_csv(path: str | Path, dist: np.ndarray, sizes: PopulationSizes) -> None:
    """Schema: k1,k2,prob, row-major in (k1, k2)."""
    with open(path, "w") as fh:
        fh.write("k1,k2,prob\n")
        idx = 0
        for k1 in range(sizes.n1 + 1):
            for k2 in range(sizes.n2 + 1):
                fh.write(f"{k1},{k2},{_fmt(dist[idx])}\n")
                idx += 1


def write_sweep_csv(path: str | Path, rows: list[SweepRow]) -> None:
    """Schema: alpha_j11,j12,region,count,boundary_flag."""
    with open(path, "w") as fh:
        fh.write("alpha_j11,j12,region,count,boundary_flag\n")
        for r in rows:
            fh.write(
                f"{_fmt(r.alpha_j11)},{_fmt(r.j12)},{r.region},{r.count},"
                f"{int(r.boundary)}\n"
            )


def write_lln_csv(path: str | Path, report: LlnReport) -> None:
    """Schema: N,trials,median_sup_dev,p90_sup_dev."""
    with open(path, "w") as fh:
        fh.write("N,trials,median_sup_dev,p90_sup_dev\n")
        for r in report.rows:
            fh.write(f"{r.n},{r.trials},{_fmt(r.median_sup_dev)},{_fmt(r.p90_sup_dev)}\n")


def equilibria_to_json(points: list[EquilibriumPoint]) -> list[dict]:
    return [
        {
            "m1": q.m1,
            "m2": q.m2,
            "lambda_minus": q.lambda_minus,
            "lambda_plus": q.lambda_plus,
            "stability": q.stability,
        }
        for q in points
    ]
