"""Cross-layer experiments tying the finite system to its deterministic limit.

Each experiment is deterministic given its seed; Monte-Carlo trials draw
from counter-based streams keyed by (seed, experiment indices).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .master import build_generator, evolve, evolve_grid, initial_distribution, mean_magnetization
from .meanfield import integrate_grid
from .model import ModelParams, PopulationSizes, gibbs_log_weight
from .simulate import _coeffs, _run_grid, make_grid, sample_states_at, stream, total_rates

__all__ = [
    "LlnRow",
    "LlnReport",
    "detailed_balance_gap",
    "lln_experiment",
    "mc_vs_master",
    "master_vs_ode",
]


@dataclass(frozen=True)
class LlnRow:
    n: int
    trials: int
    median_sup_dev: float
    p90_sup_dev: float


@dataclass(frozen=True)
class LlnReport:
    """Per-N sup-deviations between particle paths and the limit ODE,
    summarized by median and 90th percentile over trials."""

    rows: tuple[LlnRow, ...]


def detailed_balance_gap(sizes: PopulationSizes, p: ModelParams) -> float:
    """Worst relative detailed-balance violation over all lumped edges.

    For each upward edge s -> s' compares the log flows
    log(rate) + log(weight) in both directions; returns max |exp(gap) - 1|.
    Exactly zero chains would return 0; correct code stays below ~1e-13.
    """
    worst = 0.0
    for k1 in range(sizes.n1 + 1):
        for k2 in range(sizes.n2 + 1):
            up1, down1, up2, down2 = total_rates((k1, k2), sizes, p)
            glw = gibbs_log_weight((k1, k2), sizes, p)
            if k1 < sizes.n1:
                back = total_rates((k1 + 1, k2), sizes, p)[1]
                gap = (
                    math.log(up1) + glw
                    - math.log(back) - gibbs_log_weight((k1 + 1, k2), sizes, p)
                )
                worst = max(worst, abs(math.expm1(gap)))
            if k2 < sizes.n2:
                back = total_rates((k1, k2 + 1), sizes, p)[3]
                gap = (
                    math.log(up2) + glw
                    - math.log(back) - gibbs_log_weight((k1, k2 + 1), sizes, p)
                )
                worst = max(worst, abs(math.expm1(gap)))
    return worst


def _split_sizes(n: int, alpha: float) -> PopulationSizes:
    n1 = min(n - 1, max(1, round(alpha * n)))
    return PopulationSizes(n1=n1, n2=n - n1)


def lln_experiment(
    p: ModelParams,
    lambda_plus: float,
    n_list: list[int],
    t_end: float,
    trials: int,
    seed: int,
    grid_dt: float = 0.01,
) -> LlnReport:
    """Sup-norm deviation of N-particle magnetization paths from the ODE.

    Each total size N is split as n1 = round(alpha*N); every trial shares
    the initial law (spins +1 with probability lambda_plus) with the ODE
    initial condition m(0) = (2*lambda_plus - 1, same).
    """
    grid = make_grid(t_end, grid_dt)
    m_lambda = 2.0 * lambda_plus - 1.0
    ode = integrate_grid((m_lambda, m_lambda), p, grid)
    rows = []
    for n_idx, n in enumerate(n_list):
        sizes = _split_sizes(n, p.alpha)
        c11, c12, c21, c22 = _coeffs(sizes, p)
        out_k1 = np.empty(grid.size, dtype=np.int64)
        out_k2 = np.empty(grid.size, dtype=np.int64)
        devs = np.empty(trials)
        for trial in range(trials):
            rng = stream(seed, (n_idx, trial))
            k1 = int(rng.binomial(sizes.n1, lambda_plus))
            k2 = int(rng.binomial(sizes.n2, lambda_plus))
            _run_grid(
                k1, k2, sizes.n1, sizes.n2, c11, c12, c21, c22, p.h1, p.h2,
                grid, out_k1, out_k2, rng,
            )
            m1 = (2.0 * out_k1 - sizes.n1) / sizes.n1
            m2 = (2.0 * out_k2 - sizes.n2) / sizes.n2
            devs[trial] = max(
                np.abs(m1 - ode[:, 0]).max(), np.abs(m2 - ode[:, 1]).max()
            )
        rows.append(
            LlnRow(
                n=n, trials=trials,
                median_sup_dev=float(np.median(devs)),
                p90_sup_dev=float(np.percentile(devs, 90)),
            )
        )
    return LlnReport(rows=tuple(rows))


def mc_vs_master(
    p: ModelParams,
    sizes: PopulationSizes,
    t: float,
    trials: int,
    seed: int,
    lambda_plus: float = 0.5,
) -> float:
    """Total-variation distance between the empirical lumped law of many
    simulated trajectories at time ``t`` and the forward-equation solution.
    """
    if sizes.n_states() > 10_000:
        raise ValueError("mc_vs_master is meant for small state spaces")
    rng = stream(seed)
    k1s, k2s = sample_states_at(p, sizes, lambda_plus, t, trials, rng)
    counts = np.zeros(sizes.n_states())
    np.add.at(counts, k1s * (sizes.n2 + 1) + k2s, 1.0)
    empirical = counts / trials
    gen = build_generator(sizes, p)
    exact = evolve(gen, initial_distribution(sizes, lambda_plus), t)
    return float(0.5 * np.abs(empirical - exact).sum())


def master_vs_ode(
    p: ModelParams,
    sizes: PopulationSizes,
    times: np.ndarray,
    lambda_plus: float = 0.5,
    state_budget: int = 1_000_000,
) -> float:
    """Sup over the grid of the gap between the finite-N mean magnetization
    (exact forward equation) and the limit ODE, started from the same law."""
    if sizes.n_states() > state_budget:
        raise ValueError("state space exceeds the master-equation budget")
    times = np.asarray(times, dtype=np.float64)
    gen = build_generator(sizes, p)
    dists = evolve_grid(gen, initial_distribution(sizes, lambda_plus), times)
    m_lambda = 2.0 * lambda_plus - 1.0
    ode = integrate_grid((m_lambda, m_lambda), p, times)
    worst = 0.0
    for i in range(times.size):
        m1, m2 = mean_magnetization(dists[i], sizes)
        worst = max(worst, abs(m1 - ode[i, 0]), abs(m2 - ode[i, 1]))
    return worst
