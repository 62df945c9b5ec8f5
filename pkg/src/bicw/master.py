"""Exact transient and stationary analysis of the lumped chain.

The lumped state space is {0..n1} x {0..n2}, indexed row-major:
``index = k1 * (n2 + 1) + k2``.  This convention is shared with the
simulator and the CSV exports.  Distributions are plain 1-D float arrays
over that index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.stats import binom, poisson

from .model import ModelParams, PopulationSizes, finite_n_params, gibbs_log_weight
from .simulate import _total_rates

__all__ = [
    "LumpedGenerator",
    "state_index",
    "index_state",
    "build_generator",
    "initial_distribution",
    "evolve",
    "evolve_grid",
    "stationary",
    "stationary_nullspace",
    "gibbs_distribution",
    "mean_magnetization",
]

DEFAULT_STATE_BUDGET = 4_000_000


@dataclass(frozen=True)
class LumpedGenerator:
    """Conservative rate matrix of the lumped chain (row-sparse CSR).

    Off-diagonal entries are the four channel rates (at most 4 per row);
    each diagonal entry is minus its row sum.
    """

    sizes: PopulationSizes
    params: ModelParams
    matrix: sp.csr_matrix

    @property
    def n_states(self) -> int:
        return self.sizes.n_states()


def state_index(k1: int, k2: int, sizes: PopulationSizes) -> int:
    return k1 * (sizes.n2 + 1) + k2


def index_state(idx: int, sizes: PopulationSizes) -> tuple[int, int]:
    return divmod(idx, sizes.n2 + 1)


def build_generator(
    sizes: PopulationSizes, p: ModelParams, max_states: int = DEFAULT_STATE_BUDGET
) -> LumpedGenerator:
    """Assemble the generator; raises if the state space exceeds the budget.

    Channel entries are computed by the same code path as the simulator's
    rate function, so the two agree exactly.
    """
    n_states = sizes.n_states()
    if n_states > max_states:
        raise ValueError(
            f"state space of size {n_states} exceeds the budget of {max_states}"
        )
    p_eff = finite_n_params(p, sizes)
    n1, n2 = sizes.n1, sizes.n2
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for k1 in range(n1 + 1):
        base = k1 * (n2 + 1)
        for k2 in range(n2 + 1):
            idx = base + k2
            up1, down1, up2, down2 = _total_rates((k1, k2), sizes, p_eff)
            diag = 0.0
            if k1 < n1:
                rows.append(idx); cols.append(idx + (n2 + 1)); vals.append(up1)
                diag += up1
            if k1 > 0:
                rows.append(idx); cols.append(idx - (n2 + 1)); vals.append(down1)
                diag += down1
            if k2 < n2:
                rows.append(idx); cols.append(idx + 1); vals.append(up2)
                diag += up2
            if k2 > 0:
                rows.append(idx); cols.append(idx - 1); vals.append(down2)
                diag += down2
            rows.append(idx); cols.append(idx); vals.append(-diag)
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n_states, n_states)).tocsr()
    return LumpedGenerator(sizes=sizes, params=p, matrix=mat)


def initial_distribution(sizes: PopulationSizes, lambda_plus: float) -> np.ndarray:
    """Product-binomial law of the counts when spins start i.i.d. +1 w.p. lambda_plus."""
    if not 0.0 <= lambda_plus <= 1.0:
        raise ValueError("lambda_plus must lie in [0,1]")
    p1 = binom.pmf(np.arange(sizes.n1 + 1), sizes.n1, lambda_plus)
    p2 = binom.pmf(np.arange(sizes.n2 + 1), sizes.n2, lambda_plus)
    return np.outer(p1, p2).ravel()


def _uniformized(gen: LumpedGenerator) -> tuple[sp.csr_matrix, float]:
    q = gen.matrix
    lam = float(-q.diagonal().min())
    if lam <= 0.0:
        raise RuntimeError("generator has no activity")
    # pt[j,i] multiplies state-j mass into state-i: pt @ v computes v @ P.
    pt = (sp.identity(q.shape[0], format="csr") + q.multiply(1.0 / lam)).T.tocsr()
    return pt, lam

_MAX_UNIFORMIZATION_TERMS = 50_000_000


def evolve(
    gen: LumpedGenerator, p0: np.ndarray, t: float, tail: float = 1e-13
) -> np.ndarray:
    """Propagate a distribution to time ``t`` along the forward equation.

    Parameters
    ----------
    gen : LumpedGenerator
    p0 : ndarray
        Initial distribution over the lumped states.
    t : float
        Nonnegative time horizon.
    tail : float
        Truncation mass of the randomization series; the returned vector is
        nonnegative and sums to 1 up to this deficit.

    Uses uniformization: p(t) = sum_k Poisson(lam*t; k) * p0 P^k with
    P = I + Q/lam.  Every term is nonnegative, so no clipping is needed.
    """
    p0 = np.asarray(p0, dtype=np.float64)
    if p0.shape != (gen.n_states,):
        raise ValueError("p0 has the wrong length for this generator")
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return p0.copy()
    pt, lam = _uniformized(gen)
    return _propagate(pt, lam, p0, t, tail)


def _propagate(pt: sp.csr_matrix, lam: float, p0: np.ndarray, dt: float, tail: float) -> np.ndarray:
    mu = lam * dt
    k_max = int(poisson.ppf(1.0 - tail, mu)) + 1
    if k_max > _MAX_UNIFORMIZATION_TERMS:
        raise RuntimeError(
            f"uniformization needs {k_max} terms (rate {lam:.3g} over dt {dt:.3g}); "
            "split the interval or reduce the horizon"
        )
    weights = poisson.pmf(np.arange(k_max + 1), mu)
    v = p0.copy()
    acc = weights[0] * v
    for k in range(1, k_max + 1):
        v = pt @ v
        acc += weights[k] * v
    return acc


def evolve_grid(gen: LumpedGenerator, p0: np.ndarray, times: np.ndarray, tail: float = 1e-13) -> np.ndarray:
    """Distributions at each grid time (increasing, starting at >= 0); one
    uniformization pass per interval, reusing the previous solution."""
    times = np.asarray(times, dtype=np.float64)
    if times.size == 0:
        return np.empty((0, gen.n_states))
    if np.any(np.diff(times) < 0.0) or times[0] < 0.0:
        raise ValueError("times must be nondecreasing and nonnegative")
    pt, lam = _uniformized(gen)
    out = np.empty((times.size, gen.n_states), dtype=np.float64)
    v = np.asarray(p0, dtype=np.float64).copy()
    t_prev = 0.0
    for i, t in enumerate(times):
        dt = t - t_prev
        if dt > 0.0:
            v = _propagate(pt, lam, v, dt, tail)
        out[i] = v
        t_prev = t
    return out


def gibbs_distribution(sizes: PopulationSizes, p: ModelParams) -> np.ndarray:
    """Normalized exponential of the lumped log weights (log-sum-exp stable)."""
    logw = np.empty(sizes.n_states(), dtype=np.float64)
    for k1 in range(sizes.n1 + 1):
        base = k1 * (sizes.n2 + 1)
        for k2 in range(sizes.n2 + 1):
            logw[base + k2] = gibbs_log_weight((k1, k2), sizes, p)
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


def stationary(gen: LumpedGenerator, residual_tol: float = 1e-8) -> np.ndarray:
    """Stationary distribution of the lumped chain.

    Computed directly from the closed-form reversible weights and verified
    against the generator: raises if ||pi^T Q||_inf exceeds ``residual_tol``
    scaled by the largest exit rate (which would indicate an assembly bug).
    """
    pi = gibbs_distribution(gen.sizes, gen.params)
    lam = float(-gen.matrix.diagonal().min())
    residual = float(np.abs(pi @ gen.matrix).max())
    if residual > residual_tol * max(1.0, lam):
        raise RuntimeError(
            f"stationary residual {residual:.3e} exceeds tolerance; "
            "generator and weights disagree"
        )
    return pi


def stationary_nullspace(gen: LumpedGenerator, max_states: int = 20_000) -> np.ndarray:
    """Stationary distribution via a dense least-squares null-space solve.

    Independent cross-check path for :func:`stationary`; dense, so limited
    to small state spaces.
    """
    n = gen.n_states
    if n > max_states:
        raise ValueError(f"nullspace solve limited to {max_states} states, got {n}")
    a = np.vstack([gen.matrix.toarray().T, np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    return pi / pi.sum()


def mean_magnetization(d: np.ndarray, sizes: PopulationSizes) -> tuple[float, float]:
    """Expected (m1, m2) under a lumped distribution."""
    d = np.asarray(d, dtype=np.float64)
    if d.shape != (sizes.n_states(),):
        raise ValueError("distribution has the wrong length for these sizes")
    k1 = np.repeat(np.arange(sizes.n1 + 1), sizes.n2 + 1)
    k2 = np.tile(np.arange(sizes.n2 + 1), sizes.n1 + 1)
    m1 = float(d @ ((2.0 * k1 - sizes.n1) / sizes.n1))
    m2 = float(d @ ((2.0 * k2 - sizes.n2) / sizes.n2))
    return m1, m2
