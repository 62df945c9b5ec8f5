"""Exact continuous-time Glauber simulation of the finite system.

The N-spin dynamics is simulated through the lumped chain on the +1-spin
counts (k1, k2): rates depend on a configuration only through the spin sign
and the group magnetizations, so lumping is exact and the cost per event is
O(1) regardless of N.  Events are generated with the direct stochastic
simulation algorithm (exponential holding time, then one of the four
channels k1+-1 / k2+-1 chosen proportionally to its rate).

Randomness comes from counter-based Philox streams: trial ``i`` of an
ensemble uses the stream spawned from (seed, i), so results are independent
of any execution order and reproducible bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .model import ModelParams, PopulationSizes, finite_n_params, flip_rate, magnetization

__all__ = [
    "SimConfig",
    "Trajectory",
    "EnsembleStats",
    "stream",
    "init_state",
    "total_rates",
    "step",
    "simulate",
    "ensemble",
    "sample_states_at",
    "make_grid",
]

_EVENT_CHUNK = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    """Configuration of one stochastic run.

    ``lambda_plus`` is the probability that a spin starts at +1 (shared by
    both populations).  ``record_mode`` is "events" (one sample per jump) or
    "grid" (piecewise-constant state read on a uniform grid of spacing
    ``dt``).
    """

    params: ModelParams
    sizes: PopulationSizes
    t_end: float
    lambda_plus: float = 0.5
    seed: int = 0
    record_mode: str = "events"
    dt: float | None = None

    def __post_init__(self) -> None:
        if self.t_end <= 0.0:
            raise ValueError("t_end must be positive")
        if not 0.0 <= self.lambda_plus <= 1.0:
            raise ValueError("lambda_plus must lie in [0,1]")
        if self.record_mode not in ("events", "grid"):
            raise ValueError("record_mode must be 'events' or 'grid'")
        if self.record_mode == "grid":
            if self.dt is None or self.dt <= 0.0:
                raise ValueError("grid recording requires a positive dt")


@dataclass(frozen=True)
class Trajectory:
    """Sampled magnetization path.

    ``times`` starts at 0 and ends at t_end.  In event mode every interior
    sample differs from its predecessor by exactly one flip (2/n1 in m1 or
    2/n2 in m2); a final sample repeating the last state is appended at
    t_end so the path always covers the full horizon.
    """

    times: np.ndarray
    m: np.ndarray  # shape (len(times), 2)
    jump_count: int


@dataclass(frozen=True)
class EnsembleStats:
    """Per-time mean and variance of (m1, m2) over independent trials."""

    times: np.ndarray
    mean: np.ndarray  # shape (len(times), 2)
    var: np.ndarray   # shape (len(times), 2), ddof=1; zeros for trials == 1
    trials: int
    total_jumps: int = 0


def stream(seed: int, key: tuple[int, ...] = ()) -> np.random.Generator:
    """Counter-based RNG stream for (seed, key); distinct keys are independent."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def make_grid(t_end: float, dt: float) -> np.ndarray:
    """Uniform grid 0, dt, 2*dt, ... with the last point snapped to t_end."""
    n = int(math.floor(t_end / dt + 1e-9))
    grid = dt * np.arange(n + 1, dtype=np.float64)
    if grid[-1] < t_end - 1e-12 * max(1.0, t_end):
        grid = np.append(grid, t_end)
    else:
        grid[-1] = t_end
    return grid


def init_state(cfg: SimConfig, rng: np.random.Generator) -> tuple[int, int]:
    """Draw the initial counts: k_i ~ Binomial(n_i, lambda_plus), independent."""
    k1 = int(rng.binomial(cfg.sizes.n1, cfg.lambda_plus))
    k2 = int(rng.binomial(cfg.sizes.n2, cfg.lambda_plus))
    return k1, k2


def total_rates(
    state: tuple[int, int], sizes: PopulationSizes, p: ModelParams
) -> tuple[float, float, float, float]:
    """Channel rates (up1, down1, up2, down2) out of a lumped state.

    up_i counts the -1 spins of group i times their flip rate at the current
    magnetizations; down_i the +1 spins.  Uses the finite-N group fraction.
    """
    return _total_rates(state, sizes, finite_n_params(p, sizes))


def _total_rates(state, sizes, p_eff):
    # p_eff must already carry the finite-N alpha.
    k1, k2 = state
    if not (0 <= k1 <= sizes.n1 and 0 <= k2 <= sizes.n2):
        raise ValueError(f"state {state} invalid for sizes {sizes}")
    m = magnetization(k1, k2, sizes)
    up1 = (sizes.n1 - k1) * flip_rate(-1, 1, m, p_eff)
    down1 = k1 * flip_rate(+1, 1, m, p_eff)
    up2 = (sizes.n2 - k2) * flip_rate(-1, 2, m, p_eff)
    down2 = k2 * flip_rate(+1, 2, m, p_eff)
    return up1, down1, up2, down2


def step(
    state: tuple[int, int], t: float, cfg: SimConfig, rng: np.random.Generator
) -> tuple[tuple[int, int], float]:
    """One jump of the lumped chain: returns the new state and event time."""
    up1, down1, up2, down2 = total_rates(state, cfg.sizes, cfg.params)
    total = up1 + down1 + up2 + down2
    dt = -math.log1p(-rng.random()) / total
    r = rng.random() * total
    k1, k2 = state
    if r < up1:
        k1 += 1
    elif r < up1 + down1:
        k1 -= 1
    elif r < up1 + down1 + up2:
        k2 += 1
    else:
        k2 -= 1
    return (k1, k2), t + dt


def _coeffs(sizes: PopulationSizes, p: ModelParams):
    a = sizes.alpha
    return a * p.j11, (1.0 - a) * p.j12, a * p.j12, (1.0 - a) * p.j22


@njit(cache=True)
def _channel(k1, k2, n1, n2, c11, c12, c21, c22, h1, h2, r):
    # r is uniform on [0, total); returns updated (k1, k2) and the total rate.
    m1 = (2.0 * k1 - n1) / n1
    m2 = (2.0 * k2 - n2) / n2
    u1 = c11 * m1 + c12 * m2 + h1
    u2 = c21 * m1 + c22 * m2 + h2
    up1 = (n1 - k1) * math.exp(u1)
    down1 = k1 * math.exp(-u1)
    up2 = (n2 - k2) * math.exp(u2)
    down2 = k2 * math.exp(-u2)
    total = up1 + down1 + up2 + down2
    x = r * total
    if x < up1:
        k1 += 1
    elif x < up1 + down1:
        k1 -= 1
    elif x < up1 + down1 + up2:
        k2 += 1
    else:
        k2 -= 1
    return k1, k2, total


@njit(cache=True)
def _exit_rate(k1, k2, n1, n2, c11, c12, c21, c22, h1, h2):
    m1 = (2.0 * k1 - n1) / n1
    m2 = (2.0 * k2 - n2) / n2
    u1 = c11 * m1 + c12 * m2 + h1
    u2 = c21 * m1 + c22 * m2 + h2
    return (
        (n1 - k1) * math.exp(u1)
        + k1 * math.exp(-u1)
        + (n2 - k2) * math.exp(u2)
        + k2 * math.exp(-u2)
    )


@njit(cache=True)
def _run_grid(k1, k2, n1, n2, c11, c12, c21, c22, h1, h2, grid, out_k1, out_k2, rng):
    """Simulate to grid[-1], writing the right-continuous state at each grid time."""
    t = 0.0
    g = 0
    jumps = 0
    t_end = grid[-1]
    while True:
        total = _exit_rate(k1, k2, n1, n2, c11, c12, c21, c22, h1, h2)
        t_next = t + (-math.log1p(-rng.random()) / total)
        while g < grid.size and grid[g] < t_next:
            out_k1[g] = k1
            out_k2[g] = k2
            g += 1
        if t_next > t_end:
            break
        k1, k2, _ = _channel(k1, k2, n1, n2, c11, c12, c21, c22, h1, h2, rng.random())
        jumps += 1
        t = t_next
    while g < grid.size:
        out_k1[g] = k1
        out_k2[g] = k2
        g += 1
    return k1, k2, jumps


@njit(cache=True)
def _run_events_chunk(k1, k2, n1, n2, c11, c12, c21, c22, h1, h2, t, t_end, buf_t, buf_k1, buf_k2, rng):
    """Fill event buffers until t_end or until the buffers are full."""
    n = 0
    cap = buf_t.size
    done = False
    while n < cap:
        total = _exit_rate(k1, k2, n1, n2, c11, c12, c21, c22, h1, h2)
        t_next = t + (-math.log1p(-rng.random()) / total)
        if t_next > t_end:
            done = True
            break
        k1, k2, _ = _channel(k1, k2, n1, n2, c11, c12, c21, c22, h1, h2, rng.random())
        t = t_next
        buf_t[n] = t
        buf_k1[n] = k1
        buf_k2[n] = k2
        n += 1
    return n, t, k1, k2, done


@njit(cache=True)
def _run_batch_final(k1s, k2s, n1, n2, c11, c12, c21, c22, h1, h2, t_end, rng):
    """Evolve many initial states to t_end in place (shared stream, sequential)."""
    for i in range(k1s.size):
        k1 = k1s[i]
        k2 = k2s[i]
        t = 0.0
        while True:
            total = _exit_rate(k1, k2, n1, n2, c11, c12, c21, c22, h1, h2)
            t += -math.log1p(-rng.random()) / total
            if t > t_end:
                break
            k1, k2, _ = _channel(k1, k2, n1, n2, c11, c12, c21, c22, h1, h2, rng.random())
        k1s[i] = k1
        k2s[i] = k2


def _counts_to_m(k1, k2, sizes: PopulationSizes) -> np.ndarray:
    m = np.empty((np.size(k1), 2), dtype=np.float64)
    m[:, 0] = (2.0 * np.asarray(k1, dtype=np.float64) - sizes.n1) / sizes.n1
    m[:, 1] = (2.0 * np.asarray(k2, dtype=np.float64) - sizes.n2) / sizes.n2
    return m


def simulate(cfg: SimConfig, rng: np.random.Generator | None = None) -> Trajectory:
    """Run one trajectory; deterministic given cfg.seed (or the given stream).

    Uses the (seed, trial=0) stream, so a one-trial ensemble on the same
    grid reproduces it exactly.
    """
    if rng is None:
        rng = stream(cfg.seed, (0,))
    sizes = cfg.sizes
    c11, c12, c21, c22 = _coeffs(sizes, cfg.params)
    h1, h2 = cfg.params.h1, cfg.params.h2
    k1, k2 = init_state(cfg, rng)

    if cfg.record_mode == "grid":
        grid = make_grid(cfg.t_end, cfg.dt)
        out_k1 = np.empty(grid.size, dtype=np.int64)
        out_k2 = np.empty(grid.size, dtype=np.int64)
        _, _, jumps = _run_grid(
            k1, k2, sizes.n1, sizes.n2, c11, c12, c21, c22, h1, h2, grid, out_k1, out_k2, rng
        )
        return Trajectory(times=grid, m=_counts_to_m(out_k1, out_k2, sizes), jump_count=int(jumps))

    times = [np.array([0.0])]
    ks1 = [np.array([k1], dtype=np.int64)]
    ks2 = [np.array([k2], dtype=np.int64)]
    t = 0.0
    jumps = 0
    while True:
        buf_t = np.empty(_EVENT_CHUNK, dtype=np.float64)
        buf_k1 = np.empty(_EVENT_CHUNK, dtype=np.int64)
        buf_k2 = np.empty(_EVENT_CHUNK, dtype=np.int64)
        n, t, k1, k2, done = _run_events_chunk(
            k1, k2, sizes.n1, sizes.n2, c11, c12, c21, c22, h1, h2, t, cfg.t_end,
            buf_t, buf_k1, buf_k2, rng,
        )
        if n:
            times.append(buf_t[:n].copy())
            ks1.append(buf_k1[:n].copy())
            ks2.append(buf_k2[:n].copy())
            jumps += n
        if done:
            break
    t_arr = np.concatenate(times)
    k1_arr = np.concatenate(ks1)
    k2_arr = np.concatenate(ks2)
    # Closing sample: repeat the final state at t_end.
    t_arr = np.append(t_arr, cfg.t_end)
    k1_arr = np.append(k1_arr, k1_arr[-1])
    k2_arr = np.append(k2_arr, k2_arr[-1])
    return Trajectory(times=t_arr, m=_counts_to_m(k1_arr, k2_arr, sizes), jump_count=jumps)


def ensemble(cfg: SimConfig, trials: int, grid: np.ndarray) -> EnsembleStats:
    """Mean and variance of the magnetization path over independent trials.

    Trial i runs on the stream spawned from (cfg.seed, i); the aggregation
    order is fixed, so the result does not depend on scheduling.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    grid = np.asarray(grid, dtype=np.float64)
    sizes = cfg.sizes
    c11, c12, c21, c22 = _coeffs(sizes, cfg.params)
    h1, h2 = cfg.params.h1, cfg.params.h2
    all_m = np.empty((trials, grid.size, 2), dtype=np.float64)
    out_k1 = np.empty(grid.size, dtype=np.int64)
    out_k2 = np.empty(grid.size, dtype=np.int64)
    total_jumps = 0
    for i in range(trials):
        rng = stream(cfg.seed, (i,))
        k1 = int(rng.binomial(sizes.n1, cfg.lambda_plus))
        k2 = int(rng.binomial(sizes.n2, cfg.lambda_plus))
        _, _, jumps = _run_grid(
            k1, k2, sizes.n1, sizes.n2, c11, c12, c21, c22, h1, h2, grid, out_k1, out_k2, rng
        )
        total_jumps += int(jumps)
        all_m[i, :, 0] = (2.0 * out_k1 - sizes.n1) / sizes.n1
        all_m[i, :, 1] = (2.0 * out_k2 - sizes.n2) / sizes.n2
    mean = all_m.mean(axis=0)
    var = all_m.var(axis=0, ddof=1) if trials > 1 else np.zeros_like(mean)
    return EnsembleStats(times=grid, mean=mean, var=var, trials=trials, total_jumps=total_jumps)


def sample_states_at(
    p: ModelParams,
    sizes: PopulationSizes,
    lambda_plus: float,
    t: float,
    trials: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Final lumped states of many trajectories at time ``t`` (shared stream)."""
    k1s = rng.binomial(sizes.n1, lambda_plus, size=trials).astype(np.int64)
    k2s = rng.binomial(sizes.n2, lambda_plus, size=trials).astype(np.int64)
    c11, c12, c21, c22 = _coeffs(sizes, p)
    _run_batch_final(k1s, k2s, sizes.n1, sizes.n2, c11, c12, c21, c22, p.h1, p.h2, t, rng)
    return k1s, k2s
