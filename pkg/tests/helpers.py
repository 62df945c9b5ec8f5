"""Shared test utilities: parameter draws and independent oracles."""

from __future__ import annotations

import math

import numpy as np

from bicw import ModelParams


def draw_params(rng, zero_field: bool = False, jmax: float = 3.0) -> ModelParams:
    return ModelParams(
        alpha=float(rng.uniform(0.15, 0.85)),
        j11=float(rng.uniform(0.0, jmax)),
        j12=float(rng.uniform(-jmax, jmax)),
        j22=float(rng.uniform(0.0, jmax)),
        h1=0.0 if zero_field else float(rng.uniform(-1.0, 1.0)),
        h2=0.0 if zero_field else float(rng.uniform(-1.0, 1.0)),
    )


def tanh_fixed_point(beta: float, tol_iters: int = 200) -> float:
    """Positive root of m = tanh(beta*m) for beta > 1, by bisection."""
    assert beta > 1.0
    lo, hi = 1e-16, 1.0 - 1e-16
    for _ in range(tol_iters):
        mid = 0.5 * (lo + hi)
        if math.tanh(beta * mid) - mid > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def spin_reference_final_counts(p, n1, n2, lambda_plus, t_end, trials, rng):
    """Per-spin event-driven oracle (no lumping); final (k1, k2) per trial.

    Deliberately iterates individual spins so it validates the lumped
    simulator through an independent code path.  Only usable for tiny N.
    """
    n = n1 + n2
    a = n1 / n
    out1 = np.empty(trials, dtype=np.int64)
    out2 = np.empty(trials, dtype=np.int64)
    for tr in range(trials):
        spins = [1 if u < lambda_plus else -1 for u in rng.random(n)]
        t = 0.0
        while True:
            m1 = sum(spins[:n1]) / n1
            m2 = sum(spins[n1:]) / n2
            u1 = a * p.j11 * m1 + (1.0 - a) * p.j12 * m2 + p.h1
            u2 = a * p.j12 * m1 + (1.0 - a) * p.j22 * m2 + p.h2
            rates = [math.exp(-s * u1) for s in spins[:n1]]
            rates += [math.exp(-s * u2) for s in spins[n1:]]
            total = sum(rates)
            t -= math.log1p(-rng.random()) / total
            if t > t_end:
                break
            x = rng.random() * total
            acc = 0.0
            j = n - 1
            for i, r in enumerate(rates):
                acc += r
                if x < acc:
                    j = i
                    break
            spins[j] = -spins[j]
        out1[tr] = sum(1 for s in spins[:n1] if s == 1)
        out2[tr] = sum(1 for s in spins[n1:] if s == 1)
    return out1, out2


def finite_difference_jacobian(fun, m, eps: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of a 2-vector function of (m1, m2)."""
    out = np.empty((2, 2))
    for j in range(2):
        up = list(m)
        dn = list(m)
        up[j] += eps
        dn[j] -= eps
        out[:, j] = (np.asarray(fun(tuple(up))) - np.asarray(fun(tuple(dn)))) / (2.0 * eps)
    return out
