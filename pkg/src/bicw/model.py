"""Core definitions for the two-population mean-field Ising model.

Spins take values in {-1,+1} and are split into two groups of sizes n1 and
n2.  Within group i spins interact with coupling j_ii, across groups with
coupling j12, and each group feels its own external field h_i.  Because the
energy and the flip rates depend on a configuration only through the two
group magnetizations, the pair (m1, m2) is a sufficient statistic and all
functions here are expressed in terms of it (or of the +1-spin counts).

Everything in this module is pure and stateless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

__all__ = [
    "ModelParams",
    "PopulationSizes",
    "finite_n_params",
    "magnetization",
    "interaction_field",
    "flip_rate",
    "hamiltonian",
    "gibbs_log_weight",
    "cramer_entropy",
    "free_energy",
    "free_energy_gradient",
    "free_energy_hessian",
]


@dataclass(frozen=True)
class ModelParams:
    """Static parameters of the model.

    alpha is the fraction of sites in population 1 (used by the mean-field
    and phase operations; finite-N code derives its own fraction from the
    actual group sizes, see :func:`finite_n_params`).  j11 and j22 are the
    intra-group couplings and must be nonnegative; j12 may take either sign
    (ferromagnetic or antiferromagnetic inter-group interaction).
    """

    alpha: float
    j11: float
    j12: float
    j22: float
    h1: float = 0.0
    h2: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (0,1), got {self.alpha}")
        if self.j11 < 0.0 or self.j22 < 0.0:
            raise ValueError("intra-group couplings j11, j22 must be >= 0")
        for name in ("alpha", "j11", "j12", "j22", "h1", "h2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class PopulationSizes:
    """Sizes of the two spin populations; both must be at least 1."""

    n1: int
    n2: int

    def __post_init__(self) -> None:
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("population sizes must be >= 1")

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def alpha(self) -> float:
        """Fraction of sites in population 1 for this finite system."""
        return self.n1 / (self.n1 + self.n2)

    def n_states(self) -> int:
        """Number of lumped (k1, k2) states."""
        return (self.n1 + 1) * (self.n2 + 1)


def finite_n_params(p: ModelParams, sizes: PopulationSizes) -> ModelParams:
    """Return ``p`` with alpha replaced by the fraction n1/(n1+n2).

    All finite-N formulas (energies, Gibbs weights, jump rates) use the
    actual group fraction; the real-valued ``p.alpha`` is authoritative only
    for the infinite-volume operations.
    """
    return replace(p, alpha=sizes.alpha)


def magnetization(k1: int, k2: int, sizes: PopulationSizes) -> tuple[float, float]:
    """Group magnetizations ((2*k1-n1)/n1, (2*k2-n2)/n2) of a lumped state."""
    return (2.0 * k1 - sizes.n1) / sizes.n1, (2.0 * k2 - sizes.n2) / sizes.n2


def interaction_field(i: int, x: tuple[float, float], p: ModelParams) -> float:
    """Interaction part of the effective field felt by a spin in group ``i``.

    Group 1: alpha*j11*x1 + (1-alpha)*j12*x2.
    Group 2: alpha*j12*x1 + (1-alpha)*j22*x2.
    """
    if i == 1:
        return p.alpha * p.j11 * x[0] + (1.0 - p.alpha) * p.j12 * x[1]
    if i == 2:
        return p.alpha * p.j12 * x[0] + (1.0 - p.alpha) * p.j22 * x[1]
    raise ValueError("population index must be 1 or 2")


def flip_rate(spin_value: int, i: int, x: tuple[float, float], p: ModelParams) -> float:
    """Rate exp(-spin * (field_i(x) + h_i)) at which a spin of the given sign
    in group ``i`` flips when the magnetizations are ``x``.  Always positive.
    """
    if spin_value not in (-1, 1):
        raise ValueError("spin_value must be -1 or +1")
    h = p.h1 if i == 1 else p.h2
    return math.exp(-spin_value * (interaction_field(i, x, p) + h))


def hamiltonian(state: tuple[int, int], sizes: PopulationSizes, p: ModelParams) -> float:
    """Energy of a lumped state (k1, k2).

    Uses the block form of the energy in the group magnetizations, with the
    group fraction taken from ``sizes`` (not from ``p.alpha``).
    """
    k1, k2 = state
    if not (0 <= k1 <= sizes.n1 and 0 <= k2 <= sizes.n2):
        raise ValueError(f"state {state} invalid for sizes {sizes}")
    a = sizes.alpha
    n = sizes.n
    m1, m2 = magnetization(k1, k2, sizes)
    quad = (
        a * a * p.j11 * m1 * m1
        + 2.0 * a * (1.0 - a) * p.j12 * m1 * m2
        + (1.0 - a) * (1.0 - a) * p.j22 * m2 * m2
    )
    return -0.5 * n * quad - n * a * p.h1 * m1 - n * (1.0 - a) * p.h2 * m2


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def gibbs_log_weight(state: tuple[int, int], sizes: PopulationSizes, p: ModelParams) -> float:
    """Log of the unnormalized stationary weight of a lumped state.

    log C(n1,k1) + log C(n2,k2) - H(k1,k2).  Exponentiating and normalizing
    over all lumped states gives the exact stationary law of the lumped
    chain.  Kept in the log domain: the raw product overflows for n ~ 100.
    """
    k1, k2 = state
    return _log_binom(sizes.n1, k1) + _log_binom(sizes.n2, k2) - hamiltonian(state, sizes, p)


def cramer_entropy(nu: float) -> float:
    """Large-deviation entropy of the mean of +-1 coin flips, evaluated at
    ``nu`` in [-1, 1].

    Equals ((1-nu)/2)*log((1-nu)/2) + ((1+nu)/2)*log((1+nu)/2) with the
    convention 0*log(0) = 0 at the endpoints; minimum -log(2) at nu = 0.
    """
    if not -1.0 <= nu <= 1.0:
        raise ValueError(f"nu must lie in [-1,1], got {nu}")
    lo = 0.5 * (1.0 - nu)
    hi = 0.5 * (1.0 + nu)
    out = 0.0
    if lo > 0.0:
        out += lo * math.log(lo)
    if hi > 0.0:
        out += hi * math.log(hi)
    return out


def free_energy(nu: tuple[float, float], p: ModelParams) -> float:
    """Asymptotic free energy at the magnetization pair ``nu``.

    Quadratic interaction term plus population-weighted coin-flip entropies.
    The field contribution -alpha*h1*nu1 - (1-alpha)*h2*nu2 is included so
    the function is defined for arbitrary fields; the zero-field case is the
    one used by the phase analysis.
    """
    n1v, n2v = nu
    if not (-1.0 <= n1v <= 1.0 and -1.0 <= n2v <= 1.0):
        raise ValueError(f"nu must lie in [-1,1]^2, got {nu}")
    a = p.alpha
    quad = (
        a * a * p.j11 * n1v * n1v
        + 2.0 * a * (1.0 - a) * p.j12 * n1v * n2v
        + (1.0 - a) * (1.0 - a) * p.j22 * n2v * n2v
    )
    return (
        -0.5 * quad
        - a * p.h1 * n1v
        - (1.0 - a) * p.h2 * n2v
        + a * cramer_entropy(n1v)
        + (1.0 - a) * cramer_entropy(n2v)
    )


def free_energy_gradient(nu: tuple[float, float], p: ModelParams) -> tuple[float, float]:
    """Analytic gradient of :func:`free_energy`; needs |nu_i| < 1 strictly.

    Vanishes exactly at the stationary points of the mean-field dynamics.
    """
    n1v, n2v = nu
    if abs(n1v) >= 1.0 or abs(n2v) >= 1.0:
        raise ValueError("gradient is singular at |nu_i| = 1")
    a = p.alpha
    g1 = a * (math.atanh(n1v) - interaction_field(1, nu, p) - p.h1)
    g2 = (1.0 - a) * (math.atanh(n2v) - interaction_field(2, nu, p) - p.h2)
    return g1, g2


def free_energy_hessian(nu: tuple[float, float], p: ModelParams) -> tuple[float, float, float]:
    """Hessian of :func:`free_energy` as (d11, d12, d22); needs |nu_i| < 1."""
    n1v, n2v = nu
    if abs(n1v) >= 1.0 or abs(n2v) >= 1.0:
        raise ValueError("hessian is singular at |nu_i| = 1")
    a = p.alpha
    d11 = a * (1.0 / (1.0 - n1v * n1v) - a * p.j11)
    d12 = -a * (1.0 - a) * p.j12
    d22 = (1.0 - a) * (1.0 / (1.0 - n2v * n2v) - (1.0 - a) * p.j22)
    return d11, d12, d22
