"""Zero-field phase diagram: equilibria, stability, thresholds, sweeps.

Stationary pairs solve

    m1 = tanh(a*j11*m1 + (1-a)*j12*m2)
    m2 = tanh(a*j12*m1 + (1-a)*j22*m2)        (a = alpha, h = 0).

For j12 != 0 the first equation inverts to the dm1/dt = 0 nullcline
m2 = (atanh(m1) - a*j11*m1) / ((1-a)*j12), so every equilibrium is a root of
the scalar residual g(m1) = nullcline1(m1) - tanh(a*j12*m1 +
(1-a)*j22*nullcline1(m1)).  The finder scans g on a dense grid, brackets
sign changes (with a refinement pass around sampled extrema so that almost
tangent root pairs are not stepped over), and polishes each bracket with a
two-dimensional Newton iteration on the full system.

The equilibrium count changes at the closed-form coupling threshold where
the origin loses stability and, when both groups are supercritical, at a
second threshold where two equilibrium pairs merge in a tangency of the two
nullclines; the latter has no closed form and is located by bisection on
the equilibrium count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .meanfield import eigenvalues, vector_field
from .model import (
    ModelParams,
    free_energy,
    free_energy_gradient,
    free_energy_hessian,
)

__all__ = [
    "EquilibriumPoint",
    "PhaseRegion",
    "FreeEnergyReport",
    "SweepRow",
    "REGION_COUNTS",
    "nullcline1",
    "nullcline2",
    "find_equilibria",
    "j12_critical",
    "j12_tangency_critical",
    "tangency_residual",
    "phase_region",
    "sweep",
    "free_energy_check",
]

REGION_COUNTS = {"A1": 1, "A2": 3, "B": 3, "C1": 9, "C2": 5, "C3": 3}

CLASSIFY_EPS = 1e-8
RESIDUAL_TOL = 1e-10
MERGE_TOL = 1e-7
BOUNDARY_TOL = 1e-9
SCAN_POINTS = 4001
_SCAN_DELTA = 1e-9


@dataclass(frozen=True)
class EquilibriumPoint:
    """A stationary pair with its eigenvalue pair and stability class."""

    m1: float
    m2: float
    lambda_minus: float
    lambda_plus: float
    stability: str  # "stable" | "saddle" | "unstable" | "neutral"

    @property
    def m(self) -> tuple[float, float]:
        return (self.m1, self.m2)


@dataclass(frozen=True)
class PhaseRegion:
    """Region label with its equilibrium count; ``boundary`` marks parameter
    points within 1e-9 of an analytic threshold, where the classification is
    degenerate rather than wrong."""

    label: str
    expected_count: int
    boundary: bool


@dataclass(frozen=True)
class SweepRow:
    alpha_j11: float
    j12: float
    region: str
    count: int
    boundary: bool


@dataclass(frozen=True)
class FreeEnergyRow:
    m1: float
    m2: float
    stability: str
    value: float
    grad_norm: float
    landscape: str  # "minimum" | "saddle" | "maximum" | "degenerate"


@dataclass(frozen=True)
class FreeEnergyReport:
    rows: tuple[FreeEnergyRow, ...]
    gradients_vanish: bool
    hessian_matches: bool
    stable_pair_is_global_min: bool | None
    mismatches: tuple[str, ...]


def _require_zero_field(p: ModelParams) -> None:
    if p.h1 != 0.0 or p.h2 != 0.0:
        raise ValueError("phase analysis requires zero field")


def nullcline1(m1: float, p: ModelParams) -> float:
    """m2 along the dm1/dt = 0 curve, as a function of m1 in (-1, 1)."""
    if p.j12 == 0.0:
        raise ValueError("nullcline inversion requires j12 != 0")
    if not -1.0 < m1 < 1.0:
        raise ValueError("m1 must lie strictly inside (-1, 1)")
    return (math.atanh(m1) - p.alpha * p.j11 * m1) / ((1.0 - p.alpha) * p.j12)


def nullcline2(m2: float, p: ModelParams) -> float:
    """m1 along the dm2/dt = 0 curve, as a function of m2 in (-1, 1)."""
    if p.j12 == 0.0:
        raise ValueError("nullcline inversion requires j12 != 0")
    if not -1.0 < m2 < 1.0:
        raise ValueError("m2 must lie strictly inside (-1, 1)")
    return (math.atanh(m2) - (1.0 - p.alpha) * p.j22 * m2) / (p.alpha * p.j12)


def _scan_residual(x: np.ndarray, a: float, j11: float, j12: float, j22: float) -> np.ndarray:
    gamma = (np.arctanh(x) - a * j11 * x) / ((1.0 - a) * j12)
    return gamma - np.tanh(a * j12 * x + (1.0 - a) * j22 * gamma)


def _g_scalar(x: float, a: float, j11: float, j12: float, j22: float) -> float:
    gamma = (math.atanh(x) - a * j11 * x) / ((1.0 - a) * j12)
    return gamma - math.tanh(a * j12 * x + (1.0 - a) * j22 * gamma)


def _newton_polish(
    m1: float, m2: float, a: float, j11: float, j12: float, j22: float, max_iter: int = 80
) -> tuple[float, float, bool]:
    """Newton iteration on (m1 - tanh(u1), m2 - tanh(u2)); quadratic near a
    root, clipped to the open square."""
    lim = 1.0 - 1e-15
    for _ in range(max_iter):
        u1 = a * j11 * m1 + (1.0 - a) * j12 * m2
        u2 = a * j12 * m1 + (1.0 - a) * j22 * m2
        t1 = math.tanh(u1)
        t2 = math.tanh(u2)
        f1 = m1 - t1
        f2 = m2 - t2
        if abs(f1) < 1e-15 and abs(f2) < 1e-15:
            return m1, m2, True
        d1 = 1.0 - t1 * t1
        d2 = 1.0 - t2 * t2
        a11 = 1.0 - d1 * a * j11
        a12 = -d1 * (1.0 - a) * j12
        a21 = -d2 * a * j12
        a22 = 1.0 - d2 * (1.0 - a) * j22
        det = a11 * a22 - a12 * a21
        if det == 0.0:
            return m1, m2, False
        m1 = min(lim, max(-lim, m1 - (f1 * a22 - f2 * a12) / det))
        m2 = min(lim, max(-lim, m2 - (a11 * f2 - a21 * f1) / det))
    u1 = a * j11 * m1 + (1.0 - a) * j12 * m2
    u2 = a * j12 * m1 + (1.0 - a) * j22 * m2
    ok = abs(m1 - math.tanh(u1)) < 1e-13 and abs(m2 - math.tanh(u2)) < 1e-13
    return m1, m2, ok


def _bisect_root(
    lo: float, hi: float, a: float, j11: float, j12: float, j22: float, width: float = 1e-8
) -> float:
    flo = _g_scalar(lo, a, j11, j12, j22)
    for _ in range(200):
        if hi - lo <= width:
            break
        mid = 0.5 * (lo + hi)
        fmid = _g_scalar(mid, a, j11, j12, j22)
        if fmid == 0.0:
            return mid
        if (flo < 0.0) != (fmid < 0.0):
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def _scalar_cw_roots(beta: float) -> list[float]:
    """Solutions of m = tanh(beta*m): {0} if beta <= 1, else {-m*, 0, m*}."""
    if beta <= 1.0:
        return [0.0]
    lo, hi = 1e-16, 1.0 - 1e-16
    f = lambda m: math.tanh(beta * m) - m
    # slope at 0 exceeds 1, so f > 0 just right of 0 and f < 0 at 1.
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    return [-root, 0.0, root]


def _classify(lam_minus: float, lam_plus: float, eps: float = CLASSIFY_EPS) -> str:
    if abs(lam_plus) <= eps:
        return "neutral"
    if lam_plus < -eps:
        return "stable"
    if lam_minus > eps:
        return "unstable"
    if lam_minus < -eps:
        return "saddle"
    return "neutral"


def _make_point(m1: float, m2: float, p: ModelParams) -> EquilibriumPoint:
    lam_minus, lam_plus = eigenvalues((m1, m2), p)
    return EquilibriumPoint(
        m1=m1, m2=m2, lambda_minus=lam_minus, lambda_plus=lam_plus,
        stability=_classify(lam_minus, lam_plus),
    )


def _collect_brackets(xs: np.ndarray, g: np.ndarray) -> list[tuple[float, float]]:
    brackets: list[tuple[float, float]] = []
    sign = np.sign(g)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0.0)[0]
    for i in flips:
        brackets.append((xs[i], xs[i + 1]))
    zeros = np.nonzero(sign == 0.0)[0]
    for i in zeros:
        lo = xs[max(i - 1, 0)]
        hi = xs[min(i + 1, xs.size - 1)]
        brackets.append((lo, hi))
    return brackets


def find_equilibria(p: ModelParams, scan_points: int = SCAN_POINTS) -> list[EquilibriumPoint]:
    """All stationary pairs of the zero-field dynamics, classified.

    The returned list always contains the origin, is closed under negation,
    and every point satisfies ||rhs||_inf < 1e-10.  Raises if a field is
    nonzero.  The degenerate j12 = 0 case is solved as the product of the
    two decoupled single-group fixed-point sets.
    """
    _require_zero_field(p)
    a, j11, j12, j22 = p.alpha, p.j11, p.j12, p.j22

    roots: list[tuple[float, float]] = [(0.0, 0.0)]
    if j12 == 0.0:
        for r1 in _scalar_cw_roots(a * j11):
            for r2 in _scalar_cw_roots((1.0 - a) * j22):
                roots.append((r1, r2))
    else:
        xs = np.linspace(-1.0 + _SCAN_DELTA, 1.0 - _SCAN_DELTA, scan_points)
        g = _scan_residual(xs, a, j11, j12, j22)
        brackets = _collect_brackets(xs, g)
        # Refinement pass: a sampled extremum that stays on one side of zero
        # may hide a pair of nearly merged roots; rescan those cells densely.
        interior = np.arange(1, xs.size - 1)
        is_ext = (g[interior] - g[interior - 1]) * (g[interior + 1] - g[interior]) < 0.0
        for i in interior[is_ext]:
            if np.sign(g[i - 1]) != np.sign(g[i + 1]):
                continue  # already bracketed
            fine = np.linspace(xs[i - 1], xs[i + 1], 401)
            brackets.extend(_collect_brackets(fine, _scan_residual(fine, a, j11, j12, j22)))
        for lo, hi in brackets:
            x0 = _bisect_root(lo, hi, a, j11, j12, j22)
            y0 = min(1.0 - 1e-15, max(-1.0 + 1e-15, nullcline1(x0, p)))
            m1, m2, ok = _newton_polish(x0, y0, a, j11, j12, j22)
            if ok:
                roots.append((m1, m2))
        # For weak coupling the roots sit in O(j12)-wide clusters around the
        # decoupled fixed-point grid, below the scan resolution; polishing
        # from those seeds recovers them (converged points are always genuine
        # roots, and duplicates merge below).
        for r1 in _scalar_cw_roots(a * j11):
            for r2 in _scalar_cw_roots((1.0 - a) * j22):
                m1, m2, ok = _newton_polish(r1, r2, a, j11, j12, j22)
                if ok:
                    roots.append((m1, m2))

    # Close under negation (the zero-field system is odd), then merge.
    roots.extend([(-m1, -m2) for m1, m2 in roots])
    roots.sort()
    merged: list[tuple[float, float]] = []
    for cand in roots:
        if any(
            max(abs(cand[0] - q[0]), abs(cand[1] - q[1])) < MERGE_TOL for q in merged
        ):
            continue
        merged.append(cand)

    points = []
    for m1, m2 in merged:
        resid = float(np.abs(vector_field((m1, m2), p)).max())
        if resid > RESIDUAL_TOL:
            raise RuntimeError(
                f"equilibrium candidate ({m1:.6g}, {m2:.6g}) failed to refine "
                f"(residual {resid:.3e})"
            )
        points.append(_make_point(m1, m2, p))
    points.sort(key=lambda q: (q.m1, q.m2))
    return points


def j12_critical(p: ModelParams) -> float:
    """Closed-form |j12| threshold at which the origin changes character.

    Defined when (1 - alpha*j11) and (1 - (1-alpha)*j22) have the same sign;
    raises in the mixed case, where no such threshold exists.
    """
    a = p.alpha
    radicand = (1.0 - a * p.j11) * (1.0 - (1.0 - a) * p.j22)
    if radicand < 0.0:
        raise ValueError(
            "threshold undefined: one group is supercritical and the other is not"
        )
    return math.sqrt(radicand / (a * (1.0 - a)))


def _count_at(p: ModelParams, j12: float) -> int:
    return len(find_equilibria(replace(p, j12=j12)))


def j12_tangency_critical(p: ModelParams, width: float = 1e-8) -> float:
    """Second threshold inside the doubly supercritical region, located by
    bisection on the equilibrium count (nine below, five above).

    Requires alpha*j11 > 1 and (1-alpha)*j22 > 1; the result lies strictly
    between 0 and :func:`j12_critical`.
    """
    a = p.alpha
    if not (a * p.j11 > 1.0 and (1.0 - a) * p.j22 > 1.0):
        raise ValueError("tangency threshold requires both groups supercritical")
    jc = j12_critical(p)
    # Probing closer to jc than ~1e-6 is pointless: the saddle pair merging
    # into the origin there makes root identification degenerate.
    hi = jc * (1.0 - 1e-6)
    if _count_at(p, hi) >= 9:
        raise RuntimeError(f"still nine equilibria at j12 = {hi:.6g}; cannot bracket")
    # Walk down geometrically to find a coupling with nine equilibria; each
    # failed probe tightens the upper end of the bracket.
    lo = None
    x = 0.5 * jc
    floor = jc * 1e-7
    while x > floor:
        if _count_at(p, x) >= 9:
            lo = x
            break
        hi = x
        x *= 0.5
    if lo is None:
        raise RuntimeError(f"no nine-equilibria phase found above j12 = {floor:.3e}")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if _count_at(p, mid) >= 9:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def tangency_residual(p: ModelParams, j12_tilde: float | None = None) -> float:
    """Consistency check for the count-bisection threshold.

    Refines candidate tangency points (midpoints of the closest
    stable/saddle pairs just below the threshold) on the three-equation
    system {both stationarity equations, coupling = tangency coupling} and
    returns the smallest infinity-norm residual of that system evaluated at
    the bisected threshold.
    """
    from scipy.optimize import root

    _require_zero_field(p)
    a, j11, j22 = p.alpha, p.j11, p.j22
    if j12_tilde is None:
        j12_tilde = j12_tangency_critical(p)

    def system(z):
        m1, m2, j = z
        m1 = min(1.0 - 1e-12, max(-1.0 + 1e-12, m1))
        m2 = min(1.0 - 1e-12, max(-1.0 + 1e-12, m2))
        g1 = m1 - math.tanh(a * j11 * m1 + (1.0 - a) * j * m2)
        g2 = m2 - math.tanh(a * j * m1 + (1.0 - a) * j22 * m2)
        q1 = 1.0 / (1.0 - m1 * m1) - a * j11
        q2 = 1.0 / (1.0 - m2 * m2) - (1.0 - a) * j22
        g3 = a * (1.0 - a) * j * j - q1 * q2
        return [g1, g2, g3]

    def residual_at(m1, m2):
        g1, g2, _ = system([m1, m2, j12_tilde])
        q1 = 1.0 / (1.0 - m1 * m1) - a * j11
        q2 = 1.0 / (1.0 - m2 * m2) - (1.0 - a) * j22
        g3 = j12_tilde - math.sqrt(max(0.0, q1 * q2) / (a * (1.0 - a)))
        return max(abs(g1), abs(g2), abs(g3))

    eqs = find_equilibria(replace(p, j12=j12_tilde * (1.0 - 1e-3)))
    stables = [q for q in eqs if q.stability == "stable"]
    saddles = [q for q in eqs if q.stability == "saddle"]
    pairs = sorted(
        ((math.hypot(s.m1 - t.m1, s.m2 - t.m2), s, t) for s in stables for t in saddles),
        key=lambda e: e[0],
    )
    best = math.inf
    for _, s, t in pairs[:4]:
        seed = [0.5 * (s.m1 + t.m1), 0.5 * (s.m2 + t.m2), j12_tilde]
        sol = root(system, seed, method="hybr", tol=1e-12)
        if sol.success:
            best = min(best, residual_at(sol.x[0], sol.x[1]))
    if not math.isfinite(best):
        raise RuntimeError("tangency refinement failed from every candidate seed")
    return best


def phase_region(p: ModelParams, j12_tilde: float | None = None) -> PhaseRegion:
    """Region label from the analytic case analysis at zero field.

    ``j12_tilde`` may supply a precomputed tangency threshold (used by
    sweeps to avoid re-bisecting once per cell).
    """
    _require_zero_field(p)
    a = p.alpha
    a1 = a * p.j11
    b1 = (1.0 - a) * p.j22
    j = abs(p.j12)
    boundary = abs(a1 - 1.0) < BOUNDARY_TOL or abs(b1 - 1.0) < BOUNDARY_TOL

    if a1 <= 1.0 and b1 <= 1.0:
        jc = j12_critical(p)
        boundary = boundary or abs(j - jc) < BOUNDARY_TOL
        label = "A1" if j <= jc else "A2"
    elif a1 > 1.0 and b1 > 1.0:
        jc = j12_critical(p)
        boundary = boundary or abs(j - jc) < BOUNDARY_TOL
        if j >= jc:
            label = "C3"
        else:
            jt = j12_tilde if j12_tilde is not None else j12_tangency_critical(p)
            boundary = boundary or abs(j - jt) < BOUNDARY_TOL
            label = "C1" if j < jt else "C2"
    else:
        label = "B"
    return PhaseRegion(label=label, expected_count=REGION_COUNTS[label], boundary=boundary)


def sweep(
    aj11_values: np.ndarray,
    j12_values: np.ndarray,
    bj22: float,
    alpha: float = 0.5,
) -> list[SweepRow]:
    """Phase map over a grid of (alpha*j11, j12) at fixed (1-alpha)*j22.

    Grid axes carry the products; couplings are reconstructed from the given
    alpha.  Rows come out row-major in (alpha_j11, j12) order, with the
    equilibrium count verified per cell; per-cell failures are recorded as
    region "error" with count -1 rather than aborting the sweep.
    """
    rows: list[SweepRow] = []
    for a1 in np.asarray(aj11_values, dtype=np.float64):
        j11 = a1 / alpha
        j22 = bj22 / (1.0 - alpha)
        tilde: float | None = None
        if a1 > 1.0 and bj22 > 1.0:
            try:
                tilde = j12_tangency_critical(
                    ModelParams(alpha=alpha, j11=j11, j12=0.1, j22=j22)
                )
            except (ValueError, RuntimeError):
                pass  # cells needing it fail individually below
        for j12 in np.asarray(j12_values, dtype=np.float64):
            p = ModelParams(alpha=alpha, j11=j11, j12=float(j12), j22=j22)
            try:
                region = phase_region(p, j12_tilde=tilde)
                count = len(find_equilibria(p))
                rows.append(SweepRow(float(a1), float(j12), region.label, count, region.boundary))
            except Exception:
                rows.append(SweepRow(float(a1), float(j12), "error", -1, False))
    return rows


_HESSIAN_EPS = 1e-8


def _landscape_class(m: tuple[float, float], p: ModelParams) -> str:
    d11, d12, d22 = free_energy_hessian(m, p)
    half_tr = 0.5 * (d11 + d22)
    root = math.hypot(0.5 * (d11 - d22), d12)
    lam_min, lam_max = half_tr - root, half_tr + root
    if lam_min > _HESSIAN_EPS:
        return "minimum"
    if lam_max < -_HESSIAN_EPS:
        return "maximum"
    if lam_min < -_HESSIAN_EPS < _HESSIAN_EPS < lam_max:
        return "saddle"
    return "degenerate"


_LANDSCAPE_OF_STABILITY = {"stable": "minimum", "saddle": "saddle", "unstable": "maximum"}


def free_energy_check(p: ModelParams) -> FreeEnergyReport:
    """Cross-check the dynamics against the free-energy landscape.

    Every equilibrium must be a critical point of the free energy, its
    Hessian class must match the stability class, and whenever non-origin
    stable pairs exist the lowest free energy over all equilibria must be
    attained at a stable +- pair.
    """
    _require_zero_field(p)
    eqs = find_equilibria(p)
    rows: list[FreeEnergyRow] = []
    mismatches: list[str] = []
    for q in eqs:
        grad = free_energy_gradient(q.m, p)
        gnorm = max(abs(grad[0]), abs(grad[1]))
        landscape = _landscape_class(q.m, p)
        rows.append(
            FreeEnergyRow(
                m1=q.m1, m2=q.m2, stability=q.stability,
                value=free_energy(q.m, p), grad_norm=gnorm, landscape=landscape,
            )
        )
        if gnorm >= 1e-8:
            mismatches.append(f"gradient {gnorm:.2e} at ({q.m1:.4f}, {q.m2:.4f})")
        expected = _LANDSCAPE_OF_STABILITY.get(q.stability)
        if expected is not None and landscape != expected:
            mismatches.append(
                f"hessian class {landscape} vs stability {q.stability} "
                f"at ({q.m1:.4f}, {q.m2:.4f})"
            )

    gradients_vanish = all(r.grad_norm < 1e-8 for r in rows)
    hessian_matches = not any("hessian" in s for s in mismatches)

    stable_pair_is_global_min: bool | None = None
    non_origin_stable = [r for r in rows if r.stability == "stable" and (r.m1, r.m2) != (0.0, 0.0)]
    if non_origin_stable:
        fmin = min(r.value for r in rows)
        minimizers = [r for r in rows if r.value <= fmin + 1e-12]
        paired = any(
            max(abs(r.m1 + s.m1), abs(r.m2 + s.m2)) < 1e-9
            for r in minimizers
            for s in minimizers
            if r is not s
        )
        stable_pair_is_global_min = (
            all(r.stability == "stable" for r in minimizers) and paired
        )
        if not stable_pair_is_global_min:
            mismatches.append("global minimum not attained at a stable +- pair")

    return FreeEnergyReport(
        rows=tuple(rows),
        gradients_vanish=gradients_vanish,
        hessian_matches=hessian_matches,
        stable_pair_is_global_min=stable_pair_is_global_min,
        mismatches=tuple(mismatches),
    )
