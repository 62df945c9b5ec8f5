import math
from dataclasses import replace

import numpy as np
import pytest

from bicw import (
    ModelParams,
    OdeConfig,
    eigenvalues,
    find_equilibria,
    free_energy,
    free_energy_check,
    integrate,
    j12_critical,
    j12_tangency_critical,
    jacobian,
    nullcline1,
    nullcline2,
    phase_region,
    sweep,
    tangency_residual,
    vector_field,
)
from helpers import tanh_fixed_point

# one pinned parameter set per region family (thresholds computed in-code)
P_A1 = ModelParams(0.5, 1.0, 0.5, 1.0)
P_A2 = ModelParams(0.5, 0.0, 3.0, 0.0)
P_B = ModelParams(0.5, 2.2, 7.0, 0.5)
P_C = ModelParams(0.6, 2.0, 0.05, 3.0)  # alpha*j11 = 1.2, (1-alpha)*j22 = 1.2


def _stability_counts(points):
    out = {}
    for q in points:
        out[q.stability] = out.get(q.stability, 0) + 1
    return out


def test_nullclines_at_origin():
    assert nullcline1(0.0, P_A1) == 0.0
    assert nullcline2(0.0, P_A1) == 0.0


def test_nullclines_odd():
    rng = np.random.default_rng(2)
    p = ModelParams(0.6, 2.0, 0.7, 3.0)
    for _ in range(50):
        x = float(rng.uniform(-0.999, 0.999))
        assert nullcline1(-x, p) == -nullcline1(x, p)
        assert nullcline2(-x, p) == -nullcline2(x, p)


def test_nullcline_swap_symmetry():
    p = ModelParams(0.6, 2.0, 0.7, 3.0)
    swapped = ModelParams(0.4, 3.0, 0.7, 2.0)  # alpha -> 1-alpha, j11 <-> j22
    rng = np.random.default_rng(4)
    for _ in range(20):
        x = float(rng.uniform(-0.99, 0.99))
        assert nullcline1(x, p) == pytest.approx(nullcline2(x, swapped), rel=1e-14)


def test_nullcline_monotone_boundary_case():
    # alpha*j11 = 1 exactly: slope 1/(1-m^2) - 1 >= 0 vanishes only at 0, so
    # the curve is nondecreasing with its flat point at the origin
    p = ModelParams(0.5, 2.0, 1.0, 1.0)
    xs = np.linspace(-0.99, 0.99, 399)
    vals = [nullcline1(float(x), p) for x in xs]
    assert np.all(np.diff(vals) >= 0.0)


def test_nullcline_extrema_supercritical():
    # for alpha*j11 > 1 the curve has a local max/min at -+sqrt(1 - 1/(alpha*j11))
    p = ModelParams(0.6, 2.0, 1.0, 1.0)  # alpha*j11 = 1.2
    flat = math.sqrt(1.0 - 1.0 / 1.2)
    eps = 1e-5
    for sign in (-1.0, 1.0):
        x = sign * flat
        mid = nullcline1(x, p)
        lo = nullcline1(x - eps, p)
        hi = nullcline1(x + eps, p)
        if sign < 0:
            assert mid > lo and mid > hi  # local maximum
        else:
            assert mid < lo and mid < hi  # local minimum
    assert nullcline1(0.9, p) > nullcline1(0.85, p)  # increasing beyond the well


def test_nullcline_errors():
    with pytest.raises(ValueError):
        nullcline1(0.5, ModelParams(0.5, 1.0, 0.0, 1.0))
    with pytest.raises(ValueError):
        nullcline1(1.0, P_A1)
    with pytest.raises(ValueError):
        nullcline2(-1.0, P_A1)


def test_region_a1_single_stable_origin():
    points = find_equilibria(P_A1)
    assert len(points) == 1
    q = points[0]
    assert (q.m1, q.m2) == (0.0, 0.0)
    assert q.stability == "stable"


def test_region_a2_symmetric_pair():
    points = find_equilibria(P_A2)
    assert len(points) == 3
    target = tanh_fixed_point(1.5)  # 0.8585596366401103
    by_m1 = sorted(points, key=lambda q: q.m1)
    assert by_m1[0].m1 == pytest.approx(-target, abs=1e-9)
    assert by_m1[0].m2 == pytest.approx(-target, abs=1e-9)
    assert by_m1[2].m1 == pytest.approx(target, abs=1e-9)
    assert _stability_counts(points) == {"stable": 2, "saddle": 1}


def test_region_b_counts():
    points = find_equilibria(P_B)
    assert len(points) == 3
    assert _stability_counts(points) == {"stable": 2, "saddle": 1}


def test_region_c1_near_decoupled_product():
    points = find_equilibria(P_C)
    assert len(points) == 9
    assert _stability_counts(points) == {"stable": 4, "saddle": 4, "unstable": 1}
    # coordinates sit near the product of the decoupled fixed-point sets
    root = tanh_fixed_point(1.2)  # 0.6585696604057538
    grid = sorted({-root, 0.0, root})
    for q in points:
        assert min(abs(q.m1 - g) for g in grid) < 0.1
        assert min(abs(q.m2 - g) for g in grid) < 0.1


def test_decoupled_j12_zero_branch():
    # one supercritical group, no coupling: product of {0,+-m*} and {0}
    p = ModelParams(0.5, 2.4, 0.0, 1.0)
    points = find_equilibria(p)
    assert len(points) == 3
    root = tanh_fixed_point(1.2)
    ms = sorted(q.m1 for q in points)
    assert ms[0] == pytest.approx(-root, abs=1e-12)
    assert ms[2] == pytest.approx(root, abs=1e-12)
    assert all(q.m2 == 0.0 for q in points)

    # both supercritical, no coupling: full 3x3 grid
    p9 = ModelParams(0.6, 2.0, 0.0, 3.0)
    assert len(find_equilibria(p9)) == 9


def test_equilibria_negation_closure_and_residuals():
    for p in (P_A1, P_A2, P_B, P_C, ModelParams(0.55, 2.5, -0.3, 2.6)):
        points = find_equilibria(p)
        coords = {(q.m1, q.m2) for q in points}
        assert (0.0, 0.0) in coords
        for m1, m2 in coords:
            assert any(abs(m1 + a) < 1e-9 and abs(m2 + b) < 1e-9 for a, b in coords)
        for q in points:
            assert np.abs(vector_field(q.m, p)).max() < 1e-10


def test_equilibria_match_closed_form_eigenvalues():
    for p in (P_A2, P_B, P_C):
        for q in find_equilibria(p):
            lam = eigenvalues(q.m, p)
            assert q.lambda_minus == lam[0] and q.lambda_plus == lam[1]
            numeric = np.sort(np.linalg.eigvals(jacobian(q.m, p)).real)
            assert abs(q.lambda_minus - numeric[0]) < 1e-9
            assert abs(q.lambda_plus - numeric[1]) < 1e-9


def test_equilibria_require_zero_field():
    with pytest.raises(ValueError):
        find_equilibria(ModelParams(0.5, 1.0, 1.0, 1.0, h1=0.1))


def test_j12_critical_values():
    assert j12_critical(ModelParams(0.5, 1.0, 0.0, 1.0)) == pytest.approx(1.0, rel=1e-14)
    assert j12_critical(ModelParams(0.5, 0.0, 0.0, 0.0)) == pytest.approx(2.0, rel=1e-14)
    assert j12_critical(ModelParams(0.5, 2.0, 0.0, 1.0)) == 0.0
    with pytest.raises(ValueError):
        j12_critical(P_B)  # mixed case has no threshold


def test_j12_tangency_brackets_and_transition():
    jt = j12_tangency_critical(P_C)
    jc = j12_critical(P_C)
    assert 0.0 < jt < jc
    assert len(find_equilibria(replace(P_C, j12=0.9 * jt))) == 9
    assert len(find_equilibria(replace(P_C, j12=min(1.1 * jt, 0.5 * (jt + jc))))) == 5
    assert len(find_equilibria(replace(P_C, j12=1.1 * jc))) == 3
    assert tangency_residual(P_C, jt) < 1e-4


def test_j12_tangency_bounded_on_grid():
    for a1 in (1.1, 1.4, 1.8):
        for b1 in (1.05, 1.5):
            p = ModelParams(0.5, 2.0 * a1, 0.05, 2.0 * b1)
            jt = j12_tangency_critical(p)
            assert 0.0 < jt < j12_critical(p)


def test_j12_tangency_requires_region_c():
    with pytest.raises(ValueError):
        j12_tangency_critical(P_A1)


def test_phase_region_labels():
    assert phase_region(P_A1).label == "A1"
    assert phase_region(P_A1).expected_count == 1
    assert phase_region(P_B).label == "B"
    assert phase_region(replace(P_B, j12=-2.0)).label == "B"
    c3 = phase_region(replace(P_C, j12=0.5))
    assert c3.label == "C3" and c3.expected_count == 3
    assert phase_region(P_C).label == "C1"
    assert phase_region(replace(P_C, j12=0.3)).label == "C2"


def test_phase_region_boundary_flags():
    at_threshold = ModelParams(0.5, 1.0, 1.0, 1.0)  # |j12| equals the critical coupling
    region = phase_region(at_threshold)
    assert region.boundary
    assert region.label == "A1"
    assert not phase_region(P_A1).boundary
    assert phase_region(ModelParams(0.5, 2.0, 0.5, 1.0)).boundary  # alpha*j11 = 1


def test_neutral_direction_at_threshold():
    lam_minus, lam_plus = eigenvalues((0.0, 0.0), ModelParams(0.5, 1.0, 1.0, 1.0))
    assert abs(lam_plus) < 1e-10
    points = find_equilibria(ModelParams(0.5, 1.0, 1.0, 1.0))
    origin = [q for q in points if (q.m1, q.m2) == (0.0, 0.0)][0]
    assert origin.stability == "neutral"


def test_counting_consistency_random_suite():
    rng = np.random.default_rng(42)
    checked = 0
    while checked < 25:
        alpha = float(rng.uniform(0.3, 0.7))
        a1 = float(rng.uniform(0.3, 1.8))
        b1 = float(rng.uniform(0.3, 1.8))
        j12 = float(rng.uniform(-2.5, 2.5))
        if abs(a1 - 1.0) < 1e-3 or abs(b1 - 1.0) < 1e-3:
            continue
        p = ModelParams(alpha, a1 / alpha, j12, b1 / (1.0 - alpha))
        # skip parameter points too close to the coupling thresholds
        if (a1 - 1.0) * (b1 - 1.0) > 0.0:
            jc = j12_critical(p)
            if abs(abs(j12) - jc) < 1e-3:
                continue
            if a1 > 1.0 and abs(j12) < jc:
                if abs(abs(j12) - j12_tangency_critical(p)) < 1e-3:
                    continue
        region = phase_region(p)
        assert len(find_equilibria(p)) == region.expected_count, p
        checked += 1


def test_sign_flip_of_coupling_mirrors_equilibria():
    for p in (P_A2, P_C, replace(P_C, j12=0.3)):
        plus = find_equilibria(p)
        minus = find_equilibria(replace(p, j12=-p.j12))
        assert len(plus) == len(minus)
        assert sorted(q.stability for q in plus) == sorted(q.stability for q in minus)
        # the map (m1, m2) -> (m1, -m2) carries one set onto the other
        coords = {(round(q.m1, 8), round(-q.m2, 8)) for q in plus}
        assert coords == {(round(q.m1, 8), round(q.m2, 8)) for q in minus}


def test_stable_points_attract_unstable_escape():
    p = replace(P_C, j12=0.3)  # five equilibria
    points = find_equilibria(p)
    rng = np.random.default_rng(19)
    for q in points:
        if q.stability == "stable":
            m0 = (q.m1 + 1e-2 * rng.uniform(-1, 1), q.m2 + 1e-2 * rng.uniform(-1, 1))
            _, states = integrate(OdeConfig(m0=m0, t_end=30.0), p)
            assert max(abs(states[-1, 0] - q.m1), abs(states[-1, 1] - q.m2)) < 1e-6
        else:
            jac = jacobian(q.m, p)
            eigvals, eigvecs = np.linalg.eig(jac)
            direction = eigvecs[:, int(np.argmax(eigvals.real))].real
            direction /= np.abs(direction).max()
            m0 = (q.m1 + 1e-4 * direction[0], q.m2 + 1e-4 * direction[1])
            _, states = integrate(OdeConfig(m0=m0, t_end=30.0), p)
            assert max(abs(states[-1, 0] - q.m1), abs(states[-1, 1] - q.m2)) > 1e-3


def test_free_energy_check_a1():
    report = free_energy_check(P_A1)
    assert report.gradients_vanish
    assert report.hessian_matches
    assert report.stable_pair_is_global_min is None
    assert report.rows[0].landscape == "minimum"


def test_free_energy_check_a2_global_minima():
    report = free_energy_check(P_A2)
    assert report.gradients_vanish and report.hessian_matches
    assert report.stable_pair_is_global_min
    origin = [r for r in report.rows if (r.m1, r.m2) == (0.0, 0.0)][0]
    polarized = [r for r in report.rows if r.stability == "stable"]
    assert all(r.value < origin.value for r in polarized)


def test_free_energy_check_c1_landscape():
    report = free_energy_check(P_C)
    kinds = sorted(r.landscape for r in report.rows)
    assert kinds.count("minimum") == 4
    assert kinds.count("saddle") == 4
    assert kinds.count("maximum") == 1
    assert report.stable_pair_is_global_min
    assert not report.mismatches


def test_sweep_left_panel_labels_and_counts():
    rows = sweep(np.linspace(0.2, 1.6, 8), np.linspace(-2.0, 2.0, 9), bj22=0.5)
    assert len(rows) == 72
    labels = {r.region for r in rows}
    assert labels <= {"A1", "A2", "B"}
    for r in rows:
        if not r.boundary:
            assert r.count == {"A1": 1, "A2": 3, "B": 3}[r.region]
    # sign symmetry of the labels in j12
    by_key = {(round(r.alpha_j11, 12), round(r.j12, 12)): r.region for r in rows}
    for (a1, j12), label in by_key.items():
        assert by_key[(a1, round(-j12, 12))] == label


def test_sweep_right_panel_has_c_phases():
    rows = sweep(np.linspace(1.1, 1.9, 5), np.linspace(0.02, 0.8, 12), bj22=1.2)
    labels = {r.region for r in rows}
    assert {"C1", "C2", "C3"} <= labels
    for r in rows:
        if not r.boundary:
            assert r.count == {"C1": 9, "C2": 5, "C3": 3}[r.region]
