import math

import numpy as np
import pytest

from bicw import (
    ModelParams,
    OdeConfig,
    eigenvalues,
    integrate,
    integrate_grid,
    jacobian,
    measure_rhs,
    spin_distributions,
    stability_matrix,
    vector_field,
)
from helpers import draw_params, finite_difference_jacobian, tanh_fixed_point

P_FREE = ModelParams(0.5, 0.0, 0.0, 0.0)


def test_vector_field_zero_at_origin():
    p = ModelParams(0.6, 2.0, 0.7, 3.0)
    np.testing.assert_array_equal(vector_field((0.0, 0.0), p), [0.0, 0.0])


def test_vector_field_free_spins():
    v = vector_field((0.5, -0.3), P_FREE)
    np.testing.assert_allclose(v, [-1.0, 0.6], atol=1e-15)


def test_jacobian_diagonal_case():
    p = ModelParams(0.5, 1.0, 0.0, 1.0)
    np.testing.assert_allclose(jacobian((0.0, 0.0), p), [[-1.0, 0.0], [0.0, -1.0]], atol=1e-15)


def test_jacobian_matches_finite_differences():
    p = ModelParams(0.6, 2.0, 0.7, 3.0)
    m = (0.2, -0.4)
    jac = jacobian(m, p)
    fd = finite_difference_jacobian(lambda x: vector_field(x, p), m)
    assert np.abs(jac - fd).max() / np.abs(jac).max() < 1e-6

    rng = np.random.default_rng(6)
    for _ in range(50):
        pr = draw_params(rng, zero_field=True)
        mm = (float(rng.uniform(-0.95, 0.95)), float(rng.uniform(-0.95, 0.95)))
        jac = jacobian(mm, pr)
        fd = finite_difference_jacobian(lambda x: vector_field(x, pr), mm)
        assert np.abs(jac - fd).max() / max(1.0, np.abs(jac).max()) < 1e-6


def test_jacobian_matches_finite_differences_with_fields():
    rng = np.random.default_rng(61)
    for _ in range(20):
        pr = draw_params(rng)
        mm = (float(rng.uniform(-0.95, 0.95)), float(rng.uniform(-0.95, 0.95)))
        jac = jacobian(mm, pr)
        fd = finite_difference_jacobian(lambda x: vector_field(x, pr), mm)
        assert np.abs(jac - fd).max() / max(1.0, np.abs(jac).max()) < 1e-6


def test_jacobian_decoupled_off_diagonals():
    p = ModelParams(0.4, 1.5, 0.0, 2.5)
    jac = jacobian((0.3, -0.7), p)
    assert jac[0, 1] == 0.0 and jac[1, 0] == 0.0


def test_eigenvalues_at_critical_coupling():
    # both groups subcritical with the coupling at its threshold: the larger
    # eigenvalue of the linearization at the origin vanishes
    p = ModelParams(0.5, 1.0, 1.0, 1.0)
    lam_minus, lam_plus = eigenvalues((0.0, 0.0), p)
    assert lam_minus == pytest.approx(-2.0, abs=1e-12)
    assert abs(lam_plus) < 1e-12


def test_eigenvalues_free_spins():
    rng = np.random.default_rng(1)
    for _ in range(10):
        m = (float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)))
        lam_minus, lam_plus = eigenvalues(m, P_FREE)
        assert lam_minus == pytest.approx(-2.0, abs=1e-14)
        assert lam_plus == pytest.approx(-2.0, abs=1e-14)


def test_eigenvalues_match_numeric_and_are_real():
    rng = np.random.default_rng(14)
    for _ in range(2000):
        p = draw_params(rng, zero_field=True)
        m = (float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)))
        lam_minus, lam_plus = eigenvalues(m, p)
        assert lam_minus <= lam_plus
        s = stability_matrix(m, p)
        # off-diagonal product nonnegative, so the spectrum is real
        assert s[0, 1] * s[1, 0] >= 0.0
        numeric = np.sort(np.linalg.eigvals(s).real)
        assert abs(lam_minus - numeric[0]) < 1e-9
        assert abs(lam_plus - numeric[1]) < 1e-9


def test_eigenvalues_reject_fields():
    p = ModelParams(0.5, 1.0, 1.0, 1.0, h1=0.1)
    with pytest.raises(ValueError):
        eigenvalues((0.0, 0.0), p)


def test_integrate_free_decay():
    cfg = OdeConfig(m0=(1.0, 1.0), t_end=0.5)
    times, states = integrate(cfg, P_FREE)
    assert times[-1] == 0.5
    assert abs(states[-1, 0] - math.exp(-1.0)) < 1e-8
    assert abs(states[-1, 1] - math.exp(-1.0)) < 1e-8


def test_integrate_converges_to_coupled_fixed_point():
    # pure inter-group coupling: the symmetric fixed point solves m = tanh(1.5 m)
    p = ModelParams(0.5, 0.0, 3.0, 0.0)
    target = tanh_fixed_point(1.5)
    assert target == pytest.approx(0.8585596366401103, abs=1e-12)
    cfg = OdeConfig(m0=(0.9, 0.9), t_end=50.0)
    _, states = integrate(cfg, p)
    assert abs(states[-1, 0] - target) < 1e-6
    assert abs(states[-1, 1] - target) < 1e-6


def test_integrate_stays_in_square():
    rng = np.random.default_rng(10)
    for _ in range(100):
        p = draw_params(rng)
        cfg = OdeConfig(
            m0=(float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1))), t_end=2.0, dt=1e-3
        )
        _, states = integrate(cfg, p)
        assert np.abs(states).max() <= 1.0 + 1e-9


def test_integrate_zero_field_mirror_symmetry():
    p = ModelParams(0.55, 1.4, -0.8, 2.2)
    fwd = integrate(OdeConfig(m0=(0.4, -0.6), t_end=3.0), p)[1]
    mir = integrate(OdeConfig(m0=(-0.4, 0.6), t_end=3.0), p)[1]
    np.testing.assert_array_equal(fwd, -mir)


def test_integrate_adaptive_agrees_with_fixed():
    p = ModelParams(0.6, 2.0, 0.3, 3.0)
    fixed = integrate(OdeConfig(m0=(0.5, 0.2), t_end=2.0), p)
    adaptive = integrate(OdeConfig(m0=(0.5, 0.2), t_end=2.0, mode="adaptive", rtol=1e-10, atol=1e-12), p)
    assert abs(fixed[1][-1, 0] - adaptive[1][-1, 0]) < 1e-7
    assert abs(fixed[1][-1, 1] - adaptive[1][-1, 1]) < 1e-7


def test_integrate_grid_matches_integrate():
    p = ModelParams(0.6, 2.0, 0.3, 3.0)
    grid = np.array([0.0, 0.25, 1.0, 2.0])
    on_grid = integrate_grid((0.5, 0.2), p, grid)
    times, states = integrate(OdeConfig(m0=(0.5, 0.2), t_end=2.0), p)
    for i, t in enumerate(grid):
        j = np.argmin(np.abs(times - t))
        np.testing.assert_allclose(on_grid[i], states[j], atol=1e-9)


def test_spin_distributions():
    assert spin_distributions((0.0, 0.0)) == ((0.5, 0.5), (0.5, 0.5))
    assert spin_distributions((1.0, -1.0)) == ((1.0, 0.0), (0.0, 1.0))
    with pytest.raises(ValueError):
        spin_distributions((1.2, 0.0))
    # round trip
    rng = np.random.default_rng(3)
    for _ in range(20):
        m = (float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)))
        (q1p, q1m), (q2p, q2m) = spin_distributions(m)
        assert q1p - q1m == pytest.approx(m[0], abs=1e-15)
        assert q2p - q2m == pytest.approx(m[1], abs=1e-15)
        assert q1p + q1m == 1.0 and q2p + q2m == 1.0


def test_measure_rhs_conserves_and_matches_vector_field():
    p = ModelParams(0.6, 2.0, 0.7, 3.0)
    q = spin_distributions((0.0, 0.0))
    (l1p, l1m), (l2p, l2m) = measure_rhs(q, ModelParams(0.6, 2.0, 0.7, 3.0))
    assert l1p + l1m == 0.0 and l2p + l2m == 0.0
    assert l1p == 0.0 and l2p == 0.0  # zero field, zero magnetization

    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(10_000):
        pr = draw_params(rng)
        m = (float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)))
        (l1p, l1m), (l2p, l2m) = measure_rhs(spin_distributions(m), pr)
        assert l1p + l1m == 0.0 and l2p + l2m == 0.0
        induced = np.array([l1p - l1m, l2p - l2m])
        worst = max(worst, float(np.abs(induced - vector_field(m, pr)).max()))
    assert worst < 1e-12
