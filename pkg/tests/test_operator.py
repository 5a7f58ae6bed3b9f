import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extmap.curve import make_circle, make_ellipse, unit_square
from extmap.mesh import panel_mesh, refine_corners, trapezoid_mesh
from extmap.operator import (
    DomainError,
    NearBoundaryWarning,
    apply_dlp,
    assemble,
    interpolate_density,
    interpolate_density_derivative,
    kernel_matrix,
    kernel_t_derivative,
    neumann_kernel,
    solve_density,
    spectral_derivative,
)


def test_circle_kernel_is_constant():
    for r in (1.0, 0.5, 3.0):
        K = kernel_matrix(trapezoid_mesh(make_circle(r), 32))
        assert np.max(np.abs(K + 1 / (2 * np.pi))) < 1e-13
    c = make_circle(1)
    assert neumann_kernel(c, 0.4, 0.4) == pytest.approx(-1 / (2 * np.pi), abs=1e-15)
    assert neumann_kernel(c, 0.4, 2.9) == pytest.approx(-1 / (2 * np.pi), abs=1e-14)


def test_ellipse_diagonal():
    assert neumann_kernel(make_ellipse(2), 0.0, 0.0) == pytest.approx(-1 / np.pi, abs=1e-15)


def test_kernel_limit_is_first_order():
    e = make_ellipse(2)
    k0 = neumann_kernel(e, 0.3, 0.3)
    gaps = [abs(neumann_kernel(e, 0.3, 0.3 + h) - k0) for h in (1e-2, 1e-3, 1e-4)]
    # O(h): each tenfold step shrinks the gap about tenfold
    assert gaps[0] < 1e-1
    assert 5 < gaps[0] / gaps[1] < 20 and 5 < gaps[1] / gaps[2] < 20


def test_assemble_circle_n4():
    A = assemble(trapezoid_mesh(make_circle(1), 4))
    np.testing.assert_allclose(A, np.eye(4) + np.ones((4, 4)) / 4, atol=1e-15)


def test_assemble_is_real_and_finite_on_square():
    A = assemble(refine_corners(panel_mesh(unit_square(), 4, 8)))
    assert A.dtype == np.float64 and np.all(np.isfinite(A))


@pytest.mark.parametrize("n", [8, 16, 64])
def test_constant_density_identity(n):
    A = assemble(trapezoid_mesh(make_circle(1), n))
    c = np.full(n, 0.7)
    np.testing.assert_allclose(A @ c, 2 * c, atol=1e-12)


def test_circle_density_is_analytic():
    mesh = trapezoid_mesh(make_circle(1), 16)
    sol = solve_density(mesh)
    assert np.max(np.abs(sol.phi + 2 * np.exp(1j * mesh.nodes))) < 1e-13
    assert sol.rhs_scale == -2.0
    assert len(sol.phi) == mesh.n


def test_residual_and_conditioning(any_curve):
    if any_curve.corners:
        mesh = refine_corners(refine_corners(panel_mesh(any_curve, 8, 8)))
    else:
        mesh = trapezoid_mesh(any_curve, 128)
    sol = solve_density(mesh)
    assert sol.residual_norm <= 1e-12 * (1 + np.max(np.abs(mesh.p)))
    assert sol.condition_estimate <= 1e6


def test_interpolation_reproduces_nodes():
    sol = solve_density(trapezoid_mesh(make_ellipse(2), 32))
    vals = interpolate_density(sol, sol.mesh.nodes)
    assert np.max(np.abs(vals - sol.phi)) < 1e-14


def test_interpolation_circle_off_node():
    sol = solve_density(trapezoid_mesh(make_circle(1), 16))
    t = np.linspace(0.05, 6.2, 17)
    assert np.max(np.abs(interpolate_density(sol, t) + 2 * np.exp(1j * t))) < 1e-13


def test_interpolation_self_convergence():
    coarse = solve_density(trapezoid_mesh(make_ellipse(2), 32))
    fine = solve_density(trapezoid_mesh(make_ellipse(2), 128))
    assert abs(interpolate_density(coarse, 0.1) - interpolate_density(fine, 0.1)) < 1e-10


def test_density_derivative_circle():
    sol = solve_density(trapezoid_mesh(make_circle(1), 16))
    t = np.concatenate([sol.mesh.nodes[:3], [0.123, 2.5, 5.9]])
    assert np.max(np.abs(interpolate_density_derivative(sol, t) + 2j * np.exp(1j * t))) < 1e-12


def test_density_derivative_finite_difference():
    sol = solve_density(trapezoid_mesh(make_ellipse(2), 64))
    h = 1e-5
    for t in (0.1, 1.0, 2.345, 5.5):
        fd = (interpolate_density(sol, t + h) - interpolate_density(sol, t - h)) / (2 * h)
        assert abs(interpolate_density_derivative(sol, t) - fd) < 1e-7
    # nodes switch to the spectral derivative; it must agree with the interpolant nearby
    t0 = sol.mesh.nodes[5]
    fd = (interpolate_density(sol, t0 + h) - interpolate_density(sol, t0 - h)) / (2 * h)
    assert abs(interpolate_density_derivative(sol, t0) - fd) < 1e-7


def test_kernel_derivative_vanishes_on_circle():
    mesh = trapezoid_mesh(make_circle(1), 32)
    dK = kernel_t_derivative(mesh, np.array([0.05, 1.3, 4.4]))
    assert np.max(np.abs(dK @ (mesh.weights * 1.7))) < 1e-12


def test_density_derivative_rejects_panels():
    sol = solve_density(panel_mesh(unit_square(), 4, 4))
    with pytest.raises(NotImplementedError):
        interpolate_density_derivative(sol, 0.3)


def test_spectral_derivative_of_trig_polynomial():
    n, period = 32, 2 * np.pi
    t = period * np.arange(n) / n
    f = np.sin(3 * t) + 0.5 * np.cos(7 * t)
    np.testing.assert_allclose(spectral_derivative(f, period).real,
                               3 * np.cos(3 * t) - 3.5 * np.sin(7 * t), atol=1e-12)


def test_dlp_constant_density():
    mesh = trapezoid_mesh(make_circle(1), 64)
    assert abs(apply_dlp(mesh, -np.ones(64), 0.2 + 0.1j) - 1) < 1e-13


def test_dlp_cos_theta_at_center():
    mesh = trapezoid_mesh(make_circle(1), 64)
    assert abs(apply_dlp(mesh, np.cos(mesh.nodes), 0.0)) < 1e-13


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(-3, 3), seed=st.integers(0, 2**16))
def test_dlp_linearity(alpha, seed):
    rng = np.random.default_rng(seed)
    mesh = trapezoid_mesh(make_ellipse(2), 128)
    f = rng.normal(size=128) + 1j * rng.normal(size=128)
    g = rng.normal(size=128) + 1j * rng.normal(size=128)
    x = np.array([0.1 + 0.2j, -0.5, 0.2j])
    lhs = apply_dlp(mesh, alpha * f + g, x)
    rhs = alpha * apply_dlp(mesh, f, x) + apply_dlp(mesh, g, x)
    assert np.max(np.abs(lhs - rhs)) < 1e-13


def test_dlp_domain_and_warning():
    mesh = trapezoid_mesh(make_circle(1), 64)
    with pytest.raises(DomainError):
        apply_dlp(mesh, np.ones(64), 2.0)
    with pytest.warns(NearBoundaryWarning):
        apply_dlp(mesh, np.ones(64), 0.99)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        apply_dlp(mesh, np.ones(64), 0.5)


def test_chord_formulas_match_direct_differences(any_curve):
    t = np.linspace(0, any_curve.period, 23)[:, None]
    tau = np.linspace(0.05, any_curve.period - 0.05, 19)[None, :]
    direct = any_curve(t) - any_curve(tau)
    assert np.max(np.abs(any_curve.chord(t, tau) - direct)) < 1e-14


def test_interpolation_next_to_a_node():
    sol = solve_density(trapezoid_mesh(make_circle(1), 16))
    t = sol.mesh.nodes[6] + np.array([1e-12, 1e-9, 1e-6, -1e-6, 9e-4, 2e-3])
    assert np.max(np.abs(interpolate_density(sol, t) + 2 * np.exp(1j * t))) < 1e-13
    assert np.max(np.abs(interpolate_density_derivative(sol, t) + 2j * np.exp(1j * t))) < 1e-12


def test_near_node_expansion_matches_kernel_sum(monkeypatch):
    import extmap.operator as op

    sol = solve_density(trapezoid_mesh(make_ellipse(2), 64))
    t = sol.mesh.nodes[9] + np.array([9e-4, -5e-4, 2e-4])
    taylor = interpolate_density(sol, t)
    monkeypatch.setattr(op, "NEAR_NODE", 0.0)
    assert np.max(np.abs(interpolate_density(sol, t) - taylor)) < 1e-12
