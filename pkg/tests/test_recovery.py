import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extmap.curve import make_cassini, make_circle, make_ellipse, make_polygon
from extmap.mesh import panel_mesh, refine_corners, trapezoid_mesh
from extmap.operator import DomainError, NearBoundaryWarning, apply_dlp, solve_density
from extmap.recovery import (
    ResolutionError,
    boundary_map,
    eval_exterior,
    faber_dlp,
    map_on_boundary,
    mean_correction,
    theta_prime,
    unwrap_angles,
)
from extmap.verify import faber_oracle


def joukowski_inverse(a, z):
    """Exterior root ``w`` of ``z = ((a+1) w + (a-1) / w) / 2``."""
    A, B = (a + 1) / 2, (a - 1) / 2
    disc = np.sqrt(z * z - 4 * A * B + 0j)
    roots = np.array([(z + disc) / (2 * A), (z - disc) / (2 * A)])
    return roots[np.argmax(np.abs(roots), axis=0), np.arange(np.size(z))] if np.ndim(z) else \
        roots[np.argmax(np.abs(roots))]


def test_mean_correction_vanishes_for_centred_curves():
    for curve, tol in ((make_circle(1), 1e-13), (make_ellipse(2), 1e-12)):
        mesh = trapezoid_mesh(curve, 64)
        assert abs(mean_correction(mesh, solve_density(mesh))) < tol


def test_translation_probe():
    """A square shifted by one: Psi_shift(z) = Psi(z - 1) so alpha0 = -alpha1."""
    sq = [(0.5, -0.5), (0.5, 0.5), (-0.5, 0.5), (-0.5, -0.5)]
    base = make_polygon(sq)
    moved = make_polygon([(x + 0.3, y) for x, y in sq])
    maps = []
    for curve in (base, moved):
        mesh = panel_mesh(curve, 16, 8)
        for _ in range(20):
            mesh = refine_corners(mesh)
        maps.append(boundary_map(mesh))
    b0, b1 = maps
    assert abs(b1.mean_correction) > 0.1
    # c = -alpha0 / alpha1 recovers the shift
    assert abs(b1.mean_correction - 0.3) < 1e-8
    assert abs(b1.alpha0 + 0.3 * b1.alpha1) < 1e-8
    assert abs(b0.alpha0) < 1e-8
    assert abs(b1.alpha1 - b0.alpha1) < 1e-8


@pytest.mark.parametrize("r", [1.0, 0.5, 3.0])
def test_circle_map(r):
    bmap = boundary_map(trapezoid_mesh(make_circle(r), 32))
    assert np.max(np.abs(bmap.theta - bmap.mesh.nodes)) < 1e-13
    assert bmap.alpha1 == pytest.approx(1 / r, abs=1e-13)
    assert abs(bmap.alpha0) < 1e-13
    np.testing.assert_allclose(np.abs(bmap.psi), 1.0, atol=1e-15)


@pytest.mark.parametrize("curve,alpha1", [(make_ellipse(2), 2 / 3), (make_cassini(2), 0.5)])
def test_alpha1(curve, alpha1):
    bmap = boundary_map(trapezoid_mesh(curve, 64))
    assert abs(bmap.alpha1 - alpha1) < 1e-10
    assert abs(bmap.alpha0) < 1e-10


def test_map_invariants(smooth_curve):
    bmap = boundary_map(trapezoid_mesh(smooth_curve, 256))
    assert np.all(np.diff(bmap.theta) > 0)
    total = bmap.theta[-1] - bmap.theta[0] + np.angle(bmap.psi[0] / bmap.psi[-1])
    assert abs(total - 2 * np.pi) < 1e-8
    assert 0 <= bmap.theta[0] < 2 * np.pi
    np.testing.assert_allclose(bmap.psi, -bmap.phi_tilde / np.abs(bmap.phi_tilde), atol=0)
    assert bmap.alpha0 == -bmap.alpha1 * bmap.mean_correction
    assert bmap.alpha1 > 0


def test_unwrap_rejects_non_monotone_sequences():
    with pytest.raises(ResolutionError):
        unwrap_angles(np.exp(1j * np.array([0, 2, 4, 0.5, 2.5, 4.5])))
    with pytest.raises(ResolutionError):
        unwrap_angles(np.exp(-1j * np.linspace(0, 2 * np.pi, 8, endpoint=False)))


def test_theta_prime_circle():
    for r in (1.0, 2.0):
        bmap = boundary_map(trapezoid_mesh(make_circle(r), 32))
        np.testing.assert_allclose(theta_prime(bmap), 1 / r, atol=1e-11)


def test_theta_prime_total_winding():
    bmap = boundary_map(trapezoid_mesh(make_ellipse(2), 64))
    tp = theta_prime(bmap)
    assert abs(np.sum(bmap.mesh.weights * tp * bmap.mesh.speed()) - 2 * np.pi) < 1e-10
    assert bmap.theta_prime_residual < 1e-8


def test_theta_prime_finite_difference():
    bmap = boundary_map(trapezoid_mesh(make_ellipse(2), 64))
    h = 1e-5
    curve = bmap.curve
    for j in (0, 7, 20, 41):
        t0 = bmap.mesh.nodes[j]
        th = np.unwrap(np.angle(map_on_boundary(bmap, np.array([t0 - h, t0 + h]))))
        ds = np.abs(curve(t0 + h) - curve(t0 - h))
        assert abs((th[1] - th[0]) / ds - theta_prime(bmap)[j]) < 1e-7


def test_theta_prime_needs_trapezoid():
    sq = make_polygon([(0.5, -0.5), (0.5, 0.5), (-0.5, 0.5), (-0.5, -0.5)])
    bmap = boundary_map(panel_mesh(sq, 4, 8))
    assert bmap.theta_prime is None
    with pytest.raises(NotImplementedError):
        theta_prime(bmap)


def test_exterior_circle():
    bmap = boundary_map(trapezoid_mesh(make_circle(1), 64))
    assert abs(eval_exterior(bmap, 3.0) - 3.0) < 1e-12


def test_exterior_ellipse_joukowski():
    bmap = boundary_map(trapezoid_mesh(make_ellipse(2), 128))
    assert abs(eval_exterior(bmap, 4.0) - joukowski_inverse(2, 4.0)) < 1e-12
    z = np.array([3j, -2.8 + 1.5j, 5 - 5j])
    assert np.max(np.abs(eval_exterior(bmap, z) - joukowski_inverse(2, z))) < 1e-10


def test_exterior_modulus(rng):
    bmap = boundary_map(trapezoid_mesh(make_cassini(1.25), 128))
    ang = rng.uniform(0, 2 * np.pi, 100)
    z = rng.uniform(2.0, 8.0, 100) * np.exp(1j * ang)
    assert np.all(np.abs(eval_exterior(bmap, z)) > 1)


def test_exterior_domain_guards():
    bmap = boundary_map(trapezoid_mesh(make_ellipse(2), 64))
    with pytest.raises(DomainError):
        eval_exterior(bmap, 0.5)
    with pytest.warns(NearBoundaryWarning):
        eval_exterior(bmap, 2.01)


def test_faber_degree_zero():
    bmap = boundary_map(trapezoid_mesh(make_ellipse(2), 64))
    for z0 in (0.0, 0.3 + 0.2j, -0.7):
        assert abs(faber_dlp(bmap, 0, z0) - 1) < 1e-12
    with pytest.raises(ValueError):
        faber_dlp(bmap, -1, 0.0)


def test_faber_circle_monomials():
    bmap = boundary_map(trapezoid_mesh(make_circle(1), 64))
    z0 = 0.3 + 0.2j
    assert abs(faber_dlp(bmap, 2, z0) - z0**2) < 1e-10
    assert abs(faber_oracle(bmap, 1, 0.4j) - 0.4j) < 1e-12


def test_faber_against_oracle():
    bmap = boundary_map(trapezoid_mesh(make_ellipse(2), 64))
    assert abs(faber_dlp(bmap, 3, 0.5) - faber_oracle(bmap, 3, 0.5)) < 1e-8
    for m in range(1, 6):
        assert abs(faber_dlp(bmap, m, 0.3 + 0.2j) - faber_oracle(bmap, m, 0.3 + 0.2j)) < 1e-8
    assert abs(faber_oracle(bmap, 1, 0.0)) < 1e-10


def test_faber_ellipse_closed_form():
    # For the ellipse P_1(z) = alpha1 z and P_2(z) = alpha1^2 z^2 - 2 alpha1^2 (a^2-1)/4
    bmap = boundary_map(trapezoid_mesh(make_ellipse(2), 64))
    al = 2 / 3
    z0 = 0.4 - 0.25j
    assert abs(faber_dlp(bmap, 1, z0) - al * z0) < 1e-10
    assert abs(faber_dlp(bmap, 2, z0) - (al**2 * z0**2 - 2 * al**2 * 3 / 4)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(coef=st.lists(st.floats(-2, 2), min_size=4, max_size=4))
def test_faber_linearity(coef):
    bmap = boundary_map(trapezoid_mesh(make_ellipse(2), 64))
    z0 = np.array([0.1 + 0.1j, -0.4])
    th = bmap.theta
    dens = sum(c * (np.cos(m * th) + 1j * np.sin(m * th)) for m, c in enumerate(coef, 1))
    combo = -2 * apply_dlp(bmap.mesh, dens, z0)
    parts = sum(c * faber_dlp(bmap, m, z0) for m, c in enumerate(coef, 1))
    assert np.max(np.abs(combo - parts)) < 1e-13
