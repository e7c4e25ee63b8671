import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cyclic_billiards import billiard_core as bc
from cyclic_billiards.sphere_oracle import SphereOrbitSpec, make_regular_orbit


def random_config(body, n, rng):
    axes = getattr(body, "axes", 1.0)
    return body.project(rng.standard_normal((n, body.ambient_dim)) * axes)


def random_rotation(d, rng):
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


class RotatedEllipsoid(bc.ConvexHypersurface):
    """Ellipsoid with axes rotated by Q, defined through the implicit function."""

    def __init__(self, axes, Q):
        inner = bc.Ellipsoid(axes)
        super().__init__(len(axes) - 1,
                         lambda x: inner.value(x @ Q),
                         lambda x: inner.gradient(x @ Q) @ Q.T,
                         lambda x: Q @ inner.hessian(x @ Q) @ Q.T,
                         scale=inner.scale, convex_asserted=True)


# -- bodies and configurations -------------------------------------------------

def test_ellipsoid_validation():
    with pytest.raises(ValueError):
        bc.Ellipsoid([1.0, -1.0])
    with pytest.raises(ValueError):
        bc.Ellipsoid([1.0])
    e = bc.Ellipsoid([1.0, 2.0])
    assert e.dim == 1 and e.ambient_dim == 2
    assert not e.is_round and bc.sphere(3).is_round


def test_normal_points_inward():
    e = bc.Ellipsoid([1.0, 2.0, 3.0])
    x = np.array([0.0, 0.0, 3.0])
    assert np.allclose(e.normal(x), [0, 0, -1])


def test_configuration_validation():
    s = bc.sphere(2)
    cfg = make_regular_orbit(SphereOrbitSpec(2, 5, 1))
    assert cfg.validate(s) is cfg
    with pytest.raises(ValueError):
        bc.CyclicConfiguration(np.array([[1.0, 0, 0]])).validate(s)
    with pytest.raises(ValueError):
        bc.CyclicConfiguration(np.array([[1.0, 0, 0], [0, 1.1, 0]])).validate(s)
    bad = np.array([[1.0, 0, 0], [1.0, 0, 0], [0, 1.0, 0]])
    with pytest.raises(bc.DegenerateConfigurationError):
        bc.CyclicConfiguration(bad).validate(s)
    with pytest.raises(bc.DegenerateConfigurationError):
        bc.tangential_gradient(s, bad)


def test_length_phi_min_edge():
    x = np.array([[1.0, 0, 0], [-1.0, 0, 0]])
    assert bc.length(x) == -4.0
    assert bc.phi(x) == 16.0
    assert bc.min_edge(x) == 2.0
    assert bc.in_G_epsilon(x, 3.9) and not bc.in_G_epsilon(x, 4.1)
    rng = np.random.default_rng(0)
    assert bc.length(random_config(bc.sphere(3), 6, rng)) < 0


@given(st.integers(2, 9), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_length_is_exactly_dihedral_invariant(n, seed):
    rng = np.random.default_rng(seed)
    x = random_config(bc.Ellipsoid([1.0, 1.4, 0.7]), n, rng)
    base = bc.length(x)
    for img in bc.dihedral_images(x):
        assert bc.length(img) == base


# -- projection and reflection -------------------------------------------------

def test_projection_examples():
    assert np.allclose(bc.project_to_surface(bc.sphere(3), [2.0, 0, 0, 0]), [1, 0, 0, 0])
    assert np.allclose(bc.project_to_surface(bc.Ellipsoid([1.0, 2.0]), [3.0, 0]), [1, 0])
    with pytest.raises(ValueError):
        bc.project_to_surface(bc.sphere(2), [0.0, 0, 0])


def test_projection_accuracy_and_idempotence():
    rng = np.random.default_rng(1)
    e = bc.Ellipsoid([1.0, 1.7, 0.6, 1.2])
    p = bc.project_to_surface(e, rng.standard_normal((200, 4)) * 3)
    assert np.abs(e.value(p)).max() <= 1e-12 * e.scale
    assert np.abs(bc.project_to_surface(e, p) - p).max() <= 1e-12


def test_generic_projection_converges_and_flags_failure():
    rng = np.random.default_rng(2)
    body = RotatedEllipsoid([1.0, 1.3, 0.8], random_rotation(3, rng))
    p = body.project(rng.standard_normal((50, 3)))
    assert np.abs(body.value(p)).max() <= 1e-12
    flat = bc.ConvexHypersurface(1, lambda x: np.ones(x.shape[:-1]), lambda x: np.ones_like(x))
    with pytest.raises(bc.ProjectionError):
        flat.project(np.array([1.0, 0.0]), max_iter=5)


def test_reflection_basics():
    s = bc.sphere(2)
    x = np.array([0.0, 0.0, 1.0])
    assert np.allclose(bc.billiard_reflect(s, x, [0, 0, -1.0]), [0, 0, 1])
    rng = np.random.default_rng(3)
    e = bc.Ellipsoid([1.0, 1.5, 0.8])
    for _ in range(50):
        p = random_config(e, 1, rng)[0]
        d = rng.standard_normal(3)
        d /= np.linalg.norm(d)
        out = bc.billiard_reflect(e, p, d)
        assert abs(np.linalg.norm(out) - 1) < 1e-14
        assert np.allclose(bc.billiard_reflect(e, p, out), d, atol=1e-14)
        nu = e.normal(p)
        assert np.isclose(out @ nu, -(d @ nu), atol=1e-14)
    with pytest.raises(bc.GrazingError):
        bc.billiard_reflect(s, x, [1.0, 0, 0])


@pytest.mark.parametrize("n,r", [(5, 1), (5, 2), (7, 3), (9, 2)])
def test_reflection_iterate_closes_regular_polygon(n, r):
    s = bc.sphere(3)
    orbit = make_regular_orbit(SphereOrbitSpec(3, n, r)).points
    x, d = orbit[0], orbit[1] - orbit[0]
    d /= np.linalg.norm(d)
    for _ in range(n):
        y = s.ray_exit(x, d)
        d = bc.billiard_reflect(s, y, d)
        x = y
    assert np.abs(x - orbit[0]).max() < 1e-10


def test_ray_exit_on_ellipsoid():
    e = bc.Ellipsoid([1.0, 2.0])
    assert np.allclose(e.ray_exit([1.0, 0.0], [-1.0, 0.0]), [-1, 0])


# -- gradients -----------------------------------------------------------------

@pytest.mark.parametrize("n,r", [(3, 1), (5, 2), (7, 1)])
def test_gradients_vanish_at_regular_orbits(n, r):
    s = bc.sphere(3)
    cfg = make_regular_orbit(SphereOrbitSpec(3, n, r))
    assert np.abs(bc.tangential_gradient(s, cfg)).max() < 1e-12
    # regular polygons are also critical for phi, by the same symmetry
    assert np.abs(bc.log_phi_gradient(s, cfg)).max() < 1e-12
    assert bc.reflection_residual(s, cfg) < 1e-12


def test_log_phi_gradient_symmetric_on_triangle():
    s = bc.sphere(2)
    cfg = make_regular_orbit(SphereOrbitSpec(2, 3, 1)).points
    # off-critical symmetric configuration: equilateral triangle on a small circle
    pts = s.project(cfg * 0.6 + [0, 0, 0.8])
    norms = np.linalg.norm(bc.log_phi_gradient(s, pts), axis=1)
    assert np.ptp(norms) < 1e-12 and norms[0] > 0


def test_diameter_gradient_zero():
    e = bc.Ellipsoid([1.0, 1.1, 1.2, 1.3])
    for j, a in enumerate(e.axes):
        x = np.zeros((2, 4))
        x[0, j], x[1, j] = a, -a
        assert np.abs(bc.tangential_gradient(e, x)).max() == 0.0


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(4)
    for body in (bc.sphere(2), bc.Ellipsoid([1.0, 1.2, 0.9, 1.1])):
        for n in (3, 5):
            x = random_config(body, n, rng)
            for func, grad in ((bc.length, bc.tangential_gradient),
                               (lambda p: np.log(bc.phi(p)), bc.log_phi_gradient)):
                g = grad(body, x)
                fd = bc.chart_finite_difference_gradient(body, x, func)
                assert np.linalg.norm(g - fd) <= 1e-6 * np.linalg.norm(g)


def test_gradients_are_tangent():
    rng = np.random.default_rng(5)
    e = bc.Ellipsoid([1.0, 1.5, 0.7, 1.2])
    for _ in range(50):
        x = random_config(e, 5, rng)
        nu = e.normal(x)
        for g in (bc.tangential_gradient(e, x), bc.log_phi_gradient(e, x)):
            dots = np.abs(np.sum(g * nu, axis=1))
            assert np.all(dots <= 1e-10 * np.linalg.norm(g, axis=1))


def test_gradient_first_order_growth():
    s = bc.sphere(3)
    base = make_regular_orbit(SphereOrbitSpec(3, 5, 1)).points
    rng = np.random.default_rng(6)
    direction = rng.standard_normal(base.shape)
    norms = []
    for h in (1e-3, 2e-3, 4e-3):
        norms.append(np.linalg.norm(bc.tangential_gradient(s, s.project(base + h * direction))))
    ratios = np.array(norms[1:]) / np.array(norms[:-1])
    assert np.allclose(ratios, 2.0, rtol=1e-2)


def test_residual_positive_off_orbit():
    rng = np.random.default_rng(7)
    x = random_config(bc.sphere(3), 5, rng)
    assert bc.reflection_residual(bc.sphere(3), x) > 1e-3


def test_vertex_angles_on_regular_orbit():
    s = bc.sphere(2)
    n, r = 5, 2
    a, b, theta = bc.vertex_angles(s, make_regular_orbit(SphereOrbitSpec(2, n, r)))
    # chord of half-angle pi r / n meets the inward normal at pi/2 - pi r / n
    assert np.allclose(a, np.pi / 2 - np.pi * r / n) and np.allclose(a, b)
    assert np.allclose(theta, np.pi - 2 * np.pi * r / n)


# -- the pairing ---------------------------------------------------------------

def test_pairing_matches_direct_inner_product():
    rng = np.random.default_rng(8)
    s = bc.sphere(3)
    for _ in range(100):
        x = random_config(s, 5, rng)
        direct = np.sum(bc.tangential_gradient(s, x) * bc.log_phi_gradient(s, x))
        pair = bc.gradient_pairing(s, x)
        assert abs(pair.pairing - direct) <= 1e-8 * abs(direct)
        assert pair.pairing == 2 * (pair.s1 + pair.s2)


def test_second_angle_sum_bounded_by_rolling_radius():
    rng = np.random.default_rng(9)
    for body in (bc.sphere(3), bc.Ellipsoid([1.0, 1.3, 0.8, 1.1])):
        r = body.curvature_radii()[0]
        for n in (3, 5, 7):
            for _ in range(100):
                x = random_config(body, n, rng)
                assert bc.gradient_pairing(body, x).s2 < 2 * n / r


@pytest.mark.parametrize("n", [3, 5])
def test_pairing_negative_near_singular_set(n):
    s = bc.sphere(3)
    eps0 = bc.calibrate_collapse_threshold(s, n)
    samples = bc.sample_near_singular(s, n, eps0, 500, seed=n)
    assert all(np.prod(bc.edge_lengths(x)) < eps0 for x in samples)
    assert all(bc.gradient_pairing(s, x).pairing < 0 for x in samples)


def test_isometry_invariance():
    rng = np.random.default_rng(10)
    axes = [1.0, 1.3, 0.8, 1.1]
    Q = random_rotation(4, rng)
    plain = bc.Ellipsoid(axes)
    rotated = RotatedEllipsoid(axes, Q)
    for _ in range(20):
        x = random_config(plain, 5, rng)
        y = x @ Q.T
        assert abs(bc.length(x) - bc.length(y)) < 1e-10
        assert abs(bc.reflection_residual(plain, x) - bc.reflection_residual(rotated, y)) < 1e-10
        assert abs(bc.gradient_pairing(plain, x).pairing - bc.gradient_pairing(rotated, y).pairing) < 1e-10


def test_edge_ratio_bounds():
    e = bc.Ellipsoid([1.0, 2.0])
    # curvature radii of the ellipse run from a^2/b = 0.5 to b^2/a = 4
    assert e.curvature_radii() == (0.5, 4.0)
    lo, hi = bc.edge_ratio_bounds(e)
    assert np.isclose(lo, 0.5 / 4.0) and np.isclose(hi, 8.0)
    lo, hi = bc.edge_ratio_bounds(e, kind="phi")
    assert np.isclose(lo, 0.5 / np.hypot(0.5, 4.0)) and np.isclose(lo * hi, 1.0)
    with pytest.raises(ValueError):
        bc.edge_ratio_bounds(e, kind="other")


# -- Hessians ------------------------------------------------------------------

def _signature(H, tau=1e-6):
    ev = np.linalg.eigvalsh(H)
    return int(np.sum(ev < -tau)), int(np.sum(np.abs(ev) <= tau)), int(np.sum(ev > tau))


def test_hessian_signature_on_sphere_triangle():
    s = bc.sphere(3)
    cfg = make_regular_orbit(SphereOrbitSpec(3, 3, 1))
    assert _signature(bc.hessian_in_chart(s, cfg)) == (0, 5, 4)


def test_hessian_symmetry_before_symmetrizing():
    e = bc.Ellipsoid([1.0, 1.1, 1.2, 1.3])
    x = np.array([[0, 0, 0, 1.3], [0, 0, 0, -1.3]])
    H = bc.hessian_in_chart(e, x, symmetrize=False)
    assert np.abs(H - H.T).max() < 1e-8
    cfg = make_regular_orbit(SphereOrbitSpec(3, 5, 1))
    H = bc.hessian_in_chart(bc.sphere(3), cfg, symmetrize=False)
    assert np.abs(H - H.T).max() < 1e-8


def test_hessian_step_refinement():
    s = bc.sphere(3)
    cfg = make_regular_orbit(SphereOrbitSpec(3, 5, 1))
    ev1 = np.linalg.eigvalsh(bc.hessian_in_chart(s, cfg, step=1e-3))
    ev2 = np.linalg.eigvalsh(bc.hessian_in_chart(s, cfg, step=5e-4))
    assert np.abs(ev1 - ev2).max() < 1e-3
    values = np.linalg.eigvalsh(bc.hessian_in_chart(s, cfg, method="values", step=1e-3))
    assert np.abs(values - ev2).max() < 1e-4


def test_analytic_hessian_matches_chart_hessian():
    for body, x in [
        (bc.sphere(3), make_regular_orbit(SphereOrbitSpec(3, 7, 2)).points),
        (bc.Ellipsoid([1.0, 1.1, 1.2, 1.3]), np.array([[0, 1.1, 0, 0], [0, -1.1, 0, 0.0]])),
    ]:
        H = bc.riemannian_hessian(body, x)
        assert np.abs(H - bc.hessian_in_chart(body, x)).max() < 1e-7


def test_tangent_basis_orthonormal():
    rng = np.random.default_rng(11)
    nu = rng.standard_normal((30, 5))
    nu /= np.linalg.norm(nu, axis=1, keepdims=True)
    T = bc.tangent_basis(nu)
    assert np.abs(np.einsum("kia,kib->kab", T, T) - np.eye(4)).max() < 1e-14
    assert np.abs(np.einsum("kia,ki->ka", T, nu)).max() < 1e-14
