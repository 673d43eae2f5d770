"""Hyperboloid geometry: metric identities, frames, charts, operators."""

import numpy as np
import pytest

from reldiff import geometry as geo
from reldiff.errors import DegenerateFrameError, DomainError, InvalidInputError

RNG = np.random.default_rng(20260808)


def random_velocities(n, scale=10.0):
    direction = RNG.normal(size=(n, 3))
    direction /= np.linalg.norm(direction, axis=1)[:, None]
    speed = RNG.uniform(0.0, scale, size=n)
    return direction * speed[:, None]


class TestUZero:
    def test_rest_particle(self):
        assert geo.u_zero([0.0, 0.0, 0.0]) == 1.0

    def test_unit_velocity(self):
        assert geo.u_zero([1.0, 0.0, 0.0]) == pytest.approx(1.4142135623730951, abs=0)

    def test_3_4_0(self):
        assert geo.u_zero([3.0, 4.0, 0.0]) == pytest.approx(5.0990195135927845, abs=0)

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidInputError):
            geo.u_zero([np.inf, 0.0, 0.0])
        with pytest.raises(InvalidInputError):
            geo.u_zero([np.nan, 0.0, 0.0])


class TestMetric:
    def test_rest_frame(self):
        md = geo.metric([0.0, 0.0, 0.0])
        assert np.array_equal(md.g, np.eye(3))
        assert md.det == 1.0

    def test_unit_velocity_values(self):
        md = geo.metric([1.0, 0.0, 0.0])
        assert np.allclose(md.g, np.diag([0.5, 1.0, 1.0]), atol=1e-15)
        assert md.det == pytest.approx(0.5, abs=1e-15)
        assert np.allclose(md.g_inv, np.diag([2.0, 1.0, 1.0]), atol=1e-15)

    def test_inverse_by_multiplication(self):
        u = random_velocities(200, scale=20.0)
        md = geo.metric(u)
        prod = np.einsum("nij,njk->nik", md.g, md.g_inv)
        assert np.max(np.abs(prod - np.eye(3))) < 1e-12

    def test_determinant_identity(self):
        u = random_velocities(200, scale=20.0)
        md = geo.metric(u)
        u0 = geo.u_zero(u)
        assert np.max(np.abs(md.det - u0**-2)) < 1e-12

    def test_positive_definite(self):
        u = random_velocities(100, scale=20.0)
        md = geo.metric(u)
        eig = np.linalg.eigvalsh(md.g)
        assert np.all(eig > 0.0)


class TestChristoffel:
    def test_rest_all_zero(self):
        ct = geo.christoffel([0.0, 0.0, 0.0])
        assert np.array_equal(ct.gamma, np.zeros((3, 3, 3)))

    def test_unit_velocity_entries(self):
        ct = geo.christoffel([1.0, 0.0, 0.0])
        assert ct.gamma[0, 0, 0] == pytest.approx(-0.5, abs=1e-15)
        assert ct.gamma[0, 1, 1] == pytest.approx(-1.0, abs=1e-15)

    def test_lower_index_symmetry(self):
        u = random_velocities(100)
        g = geo.christoffel(u).gamma
        assert np.max(np.abs(g - np.swapaxes(g, 2, 3))) == 0.0

    def test_formula(self):
        u = random_velocities(50)
        g = geo.christoffel(u).gamma
        md = geo.metric(u)
        expected = -u[:, :, None, None] * md.g[:, None, :, :]
        assert np.max(np.abs(g - expected)) < 1e-12


class TestCanonicalFrame:
    def test_rest_identity(self):
        assert np.array_equal(geo.canonical_frame([0.0, 0.0, 0.0]), np.eye(3))

    def test_unit_velocity(self):
        f = geo.canonical_frame([1.0, 0.0, 0.0])
        assert f[0, 0] == pytest.approx(1.4142135623730951, rel=1e-12)
        assert f[1, 0] == 0.0 and f[2, 0] == 0.0

    def test_orthonormality_and_completeness(self):
        u = random_velocities(1000, scale=10.0)
        f = geo.canonical_frame(u)
        md = geo.metric(u)
        orth = np.einsum("nij,nia,njb->nab", md.g, f, f)
        assert np.max(np.abs(orth - np.eye(3))) < 1e-10
        comp = np.einsum("nia,nja->nij", f, f)
        assert np.max(np.abs(comp - md.g_inv)) < 1e-10


class TestOrthonormalize:
    def test_identity_at_rest(self):
        out = geo.orthonormalize(np.eye(3), [0.0, 0.0, 0.0])
        assert np.max(np.abs(out - np.eye(3))) < 1e-15

    def test_idempotent_on_canonical(self):
        u = random_velocities(100, scale=5.0)
        f = geo.canonical_frame(u)
        out = geo.orthonormalize(f, u)
        assert np.max(np.abs(out - f)) < 1e-12

    def test_repairs_scaled_column(self):
        u = np.array([1.0, 2.0, 0.0])
        f = geo.canonical_frame(u)
        f[:, 1] *= 1.01
        out = geo.orthonormalize(f, u)
        md = geo.metric(u)
        orth = np.einsum("ij,ia,jb->ab", md.g, out, out)
        assert np.max(np.abs(orth - np.eye(3))) < 1e-12

    def test_rank_deficient_raises(self):
        u = np.array([0.3, 0.1, 0.0])
        f = geo.canonical_frame(u)
        f[:, 1] = f[:, 0]
        with pytest.raises(DegenerateFrameError):
            geo.orthonormalize(f, u)


class TestHyperbolicChart:
    def test_origin(self):
        h = geo.HyperbolicPoint(alpha=0.0, theta=0.0, phi=0.0)
        assert np.array_equal(geo.from_hyperbolic(h), [0.0, 0.0, 0.0])

    def test_polar_axis(self):
        h = geo.HyperbolicPoint(alpha=1.0, theta=0.0, phi=0.0)
        u = geo.from_hyperbolic(h)
        assert u[0] == 0.0 and u[1] == 0.0
        assert u[2] == pytest.approx(np.sinh(1.0), rel=1e-15)

    def test_round_trip(self):
        u = np.array([0.3, -0.4, 1.2])
        h = geo.to_hyperbolic(u)
        back = geo.from_hyperbolic(h)
        assert np.max(np.abs(back - u)) < 1e-12

    def test_round_trip_random(self):
        u = random_velocities(500, scale=15.0)
        back = geo.from_hyperbolic(geo.to_hyperbolic(u))
        assert np.max(np.abs(back - u) / np.maximum(1.0, np.abs(u))) < 1e-12

    def test_u_zero_is_cosh_alpha(self):
        h = geo.to_hyperbolic(np.array([0.3, -0.4, 1.2]))
        assert geo.u_zero(geo.from_hyperbolic(h)) == pytest.approx(np.cosh(h.alpha), rel=1e-14)

    def test_degenerate_convention(self):
        h = geo.to_hyperbolic(np.zeros(3))
        assert h.alpha == 0.0 and h.theta == 0.0 and h.phi == 0.0

    def test_range_validation(self):
        with pytest.raises(DomainError):
            geo.HyperbolicPoint(alpha=-0.1, theta=0.0, phi=0.0)
        with pytest.raises(DomainError):
            geo.HyperbolicPoint(alpha=0.1, theta=4.0, phi=0.0)
        with pytest.raises(DomainError):
            geo.HyperbolicPoint(alpha=0.1, theta=1.0, phi=7.0)


class TestLaplaceBeltrami:
    def test_constant_everywhere(self):
        const = lambda p: 4.2
        for chart, point in [
            ("cartesian", np.array([0.4, -0.2, 0.9])),
            ("hyperbolic", np.array([1.0, 1.1, 2.0])),
            ("photon", np.array([0.7, 1.1, 2.0])),
        ]:
            val = geo.laplace_beltrami_apply(const, point, chart)
            assert abs(val) < 1e-9

    def test_speed_squared_at_origin(self):
        val = geo.laplace_beltrami_apply(lambda p: float(p @ p), np.zeros(3), "cartesian", h=1e-3, order=4)
        assert val == pytest.approx(6.0, abs=1e-9)

    def test_radial_cosh_hyperbolic(self):
        point = np.array([1.0, np.pi / 2, 1.0])
        val = geo.laplace_beltrami_apply(lambda p: np.cosh(p[0]), point, "hyperbolic", h=1e-3, order=4)
        assert val == pytest.approx(3.0 * np.cosh(1.0), abs=1e-8)

    def test_cross_chart_agreement(self):
        # same scalar field expressed in both charts, compared at alpha = 1
        u = np.array([0.0, 0.0, np.sinh(1.0)])
        val_c = geo.laplace_beltrami_apply(lambda p: float(np.sqrt(1.0 + p @ p)), u, "cartesian", h=1e-3, order=4)
        val_h = geo.laplace_beltrami_apply(
            lambda p: np.cosh(p[0]), np.array([1.0, np.pi / 2, 0.5]), "hyperbolic", h=1e-3, order=4
        )
        assert val_c == pytest.approx(val_h, abs=1e-8)

    def test_cross_chart_second_order_convergence(self):
        # order-2 stencils: the discrepancy shrinks ~4x per halving of h and
        # meets the 1e-6 agreement target at small step
        u = np.array([0.0, 0.0, np.sinh(1.0)])

        def disc(h):
            val_c = geo.laplace_beltrami_apply(lambda p: float(np.sqrt(1.0 + p @ p)), u, "cartesian", h=h, order=2)
            return abs(val_c - 3.0 * np.cosh(1.0))

        d1, d2 = disc(2e-2), disc(1e-2)
        ratio = d1 / d2
        assert 3.3 < ratio < 4.7
        assert disc(5e-4) < 1e-6

    def test_angular_field_cross_chart(self):
        # f = u3 = sinh(a) cos(theta) exercises the angular block
        point_h = np.array([0.8, 1.1, 0.7])
        u = geo.from_hyperbolic(geo.HyperbolicPoint(alpha=point_h[0], theta=point_h[1], phi=point_h[2]))
        val_h = geo.laplace_beltrami_apply(
            lambda p: np.sinh(p[0]) * np.cos(p[1]), point_h, "hyperbolic", h=1e-3, order=4
        )
        val_c = geo.laplace_beltrami_apply(lambda p: p[2], u, "cartesian", h=1e-3, order=4)
        assert val_h == pytest.approx(val_c, abs=1e-6)

    def test_analytic_derivative_callbacks(self):
        u = np.array([0.2, -0.5, 0.8])
        f = lambda p: float(np.sqrt(1.0 + p @ p))

        def grad(p):
            return p / np.sqrt(1.0 + p @ p)

        def hess(p):
            u0 = np.sqrt(1.0 + p @ p)
            return np.eye(3) / u0 - np.outer(p, p) / u0**3

        val = geo.laplace_beltrami_apply(f, u, "cartesian", grad=grad, hess=hess)
        assert val == pytest.approx(3.0 * np.sqrt(1.0 + u @ u), rel=1e-13)

    def test_chart_singularity_raises(self):
        with pytest.raises(DomainError):
            geo.laplace_beltrami_apply(lambda p: 1.0, np.array([0.0, 1.0, 1.0]), "hyperbolic")
        with pytest.raises(DomainError):
            geo.laplace_beltrami_apply(lambda p: 1.0, np.array([1.0, 0.0, 1.0]), "hyperbolic")
        with pytest.raises(DomainError):
            geo.laplace_beltrami_apply(lambda p: 1.0, np.array([0.0, 1.0, 1.0]), "photon")

    def test_photon_chart_flat_laplacian(self):
        # f = r^2 has flat-space Laplacian 6 everywhere
        point = np.array([0.8, 1.2, 0.3])
        val = geo.laplace_beltrami_apply(lambda p: p[0] ** 2, point, "photon", h=1e-3, order=4)
        assert val == pytest.approx(6.0, abs=1e-8)


class TestDivergence:
    def test_zero_field(self):
        val = geo.divergence_u(lambda p: np.zeros(3), np.array([1.0, 1.0, 1.0]), "hyperbolic")
        assert val == 0.0

    def test_friction_field_hyperbolic(self):
        nu = 0.7
        point = np.array([1.0, np.pi / 2, 1.0])
        val = geo.divergence_u(
            lambda p: np.array([-nu * np.sinh(p[0]), 0.0, 0.0]), point, "hyperbolic", h=1e-4, order=4
        )
        assert val == pytest.approx(-3.0 * nu * np.cosh(1.0), rel=1e-9)

    def test_friction_cross_chart(self):
        nu = 0.7
        u = np.array([0.0, 0.0, np.sinh(1.0)])
        val_c = geo.divergence_u(lambda p: -nu * p * np.sqrt(1.0 + p @ p), u, "cartesian", h=1e-4, order=4)
        assert val_c == pytest.approx(-3.0 * nu * np.cosh(1.0), abs=1e-8)

    def test_component_transformation_consistency(self):
        # generic constant cartesian field, transformed into chart components
        F_cart = np.array([0.3, -0.8, 0.5])
        u = geo.from_hyperbolic(geo.HyperbolicPoint(alpha=0.9, theta=1.2, phi=0.8))

        def F_hyp(p):
            uu = geo.from_hyperbolic(geo.HyperbolicPoint(alpha=p[0], theta=p[1], phi=p[2]))
            return np.array(geo.vector_to_hyperbolic(F_cart, uu))

        val_h = geo.divergence_u(F_hyp, np.array([0.9, 1.2, 0.8]), "hyperbolic", h=1e-4, order=4)
        val_c = geo.divergence_u(lambda p: F_cart, u, "cartesian", h=1e-4, order=4)
        assert val_h == pytest.approx(val_c, abs=1e-8)

    def test_divergence_laplacian_compatibility(self):
        # div(G^{-1} grad f) must reproduce the Laplace-Beltrami value
        u = np.array([0.4, -0.2, 0.7])

        def f(p):
            return float(np.sin(p[0]) + p[1] * p[2] + 0.3 * p[0] ** 2)

        def grad_f(p):
            return np.array([np.cos(p[0]) + 0.6 * p[0], p[2], p[1]])

        def A(p):
            return geo.metric(p).g_inv @ grad_f(p)

        div_val = geo.divergence_u(A, u, "cartesian", h=1e-3, order=4)
        lap_val = geo.laplace_beltrami_apply(f, u, "cartesian", h=1e-3, order=4)
        assert div_val == pytest.approx(lap_val, abs=1e-8)

    def test_weighted_divergence(self):
        # with Phi = constant c the divergence scales by c
        nu = 0.3
        point = np.array([1.0, np.pi / 2, 1.0])
        field = lambda p: np.array([-nu * np.sinh(p[0]), 0.0, 0.0])
        plain = geo.divergence_u(field, point, "hyperbolic", h=1e-4, order=4)
        weighted = geo.divergence_u(field, point, "hyperbolic", phi=lambda p: 2.0, h=1e-4, order=4)
        assert weighted == pytest.approx(2.0 * plain, rel=1e-12)

    def test_singularity_raises(self):
        with pytest.raises(DomainError):
            geo.divergence_u(lambda p: np.zeros(3), np.array([0.0, 1.0, 0.0]), "photon")
