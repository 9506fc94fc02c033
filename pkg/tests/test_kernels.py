"""Kernel values, Sigma_k algebra, incident fields."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from deltashell.geometry import make_sphere_grid
from deltashell.kernels import (
    Exponential,
    Herglotz,
    OverflowGuardError,
    eval_incident,
    eval_incident_grad,
    helmholtz_kernel,
    helmholtz_kernel_gradient,
    make_sigma_k,
    plane_wave,
    sigma_pair_for_xi,
)

EZ = np.array([0.0, 0.0, 1.0])
EX = np.array([1.0, 0.0, 0.0])
EY = np.array([0.0, 1.0, 0.0])


class TestKernel:
    def test_static_value(self):
        assert_allclose(helmholtz_kernel(EZ, np.zeros(3), 0.0), 1.0 / (4 * np.pi), rtol=1e-15)

    def test_oscillatory_value(self):
        assert_allclose(helmholtz_kernel(EZ, np.zeros(3), 2.0), np.exp(2j) / (4 * np.pi), rtol=1e-15)

    def test_symmetry_random_pairs(self, rng):
        x = rng.normal(size=(100, 3))
        y = rng.normal(size=(100, 3))
        assert_allclose(helmholtz_kernel(x, y, 1.7), helmholtz_kernel(y, x, 1.7), rtol=0, atol=1e-16)

    def test_coincident_points_rejected(self):
        with pytest.raises(ValueError, match="coincident"):
            helmholtz_kernel(EZ, EZ, 1.0)

    def test_gradient_matches_finite_differences(self, rng):
        x = rng.normal(size=3) + np.array([2.0, 0, 0])
        y = rng.normal(size=3) * 0.1
        k, h = 1.3, 1e-6
        g = helmholtz_kernel_gradient(x, y, k)
        for ax in range(3):
            e = np.zeros(3)
            e[ax] = h
            fd = (helmholtz_kernel(x + e, y, k) - helmholtz_kernel(x - e, y, k)) / (2 * h)
            assert abs(g[ax] - fd) < 1e-7 * abs(g[ax]) + 1e-12


class TestSigmaK:
    def test_plane_wave_limit(self):
        rho = make_sigma_k(0.0, EX, EZ, 2.0)
        assert_allclose(rho.rho, 2j * EZ, atol=1e-15)
        assert rho.is_plane_wave

    def test_imaginary_norm(self):
        rho = make_sigma_k(3.0, EX, EZ, 4.0)
        assert_allclose(np.linalg.norm(rho.rho.imag), 5.0, rtol=1e-13)

    @pytest.mark.parametrize("w,k", [(0.0, 1.0), (2.0, 1.0), (5.0, 3.0)])
    def test_defining_identity(self, w, k):
        rho = make_sigma_k(w, EX, EY, k)
        dot = rho.rho @ rho.rho
        assert abs(dot.real + k**2) < 1e-10 * k**2 + 1e-14
        assert abs(dot.imag) < 1e-10 * k**2 + 1e-14

    def test_validation(self):
        with pytest.raises(ValueError, match="unit"):
            make_sigma_k(1.0, 2 * EX, EZ, 1.0)
        with pytest.raises(ValueError, match="orthogonal"):
            make_sigma_k(1.0, EX, (EX + EZ) / np.sqrt(2), 1.0)


class TestSigmaPair:
    def test_zero_xi_gives_conjugate_pair(self):
        r1, r2 = sigma_pair_for_xi(np.zeros(3), 1.0, 2.0)
        assert_allclose(r2.rho, -np.conj(r1.rho), atol=1e-13)

    def test_constraint_boundary(self):
        # |xi| = 2k, w = 0: s = 0 and rho1 = i xi / 2
        xi = 2.0 * EX
        r1, r2 = sigma_pair_for_xi(xi, 1.0, 0.0)
        assert_allclose(r1.rho, 0.5j * xi, atol=1e-13)
        assert abs(r1.rho @ r1.rho + 1.0) < 1e-12

    def test_membership_and_pairing(self):
        xi = EX.copy()
        r1, r2 = sigma_pair_for_xi(xi, 1.0, 1.0)
        for r in (r1, r2):
            assert abs(r.rho @ r.rho + 1.0) < 1e-12
        assert np.max(np.abs(np.conj(r1.rho) + r2.rho + 1j * xi)) < 1e-10 * 2.0

    def test_insufficient_w(self):
        with pytest.raises(ValueError, match="insufficient w"):
            sigma_pair_for_xi(10.0 * EX, 1.0, 0.5)


class TestIncidentFields:
    def test_plane_wave_at_origin(self):
        assert_allclose(eval_incident(plane_wave(EZ), 2.0, np.zeros(3)), 1.0)

    def test_plane_wave_is_exponential_at_w_zero(self, rng):
        k = 1.7
        pw = plane_wave(EZ)
        ex = Exponential(make_sigma_k(0.0, EX, EZ, k))
        pts = rng.normal(size=(20, 3))
        assert_allclose(eval_incident(pw, k, pts), eval_incident(ex, k, pts), rtol=1e-13)

    def test_herglotz_constant_density_at_origin(self):
        g = make_sphere_grid(1.0, 12, 24)
        h = Herglotz(directions=g.normals, weights=g.weights, density=np.ones(g.n_nodes))
        assert_allclose(eval_incident(h, 1.0, np.zeros(3)), 4 * np.pi, rtol=1e-12)

    def test_herglotz_constant_density_closed_form(self, rng):
        # int e^{ik d.x} dsigma(d) = 4 pi sin(k|x|)/(k|x|)
        k = 1.4
        g = make_sphere_grid(1.0, 16, 32)
        h = Herglotz(directions=g.normals, weights=g.weights, density=np.ones(g.n_nodes))
        for _ in range(5):
            x = rng.normal(size=3)
            r = np.linalg.norm(x)
            assert_allclose(
                eval_incident(h, k, x), 4 * np.pi * np.sin(k * r) / (k * r), rtol=1e-10
            )

    def test_herglotz_degree_one_harmonic_vanishes_at_origin(self):
        g = make_sphere_grid(1.0, 12, 24)
        h = Herglotz(directions=g.normals, weights=g.weights, density=g.normals[:, 2].astype(complex))
        assert abs(eval_incident(h, 1.0, np.zeros(3))) < 1e-12

    @pytest.mark.parametrize("w", [0.0, 1.0, 3.0])
    def test_exponential_solves_helmholtz(self, w, rng):
        # second-order FD residual of (lap + k^2) e^{rho.x}
        k, h = 2.0, 1e-3
        rho = make_sigma_k(w, EX, EZ, k)
        f = Exponential(rho)
        for _ in range(20):
            x = rng.normal(size=3)
            if abs(np.real(rho.rho @ x)) > 5:
                x = x / np.linalg.norm(x)
            lap = -6.0 * eval_incident(f, k, x)
            for ax in range(3):
                e = np.zeros(3)
                e[ax] = h
                lap += eval_incident(f, k, x + e) + eval_incident(f, k, x - e)
            lap /= h**2
            resid = lap + k**2 * eval_incident(f, k, x)
            assert abs(resid) <= 1e-4 * k**2 * abs(eval_incident(f, k, x))

    def test_gradients_match_finite_differences(self, rng):
        k, h = 1.6, 1e-6
        g = make_sphere_grid(1.0, 8, 16)
        fields = [
            plane_wave(EZ),
            Exponential(make_sigma_k(1.2, EX, EY, k)),
            Herglotz(directions=g.normals, weights=g.weights,
                     density=(g.normals[:, 0] + 0.3).astype(complex)),
        ]
        x = rng.normal(size=3) * 0.4
        for f in fields:
            grad = eval_incident_grad(f, k, x)
            for ax in range(3):
                e = np.zeros(3)
                e[ax] = h
                fd = (eval_incident(f, k, x + e) - eval_incident(f, k, x - e)) / (2 * h)
                assert abs(grad[ax] - fd) < 1e-6 * (abs(grad[ax]) + 1.0)

    def test_overflow_guard(self):
        rho = make_sigma_k(10.0, EX, EZ, 1.0)
        with pytest.raises(OverflowGuardError):
            eval_incident(Exponential(rho), 1.0, 10.0 * EX)

    def test_exponential_checks_wavenumber(self):
        rho = make_sigma_k(0.0, EX, EZ, 2.0)
        with pytest.raises(ValueError, match="built for k"):
            eval_incident(Exponential(rho), 1.0, EZ)
