import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import azimuthal_a_phi, polarization_potentials, uniform_ball_phi
from retarded.geometry import ProbeTooCloseError
from retarded.potentials import (
    gauge_residual,
    potentials,
    potentials_general,
    potentials_mono,
    scalar_potential_static,
    vector_potential_static,
)
from retarded.quadrature import QuadratureSpec
from retarded.sources import (
    Monochromatic,
    band_limited,
    polarization_ball_current,
    static_counterpart,
)


class TestStatic:
    @pytest.mark.parametrize("p, expected, tol", [((2, 0, 0), 0.5, 1e-4), ((0, 0, 0), 1.5, 1e-3), ((0.5, 0, 0), 1.375, 1e-3)])
    def test_uniform_ball_examples(self, charged_ball, p, expected, tol):
        assert scalar_potential_static(charged_ball, p) == pytest.approx(expected, abs=tol)

    @settings(max_examples=20, deadline=None)
    @given(r=st.floats(0.0, 3.0), theta=st.floats(0.0, math.pi), phi=st.floats(0.0, 2 * math.pi))
    def test_uniform_ball_everywhere(self, charged_ball, r, theta, phi):
        p = r * np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
        assert scalar_potential_static(charged_ball, p).real == pytest.approx(uniform_ball_phi(r), abs=1e-10)

    def test_electrostatic_has_no_vector_potential(self, charged_ball):
        assert np.array_equal(vector_potential_static(charged_ball, (0.2, 0, 0)), np.zeros(3))

    @pytest.mark.parametrize("z", [0.0, 0.4, -0.9, 2.5])
    def test_azimuthal_zero_on_axis(self, ring_current, z):
        assert np.abs(vector_potential_static(ring_current, (0, 0, z))).max() < 1e-6

    @pytest.mark.parametrize("p", [(0.5, 0, 0), (0.3, 0.4, 0.5), (0.0, 0.9, -0.3), (1.2, -0.4, 0.6)])
    def test_azimuthal_multipole_oracle(self, ring_current, p):
        a = vector_potential_static(ring_current, p)
        s = math.hypot(p[0], p[1])
        e_phi = np.array([-p[1] / s, p[0] / s, 0.0])
        expected = azimuthal_a_phi(p) * e_phi
        assert np.abs(a - expected).max() < 1e-3
        assert np.abs(a - expected).max() < 1e-12  # far tighter in practice

    def test_type_checks(self, mono, charged_ball):
        with pytest.raises(TypeError):
            scalar_potential_static(mono, (0, 0, 0))
        with pytest.raises(TypeError):
            potentials_mono(charged_ball, (0, 0, 0))


class TestMonochromatic:
    @pytest.mark.parametrize("p", [(3, 0, 0), (0, 0, 3), (0.3, -0.2, 0.4), (0, 0, 0.5), (0.2, 0.1, 1.5)])
    def test_partial_wave_oracle(self, mono, p):
        phi, a = potentials_mono(mono, p)
        phi_ref, a_ref = polarization_potentials(p)
        assert abs(phi - phi_ref) < 1e-4
        assert np.abs(a - a_ref).max() < 1e-4

    def test_static_limit(self, mono):
        slow = Monochromatic(mono.domain, 1e-6, mono.rho_a, mono.j_a, mono.div_j_a)
        static = static_counterpart(mono)
        for p in [(0.2, 0.1, 0.3), (0, 0, 2.0)]:
            phi, a = potentials_mono(slow, p)
            phi_s = scalar_potential_static(static, p)
            a_s = vector_potential_static(static, p)
            assert abs(phi - phi_s) <= 1e-3 * abs(phi_s)
            assert np.linalg.norm(a - a_s) <= 1e-3 * np.linalg.norm(a_s)

    def test_amplitude_scaling_exact(self, ball, mono):
        double = polarization_ball_current(ball, 1.0, amplitude=2.0)
        for p in [(0.1, 0.2, 0.3), (0.0, 0.0, 3.0)]:
            phi1, a1 = potentials_mono(mono, p)
            phi2, a2 = potentials_mono(double, p)
            assert phi2 == 2 * phi1
            assert np.array_equal(a2, 2 * a1)


class TestBand:
    def test_single_component(self, mono):
        band = band_limited([(1.0, 1.0, mono)])
        phi, a = potentials_mono(mono, (0.2, 0.1, 0.3))
        for t in (0.0, 0.7, 2.1):
            s = potentials_general(band, (0.2, 0.1, 0.3), t)
            f = np.exp(-1j * t)
            assert s.phi == pytest.approx(phi * f, rel=1e-15, abs=1e-15)
            assert np.allclose(s.a, a * f, rtol=1e-15, atol=1e-15)

    def test_two_components_linear(self, band):
        p, t = (0.3, -0.1, 0.2), 0.9
        s = potentials_general(band, p, t)
        expected_phi, expected_a = 0, 0
        for m, w in zip(band.components, band.weights):
            phi, a = potentials_mono(m, p)
            expected_phi += w * phi * np.exp(-1j * m.omega * t)
            expected_a = expected_a + w * a * np.exp(-1j * m.omega * t)
        assert abs(s.phi - expected_phi) < 1e-12
        assert np.abs(s.a - expected_a).max() < 1e-12

    def test_t0_unit_weights(self, ball):
        m1, m2 = polarization_ball_current(ball, 1.0), polarization_ball_current(ball, 3.0)
        s = potentials_general(band_limited([(1.0, 1.0, m1), (3.0, 1.0, m2)]), (0, 0, 2), 0.0)
        assert s.phi == pytest.approx(potentials_mono(m1, (0, 0, 2))[0] + potentials_mono(m2, (0, 0, 2))[0], abs=1e-14)

    def test_type_check(self, mono):
        with pytest.raises(TypeError):
            potentials_general(mono, (0, 0, 0), 0.0)


class TestGauge:
    def test_electrostatic(self, charged_ball):
        assert gauge_residual(charged_ball, (0.3, 0.1, -0.2)) < 1e-8

    def test_azimuthal(self, ring_current):
        assert gauge_residual(ring_current, (0.4, 0.2, 0.1)) < 1e-3

    def test_polarization(self, mono):
        assert gauge_residual(mono, (0.3, 0.0, 0.2)) < 1e-3

    def test_band(self, band):
        assert gauge_residual(band, (0.1, 0.2, -0.3), t=0.4) < 1e-3

    def test_probe_proximity(self, mono):
        with pytest.raises(ProbeTooCloseError):
            gauge_residual(mono, (0.9995, 0.0, 0.0))


def test_potentials_sample_fields(charged_ball):
    s = potentials(charged_ball, (2, 0, 0), 1.0)
    assert s.time == 1.0 and np.array_equal(s.point, [2.0, 0.0, 0.0])
    assert s.phi == pytest.approx(0.5, abs=1e-12)


def test_quadrature_independent_of_batching(mono):
    from retarded.potentials import amplitude_fields

    pts = np.array([[0.1, 0.2, 0.3], [0.0, 0.0, 3.0], [1.05, 0.0, 0.0], [2.0, 1.0, 0.0]])
    batch = amplitude_fields([mono], pts, QuadratureSpec())[0]
    for i, p in enumerate(pts):
        one = amplitude_fields([mono], p[None, :], QuadratureSpec())[0]
        assert one.phi[0] == batch.phi[i]
        assert np.array_equal(one.e[0], batch.e[i])
