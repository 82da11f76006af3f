import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from retarded.geometry import Ball, Box, OutsideDomainError
from retarded.quadrature import (
    QuadratureSpec,
    integrate_band,
    integrate_polar_singular,
    integrate_regular,
    integrate_surface,
    kernel_nodes,
    polar_nodes,
)


def ones(p):
    return np.ones(len(p))


class TestRegular:
    def test_volumes(self):
        assert integrate_regular(Ball((0, 0, 0), 1.0), ones) == pytest.approx(4 * math.pi / 3, abs=1e-8)
        assert integrate_regular(Box((0, 0, 0), (1, 2, 3)), ones) == pytest.approx(6.0, abs=1e-12)

    def test_exterior_kernel(self):
        f = lambda p: 1.0 / np.linalg.norm(p - np.array([3.0, 0, 0]), axis=1)
        assert integrate_regular(Ball((0, 0, 0), 1.0), f) == pytest.approx(4 * math.pi / 9, abs=1e-6)

    def test_vector_valued(self, box):
        # first moments give the centroid
        moment = integrate_regular(box, lambda p: p)
        assert np.allclose(moment / box.volume, box.center, atol=1e-13)


class TestPolar:
    def test_center_powers(self, ball):
        assert integrate_polar_singular(ball, (0, 0, 0), ones, 1) == pytest.approx(2 * math.pi, abs=1e-8)
        assert integrate_polar_singular(ball, (0, 0, 0), ones, 2) == pytest.approx(4 * math.pi, abs=1e-8)

    def test_off_center_matches_brute_force(self, ball):
        # brute force: spherical coordinates about the ball center, adaptive in r
        p0 = np.array([0.5, 0.0, 0.0])

        def shell(r):
            # angular integral of 1/|r n - p0| over the sphere of radius r
            return 4 * math.pi / max(r, 0.5)

        brute, _ = integrate.quad(lambda r: r * r * shell(r), 0.0, 1.0, points=[0.5])
        got = integrate_polar_singular(ball, p0, ones, 1)
        assert got == pytest.approx(brute, abs=1e-4)
        assert got == pytest.approx(2 * math.pi * (1 - 0.25 / 3), abs=1e-10)

    def test_box_power_one(self):
        # f = 1/d over a cube from its center, checked against scipy on one octant
        box = Box((-1, -1, -1), (1, 1, 1))
        octant, _ = integrate.tplquad(lambda z, y, x: 1.0 / math.sqrt(x * x + y * y + z * z), 0, 1, 0, 1, 0, 1,
                                      epsabs=1e-10, epsrel=1e-10)
        assert integrate_polar_singular(box, (0, 0, 0), ones, 1) == pytest.approx(8 * octant, rel=1e-8)

    @pytest.mark.parametrize("p0", [(0.2, 0.1, 0.7), (0.9, 0.45, 1.95), (0.0, 0.0, 1.999), (0.99, 0.49, 1.99)])
    def test_box_off_center(self, box, p0):
        # scipy on sub-boxes split at p0, so the kernel peak sits on a corner
        cuts = [sorted({lo, hi, c}) for lo, hi, c in zip(box.lo, box.hi, p0)]
        brute = 0.0
        for a, b in zip(cuts[0], cuts[0][1:]):
            for c, d in zip(cuts[1], cuts[1][1:]):
                for e, f in zip(cuts[2], cuts[2][1:]):
                    brute += integrate.tplquad(
                        lambda z, y, x: 1.0 / math.dist((x, y, z), p0), a, b, c, d, e, f,
                        epsabs=1e-11, epsrel=1e-11)[0]
        assert integrate_polar_singular(box, p0, ones, 1) == pytest.approx(brute, abs=1e-6)

    def test_errors(self, ball):
        with pytest.raises(OutsideDomainError):
            integrate_polar_singular(ball, (2, 0, 0), ones, 1)
        with pytest.raises(ValueError):
            integrate_polar_singular(ball, (0, 0, 0), ones, 3)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.0, 0.95), st.floats(0.0, math.pi), st.floats(0.0, 2 * math.pi))
    def test_newton_potential_of_ball(self, r, theta, phi):
        p0 = r * np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
        got = integrate_polar_singular(Ball((0, 0, 0), 1.0), p0, ones, 1)
        assert got == pytest.approx(2 * math.pi * (1 - r * r / 3), rel=1e-9)

    def test_weights_cancel_singularity(self, ball):
        n = polar_nodes(ball, np.zeros(3), QuadratureSpec())
        assert n.d.min() > 0
        assert np.allclose(np.linalg.norm(n.direction, axis=1), 1.0)
        # w_d2 * d^2 sums to the volume
        assert np.sum(n.w_d2 * n.d**2) == pytest.approx(ball.volume, rel=1e-12)

    @pytest.mark.parametrize("p0", [(1.0005, 0, 0), (0.3, -0.7, 0.8), (1.4, 0.2, 0.1)])
    def test_exterior_rule_ball(self, ball, p0):
        n = kernel_nodes(ball, p0, QuadratureSpec())
        r = np.linalg.norm(p0)
        assert np.sum(n.w_d2 * n.d**2) == pytest.approx(ball.volume, rel=1e-10)
        # Newton potential of the unit ball outside: volume / r
        assert np.sum(n.w_d2 * n.d) == pytest.approx(ball.volume / r, rel=1e-10)

    @pytest.mark.parametrize("p0", [(0.3, 0.1, 2.0005), (1.001, 0.501, 2.001), (1.5, 0.2, 0.3)])
    def test_exterior_rule_box(self, box, p0):
        # signed cones: solid angles cancel and the volume is recovered
        n = kernel_nodes(box, p0, QuadratureSpec())
        assert np.sum(n.w_d2 * n.d**2) == pytest.approx(box.volume, rel=1e-12)


class TestSurface:
    def test_identities(self, ball):
        m = ball.surface(16)
        assert integrate_surface(m, lambda p, n: n[:, 0]) == pytest.approx(0.0, abs=1e-8)
        assert integrate_surface(m, lambda p, n: np.ones(len(p))) == pytest.approx(4 * math.pi, abs=1e-6)

    def test_coulomb_solid_angle(self):
        m = Ball((0, 0, 0), 2.0).surface(16)
        f = lambda p, n: np.einsum("ij,ij->i", p, n) / np.linalg.norm(p, axis=1) ** 3
        assert integrate_surface(m, f) == pytest.approx(4 * math.pi, abs=1e-6)


class TestBand:
    def test_examples(self):
        g = lambda om: 3.0 * om + 1.0
        assert integrate_band([(2.0, 1.0)], g) == g(2.0)
        assert integrate_band([(2.0, 1.0), (5.0, 0.0)], g) == g(2.0)
        a, b = 0.3 - 1j, 2.5
        assert integrate_band([(2.0, a), (5.0, b)], g) == a * g(2.0) + b * g(5.0)

    def test_duplicate_frequency(self):
        with pytest.raises(ValueError):
            integrate_band([(1.0, 1.0), (1.0, 2.0)], lambda om: om)


class TestSpec:
    def test_validation(self, ball):
        with pytest.raises(ValueError):
            QuadratureSpec(n_radial=2)
        with pytest.raises(ValueError):
            QuadratureSpec(fd_step=0.0)
        with pytest.raises(ValueError):
            QuadratureSpec(fd_step=0.5).check_for(ball)

    def test_refined(self):
        r = QuadratureSpec().refined()
        assert (r.n_radial, r.n_polar, r.n_azimuth, r.n_regular) == (96, 64, 128, 48)
        assert r.fd_step == 5e-4
