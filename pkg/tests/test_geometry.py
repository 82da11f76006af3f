import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from retarded.geometry import (
    Ball,
    Box,
    OutsideDomainError,
    ProbeTooCloseError,
    boundary_mesh,
    check_clearance,
    contains,
    domain_from_dict,
    domain_to_dict,
    ray_exit_distance,
    sphere_directions,
)

unit = st.floats(-1.0, 1.0, allow_nan=False)


def _unit_vector(v):
    v = np.asarray(v, float)
    n = np.linalg.norm(v)
    return v / n if n > 1e-3 else None


class TestContains:
    def test_ball(self):
        b = Ball((0, 0, 0), 1.0)
        assert contains(b, (0, 0, 0))
        assert not contains(b, (2, 0, 0))
        assert not contains(b, (1, 0, 0))  # boundary is not strictly inside

    def test_box(self):
        assert contains(Box((0, 0, 0), (1, 1, 1)), (0.5, 0.5, 0.5))
        assert not contains(Box((0, 0, 0), (1, 1, 1)), (1.5, 0.5, 0.5))

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            Ball((0, 0, 0), -1.0)
        with pytest.raises(ValueError):
            Box((0, 0, 0), (1, 0, 1))
        with pytest.raises(ValueError):
            contains(Ball((0, 0, 0), 1.0), (1, 2))


class TestRayExit:
    @pytest.mark.parametrize("direction", [(1, 0, 0), (0, 0, -1), (0.6, 0.8, 0)])
    def test_from_center(self, direction):
        assert ray_exit_distance(Ball((0, 0, 0), 1.0), (0, 0, 0), direction) == pytest.approx(1.0, abs=1e-14)

    def test_off_center(self):
        b = Ball((0, 0, 0), 1.0)
        assert ray_exit_distance(b, (0.5, 0, 0), (1, 0, 0)) == pytest.approx(0.5)
        assert ray_exit_distance(b, (0.5, 0, 0), (-1, 0, 0)) == pytest.approx(1.5)

    def test_box(self):
        b = Box((0, 0, 0), (1, 2, 3))
        assert ray_exit_distance(b, (0.5, 0.5, 0.5), (0, 1, 0)) == pytest.approx(1.5)
        assert ray_exit_distance(b, (0.5, 0.5, 0.5), (0, 0, -1)) == pytest.approx(0.5)

    def test_errors(self):
        b = Ball((0, 0, 0), 1.0)
        with pytest.raises(OutsideDomainError):
            ray_exit_distance(b, (2, 0, 0), (1, 0, 0))
        with pytest.raises(ValueError):
            ray_exit_distance(b, (0, 0, 0), (1, 1, 0))

    @settings(max_examples=60, deadline=None)
    @given(p=st.tuples(unit, unit, unit), d=st.tuples(unit, unit, unit))
    def test_exit_point_on_boundary(self, p, d):
        direction = _unit_vector(d)
        if direction is None:
            return
        for dom in (Ball((0.1, -0.2, 0.3), 1.3), Box((-1.1, -1.2, -1.05), (1.2, 1.1, 1.3))):
            p0 = np.asarray(p) * 0.95
            if not contains(dom, p0):
                continue
            g = ray_exit_distance(dom, p0, direction)
            assert g > 0
            assert dom.boundary_distance(p0 + g * direction) < 1e-9


class TestMeshes:
    def test_sphere_area(self):
        assert boundary_mesh(Ball((0, 0, 0), 1.0), 16).area == pytest.approx(4 * math.pi, rel=1e-12)
        assert boundary_mesh(Ball((1, 2, 3), 2.0), 8).area == pytest.approx(16 * math.pi, rel=1e-12)

    def test_cube_area(self):
        assert boundary_mesh(Box((0, 0, 0), (1, 1, 1)), 4).area == pytest.approx(6.0, rel=1e-13)

    def test_normals_outward_unit(self, box):
        for dom in (Ball((0, 0, 0), 1.0), box):
            m = boundary_mesh(dom, 6)
            assert np.allclose(np.linalg.norm(m.normals, axis=1), 1.0)
            assert not dom.contains_points(m.points + 1e-6 * m.normals).any()
            assert dom.contains_points(m.points - 1e-6 * m.normals).all()

    def test_minimum_resolution(self):
        with pytest.raises(ValueError):
            boundary_mesh(Ball((0, 0, 0), 1.0), 3)

    def test_direction_rule(self):
        dirs, w = sphere_directions(8, 16)
        assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0)
        assert w.sum() == pytest.approx(4 * math.pi, rel=1e-13)
        # second moments of the unit sphere: int x_i x_j dOmega = 4 pi / 3 delta_ij
        assert np.allclose((dirs * w[:, None]).T @ dirs, 4 * math.pi / 3 * np.eye(3), atol=1e-13)

    @pytest.mark.parametrize("dom", [Ball((0.2, 0, -0.1), 0.7), Box((0, 0, 0), (1, 2, 3))])
    def test_volume_rule(self, dom):
        pts, w = dom.volume_nodes(8)
        assert w.sum() == pytest.approx(dom.volume, rel=1e-12)
        assert dom.contains_points(pts).all()


def test_clearance():
    b = Ball((0, 0, 0), 1.0)
    check_clearance(b, (0.5, 0, 0), 0.1)
    check_clearance(b, (2, 0, 0), 0.1)
    with pytest.raises(ProbeTooCloseError):
        check_clearance(b, (0.9995, 0, 0), 2e-3)
    with pytest.raises(ProbeTooCloseError):
        check_clearance(b, (1.0005, 0, 0), 2e-3)


def test_dict_round_trip(box):
    for dom in (Ball((1, 2, 3), 0.5), box):
        assert domain_from_dict(domain_to_dict(dom)) == dom
    with pytest.raises(ValueError):
        domain_from_dict({"type": "torus"})
