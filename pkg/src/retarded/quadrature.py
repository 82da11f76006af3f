"""Volume, surface and band quadrature.

Two volume paths share one node representation, :class:`KernelNodes`:

* the regular rule of the domain, used when the observation point is well
  outside the support;
* the polar rule centred on the observation point.  Each node carries its
  volume weight already divided by ``d**2`` (the ``u**2`` of the spherical
  Jacobian), so kernels up to ``1/d**2`` are evaluated without ever
  dividing by a small distance.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .geometry import (
    OutsideDomainError,
    SpatialDomain,
    SurfaceMesh,
    as_vec3,
    contains,
)

POLAR_REACH = 0.3
DEFAULTS = dict(n_radial=48, n_polar=32, n_azimuth=64, n_regular=24, fd_step=1e-3)


@dataclass(frozen=True)
class QuadratureSpec:
    n_radial: int = DEFAULTS["n_radial"]
    n_polar: int = DEFAULTS["n_polar"]
    n_azimuth: int = DEFAULTS["n_azimuth"]
    n_regular: int = DEFAULTS["n_regular"]
    fd_step: float = DEFAULTS["fd_step"]

    def __post_init__(self):
        for name, low in (("n_radial", 4), ("n_polar", 4), ("n_azimuth", 8), ("n_regular", 8)):
            value = getattr(self, name)
            if int(value) != value or value < low:
                raise ValueError(f"{name} must be an integer >= {low}, got {value}")
        if not (np.isfinite(self.fd_step) and self.fd_step > 0):
            raise ValueError(f"fd_step must be positive, got {self.fd_step}")

    def check_for(self, domain: SpatialDomain) -> None:
        if self.fd_step >= 0.1 * domain.diameter:
            raise ValueError(
                f"fd_step {self.fd_step} must be below 0.1 x domain diameter ({0.1 * domain.diameter:g})"
            )

    def refined(self, factor: int = 2) -> "QuadratureSpec":
        """All node counts multiplied by ``factor``, finite-difference step divided by it."""
        return replace(
            self,
            n_radial=self.n_radial * factor,
            n_polar=self.n_polar * factor,
            n_azimuth=self.n_azimuth * factor,
            n_regular=self.n_regular * factor,
            fd_step=self.fd_step / factor,
        )

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in DEFAULTS}


@dataclass(frozen=True)
class KernelNodes:
    """Quadrature nodes seen from one observation point.

    ``d`` is the distance to the observation point and ``direction`` the unit
    vector from the node towards it.  ``w_d2`` is the volume weight over
    ``d**2``.
    """

    points: np.ndarray
    d: np.ndarray
    direction: np.ndarray
    w_d2: np.ndarray

    def __len__(self):
        return len(self.d)


def regular_nodes(domain: SpatialDomain, p0: np.ndarray, spec: QuadratureSpec) -> KernelNodes:
    pts, w = domain.volume_nodes(spec.n_regular)
    rel = p0 - pts
    d = np.sqrt(np.einsum("ij,ij->i", rel, rel))
    return KernelNodes(points=pts, d=d, direction=rel / d[:, None], w_d2=w / (d * d))


@lru_cache(maxsize=16)
def _radial_rule(n: int):
    return np.polynomial.legendre.leggauss(n)


def polar_grid(domain: SpatialDomain, p0: np.ndarray, spec: QuadratureSpec):
    """Polar rule centred on ``p0`` as ``(dirs, u, w_d2, points)``.

    ``dirs`` is (D, 3); ``u`` and ``w_d2`` are (D, n_radial); ``points`` is
    (D, n_radial, 3).  The angular part comes from
    :meth:`SpatialDomain.angular_rule`.
    """
    dirs, wdir, t_in, t_out = domain.angular_rule(p0, spec.n_polar, spec.n_azimuth)
    x, wx = _radial_rule(spec.n_radial)
    half = 0.5 * (t_out - t_in)
    u = t_in[:, None] + half[:, None] * (x[None, :] + 1.0)
    w_d2 = (wdir * half)[:, None] * wx[None, :]
    pts = p0 + u[:, :, None] * dirs[:, None, :]
    return dirs, u, w_d2, pts


def polar_nodes(domain: SpatialDomain, p0: np.ndarray, spec: QuadratureSpec) -> KernelNodes:
    """Nodes of the spherical rule centred on ``p0``.

    Along each direction the radial Gauss-Legendre rule covers the part of
    the ray inside the domain; for an interior ``p0`` that is ``[0, g]`` with
    ``g`` the ray-exit distance.  Also usable for points on or just outside
    the boundary, where rays cover a chord.
    """
    dirs, u, w_d2, pts = polar_grid(domain, as_vec3(p0), spec)
    direction = np.broadcast_to(-dirs[:, None, :], pts.shape)
    return KernelNodes(
        points=pts.reshape(-1, 3),
        d=u.ravel(),
        direction=direction.reshape(-1, 3),
        w_d2=w_d2.ravel(),
    )


def use_polar_path(domain: SpatialDomain, p0: np.ndarray, spec: QuadratureSpec) -> bool:
    """Interior points, and exterior points closer than ``POLAR_REACH`` diameters to the boundary.

    The regular rule loses accuracy as the kernel peak approaches the
    support; the polar rule stays accurate up to and across the boundary.
    """
    if domain.contains_points(p0[None, :])[0]:
        return True
    return domain.boundary_distance(p0) < POLAR_REACH * domain.diameter


def kernel_nodes(domain: SpatialDomain, p0, spec: QuadratureSpec) -> KernelNodes:
    p0 = as_vec3(p0)
    if use_polar_path(domain, p0, spec):
        return polar_nodes(domain, p0, spec)
    return regular_nodes(domain, p0, spec)


def integrate_regular(domain: SpatialDomain, f: Callable, spec: QuadratureSpec = QuadratureSpec()):
    """Tensor-product Gauss rule for a bounded, continuous integrand.

    Parameters
    ----------
    domain : SpatialDomain
        Integration region.
    f : callable
        Maps points ``(N, 3)`` to values ``(N,)`` or ``(N, m)``.
    spec : QuadratureSpec
        ``n_regular`` nodes per axis are used.
    """
    pts, w = domain.volume_nodes(spec.n_regular)
    vals = np.asarray(f(pts))
    return np.tensordot(w, vals, axes=(0, 0))[()]


def integrate_polar_singular(
    domain: SpatialDomain,
    p0,
    f: Callable,
    kernel_power: int,
    spec: QuadratureSpec = QuadratureSpec(),
):
    """Integral of ``f(r) / |r - p0|**kernel_power`` over the domain, ``p0`` inside.

    Polar coordinates centred on ``p0`` absorb the singularity into the
    volume element; the radial extent in each direction is the ray-exit
    distance.
    """
    p0 = as_vec3(p0)
    if kernel_power not in (1, 2):
        raise ValueError(f"kernel_power must be 1 or 2, got {kernel_power}")
    if not contains(domain, p0):
        raise OutsideDomainError(f"point {p0.tolist()} is not strictly inside the domain")
    nodes = polar_nodes(domain, p0, spec)
    weights = nodes.w_d2 * nodes.d ** (2 - kernel_power)
    vals = np.asarray(f(nodes.points))
    return np.tensordot(weights, vals, axes=(0, 0))[()]


def integrate_surface(mesh: SurfaceMesh, f: Callable):
    """Weighted sum of ``f(points, normals)`` over the mesh samples."""
    vals = np.asarray(f(mesh.points, mesh.normals))
    return np.tensordot(mesh.weights, vals, axes=(0, 0))[()]


def integrate_band(components: Sequence[tuple], g: Callable):
    """Discrete band integral: the sum of ``weight * g(omega)`` over ``(omega, weight)`` pairs."""
    omegas = [om for om, _ in components]
    if len(set(omegas)) != len(omegas):
        raise ValueError(f"band frequencies must be distinct, got {omegas}")
    total = 0
    for omega, weight in components:
        total = total + weight * g(omega)
    return total


__all__ = [
    "QuadratureSpec",
    "KernelNodes",
    "regular_nodes",
    "polar_nodes",
    "polar_grid",
    "kernel_nodes",
    "integrate_regular",
    "integrate_polar_singular",
    "integrate_surface",
    "integrate_band",
]
