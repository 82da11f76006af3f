"""Finite source domains, their boundaries and ray-exit distances.

Points are plain ``numpy`` arrays of shape ``(3,)`` (or ``(N, 3)`` for
batches).  Domains are immutable; every operation is a pure function.
New domain variants subclass :class:`SpatialDomain` and implement the
abstract methods, after which the quadrature code picks them up unchanged.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

UNIT_TOL = 1e-12


class OutsideDomainError(ValueError):
    """A point that must lie strictly inside a domain does not."""


class ProbeTooCloseError(ValueError):
    """A finite-difference stencil would straddle the domain boundary."""


def as_vec3(p) -> np.ndarray:
    v = np.asarray(p, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"vector components must be finite, got {v}")
    return v


def _check_unit(direction: np.ndarray) -> None:
    norms = np.linalg.norm(np.atleast_2d(direction), axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise ValueError("direction must be unit length within 1e-12")


@dataclass(frozen=True)
class SurfaceMesh:
    """Weighted sample of a closed surface.

    ``domain`` records the region the surface bounds, when known; it lets
    flux checks decide which source volume is enclosed.
    """

    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    domain: "SpatialDomain | None" = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def area(self) -> float:
        return float(np.sum(self.weights))


class SpatialDomain(abc.ABC):
    """Bounded region with a piecewise-smooth boundary."""

    @abc.abstractmethod
    def contains_points(self, pts: np.ndarray) -> np.ndarray:
        """Boolean mask of points strictly inside, for ``pts`` of shape (N, 3)."""

    @abc.abstractmethod
    def ray_segments(self, p0: np.ndarray, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Parameter interval ``[t_in, t_out]`` of each ray inside the domain.

        ``t_in`` is clipped to 0, so for an interior ``p0`` it is 0 and
        ``t_out`` is the exit distance.  Rays that miss return ``t_in == t_out``.
        """

    def angular_rule(self, p0: np.ndarray, n_polar: int, n_azimuth: int):
        """Directions about ``p0`` with solid-angle weights and radial extents.

        Returns ``(dirs, weights, t_in, t_out)`` such that
        ``sum_i weights[i] * int_{t_in[i]}^{t_out[i]} F(p0 + u dirs[i]) du``
        approximates ``int_D F / |r - p0|**2 dV``.  The default is a product
        rule over the whole sphere with ray-segment extents; domains whose
        exit distance has kinks in angle override it.
        """
        dirs, w = sphere_directions(n_polar, n_azimuth)
        t_in, t_out = self.ray_segments(p0, dirs)
        keep = t_out > t_in
        return dirs[keep], w[keep], t_in[keep], t_out[keep]

    @abc.abstractmethod
    def boundary_distance(self, p: np.ndarray) -> float:
        """Euclidean distance from ``p`` to the boundary (inside or outside)."""

    @abc.abstractmethod
    def surface(self, resolution: int) -> SurfaceMesh:
        ...

    @abc.abstractmethod
    def volume_nodes(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Non-singular volume rule with ``n`` nodes per axis: (points, weights)."""

    @property
    @abc.abstractmethod
    def center(self) -> np.ndarray:
        ...

    @property
    @abc.abstractmethod
    def diameter(self) -> float:
        ...

    @property
    @abc.abstractmethod
    def half_extents(self) -> np.ndarray:
        """Half-size of the domain along each coordinate axis."""

    @property
    @abc.abstractmethod
    def volume(self) -> float:
        ...

    @property
    @abc.abstractmethod
    def area(self) -> float:
        ...


@lru_cache(maxsize=32)
def _legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def _gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    x, w = _legendre(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


@lru_cache(maxsize=16)
def sphere_directions(n_polar: int, n_azimuth: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule on the unit sphere.

    Gauss-Legendre in the cosine of the polar angle times the trapezoid rule
    in azimuth.  Returns unit directions (N, 3) and solid-angle weights
    summing to 4*pi.
    """
    mu, wmu = _gauss_legendre(n_polar)
    beta = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    sin_a = np.sqrt(1.0 - mu * mu)
    dirs = np.stack(
        [
            np.outer(sin_a, np.cos(beta)),
            np.outer(sin_a, np.sin(beta)),
            np.outer(mu, np.ones_like(beta)),
        ],
        axis=-1,
    ).reshape(-1, 3)
    w = np.outer(wmu, np.full(n_azimuth, 2.0 * np.pi / n_azimuth)).ravel()
    dirs.flags.writeable = False
    w.flags.writeable = False
    return dirs, w


@dataclass(frozen=True)
class Ball(SpatialDomain):
    center_: tuple[float, float, float]
    radius: float

    def __init__(self, center, radius: float):
        c = as_vec3(center)
        if not (np.isfinite(radius) and radius > 0):
            raise ValueError(f"ball radius must be positive, got {radius}")
        object.__setattr__(self, "center_", tuple(float(x) for x in c))
        object.__setattr__(self, "radius", float(radius))

    @property
    def center(self) -> np.ndarray:
        return np.array(self.center_)

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    @property
    def half_extents(self) -> np.ndarray:
        return np.full(3, self.radius)

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * np.pi * self.radius**3

    @property
    def area(self) -> float:
        return 4.0 * np.pi * self.radius**2

    def contains_points(self, pts):
        rel = np.atleast_2d(pts) - self.center
        return np.einsum("ij,ij->i", rel, rel) < self.radius**2

    def ray_segments(self, p0, dirs):
        dirs = np.atleast_2d(dirs)
        rel = p0 - self.center
        b = dirs @ rel
        disc = b * b - (rel @ rel - self.radius**2)
        root = np.sqrt(np.maximum(disc, 0.0))
        t_in = np.maximum(-b - root, 0.0)
        t_out = np.maximum(-b + root, 0.0)
        t_out = np.where(disc > 0, t_out, 0.0)
        return np.minimum(t_in, t_out), t_out

    def angular_rule(self, p0, n_polar, n_azimuth):
        """Whole-sphere rule inside; outside, only the cone of rays that hit the ball.

        Outside, directions are parametrised about the axis towards the
        center by the impact angle ``xi`` (``sin(alpha) = (R/D) sin(xi)``),
        so chord ends ``D cos(alpha) -+ R cos(xi)`` are smooth even for rays
        that graze the sphere.
        """
        rel = self.center - p0
        dist = float(np.linalg.norm(rel))
        if dist < self.radius:
            return super().angular_rule(p0, n_polar, n_azimuth)
        axis = rel / dist
        helper = np.eye(3)[int(np.argmin(np.abs(axis)))]
        e1 = np.cross(axis, helper)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(axis, e1)
        xi, wxi = _gauss_legendre(n_polar, 0.0, 0.5 * np.pi)
        beta = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
        ratio = self.radius / dist
        sin_a = ratio * np.sin(xi)
        cos_a = np.sqrt(1.0 - sin_a * sin_a)
        # d(Omega) = sin(alpha) d(alpha) d(beta), d(alpha) = ratio cos(xi) d(xi) / cos(alpha)
        w_xi = wxi * sin_a * ratio * np.cos(xi) / cos_a
        dirs = (
            cos_a[:, None, None] * axis
            + (sin_a[:, None] * np.cos(beta)[None, :])[..., None] * e1
            + (sin_a[:, None] * np.sin(beta)[None, :])[..., None] * e2
        ).reshape(-1, 3)
        w = np.outer(w_xi, np.full(n_azimuth, 2.0 * np.pi / n_azimuth)).ravel()
        half = self.radius * np.cos(xi)
        mid = dist * cos_a
        t_in = np.repeat(mid - half, n_azimuth)
        t_out = np.repeat(mid + half, n_azimuth)
        return dirs, w, t_in, t_out

    def boundary_distance(self, p):
        return abs(self.radius - float(np.linalg.norm(as_vec3(p) - self.center)))

    def surface(self, resolution):
        dirs, w = sphere_directions(resolution, 2 * resolution)
        return SurfaceMesh(
            points=self.center + self.radius * dirs,
            normals=dirs,
            weights=self.radius**2 * w,
            domain=self,
        )

    def volume_nodes(self, n):
        # radial GL x polar GL (in cos) x azimuth trapezoid, about the center
        r, wr = _gauss_legendre(n, 0.0, self.radius)
        dirs, wd = sphere_directions(n, 2 * n)
        pts = self.center + (r[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
        w = np.outer(wr * r * r, wd).ravel()
        return pts, w


@dataclass(frozen=True)
class Box(SpatialDomain):
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    def __init__(self, lo, hi):
        a, b = as_vec3(lo), as_vec3(hi)
        if not np.all(a < b):
            raise ValueError(f"box min must be below max on every axis, got {a} and {b}")
        object.__setattr__(self, "lo", tuple(float(x) for x in a))
        object.__setattr__(self, "hi", tuple(float(x) for x in b))

    @property
    def center(self):
        return 0.5 * (np.array(self.lo) + np.array(self.hi))

    @property
    def half_extents(self):
        return 0.5 * (np.array(self.hi) - np.array(self.lo))

    @property
    def diameter(self):
        return float(2.0 * np.linalg.norm(self.half_extents))

    @property
    def volume(self):
        return float(np.prod(2.0 * self.half_extents))

    @property
    def area(self):
        sx, sy, sz = 2.0 * self.half_extents
        return float(2.0 * (sx * sy + sy * sz + sx * sz))

    def contains_points(self, pts):
        pts = np.atleast_2d(pts)
        return np.all((pts > np.array(self.lo)) & (pts < np.array(self.hi)), axis=1)

    def ray_segments(self, p0, dirs):
        # slab intersection
        dirs = np.atleast_2d(dirs)
        lo, hi = np.array(self.lo), np.array(self.hi)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            inv = 1.0 / dirs
            t1 = (lo - p0) * inv
            t2 = (hi - p0) * inv
        tmin = np.where(dirs == 0, np.where((p0 > lo) & (p0 < hi), -np.inf, np.inf), np.minimum(t1, t2))
        tmax = np.where(dirs == 0, np.where((p0 > lo) & (p0 < hi), np.inf, -np.inf), np.maximum(t1, t2))
        t_in = np.maximum(tmin.max(axis=1), 0.0)
        t_out = np.maximum(tmax.min(axis=1), 0.0)
        return np.minimum(t_in, t_out), t_out

    def angular_rule(self, p0, n_polar, n_azimuth):
        """One cone per face with apex ``p0``, split into triangles.

        Each face is cut into four signed triangles at the foot of the
        perpendicular from ``p0``.  Inside a triangle the in-plane polar
        radius is written ``rho = h sinh(tau)`` (``h`` the distance to the
        face plane), which makes the solid-angle density
        ``tanh(tau) sech(tau)`` and the ray length ``h cosh(tau)`` smooth
        however close ``p0`` is to the face.  Cones over faces seen from
        behind (``p0`` outside) get negative weights, so the signed cones
        add up to the box; the source profiles are then sampled between
        ``p0`` and the box and must extend smoothly there.  Angles are sampled through the position along
        each triangle's far edge, ``s = e sinh(sigma)`` with ``e`` the
        edge's distance from the foot, split at the point nearest the foot;
        ``n_polar // 4`` nodes per piece and ``n_azimuth // 4`` in ``tau``.
        """
        lo, hi = np.array(self.lo), np.array(self.hi)
        tiny = 1e-13 * self.diameter
        xs, ws = _legendre(max(4, n_polar // 4))
        xt, wt = _legendre(max(4, n_azimuth // 4))
        dirs, wts, lengths = [], [], []
        for axis in range(3):
            u, v = [a for a in range(3) if a != axis]
            for side, plane in ((-1.0, lo[axis]), (1.0, hi[axis])):
                h_signed = side * (plane - p0[axis])  # > 0 when p0 is on the inner side
                h = abs(h_signed)
                if h <= tiny:
                    continue
                normal = np.zeros(3)
                normal[axis] = np.sign(plane - p0[axis])
                eu, ev = np.eye(3)[u], np.eye(3)[v]
                corners = np.array([[lo[u], lo[v]], [hi[u], lo[v]], [hi[u], hi[v]], [lo[u], hi[v]]]) - (p0[u], p0[v])
                for c1, c2 in zip(corners, np.roll(corners, -1, axis=0)):
                    t_hat = (c2 - c1) / np.linalg.norm(c2 - c1)
                    foot = c1 - t_hat * (c1 @ t_hat)  # closest point of the edge line
                    e = float(np.hypot(*foot))
                    if e <= tiny:
                        continue
                    # points along the edge q = foot + s t_hat with s = e sinh(sigma),
                    # so |q| = e cosh(sigma) and the angle element is sech(sigma) d(sigma)
                    orient = np.sign(foot[0] * t_hat[1] - foot[1] * t_hat[0])
                    g1, g2 = np.arcsinh((c1 - foot) @ t_hat / e), np.arcsinh((c2 - foot) @ t_hat / e)
                    pieces = [(g1, 0.0), (0.0, g2)] if g1 < 0.0 < g2 else [(g1, g2)]
                    for a_, b_ in pieces:
                        sig = a_ + 0.5 * (b_ - a_) * (xs + 1.0)
                        q = foot[None, :] + (e * np.sinh(sig))[:, None] * t_hat[None, :]
                        rho = e * np.cosh(sig)
                        w_psi = 0.5 * (b_ - a_) * ws * orient / np.cosh(sig)
                        tau_e = np.arcsinh(rho / h)
                        tau = 0.5 * tau_e[:, None] * (xt[None, :] + 1.0)
                        w = (w_psi * 0.5 * tau_e)[:, None] * wt[None, :] * np.tanh(tau) / np.cosh(tau)
                        inplane = (q[:, 0] / rho)[:, None, None] * eu + (q[:, 1] / rho)[:, None, None] * ev
                        d = np.tanh(tau)[..., None] * inplane + (1.0 / np.cosh(tau))[..., None] * normal
                        dirs.append(d.reshape(-1, 3))
                        wts.append((np.sign(h_signed) * w).ravel())
                        lengths.append((h * np.cosh(tau)).ravel())
        L = np.concatenate(lengths)
        return np.concatenate(dirs), np.concatenate(wts), np.zeros_like(L), L

    def boundary_distance(self, p):
        p = as_vec3(p)
        lo, hi = np.array(self.lo), np.array(self.hi)
        if np.all((p > lo) & (p < hi)):
            return float(min((p - lo).min(), (hi - p).min()))
        outside = np.maximum(np.maximum(lo - p, p - hi), 0.0)
        return float(np.linalg.norm(outside))

    def surface(self, resolution):
        lo, hi = np.array(self.lo), np.array(self.hi)
        pts, nrm, wts = [], [], []
        for axis in range(3):
            u, v = [a for a in range(3) if a != axis]
            xu, wu = _gauss_legendre(resolution, lo[u], hi[u])
            xv, wv = _gauss_legendre(resolution, lo[v], hi[v])
            gu, gv = np.meshgrid(xu, xv, indexing="ij")
            w = np.outer(wu, wv).ravel()
            for side, value in ((-1.0, lo[axis]), (1.0, hi[axis])):
                p = np.empty((gu.size, 3))
                p[:, u], p[:, v], p[:, axis] = gu.ravel(), gv.ravel(), value
                n = np.zeros_like(p)
                n[:, axis] = side
                pts.append(p)
                nrm.append(n)
                wts.append(w)
        return SurfaceMesh(np.concatenate(pts), np.concatenate(nrm), np.concatenate(wts), domain=self)

    def volume_nodes(self, n):
        axes = [_gauss_legendre(n, a, b) for a, b in zip(self.lo, self.hi)]
        grids = np.meshgrid(*(x for x, _ in axes), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        w = np.einsum("i,j,k->ijk", *(w for _, w in axes)).ravel()
        return pts, w


def contains(domain: SpatialDomain, p) -> bool:
    """True iff ``p`` lies strictly inside ``domain``."""
    return bool(domain.contains_points(as_vec3(p)[None, :])[0])


def ray_exit_distance(domain: SpatialDomain, p0, direction) -> float:
    """Distance from interior point ``p0`` to the boundary along ``direction``."""
    p0, direction = as_vec3(p0), as_vec3(direction)
    if not contains(domain, p0):
        raise OutsideDomainError(f"point {p0} is not strictly inside the domain")
    _check_unit(direction)
    _, t_out = domain.ray_segments(p0, direction[None, :])
    return float(t_out[0])


def boundary_mesh(domain: SpatialDomain, resolution: int) -> SurfaceMesh:
    if resolution < 4:
        raise ValueError(f"resolution must be at least 4, got {resolution}")
    return domain.surface(int(resolution))


def check_clearance(domain: SpatialDomain, p, margin: float, what: str = "probe") -> None:
    """Raise :class:`ProbeTooCloseError` when ``p`` is within ``margin`` of the boundary."""
    dist = domain.boundary_distance(p)
    if dist <= margin:
        raise ProbeTooCloseError(
            f"{what} {np.asarray(p).tolist()} is {dist:.3g} from the domain boundary; "
            f"the finite-difference stencil needs more than {margin:.3g}"
        )


def domain_from_dict(d: dict) -> SpatialDomain:
    kind = d.get("type")
    if kind == "ball":
        return Ball(d.get("center", (0.0, 0.0, 0.0)), d["radius"])
    if kind == "box":
        return Box(d["min"], d["max"])
    raise ValueError(f"unknown domain type {kind!r}")


def domain_to_dict(domain: SpatialDomain) -> dict:
    if isinstance(domain, Ball):
        return {"type": "ball", "center": list(domain.center_), "radius": domain.radius}
    if isinstance(domain, Box):
        return {"type": "box", "min": list(domain.lo), "max": list(domain.hi)}
    raise TypeError(f"no serialized form for {type(domain).__name__}")
