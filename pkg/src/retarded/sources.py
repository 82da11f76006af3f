"""Charge and current density models for the four temporal cases.

Profiles are vectorized callables mapping points ``(N, 3)`` to ``(N,)``
(charge) or ``(N, 3)`` (current).  They are only ever asked about points in
the closure of the model's domain; the public ``eval_*`` functions add the
exact zero outside.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .geometry import (
    Ball,
    SpatialDomain,
    SurfaceMesh,
    as_vec3,
    check_clearance,
)

ScalarProfile = Callable[[np.ndarray], np.ndarray]
VectorProfile = Callable[[np.ndarray], np.ndarray]

NUDGE = 1e-8


class SourceValidationError(ValueError):
    """Source violates charge conservation or boundary tangency."""


@dataclass(frozen=True)
class Constants:
    c: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.c) and self.c > 0):
            raise ValueError(f"light speed c must be finite and positive, got {self.c}")

    def k(self, omega: float) -> float:
        return omega / self.c


def _zero_scalar(pts):
    return np.zeros(len(pts))


def _zero_vector(pts):
    return np.zeros((len(pts), 3))


@dataclass(frozen=True)
class Electrostatic:
    domain: SpatialDomain
    rho: ScalarProfile
    constants: Constants = Constants()
    name: str = "electrostatic"


@dataclass(frozen=True)
class Magnetostatic:
    domain: SpatialDomain
    j: VectorProfile
    rho: ScalarProfile = _zero_scalar
    div_j: Optional[ScalarProfile] = None
    constants: Constants = Constants()
    name: str = "magnetostatic"


@dataclass(frozen=True)
class Monochromatic:
    """Time-harmonic source ``rho_a(r) exp(-i omega t)``, ``j_a(r) exp(-i omega t)``."""

    domain: SpatialDomain
    omega: float
    rho_a: ScalarProfile
    j_a: VectorProfile
    div_j_a: Optional[ScalarProfile] = None
    constants: Constants = Constants()
    name: str = "monochromatic"

    def __post_init__(self):
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise ValueError(f"omega must be positive, got {self.omega}")

    @property
    def k(self) -> float:
        return self.constants.k(self.omega)


@dataclass(frozen=True)
class BandLimited:
    """Finite sum of monochromatic components standing in for a band integral."""

    components: tuple
    weights: tuple
    name: str = "band_limited"

    def __post_init__(self):
        if len(self.components) == 0:
            raise ValueError("a band needs at least one component")
        if len(self.components) != len(self.weights):
            raise ValueError("one weight per component is required")
        omegas = [m.omega for m in self.components]
        if len(set(omegas)) != len(omegas):
            raise ValueError(f"component omegas must be distinct, got {omegas}")
        first = self.components[0]
        for m in self.components[1:]:
            if m.domain != first.domain or m.constants != first.constants:
                raise ValueError("band components must share domain and constants")

    @property
    def domain(self) -> SpatialDomain:
        return self.components[0].domain

    @property
    def constants(self) -> Constants:
        return self.components[0].constants


SourceModel = Union[Electrostatic, Magnetostatic, Monochromatic, BandLimited]


def temporal_terms(model: SourceModel, t: float):
    """Split a model into ``(amplitude_model, omega, factor)`` triples.

    The time-domain value of any linear functional of the sources is
    ``sum(factor * F(amplitude_model))``; a time derivative multiplies each
    term by ``-1j * omega``.
    """
    if isinstance(model, (Electrostatic, Magnetostatic)):
        return [(model, 0.0, 1.0 + 0j)]
    if isinstance(model, Monochromatic):
        return [(model, model.omega, np.exp(-1j * model.omega * t))]
    if isinstance(model, BandLimited):
        return [(m, m.omega, complex(w) * np.exp(-1j * m.omega * t)) for m, w in zip(model.components, model.weights)]
    raise TypeError(f"unsupported source model {type(model).__name__}")


def raw_charge(model, pts: np.ndarray) -> np.ndarray:
    """Charge (amplitude) profile at points known to be in the support closure."""
    if isinstance(model, (Electrostatic, Magnetostatic)):
        return np.asarray(model.rho(pts))
    if isinstance(model, Monochromatic):
        return np.asarray(model.rho_a(pts))
    raise TypeError(f"{type(model).__name__} has no single amplitude profile")


def raw_current(model, pts: np.ndarray) -> np.ndarray:
    if isinstance(model, Electrostatic):
        return np.zeros((len(pts), 3), dtype=complex)
    if isinstance(model, Magnetostatic):
        return np.asarray(model.j(pts))
    if isinstance(model, Monochromatic):
        return np.asarray(model.j_a(pts))
    raise TypeError(f"{type(model).__name__} has no single amplitude profile")


def eval_charge(model: SourceModel, p, t: float = 0.0) -> complex:
    p = as_vec3(p)
    if not model.domain.contains_points(p[None, :])[0]:
        return 0j
    return complex(sum(f * raw_charge(m, p[None, :])[0] for m, _, f in temporal_terms(model, t)))


def eval_current(model: SourceModel, p, t: float = 0.0) -> np.ndarray:
    p = as_vec3(p)
    if not model.domain.contains_points(p[None, :])[0]:
        return np.zeros(3, dtype=complex)
    return sum(f * raw_current(m, p[None, :])[0] for m, _, f in temporal_terms(model, t))


def _fd_divergence(profile: VectorProfile, p: np.ndarray, h: float) -> complex:
    offsets = h * np.vstack([np.eye(3), -np.eye(3)])
    vals = np.asarray(profile(p + offsets), dtype=complex)
    return complex(sum((vals[i, i] - vals[i + 3, i]) / (2.0 * h) for i in range(3)))


def divergence_of_current(model, p: np.ndarray, h: float, use_hooks: bool = True) -> complex:
    """div j (or div j_a) of a single-amplitude model at an interior point."""
    if isinstance(model, Electrostatic):
        return 0j
    if isinstance(model, Magnetostatic):
        if use_hooks and model.div_j is not None:
            return complex(model.div_j(p[None, :])[0])
        return _fd_divergence(model.j, p, h)
    if use_hooks and model.div_j_a is not None:
        return complex(model.div_j_a(p[None, :])[0])
    return _fd_divergence(model.j_a, p, h)


def continuity_residual(model: SourceModel, p, t: float = 0.0, h: float = 1e-4, use_hooks: bool = True) -> float:
    """Charge-conservation defect ``|div j + d(rho)/dt|`` at an interior point.

    Monochromatic models report the amplitude form ``|div j_a - i omega rho_a|``.
    Spatial derivatives use central differences of step ``h`` unless the
    model carries an exact divergence hook and ``use_hooks`` is true; time
    derivatives are exact since every variant has analytic time dependence.
    """
    p = as_vec3(p)
    if h <= 0:
        raise ValueError("h must be positive")
    check_clearance(model.domain, p, h)
    if not model.domain.contains_points(p[None, :])[0]:
        raise ValueError(f"point {p.tolist()} is not inside the source domain")
    if isinstance(model, Monochromatic):
        div = divergence_of_current(model, p, h, use_hooks)
        return abs(div - 1j * model.omega * raw_charge(model, p[None, :])[0])
    total = 0j
    for m, omega, factor in temporal_terms(model, t):
        div = divergence_of_current(m, p, h, use_hooks)
        drho_dt = -1j * omega * raw_charge(m, p[None, :])[0]
        total += factor * (div + drho_dt)
    return abs(total)


def _amplitude_models(model: SourceModel):
    if isinstance(model, BandLimited):
        return list(model.components)
    return [model]


def tangency_max(model: SourceModel, mesh: SurfaceMesh) -> float:
    """Largest normal current ``|j . n|`` over the boundary mesh.

    Samples are moved inward by ``1e-8`` domain diameters so they sit in the
    support.  Band models report the worst component.
    """
    inner = mesh.points - NUDGE * model.domain.diameter * mesh.normals
    worst = 0.0
    for m in _amplitude_models(model):
        j = raw_current(m, inner)
        jn = np.abs(np.einsum("ij,ij->i", j, mesh.normals))
        worst = max(worst, float(jn.max(initial=0.0)))
    return worst


def interior_samples(domain: SpatialDomain, n: int, margin: float, seed: int = 0) -> np.ndarray:
    """Deterministic pseudo-random points inside ``domain``, at least ``margin`` from its boundary."""
    rng = np.random.default_rng(seed)
    lo = domain.center - domain.half_extents
    hi = domain.center + domain.half_extents
    out = []
    while len(out) < n:
        cand = rng.uniform(lo, hi, size=(4 * n, 3))
        for p in cand[domain.contains_points(cand)]:
            if domain.boundary_distance(p) > margin:
                out.append(p)
                if len(out) == n:
                    break
    return np.array(out)


def validate_source(
    model: SourceModel,
    n_points: int = 100,
    continuity_tol: float = 1e-6,
    tangency_tol: float = 1e-6,
    h: float = 1e-4,
    mesh_resolution: int = 16,
) -> None:
    """Reject sources outside the hypotheses of the existence theorems.

    Raises :class:`SourceValidationError` if charge conservation fails at any
    of ``n_points`` interior samples or if the current has a normal
    component on the boundary.
    """
    domain = model.domain
    pts = interior_samples(domain, n_points, margin=2 * h)
    for m in _amplitude_models(model):
        worst = max(continuity_residual(m, p, 0.0, h) for p in pts)
        if worst > continuity_tol:
            raise SourceValidationError(
                f"continuity violated: max |div j + d rho/dt| = {worst:.3g} > {continuity_tol:g} "
                f"(source '{m.name}' does not conserve charge)"
            )
    tang = tangency_max(model, domain.surface(mesh_resolution))
    if tang > tangency_tol:
        raise SourceValidationError(
            f"tangency violated: max |j . n| on the boundary = {tang:.3g} > {tangency_tol:g} "
            f"(current of '{model.name}' is not tangent to the boundary)"
        )


# -- built-in profiles -------------------------------------------------------


def _ball_rel(domain: Ball, pts):
    rel = (np.atleast_2d(pts) - domain.center) / domain.radius
    return rel, np.einsum("ij,ij->i", rel, rel)


def _require_ball(domain):
    if not isinstance(domain, Ball):
        raise ValueError(f"built-in profile needs a ball domain, got {type(domain).__name__}")
    return domain


def uniform_ball_charge(domain: Ball, rho0: float, constants: Constants = Constants()) -> Electrostatic:
    _require_ball(domain)
    return Electrostatic(
        domain=domain,
        rho=lambda pts: np.full(len(np.atleast_2d(pts)), float(rho0)),
        constants=constants,
        name="uniform_ball_charge",
    )


def uniform_ball_charge_q(domain: Ball, charge: float, constants: Constants = Constants()) -> Electrostatic:
    return uniform_ball_charge(domain, 3.0 * charge / (4.0 * np.pi * domain.radius**3), constants)


def azimuthal_ball_current(domain: Ball, amplitude: float = 1.0, constants: Constants = Constants()) -> Magnetostatic:
    """``j = amplitude * s * (1 - (r/R)^2) e_phi`` about the ball's z axis."""
    ball = _require_ball(domain)

    def j(pts):
        rel, r2 = _ball_rel(ball, pts)
        window = amplitude * ball.radius * (1.0 - r2)
        return np.stack([-rel[:, 1] * window, rel[:, 0] * window, np.zeros_like(r2)], axis=1)

    return Magnetostatic(
        domain=ball,
        j=j,
        div_j=_zero_scalar,
        constants=constants,
        name="azimuthal_ball_current",
    )


def polarization_ball_current(
    domain: Ball, omega: float, amplitude: complex = 1.0, constants: Constants = Constants()
) -> Monochromatic:
    """``j_a = amplitude * (1 - (r/R)^2)^2 e_z`` with ``rho_a = div j_a / (i omega)``."""
    ball = _require_ball(domain)
    R = ball.radius

    def j_a(pts):
        _, r2 = _ball_rel(ball, pts)
        out = np.zeros((len(r2), 3), dtype=complex)
        out[:, 2] = amplitude * (1.0 - r2) ** 2
        return out

    def div_j_a(pts):
        rel, r2 = _ball_rel(ball, pts)
        return amplitude * (-4.0 / R) * rel[:, 2] * (1.0 - r2) + 0j

    def rho_a(pts):
        return div_j_a(pts) / (1j * omega)

    return Monochromatic(
        domain=ball,
        omega=float(omega),
        rho_a=rho_a,
        j_a=j_a,
        div_j_a=div_j_a,
        constants=constants,
        name="polarization_ball_current",
    )


def oscillating_charge(
    domain: Ball, omega: float, amplitude: complex = 1.0, constants: Constants = Constants()
) -> Monochromatic:
    """Ill-posed source: an oscillating charge cloud with no current to carry it."""
    ball = _require_ball(domain)

    def rho_a(pts):
        _, r2 = _ball_rel(ball, pts)
        return amplitude * (1.0 - r2) ** 2 + 0j

    return Monochromatic(
        domain=ball,
        omega=float(omega),
        rho_a=rho_a,
        j_a=lambda pts: np.zeros((len(np.atleast_2d(pts)), 3), dtype=complex),
        div_j_a=lambda pts: np.zeros(len(np.atleast_2d(pts)), dtype=complex),
        constants=constants,
        name="oscillating_charge",
    )


def uniform_current(domain: SpatialDomain, direction=(0.0, 0.0, 1.0), amplitude: float = 1.0,
                    constants: Constants = Constants()) -> Magnetostatic:
    """Constant current filling the domain; not tangent to its boundary."""
    vec = amplitude * as_vec3(direction)
    return Magnetostatic(
        domain=domain,
        j=lambda pts: np.tile(vec, (len(np.atleast_2d(pts)), 1)),
        div_j=_zero_scalar,
        constants=constants,
        name="uniform_current",
    )


def band_limited(terms: Sequence[tuple]) -> BandLimited:
    """Build a band from ``(omega, weight, monochromatic_model)`` triples."""
    comps, weights = [], []
    for omega, weight, m in terms:
        if not isinstance(m, Monochromatic):
            raise TypeError("band components must be monochromatic models")
        if m.omega != omega:
            raise ValueError(f"component frequency {m.omega} does not match band entry {omega}")
        comps.append(m)
        weights.append(complex(weight))
    return BandLimited(components=tuple(comps), weights=tuple(weights))


def static_counterpart(model: Monochromatic) -> Magnetostatic:
    """Treat the amplitudes of a monochromatic model as static densities."""
    return Magnetostatic(
        domain=model.domain,
        j=model.j_a,
        rho=model.rho_a,
        constants=model.constants,
        name=f"static_{model.name}",
    )


def scaled(model: Monochromatic, factor: complex) -> Monochromatic:
    div = model.div_j_a
    return Monochromatic(
        domain=model.domain,
        omega=model.omega,
        rho_a=lambda pts: factor * model.rho_a(pts),
        j_a=lambda pts: factor * model.j_a(pts),
        div_j_a=None if div is None else (lambda pts: factor * div(pts)),
        constants=model.constants,
        name=model.name,
    )
