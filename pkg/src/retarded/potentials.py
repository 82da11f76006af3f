"""Retarded scalar and vector potentials of finite-support sources.

Sign convention: ``phi = +int rho(t - d/c) / d dV`` and
``A = +(1/c) int j(t - d/c) / d dV``, which makes ``E = -grad phi - (1/c) dA/dt``
equal to the Coulomb integral with a positive coefficient and gives
``div E = 4 pi rho``.  Time-harmonic amplitudes use the outgoing kernel
``exp(ikd)/d`` with time dependence ``exp(-i omega t)``.

The engine here computes potentials and first-derivative fields together
because they share nodes and source samples; :mod:`retarded.fields` exposes
the field half.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import SpatialDomain, as_vec3, check_clearance
from .quadrature import QuadratureSpec, polar_grid, use_polar_path
from .sources import (
    BandLimited,
    Electrostatic,
    Magnetostatic,
    Monochromatic,
    SourceModel,
    raw_charge,
    raw_current,
    temporal_terms,
)

REGULAR_BATCH = 16


@dataclass(frozen=True)
class PotentialSample:
    phi: complex
    a: np.ndarray
    point: np.ndarray
    time: float


@dataclass
class Amplitudes:
    """Potentials and fields of one amplitude model at a batch of points."""

    phi: np.ndarray  # (M,)
    a: np.ndarray  # (M, 3)
    e: np.ndarray  # (M, 3)
    h: np.ndarray  # (M, 3)

    @classmethod
    def zeros(cls, m: int) -> "Amplitudes":
        return cls(np.zeros(m, complex), np.zeros((m, 3), complex), np.zeros((m, 3), complex), np.zeros((m, 3), complex))

    def scaled_sum(self, other: "Amplitudes", factor) -> "Amplitudes":
        return Amplitudes(
            self.phi + factor * other.phi,
            self.a + factor * other.a,
            self.e + factor * other.e,
            self.h + factor * other.h,
        )


def _kernel_sums(dirs, u, w_d2, rho, j, k: float, c: float) -> Amplitudes:
    """Kernel sums over the polar grid of a single observer.

    ``dirs``: (D, 3) ray directions; ``u``, ``w_d2``, ``rho``: (D, R);
    ``j``: (D, R, 3), or None when the current vanishes.  The unit vector
    from node to observer is ``-dirs``, constant along a ray, so the radial
    sums are taken first.  All reductions are pairwise.
    """
    if k == 0.0:
        g_w = w_d2 * u
        dg_w = -w_d2
    else:
        phase = np.exp(1j * k * u)
        g_w = w_d2 * u * phase
        dg_w = w_d2 * (1j * k * u - 1.0) * phase
    phi = np.sum(np.sum(g_w * rho, axis=1))
    e = np.sum(np.sum(dg_w * rho, axis=1)[:, None] * dirs, axis=0)
    if j is None:
        return Amplitudes(phi[None], np.zeros((1, 3), complex), e[None] + 0j, np.zeros((1, 3), complex))
    jc = [np.ascontiguousarray(j[..., i]) for i in range(3)]
    a = np.array([np.sum(np.sum(g_w * jc[i], axis=1)) for i in range(3)]) / c
    e = e + 1j * k * a
    ray_h = np.stack([np.sum(dg_w * jc[i], axis=1) for i in range(3)], axis=1)
    h = -np.sum(np.cross(dirs, ray_h), axis=0) / c
    return Amplitudes(phi[None], a[None], e[None], h[None])


def _rsum(weights, values):
    """Row-wise pairwise ``weights @ values`` for a batch of observers."""
    if values.ndim == 1:
        return np.sum(weights * values, axis=1)
    return np.stack([np.sum(weights * values[:, i], axis=1) for i in range(values.shape[1])], axis=1)


def _regular_sums(obs, pts, d, w, rho, j, k: float, c: float) -> Amplitudes:
    """Kernel sums for observers well away from the nodes.

    Same quantities as :func:`_kernel_sums`, with ``r0 - r`` expanded as
    ``r0 * S - sum(r ...)`` so no (M, N, 3) array is formed.
    """
    if k == 0.0:
        g_w = w / d
        q = -w / d**3
    else:
        phase = np.exp(1j * k * d)
        g_w = w * phase / d
        q = w * (1j * k * d - 1.0) * phase / d**3
    # q * (r0 - r) is the weighted kernel gradient
    e = -(obs * _rsum(q, rho)[:, None] - _rsum(q, pts * rho[:, None]))
    m = len(obs)
    phi = _rsum(g_w, rho)
    if j is None:
        return Amplitudes(phi, np.zeros((m, 3), complex), e + 0j, np.zeros((m, 3), complex))
    a = _rsum(g_w, j) / c
    e = e + 1j * k * a
    h = (np.cross(obs, _rsum(q, j)) - _rsum(q, np.cross(pts, j))) / c
    return Amplitudes(phi, a, e, h)


def _wave_number(model) -> float:
    return model.k if isinstance(model, Monochromatic) else 0.0


def _current_or_none(model, pts):
    if isinstance(model, Electrostatic):
        return None
    return raw_current(model, pts)


@lru_cache(maxsize=8)
def _regular_rule(domain: SpatialDomain, n: int):
    return domain.volume_nodes(n)


@lru_cache(maxsize=16)
def _regular_sources(model, n: int):
    pts, _ = _regular_rule(model.domain, n)
    return raw_charge(model, pts), _current_or_none(model, pts)


def amplitude_fields(models, points, spec: QuadratureSpec) -> list[Amplitudes]:
    """Potentials and fields of each amplitude model (static or monochromatic).

    All ``models`` must share one domain; nodes are built once per point and
    reused across models.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    domain = models[0].domain
    out = [Amplitudes.zeros(len(points)) for _ in models]
    polar_mask = np.array([use_polar_path(domain, p, spec) for p in points], dtype=bool)

    for idx in np.flatnonzero(polar_mask):
        dirs, u, w_d2, grid = polar_grid(domain, points[idx], spec)
        flat = grid.reshape(-1, 3)
        for res, m in zip(out, models):
            rho = raw_charge(m, flat).reshape(u.shape)
            j = _current_or_none(m, flat)
            j = None if j is None else j.reshape(grid.shape)
            s = _kernel_sums(dirs, u, w_d2, rho, j, _wave_number(m), m.constants.c)
            res.phi[idx], res.a[idx], res.e[idx], res.h[idx] = s.phi[0], s.a[0], s.e[0], s.h[0]

    regular = np.flatnonzero(~polar_mask)
    if len(regular):
        pts, w = _regular_rule(domain, spec.n_regular)
        for start in range(0, len(regular), REGULAR_BATCH):
            idx = regular[start:start + REGULAR_BATCH]
            obs = points[idx]
            d = np.sqrt(sum((obs[:, i, None] - pts[None, :, i]) ** 2 for i in range(3)))
            for res, m in zip(out, models):
                rho, j = _regular_sources(m, spec.n_regular)
                s = _regular_sums(obs, pts, d, w, rho, j, _wave_number(m), m.constants.c)
                res.phi[idx], res.a[idx], res.e[idx], res.h[idx] = s.phi, s.a, s.e, s.h
    return out


def evaluate(model: SourceModel, points, t: float, spec: QuadratureSpec) -> Amplitudes:
    """Time-domain potentials and fields at ``points`` and time ``t``."""
    terms = temporal_terms(model, t)
    amps = amplitude_fields([m for m, _, _ in terms], points, spec)
    total = Amplitudes.zeros(len(amps[0].phi))
    for (_, _, factor), amp in zip(terms, amps):
        total = total.scaled_sum(amp, factor)
    return total


def _single(model, p0, spec) -> Amplitudes:
    return amplitude_fields([model], as_vec3(p0)[None, :], spec)[0]


def scalar_potential_static(model: SourceModel, p0, spec: QuadratureSpec = QuadratureSpec()) -> complex:
    """Static potential ``int rho / d dV``.

    Points well outside the support use the regular rule; interior points
    and exterior points near the boundary use the polar rule centred on
    ``p0`` (see :func:`retarded.quadrature.use_polar_path`).
    """
    if not isinstance(model, (Electrostatic, Magnetostatic)):
        raise TypeError("static potential needs an electrostatic or magnetostatic model")
    return complex(_single(model, p0, spec).phi[0])


def vector_potential_static(model: SourceModel, p0, spec: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    if isinstance(model, Electrostatic):
        return np.zeros(3, complex)
    if not isinstance(model, Magnetostatic):
        raise TypeError("static vector potential needs a magnetostatic model")
    return _single(model, p0, spec).a[0]


def potentials_mono(model: Monochromatic, p0, spec: QuadratureSpec = QuadratureSpec()):
    """Complex amplitudes ``(phi_a, A_a)`` with kernel ``exp(ikd)/d``, ``k = omega/c``."""
    if not isinstance(model, Monochromatic):
        raise TypeError("potentials_mono needs a monochromatic model")
    s = _single(model, p0, spec)
    return complex(s.phi[0]), s.a[0]


def potentials_general(model: BandLimited, p0, t: float, spec: QuadratureSpec = QuadratureSpec()) -> PotentialSample:
    """Band synthesis: ``sum weight * amplitude(omega) * exp(-i omega t)``."""
    if not isinstance(model, BandLimited):
        raise TypeError("potentials_general needs a band-limited model")
    return potentials(model, p0, t, spec)


def potentials(model: SourceModel, p0, t: float = 0.0, spec: QuadratureSpec = QuadratureSpec()) -> PotentialSample:
    p0 = as_vec3(p0)
    s = evaluate(model, p0[None, :], t, spec)
    return PotentialSample(phi=complex(s.phi[0]), a=s.a[0], point=p0, time=float(t))


def _offsets(h: float) -> np.ndarray:
    return h * np.vstack([np.eye(3), -np.eye(3)])


def gauge_residual(model: SourceModel, p0, t: float = 0.0, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Lorenz-gauge defect by central differences of the vector potential.

    Time-domain models report ``|div A + (1/c) d(phi)/dt|``; monochromatic
    models the amplitude form ``|div A_a - i k phi_a|``.
    """
    p0 = as_vec3(p0)
    h = spec.fd_step
    check_clearance(model.domain, p0, 2.0 * h)
    pts = np.vstack([p0[None, :], p0 + _offsets(h)])
    terms = [(model, model.omega, 1.0)] if isinstance(model, Monochromatic) else temporal_terms(model, t)
    amps = amplitude_fields([m for m, _, _ in terms], pts, spec)
    total = 0j
    c = model.constants.c
    for (_, omega, factor), s in zip(terms, amps):
        div_a = sum((s.a[1 + i, i] - s.a[4 + i, i]) / (2.0 * h) for i in range(3))
        total += factor * (div_a - 1j * omega / c * s.phi[0])
    return abs(total)
