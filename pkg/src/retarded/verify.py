"""Numerical checks of the identities satisfied by the retarded fields.

Spatial derivatives are central differences of potential and field values
(step ``spec.fd_step``).  Time derivatives are exact: each temporal
component carries ``exp(-i omega t)``, so ``d/dt`` multiplies it by
``-i omega``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .geometry import SpatialDomain, SurfaceMesh, as_vec3, check_clearance
from .potentials import amplitude_fields, evaluate
from .quadrature import QuadratureSpec, integrate_regular, integrate_surface
from .sources import (
    SourceModel,
    continuity_residual,
    eval_charge,
    eval_current,
    raw_charge,
    temporal_terms,
)

MAXWELL_MARGIN = 2.0
WAVE_MARGIN = 3.0
FOUR_PI = 4.0 * math.pi

RESIDUAL_NAMES = ("maxwell_1", "maxwell_2", "maxwell_3", "maxwell_4", "gauge", "wave_phi", "wave_a", "continuity")


@dataclass
class ResidualReport:
    """Max-norm residuals over a probe set.

    ``relative`` holds the same norms divided by the local source magnitude
    (``4 pi |rho|`` or ``4 pi |j| / c``) at probes where that source is
    nonzero, and absolute values elsewhere.
    """

    maxwell_1: float
    maxwell_2: float
    maxwell_3: float
    maxwell_4: float
    gauge: float
    wave_phi: float
    wave_a: float
    continuity: float
    probe_points: list
    spec_used: QuadratureSpec
    relative: dict = field(default_factory=dict)
    flux_mismatch: float | None = None
    flux: tuple | None = None

    @property
    def maxwell(self) -> list[float]:
        return [self.maxwell_1, self.maxwell_2, self.maxwell_3, self.maxwell_4]

    def value(self, name: str, relative: bool = True) -> float:
        return self.relative[name] if relative else getattr(self, name)

    def to_json(self) -> dict:
        out = {
            "maxwell": self.maxwell,
            "gauge": self.gauge,
            "wave": {"phi": self.wave_phi, "a": self.wave_a},
            "continuity": self.continuity,
            "flux": None if self.flux is None else {"value": self.flux[0], "expected": self.flux[1]},
            "relative": {k: self.relative[k] for k in RESIDUAL_NAMES},
        }
        if self.flux_mismatch is not None:
            out["relative"]["flux_mismatch"] = self.flux_mismatch
        return out


@dataclass
class ConvergenceRecord:
    levels: list  # of (QuadratureSpec, error)
    slope: float

    @property
    def errors(self) -> list[float]:
        return [e for _, e in self.levels]


def _stencil(p: np.ndarray, h: float) -> np.ndarray:
    return np.vstack([p[None, :], p + h * np.eye(3), p - h * np.eye(3)])


def _probe_residuals(model: SourceModel, p: np.ndarray, t: float, spec: QuadratureSpec) -> dict:
    """Absolute and source-scaled residuals at one probe."""
    h = spec.fd_step
    c = model.constants.c
    terms = temporal_terms(model, t)
    amps = amplitude_fields([m for m, _, _ in terms], _stencil(p, h), spec)

    def combine(attr, order=0):
        return sum(f * (-1j * om) ** order * getattr(s, attr) for (_, om, f), s in zip(terms, amps))

    phi, a, e, hf = combine("phi"), combine("a"), combine("e"), combine("h")
    dphi_dt, de_dt, dh_dt = combine("phi", 1)[0], combine("e", 1)[0], combine("h", 1)[0]
    d2phi_dt2, d2a_dt2 = combine("phi", 2)[0], combine("a", 2)[0]

    def d(v, i):  # central difference of stencil values along axis i
        return (v[1 + i] - v[4 + i]) / (2.0 * h)

    def lap(v):
        return (v[1:4].sum(axis=0) + v[4:7].sum(axis=0) - 6.0 * v[0]) / (h * h)

    def div(v):
        return sum(d(v, i)[i] for i in range(3))

    def curl(v):
        return np.array([d(v, 1)[2] - d(v, 2)[1], d(v, 2)[0] - d(v, 0)[2], d(v, 0)[1] - d(v, 1)[0]])

    rho = eval_charge(model, p, t)
    j = eval_current(model, p, t)
    norm = np.linalg.norm
    absolute = {
        "maxwell_1": norm(curl(e) + dh_dt / c),
        "maxwell_2": norm(curl(hf) - de_dt / c - FOUR_PI / c * j),
        "maxwell_3": abs(div(hf)),
        "maxwell_4": abs(div(e) - FOUR_PI * rho),
        "gauge": abs(div(a) + dphi_dt / c),
        "wave_phi": abs(lap(phi) - d2phi_dt2 / c**2 + FOUR_PI * rho),
        "wave_a": norm(lap(a) - d2a_dt2 / c**2 + FOUR_PI / c * j),
    }
    if model.domain.contains_points(p[None, :])[0]:
        absolute["continuity"] = continuity_residual(model, p, t, h=min(h, 1e-4))
    else:
        absolute["continuity"] = 0.0
    scale = {
        "maxwell_2": FOUR_PI / c * norm(j),
        "maxwell_4": FOUR_PI * abs(rho),
        "wave_phi": FOUR_PI * abs(rho),
        "wave_a": FOUR_PI / c * norm(j),
    }
    relative = {k: (v / scale[k] if scale.get(k, 0.0) > 0 else v) for k, v in absolute.items()}
    return {"absolute": absolute, "relative": relative}


def _report(model, probes, t, spec, margin) -> ResidualReport:
    probes = [as_vec3(p) for p in probes]
    if not probes:
        raise ValueError("at least one probe is required")
    for p in probes:
        check_clearance(model.domain, p, margin * spec.fd_step)
    per_probe = [_probe_residuals(model, p, t, spec) for p in probes]
    absolute = {k: float(max(r["absolute"][k] for r in per_probe)) for k in RESIDUAL_NAMES}
    relative = {k: float(max(r["relative"][k] for r in per_probe)) for k in RESIDUAL_NAMES}
    return ResidualReport(
        **absolute,
        probe_points=[p.tolist() for p in probes],
        spec_used=spec,
        relative=relative,
    )


def maxwell_residuals(model: SourceModel, probes: Sequence, t: float = 0.0,
                      spec: QuadratureSpec = QuadratureSpec()) -> ResidualReport:
    """Residuals of the four Maxwell equations (and gauge, wave, continuity) at the probes.

    Probes must be more than ``2 * fd_step`` from the domain boundary.
    """
    return _report(model, probes, t, spec, MAXWELL_MARGIN)


def wave_residual(model: SourceModel, probes: Sequence, t: float = 0.0,
                  spec: QuadratureSpec = QuadratureSpec()) -> tuple[float, float]:
    """``(|lap phi - phi_tt/c^2 + 4 pi rho|, |lap A - A_tt/c^2 + 4 pi j/c|)`` max over probes.

    The Laplacian is the 7-point difference of potential values, never a
    twice-differentiated kernel.
    """
    rep = _report(model, probes, t, spec, WAVE_MARGIN)
    return rep.wave_phi, rep.wave_a


def _enclosed_charge(model: SourceModel, region: SpatialDomain | None, t: float, spec: QuadratureSpec,
                     magnitude: bool = False) -> complex:
    def rho(pts):
        total = sum(f * raw_charge(m, pts) for m, _, f in temporal_terms(model, t))
        if magnitude:
            total = np.abs(total)
        if region is not None:
            total = total * region.contains_points(pts)
        return total

    return complex(integrate_regular(model.domain, rho, spec))


def gauss_flux_test(model: SourceModel, enclosing: SurfaceMesh, spec: QuadratureSpec = QuadratureSpec(),
                    t: float = 0.0) -> tuple[float, float]:
    """Outward flux of E through ``enclosing`` and ``4 pi`` times the enclosed charge.

    Harmonic models report the real (physical) part at time ``t``.
    """
    e = evaluate(model, enclosing.points, t, spec).e
    flux = integrate_surface(enclosing, lambda pts, n: np.einsum("ij,ij->i", e, n))
    expected = FOUR_PI * _enclosed_charge(model, enclosing.domain, t, spec)
    return float(np.real(flux)), float(np.real(expected))


def charge_scale(model: SourceModel, t: float = 0.0, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """``4 pi int |rho| dV`` at time ``t``: the natural size of a flux error."""
    return FOUR_PI * _enclosed_charge(model, None, t, spec, magnitude=True).real


def flux_mismatch(flux: float, expected: float, scale: float | None = None) -> float:
    """Signed mismatch relative to ``scale`` (default ``|expected|``).

    Absolute when the scale is zero, as for a source with no charge at all.
    """
    scale = abs(expected) if scale is None else scale
    if scale == 0.0:
        return flux - expected
    return (flux - expected) / scale


def enclosing_sphere(domain: SpatialDomain, center, resolution: int):
    """Sphere about ``center`` enclosing ``domain`` with a gap of one domain radius."""
    from .geometry import Ball

    center = as_vec3(center)
    bound = 0.5 * domain.diameter
    radius = float(np.linalg.norm(center - domain.center)) + 2.0 * bound
    return Ball(center, radius).surface(resolution)


def default_probes(domain: SpatialDomain) -> list[np.ndarray]:
    """3x3x3 interior grid plus six exterior points on the axes at twice the domain radius."""
    c, half = domain.center, domain.half_extents
    offsets = np.array([-1.0, 0.0, 1.0])
    probes = [c + 0.4 * half * np.array([x, y, z]) for z in offsets for y in offsets for x in offsets]
    reach = domain.diameter
    for axis in range(3):
        for sign in (1.0, -1.0):
            v = np.zeros(3)
            v[axis] = sign * reach
            probes.append(c + v)
    return probes


def full_report(model: SourceModel, probes: Sequence | None = None, t: float = 0.0,
                spec: QuadratureSpec = QuadratureSpec(), flux_mesh: SurfaceMesh | None = None) -> ResidualReport:
    """Residuals at ``probes`` (default set when None) plus the Gauss flux check."""
    probes = default_probes(model.domain) if probes is None else probes
    rep = _report(model, probes, t, spec, WAVE_MARGIN)
    if flux_mesh is None:
        flux_mesh = enclosing_sphere(model.domain, model.domain.center, spec.n_polar)
    flux, expected = gauss_flux_test(model, flux_mesh, spec, t)
    rep.flux = (flux, expected)
    rep.flux_mismatch = flux_mismatch(flux, expected, charge_scale(model, t, spec))
    return rep


def _flux_error(model, probe, spec):
    mesh = enclosing_sphere(model.domain, probe, spec.n_polar)
    flux, expected = gauss_flux_test(model, mesh, spec)
    return abs(flux_mismatch(flux, expected, charge_scale(model, 0.0, spec)))


def _residual_check(name):
    def check(model, probe, spec):
        return _report(model, [probe], 0.0, spec, WAVE_MARGIN).relative[name]

    return check


CHECKS: dict[str, Callable] = {"gauss_flux": _flux_error, **{n: _residual_check(n) for n in RESIDUAL_NAMES}}


def _resolution(levels: Sequence[QuadratureSpec]) -> np.ndarray:
    """Per-level resolution: geometric mean of the node counts that change, else ``1/fd_step``."""
    counts = np.array([[s.n_radial, s.n_polar, s.n_azimuth, s.n_regular] for s in levels], dtype=float)
    varying = np.ptp(counts, axis=0) > 0
    if varying.any():
        return np.exp(np.log(counts[:, varying]).mean(axis=1))
    steps = np.array([s.fd_step for s in levels])
    if np.ptp(steps) == 0:
        raise ValueError("convergence levels must differ in node counts or fd_step")
    return 1.0 / steps


def convergence_study(check: Union[str, Callable], model: SourceModel, probe,
                      levels: Sequence[QuadratureSpec]) -> ConvergenceRecord:
    """Error of ``check`` at each refinement level, with the log-log slope.

    ``check`` is a name from :data:`CHECKS` or a callable
    ``(model, probe, spec) -> error``.  The slope is fitted over levels with
    a positive error, against the node counts that change between levels
    (or ``1/fd_step`` when only the step changes).
    """
    if len(levels) < 3:
        raise ValueError("a convergence study needs at least three levels")
    res = _resolution(levels)
    if np.any(np.diff(res) <= 0):
        raise ValueError("convergence levels must be monotonically refined")
    fn = CHECKS[check] if isinstance(check, str) else check
    probe = as_vec3(probe)
    errors = [float(fn(model, probe, s)) for s in levels]
    ok = np.array(errors) > 0
    if ok.sum() >= 2:
        slope = float(np.polyfit(np.log(res[ok]), np.log(np.array(errors)[ok]), 1)[0])
    else:
        slope = float("nan")
    return ConvergenceRecord(levels=list(zip(levels, errors)), slope=slope)
