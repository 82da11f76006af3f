"""Electric and magnetic fields from the potentials.

First derivatives are taken under the integral sign with analytic kernels:
``grad_0 [exp(ikd)/d] = (ikd - 1) exp(ikd) (r0 - r) / d**3``.  No second
derivative of a kernel is ever integrated; second-order identities are
checked in :mod:`retarded.verify` by differencing field values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import as_vec3
from .potentials import amplitude_fields, evaluate
from .quadrature import QuadratureSpec
from .sources import BandLimited, Electrostatic, Magnetostatic, Monochromatic, SourceModel


@dataclass(frozen=True)
class FieldSample:
    e: np.ndarray
    h: np.ndarray
    point: np.ndarray
    time: float

    def real(self) -> "FieldSample":
        return FieldSample(self.e.real.astype(complex), self.h.real.astype(complex), self.point, self.time)


def _static_amplitudes(model, p0, spec):
    if not isinstance(model, (Electrostatic, Magnetostatic)):
        raise TypeError("static fields need an electrostatic or magnetostatic model")
    return amplitude_fields([model], as_vec3(p0)[None, :], spec)[0]


def efield_static(model: SourceModel, p0, spec: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """Coulomb field ``int rho (r0 - r) / |r0 - r|**3 dV``."""
    return _static_amplitudes(model, p0, spec).e[0]


def hfield_static(model: SourceModel, p0, spec: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """Biot-Savart field ``(1/c) int j x (r0 - r) / |r0 - r|**3 dV``, the curl of the static A."""
    if isinstance(model, Electrostatic):
        return np.zeros(3, complex)
    return _static_amplitudes(model, p0, spec).h[0]


def fields_mono(model: Monochromatic, p0, spec: QuadratureSpec = QuadratureSpec()):
    """Amplitudes ``E_a = -grad phi_a + ik A_a`` and ``H_a = rot A_a``."""
    if not isinstance(model, Monochromatic):
        raise TypeError("fields_mono needs a monochromatic model")
    s = amplitude_fields([model], as_vec3(p0)[None, :], spec)[0]
    return s.e[0], s.h[0]


def fields(model: SourceModel, p0, t: float = 0.0, spec: QuadratureSpec = QuadratureSpec()) -> FieldSample:
    p0 = as_vec3(p0)
    s = evaluate(model, p0[None, :], t, spec)
    return FieldSample(e=s.e[0], h=s.h[0], point=p0, time=float(t))


def fields_general(model: BandLimited, p0, t: float, spec: QuadratureSpec = QuadratureSpec()) -> FieldSample:
    """Band synthesis of monochromatic fields at time ``t``."""
    if not isinstance(model, BandLimited):
        raise TypeError("fields_general needs a band-limited model")
    return fields(model, p0, t, spec)
