"""Retarded electromagnetic potentials and fields of finite-support sources.

The package evaluates the retarded scalar and vector potentials of static,
time-harmonic and band-limited sources, differentiates them into E and H,
and checks the results against the Maxwell equations numerically.
"""

from .fields import FieldSample, efield_static, fields, fields_general, fields_mono, hfield_static
from .geometry import Ball, Box, OutsideDomainError, ProbeTooCloseError, SpatialDomain, SurfaceMesh
from .potentials import (
    PotentialSample,
    gauge_residual,
    potentials,
    potentials_general,
    potentials_mono,
    scalar_potential_static,
    vector_potential_static,
)
from .quadrature import QuadratureSpec
from .sources import (
    BandLimited,
    Constants,
    Electrostatic,
    Magnetostatic,
    Monochromatic,
    SourceValidationError,
    validate_source,
)
from .verify import ResidualReport, convergence_study, full_report, gauss_flux_test, maxwell_residuals, wave_residual

__version__ = "0.1.0"

__all__ = [
    "FieldSample",
    "efield_static",
    "fields",
    "fields_general",
    "fields_mono",
    "hfield_static",
    "Ball",
    "Box",
    "OutsideDomainError",
    "ProbeTooCloseError",
    "SpatialDomain",
    "SurfaceMesh",
    "PotentialSample",
    "gauge_residual",
    "potentials",
    "potentials_general",
    "potentials_mono",
    "scalar_potential_static",
    "vector_potential_static",
    "QuadratureSpec",
    "BandLimited",
    "Constants",
    "Electrostatic",
    "Magnetostatic",
    "Monochromatic",
    "SourceValidationError",
    "validate_source",
    "ResidualReport",
    "convergence_study",
    "full_report",
    "gauss_flux_test",
    "maxwell_residuals",
    "wave_residual",
]
