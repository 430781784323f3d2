"""Spectral Galerkin solvers, Gevrey-class diagnostics and analyticity-strip bound certification
for Euler, inviscid Burgers, Euler-Voigt and Navier-Stokes-Voigt on the periodic cube."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BlowUpError,
    ConfigError,
    DiagnosticUnavailable,
    GevreyError,
    NoSolutionError,
    ReportIncomplete,
    SchemaError,
    StateError,
    TransformError,
)
from .lattice import Lattice, SpectralField, nonlinear_term, project_solenoidal, random_field  # noqa: E402
from .norms import GevreyIndex, TripleNormParams, gevrey_norm, sobolev_norm, triple_norm  # noqa: E402

__all__ = [
    "__version__",
    "BlowUpError",
    "ConfigError",
    "DiagnosticUnavailable",
    "GevreyError",
    "NoSolutionError",
    "ReportIncomplete",
    "SchemaError",
    "StateError",
    "TransformError",
    "Lattice",
    "SpectralField",
    "nonlinear_term",
    "project_solenoidal",
    "random_field",
    "GevreyIndex",
    "TripleNormParams",
    "gevrey_norm",
    "sobolev_norm",
    "triple_norm",
]
