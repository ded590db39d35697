"""Kirchhoff equations on e(3)* and e(4)*: Lie-Poisson flows, Painleve analysis,
log-Laurent perturbation series, monodromy, Lax pairs and e(4) integrals."""

from .dynamics import Arc, Line, TimePath, Trajectory, drift_report, integrate
from .errors import (
    ConfigError,
    DimensionMismatch,
    KirchhoffError,
    ModelValidationError,
    NonFinite,
    NumericalError,
    PreconditionError,
    SeriesError,
    StepCollapse,
)
from .liepoisson import KirchhoffModel, Observable, PhaseState, bracket, build_model, invariants_of
from .series import LogLaurentSeries

__version__ = "0.1.0"
