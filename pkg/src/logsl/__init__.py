"""Split-step simulation and linear analysis of the logarithmic Schrodinger-Langevin equation on the torus."""
from .errors import (
    BranchWarning,
    BudgetExceeded,
    DegenerateWindow,
    DomainViolation,
    InvalidParam,
    LogSLError,
    ZeroMean,
    ZeroModulus,
)
from .integrator import ModelParams, SchemeKind, SplitScheme, Trajectory, evolve, step
from .spectral import Field, GridSpec, Spectrum, forward_transform, inverse_transform, polar_decompose

__version__ = "0.1.0"
