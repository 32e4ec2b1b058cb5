"""Newton-interpolation predictor-corrector solvers for classical and fractional ODEs."""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    DivergenceError,
    DomainError,
    FracPCError,
    SingularityError,
    UsageError,
)
from .specfun import ab_norm, gamma, m_norm
from .model import (
    DerivativeKind,
    FractionalIVP,
    Scheme,
    SolverConfig,
    Trajectory,
    UniformGrid,
    make_grid,
)
from .kernels import KernelId, kernel_weight, upsilon
from .schemes import solve
from .problems import PROBLEM_IDS, builtin, empirical_order, max_abs_error
from .gm import (
    GMParams,
    StabilityVerdict,
    Verdict,
    gm_classify,
    gm_equilibrium,
    gm_jacobian,
    gm_rhs,
)
from .estimator import FractionalPCSolver

__all__ = [
    "ConfigurationError", "DivergenceError", "DomainError", "FracPCError",
    "SingularityError", "UsageError", "ab_norm", "gamma", "m_norm",
    "DerivativeKind", "FractionalIVP", "Scheme", "SolverConfig", "Trajectory",
    "UniformGrid", "make_grid", "KernelId", "kernel_weight", "upsilon", "solve",
    "PROBLEM_IDS", "builtin", "empirical_order", "max_abs_error", "GMParams",
    "StabilityVerdict", "Verdict", "gm_classify", "gm_equilibrium", "gm_jacobian",
    "gm_rhs", "FractionalPCSolver",
]
