"""Gierer-Meinhardt activator-inhibitor kinetics with a fractional time derivative.

    D^alpha a = rho0*rho + c*rho*a**2/h - mu*a
    D^alpha h = cprime*rhoprime*a**2 - nu*h

Besides the right-hand side this module carries the closed-form equilibrium,
its Jacobian and the stability classification of the equilibrium as a
function of the derivative order, based on the sector condition
``|arg(lambda)| > alpha*pi/2`` for both Jacobian eigenvalues.
"""

import cmath
import math
from dataclasses import asdict, dataclass, fields
from enum import Enum

import numpy as np

from .errors import DomainError, SingularityError


@dataclass(frozen=True)
class GMParams:
    """Kinetic constants and initial concentrations (defaults: the case-study set)."""

    rho0: float = 1.0
    rho: float = 1.0
    c: float = 3.0
    mu: float = 4.0
    cprime: float = 1.0
    rhoprime: float = 1.0
    nu: float = 2.0
    a0: float = 2.0
    h0: float = 3.0

    def __post_init__(self):
        for f in fields(self):
            value = float(getattr(self, f.name))
            if not (value > 0.0 and math.isfinite(value)):
                raise DomainError(f"GM parameter {f.name} must be positive, got {value!r}")
            object.__setattr__(self, f.name, value)

    def replace(self, **overrides):
        return GMParams(**{**asdict(self), **overrides})

    def as_dict(self):
        return asdict(self)

    @property
    def y0(self):
        return np.array([self.a0, self.h0])


class Verdict(str, Enum):
    ASYMPTOTICALLY_STABLE = "asymptotically_stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: Verdict
    branch: str
    eigenvalues: tuple
    trace: float
    determinant: float
    discriminant: float
    threshold_lhs: float = None
    threshold_rhs: float = None


def gm_rhs(t, state, p):
    a, h = state[0], state[1]
    if h == 0.0:
        raise SingularityError(f"inhibitor concentration hit zero at t={t!r}")
    return np.array(
        [
            p.rho0 * p.rho + p.c * p.rho * a * a / h - p.mu * a,
            p.cprime * p.rhoprime * a * a - p.nu * h,
        ]
    )


def _source(p):
    # c*nu + cprime*rhoprime*rho0, the combination every closed form shares
    return p.c * p.nu + p.cprime * p.rhoprime * p.rho0


def gm_equilibrium(p):
    a_star = (p.rho0 * p.rho * p.cprime * p.rhoprime + p.c * p.rho * p.nu) / (
        p.mu * p.cprime * p.rhoprime
    )
    h_star = p.cprime * p.rhoprime / p.nu * a_star**2
    return np.array([a_star, h_star])


def gm_jacobian(p):
    """Jacobian of the kinetics evaluated at the equilibrium, in closed form."""
    s = _source(p)
    return np.array(
        [
            [2.0 * p.c * p.mu * p.nu / s - p.mu, -p.c / p.rho * (p.mu * p.nu / s) ** 2],
            [2.0 * p.rho * s / p.mu, -p.nu],
        ]
    )


def gm_trace(p):
    return 2.0 * p.mu * p.nu * p.c / _source(p) - p.mu - p.nu


def gm_determinant(p):
    return p.mu * p.nu


def threshold_quantity(p):
    """``4 det / tr^2`` written in the kinetic constants (tan^2|arg lambda| + 1)."""
    s = _source(p)
    denom = p.c * p.nu * (p.mu - p.nu) - p.rho0 * p.rhoprime * p.cprime * (p.mu + p.nu)
    return 4.0 * p.mu * p.nu * s * s / (denom * denom)


def sector_threshold(alpha):
    return math.tan(alpha * math.pi / 2.0) ** 2 + 1.0


def gm_eigenvalues(p):
    tr, det = gm_trace(p), gm_determinant(p)
    root = cmath.sqrt(tr * tr - 4.0 * det)
    return (tr + root) / 2.0, (tr - root) / 2.0


def gm_classify(alpha, p, tol=1e-12):
    """Classify the equilibrium for derivative order ``alpha``.

    Sign tests are relative to ``max(tr^2, 4|det|)``; anything within ``tol``
    of a boundary comes back MARGINAL.
    """
    alpha = float(alpha)
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")
    tr, det = gm_trace(p), gm_determinant(p)
    disc = tr * tr - 4.0 * det
    scale = max(tr * tr, 4.0 * abs(det))
    eig = gm_eigenvalues(p)
    common = dict(eigenvalues=eig, trace=tr, determinant=det, discriminant=disc)
    tr_sign = 0 if abs(tr) <= tol * math.sqrt(scale) else (1 if tr > 0 else -1)
    sector = alpha * math.pi / 2.0

    def by_angle(branch, **extra):
        # min |arg| against alpha*pi/2, boundary within tol -> marginal
        angle = min(abs(cmath.phase(lam)) for lam in eig)
        if abs(angle - sector) <= tol * math.pi:
            v = Verdict.MARGINAL
        elif angle > sector:
            v = Verdict.ASYMPTOTICALLY_STABLE
        else:
            v = Verdict.UNSTABLE
        return StabilityVerdict(v, branch, **common, **extra)

    if abs(disc) <= tol * scale:
        branch = "double_root"
        if tr_sign == 0:
            return StabilityVerdict(Verdict.MARGINAL, branch, **common)
        v = Verdict.UNSTABLE if tr_sign > 0 else Verdict.ASYMPTOTICALLY_STABLE
        return StabilityVerdict(v, branch, **common)
    if disc > 0:
        return by_angle("real_trace_positive" if tr > 0 else "real_trace_nonpositive")
    if tr_sign == 0:
        return by_angle("complex_trace_zero")
    if tr_sign < 0:
        return by_angle("complex_trace_negative")
    lhs, rhs = threshold_quantity(p), sector_threshold(alpha)
    if alpha == 1.0:
        # oscillatory with positive trace: eigenvalues in the right half-plane
        return StabilityVerdict(
            Verdict.UNSTABLE, "complex_trace_positive", **common,
            threshold_lhs=lhs, threshold_rhs=rhs,
        )
    return by_angle("complex_trace_positive", threshold_lhs=lhs, threshold_rhs=rhs)
