"""Registered benchmark problems with known solutions, and error metrics."""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, DomainError
from .gm import GMParams, gm_rhs
from .model import DerivativeKind, FractionalIVP
from .specfun import gamma


@dataclass(frozen=True)
class NamedProblem:
    """A benchmark problem.

    ``make_ivp(alpha, params, kind)`` builds the :class:`FractionalIVP`;
    ``exact(t, alpha, params)`` (when known) returns an ``(len(t), dim)``
    array for array ``t``.
    """

    id: str
    ivp_factory: Callable
    exact_fn: Optional[Callable]
    default_span: float
    default_kind: DerivativeKind
    default_alpha: float = 1.0
    default_params: dict = field(default_factory=dict)
    description: str = ""

    def params(self, **overrides):
        unknown = set(overrides) - set(self.default_params)
        if unknown:
            raise ConfigurationError(
                f"problem {self.id!r} has no parameter(s) {sorted(unknown)}"
            )
        return {**self.default_params, **overrides}

    def make_ivp(self, alpha=None, kind=None, **params):
        alpha = self.default_alpha if alpha is None else float(alpha)
        kind = self.default_kind if kind is None else DerivativeKind(kind)
        if kind is DerivativeKind.CLASSICAL:
            alpha = 1.0
        return self.ivp_factory(alpha, kind, self.params(**params))

    @property
    def has_exact(self):
        return self.exact_fn is not None

    def exact(self, t, alpha=None, **params):
        if self.exact_fn is None:
            raise ConfigurationError(f"problem {self.id!r} has no closed-form solution")
        alpha = self.default_alpha if alpha is None else float(alpha)
        t_arr = np.asarray(t, dtype=float)
        out = np.asarray(self.exact_fn(np.atleast_1d(t_arr), alpha, self.params(**params)))
        out = out.reshape(np.atleast_1d(t_arr).size, -1)
        return out[0] if t_arr.ndim == 0 else out


def _exp_linear():
    def factory(alpha, kind, prm):
        return FractionalIVP(lambda t, y: 2.0 * y + 3.0, [1.0], kind, alpha)

    def exact(t, alpha, prm):
        return 2.5 * np.exp(2.0 * t) - 1.5

    return NamedProblem(
        "exp-linear", factory, exact, 1.0, DerivativeKind.CLASSICAL,
        description="y' = 2y + 3, y(0) = 1",
    )


def _cos_riccati():
    def factory(alpha, kind, prm):
        return FractionalIVP(lambda t, y: -math.cos(2.0 * t) * y * y, [1.0], kind, alpha)

    def exact(t, alpha, prm):
        return 2.0 / (2.0 + np.sin(2.0 * t))

    return NamedProblem(
        "cos-riccati", factory, exact, 30.0, DerivativeKind.CLASSICAL,
        description="y' = -cos(2t) y^2, y(0) = 1",
    )


def _power_rhs():
    def factory(alpha, kind, prm):
        beta = prm["beta"]
        return FractionalIVP(lambda t, y: np.array([t**beta]), [0.0], kind, alpha)

    def exact(t, alpha, prm):
        beta = prm["beta"]
        return gamma(beta + 1.0) / gamma(alpha + beta + 1.0) * t ** (alpha + beta)

    return NamedProblem(
        "power-rhs", factory, exact, 3.0, DerivativeKind.CAPUTO,
        default_alpha=0.5, default_params={"beta": 0.9},
        description="D^a y = t^beta, y(0) = 0",
    )


def _poly_manufactured():
    def factory(alpha, kind, prm):
        g3, g2 = gamma(3.0 - alpha), gamma(2.0 - alpha)

        def rhs(t, y):
            return 2.0 * t ** (2.0 - alpha) / g3 - t ** (1.0 - alpha) / g2 - y - t + t * t

        return FractionalIVP(rhs, [0.0], kind, alpha)

    def exact(t, alpha, prm):
        return t * t - t

    return NamedProblem(
        "poly-manufactured", factory, exact, 1.0, DerivativeKind.CAPUTO,
        default_alpha=0.5,
        description="D^a y = 2t^(2-a)/G(3-a) - t^(1-a)/G(2-a) - y - t + t^2, y(0) = 0",
    )


def _gierer_meinhardt():
    defaults = GMParams().as_dict()

    def factory(alpha, kind, prm):
        p = GMParams(**prm)
        return FractionalIVP(lambda t, y: gm_rhs(t, y, p), p.y0, kind, alpha)

    return NamedProblem(
        "gierer-meinhardt", factory, None, 100.0, DerivativeKind.CAPUTO,
        default_alpha=0.85, default_params=defaults,
        description="fractional Gierer-Meinhardt activator-inhibitor kinetics",
    )


_REGISTRY = {
    p.id: p
    for p in (
        _exp_linear(),
        _cos_riccati(),
        _power_rhs(),
        _poly_manufactured(),
        _gierer_meinhardt(),
    )
}

PROBLEM_IDS = tuple(_REGISTRY)


def builtin(problem_id):
    try:
        return _REGISTRY[problem_id]
    except KeyError:
        raise ConfigurationError(
            f"unknown problem {problem_id!r}; valid ids: {', '.join(PROBLEM_IDS)}"
        ) from None


def max_abs_error(traj, exact):
    """Largest componentwise ``|y_m - exact(t_m)|`` over all nodes of ``traj``."""
    ref = np.asarray(exact(traj.t), dtype=float).reshape(traj.states.shape)
    return float(np.max(np.abs(traj.states - ref)))


def empirical_order(err_coarse, err_fine, ratio):
    """Observed convergence order ``log(err_coarse/err_fine) / log(ratio)``."""
    if not (err_coarse > 0 and err_fine > 0):
        raise DomainError("errors must be positive")
    if not ratio > 1:
        raise DomainError("step ratio must exceed 1")
    return math.log(err_coarse / err_fine) / math.log(ratio)
