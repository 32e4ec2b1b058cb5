"""Problem, grid, trajectory and solver-configuration types."""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, DomainError

MAX_STEPS = 10_000_000


class DerivativeKind(str, Enum):
    CLASSICAL = "classical"
    CAPUTO = "caputo"
    CAPUTO_FABRIZIO = "cf"
    ATANGANA_BALEANU = "abc"


class Scheme(str, Enum):
    """Stepping rule; the values double as the CLI ``--scheme`` tokens."""

    PROPOSED_PC = "ppc"
    IMPROVED_AS = "ias"
    CLASSICAL_AS = "as"
    TWO_STEP_AB = "ab2"


# schemes that only make sense for a first-order derivative
_CLASSICAL_ONLY = {Scheme.CLASSICAL_AS, Scheme.TWO_STEP_AB}


@dataclass(frozen=True)
class FractionalIVP:
    """``D^alpha y = rhs(t, y)``, ``y(0) = y0`` for the chosen derivative kind.

    ``rhs`` takes ``(t, y)`` with ``y`` a 1-d float array of length ``dim``
    and returns something array-like of the same length.
    """

    rhs: Callable[[float, np.ndarray], np.ndarray]
    y0: np.ndarray
    kind: DerivativeKind = DerivativeKind.CLASSICAL
    alpha: float = 1.0

    def __post_init__(self):
        y0 = np.atleast_1d(np.asarray(self.y0, dtype=float)).copy()
        if y0.ndim != 1 or y0.size == 0:
            raise ConfigurationError("y0 must be a non-empty scalar or 1-d vector")
        if not np.all(np.isfinite(y0)):
            raise ConfigurationError("y0 must be finite")
        y0.setflags(write=False)
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "kind", DerivativeKind(self.kind))
        alpha = float(self.alpha)
        if not (0.0 < alpha <= 1.0):
            raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")
        if self.kind is DerivativeKind.CLASSICAL and alpha != 1.0:
            raise ConfigurationError("a classical problem requires alpha = 1")
        object.__setattr__(self, "alpha", alpha)

    @property
    def dim(self):
        return self.y0.size

    def evaluate(self, t, y):
        """Call ``rhs`` and coerce the result to a float vector of length ``dim``."""
        out = np.atleast_1d(np.asarray(self.rhs(t, y), dtype=float))
        if out.shape != (self.dim,):
            raise ConfigurationError(
                f"rhs returned shape {out.shape}, expected ({self.dim},)"
            )
        return out


@dataclass(frozen=True)
class UniformGrid:
    dt: float
    n_steps: int

    def __post_init__(self):
        if not (self.dt > 0.0 and np.isfinite(self.dt)):
            raise ConfigurationError(f"dt must be positive and finite, got {self.dt!r}")
        if self.n_steps < 1:
            raise ConfigurationError("a grid needs at least one step")
        if self.n_steps > MAX_STEPS:
            raise ConfigurationError(
                f"{self.n_steps} steps exceeds the size guard of {MAX_STEPS}"
            )

    @property
    def t_end(self):
        return self.n_steps * self.dt

    def node(self, m):
        return m * self.dt

    @property
    def nodes(self):
        # m * dt, never a running sum
        return np.arange(self.n_steps + 1) * self.dt


def _as_fraction(value, name):
    # decimal literal semantics: "0.01" and 0.01 both mean 1/100, "1/300" is exact
    if isinstance(value, Fraction):
        return value
    try:
        if isinstance(value, str):
            return Fraction(value.strip())
        return Fraction(repr(float(value)))
    except (TypeError, ValueError, ZeroDivisionError, OverflowError):
        raise ConfigurationError(f"{name} must be a finite number, got {value!r}") from None


def _near_integer(ratio, ulps=4):
    n = round(ratio)
    return n if abs(ratio - n) <= ulps * np.spacing(ratio) else None


def make_grid(dt, t_end):
    """Uniform grid with ``t_end / dt`` steps.

    ``dt`` and ``t_end`` may be floats, :class:`fractions.Fraction` or strings
    such as ``"1/300"``. Strings and fractions must divide exactly. For float
    inputs it is enough that either the decimal literals divide exactly
    (``0.1`` into ``1``) or the floating-point quotient lies within a few
    ulps of an integer (``1/700`` into ``30``). Anything else raises
    ConfigurationError.
    """
    dt_q = _as_fraction(dt, "dt")
    t_q = _as_fraction(t_end, "t_end")
    if not dt_q > 0:
        raise ConfigurationError(f"dt must be positive and finite, got {dt!r}")
    if not t_q >= dt_q:
        raise ConfigurationError(f"t_end must be >= dt, got t_end={t_end!r}, dt={dt!r}")
    ratio = t_q / dt_q
    if ratio.denominator == 1:
        n = ratio.numerator
    else:
        exact_only = isinstance(dt, (str, Fraction)) and isinstance(t_end, (str, Fraction))
        n = None if exact_only else _near_integer(float(t_q) / float(dt_q))
        if n is None:
            raise ConfigurationError(
                f"span not an integer multiple of dt (t_end/dt = {float(ratio)!r})"
            )
    if n > MAX_STEPS:
        raise ConfigurationError(f"{n} steps exceeds the size guard of {MAX_STEPS}")
    return UniformGrid(dt=float(dt_q), n_steps=int(n))


@dataclass(frozen=True)
class SolverConfig:
    scheme: Scheme = Scheme.PROPOSED_PC
    corrector_sweeps: int = 1
    divergence_guard: float = 1e12

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if int(self.corrector_sweeps) != self.corrector_sweeps or self.corrector_sweeps < 1:
            raise ConfigurationError("corrector_sweeps must be an integer >= 1")
        if not self.divergence_guard > 0.0:
            raise ConfigurationError("divergence_guard must be positive")

    def check_compatible(self, kind):
        kind = DerivativeKind(kind)
        if self.scheme in _CLASSICAL_ONLY and kind is not DerivativeKind.CLASSICAL:
            raise ConfigurationError(
                f"scheme {self.scheme.value!r} is only defined for classical derivatives"
            )


@dataclass
class Trajectory:
    """States ``y_m`` and cached right-hand sides ``f(t_m, y_m)`` on a grid.

    ``states`` and ``f_history`` are ``(n_steps + 1, dim)`` arrays. A
    trajectory cut short by divergence keeps only the rows it reached.
    """

    grid: UniformGrid
    states: np.ndarray
    f_history: np.ndarray
    info: dict = field(default_factory=dict)

    @property
    def t(self):
        return self.grid.nodes[: len(self.states)]

    @property
    def dim(self):
        return self.states.shape[1]

    def __len__(self):
        return len(self.states)


def as_grid(grid: Optional[UniformGrid] = None, dt=None, t_end=None):
    if grid is not None:
        return grid
    if dt is None or t_end is None:
        raise ConfigurationError("either a grid or both dt and t_end are required")
    return make_grid(dt, t_end)
