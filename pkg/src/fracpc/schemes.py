"""Predictor / corrector stepping rules and the solve driver.

Every stepping rule reads a :class:`StepContext` positioned at step ``m``
(states and right-hand sides known for nodes ``0..m``) and returns the new
state ``y_{m+1}``. Correctors take the prediction and, optionally, the
right-hand side already evaluated at it.

Nodes whose stencil reaches before ``t_0`` are produced by a one-step
linear-interpolation predictor-corrector of the same derivative kind
(:func:`startup`). When only the predictor's stencil is missing, the startup
predictor feeds the scheme's own corrector.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, SingularityError, UsageError
from .kernels import LagTables
from .model import DerivativeKind, FractionalIVP, Scheme, SolverConfig, Trajectory, UniformGrid
from .specfun import ab_norm, m_norm

_FRACTIONAL = (DerivativeKind.CAPUTO, DerivativeKind.ATANGANA_BALEANU)


@dataclass
class StepContext:
    """Solver state at step ``m``.

    ``states`` and ``f_history`` are ``(n_steps + 1, dim)`` buffers valid
    through row ``m``. The transposed copies and the first and second
    differences of ``f`` are kept alongside so memory sums run over
    contiguous rows.
    """

    ivp: FractionalIVP
    config: SolverConfig
    grid: UniformGrid
    states: np.ndarray
    f_history: np.ndarray
    m: int = 0
    tables: LagTables = None
    _fT: np.ndarray = field(default=None, repr=False)
    _d1T: np.ndarray = field(default=None, repr=False)
    _d2T: np.ndarray = field(default=None, repr=False)

    @classmethod
    def allocate(cls, ivp, config, grid):
        rows = grid.n_steps + 1
        ctx = cls(
            ivp=ivp,
            config=config,
            grid=grid,
            states=np.full((rows, ivp.dim), np.nan),
            f_history=np.full((rows, ivp.dim), np.nan),
        )
        if ivp.kind in _FRACTIONAL:
            ctx.tables = LagTables.build(ivp.alpha, grid.dt, grid.n_steps)
        ctx._fT = np.zeros((ivp.dim, rows))
        ctx._d1T = np.zeros((ivp.dim, rows))
        ctx._d2T = np.zeros((ivp.dim, rows))
        return ctx

    @classmethod
    def from_history(cls, ivp, config, grid, states, f_history=None):
        """Context positioned at the last supplied row (handy for single-step checks).

        ``f_history`` defaults to ``rhs`` evaluated along ``states``.
        """
        states = np.asarray(states, dtype=float).reshape(len(states), -1)
        if f_history is None:
            f_history = [ivp.evaluate(grid.node(j), y) for j, y in enumerate(states)]
        f_history = np.asarray(f_history, dtype=float).reshape(len(states), -1)
        ctx = cls.allocate(ivp, config, grid)
        for j in range(len(states)):
            ctx.record(j, states[j], f_history[j])
        ctx.m = len(states) - 1
        return ctx

    def record(self, j, y, f):
        self.states[j] = y
        self.f_history[j] = f
        self._fT[:, j] = f
        if j >= 1:
            self._d1T[:, j - 1] = f - self._fT[:, j - 1]
        if j >= 2:
            self._d2T[:, j - 1] = f - 2.0 * self._fT[:, j - 1] + self._fT[:, j - 2]

    @property
    def dt(self):
        return self.grid.dt

    @property
    def alpha(self):
        return self.ivp.alpha

    @property
    def y0(self):
        return self.states[0]

    def y(self, j):
        return self.states[j]

    def f(self, j):
        return self.f_history[j]

    def rhs_next(self, y):
        return self.ivp.evaluate(self.grid.node(self.m + 1), y)


def _require(ctx, lowest, what):
    if ctx.m < lowest:
        raise UsageError(f"{what} needs m >= {lowest} (got m={ctx.m}); use startup()")


def _ab3_increment(dt, fm2, fm1, fm):
    return dt * (5.0 / 12.0 * fm2 - 4.0 / 3.0 * fm1 + 23.0 / 12.0 * fm)


def _am3_increment(dt, fp, fm, fm1):
    return dt * (5.0 / 12.0 * fp + 2.0 / 3.0 * fm - 1.0 / 12.0 * fm1)


def _wsum(weights, rows):
    return np.sum(weights * rows, axis=-1)


# classical ------------------------------------------------------------------

def predict_classical_as(ctx):
    """Explicit three-point Newton-quadrature predictor for ``y' = f``."""
    _require(ctx, 2, "the Atangana-Seda predictor")
    m = ctx.m
    return ctx.y(m) + _ab3_increment(ctx.dt, ctx.f(m - 2), ctx.f(m - 1), ctx.f(m))


def correct_classical(ctx, y_pred, f_pred=None):
    _require(ctx, 1, "the classical corrector")
    if f_pred is None:
        f_pred = ctx.rhs_next(y_pred)
    m = ctx.m
    return ctx.y(m) + _am3_increment(ctx.dt, f_pred, ctx.f(m), ctx.f(m - 1))


def step_two_step_ab(ctx):
    _require(ctx, 1, "two-step Adams-Bashforth")
    m = ctx.m
    return ctx.y(m) + ctx.dt * (1.5 * ctx.f(m) - 0.5 * ctx.f(m - 1))


# Caputo-Fabrizio -------------------------------------------------------------

def predict_cf(ctx):
    _require(ctx, 2, "the Caputo-Fabrizio predictor")
    m, a = ctx.m, ctx.alpha
    norm = m_norm(a)
    return (
        ctx.y(m)
        + (1.0 - a) / norm * (ctx.f(m) - ctx.f(m - 1))
        + a / norm * _ab3_increment(ctx.dt, ctx.f(m - 2), ctx.f(m - 1), ctx.f(m))
    )


def correct_cf(ctx, y_pred, f_pred=None):
    _require(ctx, 1, "the Caputo-Fabrizio corrector")
    if f_pred is None:
        f_pred = ctx.rhs_next(y_pred)
    m, a = ctx.m, ctx.alpha
    norm = m_norm(a)
    return (
        ctx.y(m)
        + (1.0 - a) / norm * (f_pred - ctx.f(m))
        + a / norm * _am3_increment(ctx.dt, f_pred, ctx.f(m), ctx.f(m - 1))
    )


# Caputo and Atangana-Baleanu ----------------------------------------------------

def _shifted_integral(ctx):
    """Product-quadrature of the Riemann-Liouville integral with the delayed stencil.

    Cells 0 and 1 use linear interpolation, cells ``i >= 2`` the quadratic
    through ``t_{i-2}, t_{i-1}, t_i``; nothing at ``t_{m+1}`` is needed.
    Scaled so that ``y0 +`` this is the Caputo predictor.
    """
    _require(ctx, 2, "the improved Atangana-Seda predictor")
    T, m = ctx.tables, ctx.m
    f0, f1, f2 = ctx.f(0), ctx.f(1), ctx.f(2)
    head = T.c1 * (T.step[m] * f0 + T.step[m - 1] * f1) + T.c2 * (
        T.rising[m] * (f1 - f0) + T.rising[m - 1] * (f2 - f1)
    )
    lags = slice(m - 2, None, -1)
    tail = (
        T.c1 * _wsum(T.step[lags], ctx._fT[:, 0 : m - 1])
        + T.c2 * _wsum(T.shift[lags], ctx._d1T[:, 0 : m - 1])
        + T.c3 * _wsum(T.shift_quad[lags], ctx._d2T[:, 1:m])
    )
    return head + tail


def memory_term(ctx):
    """History sum over cells ``1..m-1`` for the corrector at step ``m``."""
    T, m = ctx.tables, ctx.m
    if m <= 1:
        return np.zeros(ctx.ivp.dim)
    lags = slice(m - 1, 0, -1)
    return (
        T.c1 * _wsum(T.step[lags], ctx._fT[:, 2 : m + 1])
        + T.c2 * _wsum(T.lin[lags], ctx._d1T[:, 1:m])
        + T.c3 * _wsum(T.quad[lags], ctx._d2T[:, 1:m])
    )


def _caputo_integral(ctx, f_pred):
    T, m, a = ctx.tables, ctx.m, ctx.alpha
    f0, f1 = ctx.f(0), ctx.f(1)
    fm, fm1 = ctx.f(m), ctx.f(m - 1)
    return (
        memory_term(ctx)
        + T.c1 * T.step[m] * f0
        + T.c2 * T.rising[m] * (f1 - f0)
        + T.c1 * f_pred
        + a * T.c2 * (fm - f_pred)
        - a * T.c3 * (f_pred - 2.0 * fm + fm1)
    )


def predict_caputo_ias(ctx):
    return ctx.y0 + _shifted_integral(ctx)


def correct_caputo(ctx, y_pred, f_pred=None):
    _require(ctx, 1, "the Caputo corrector")
    if f_pred is None:
        f_pred = ctx.rhs_next(y_pred)
    return ctx.y0 + _caputo_integral(ctx, f_pred)


def predict_abc(ctx):
    a = ctx.alpha
    ab = ab_norm(a)
    return ctx.y0 + (1.0 - a) / ab * ctx.f(ctx.m) + a / ab * _shifted_integral(ctx)


def correct_abc(ctx, y_pred, f_pred=None):
    _require(ctx, 1, "the Atangana-Baleanu corrector")
    if f_pred is None:
        f_pred = ctx.rhs_next(y_pred)
    a = ctx.alpha
    ab = ab_norm(a)
    return ctx.y0 + (1.0 - a) / ab * f_pred + a / ab * _caputo_integral(ctx, f_pred)


# startup ------------------------------------------------------------------------

def _rect_integral(ctx):
    T, m = ctx.tables, ctx.m
    return T.c1 * _wsum(T.step[m::-1], ctx._fT[:, 0 : m + 1])


def _trap_integral(ctx, f_pred):
    T, m = ctx.tables, ctx.m
    d1 = ctx._d1T[:, 0 : m + 1].copy()
    d1[:, m] = f_pred - ctx.f(m)
    return _rect_integral(ctx) + T.c2 * _wsum(T.rising[m::-1], d1)


def startup_predict(ctx):
    """Rectangle-rule prediction of ``y_{m+1}`` of the matching kind."""
    kind, m, dt = ctx.ivp.kind, ctx.m, ctx.dt
    if kind is DerivativeKind.CLASSICAL:
        return ctx.y(m) + dt * ctx.f(m)
    a = ctx.alpha
    if kind is DerivativeKind.CAPUTO_FABRIZIO:
        return ctx.y(m) + a / m_norm(a) * dt * ctx.f(m)
    if kind is DerivativeKind.CAPUTO:
        return ctx.y0 + _rect_integral(ctx)
    ab = ab_norm(a)
    return ctx.y0 + (1.0 - a) / ab * ctx.f(m) + a / ab * _rect_integral(ctx)


def startup_correct(ctx, y_pred, f_pred=None):
    """Linear-interpolation (trapezoidal / product-trapezoidal) correction."""
    if f_pred is None:
        f_pred = ctx.rhs_next(y_pred)
    kind, m, dt = ctx.ivp.kind, ctx.m, ctx.dt
    if kind is DerivativeKind.CLASSICAL:
        return ctx.y(m) + dt / 2.0 * (ctx.f(m) + f_pred)
    a = ctx.alpha
    if kind is DerivativeKind.CAPUTO_FABRIZIO:
        norm = m_norm(a)
        return (
            ctx.y(m)
            + (1.0 - a) / norm * (f_pred - ctx.f(m))
            + a / norm * dt / 2.0 * (ctx.f(m) + f_pred)
        )
    if kind is DerivativeKind.CAPUTO:
        return ctx.y0 + _trap_integral(ctx, f_pred)
    ab = ab_norm(a)
    return ctx.y0 + (1.0 - a) / ab * f_pred + a / ab * _trap_integral(ctx, f_pred)


def startup(ctx):
    """One-step linear predictor-corrector for steps the main stencils cannot serve."""
    y = startup_predict(ctx)
    for _ in range(ctx.config.corrector_sweeps):
        y = startup_correct(ctx, y)
    return y


# dispatch -----------------------------------------------------------------------

_PREDICTORS = {
    DerivativeKind.CLASSICAL: (predict_classical_as, 2),
    DerivativeKind.CAPUTO_FABRIZIO: (predict_cf, 2),
    DerivativeKind.CAPUTO: (predict_caputo_ias, 2),
    DerivativeKind.ATANGANA_BALEANU: (predict_abc, 2),
}

_CORRECTORS = {
    DerivativeKind.CLASSICAL: correct_classical,
    DerivativeKind.CAPUTO_FABRIZIO: correct_cf,
    DerivativeKind.CAPUTO: correct_caputo,
    DerivativeKind.ATANGANA_BALEANU: correct_abc,
}


def advance(ctx):
    """Compute ``y_{m+1}`` with the configured scheme, falling back to startup."""
    scheme, kind, m = ctx.config.scheme, ctx.ivp.kind, ctx.m
    if scheme is Scheme.TWO_STEP_AB:
        return step_two_step_ab(ctx) if m >= 1 else startup(ctx)
    predict, first = _PREDICTORS[kind]
    if scheme in (Scheme.CLASSICAL_AS, Scheme.IMPROVED_AS):
        return predict(ctx) if m >= first else startup(ctx)
    if m < 1:
        return startup(ctx)
    y = predict(ctx) if m >= first else startup_predict(ctx)
    correct = _CORRECTORS[kind]
    for _ in range(ctx.config.corrector_sweeps):
        y = correct(ctx, y)
    return y


def solve(ivp, config=None, grid=None):
    """Integrate ``ivp`` over ``grid`` and return the full :class:`Trajectory`.

    Raises DivergenceError (carrying the failing node index and the partial
    trajectory) once a state is non-finite, its norm exceeds
    ``config.divergence_guard`` or the right-hand side reports a singularity.
    """
    if config is None:
        config = SolverConfig()
    if grid is None:
        raise UsageError("solve() needs a grid")
    config.check_compatible(ivp.kind)
    ctx = StepContext.allocate(ivp, config, grid)
    ctx.record(0, ivp.y0, ivp.evaluate(0.0, ivp.y0))
    for m in range(grid.n_steps):
        ctx.m = m
        y = advance(ctx)
        f, reason = None, "state left the admissible range"
        if np.all(np.isfinite(y)) and np.linalg.norm(y) <= config.divergence_guard:
            try:
                f = ivp.evaluate(grid.node(m + 1), y)
            except SingularityError as exc:
                reason = str(exc)
        if f is None or not np.all(np.isfinite(f)):
            partial = Trajectory(
                grid, ctx.states[: m + 1].copy(), ctx.f_history[: m + 1].copy(),
                info={"diverged_at": m + 1},
            )
            raise DivergenceError(
                f"solution diverged at step {m + 1} (t = {grid.node(m + 1):.6g}): {reason}",
                step=m + 1,
                trajectory=partial,
            )
        ctx.record(m + 1, y, f)
    return Trajectory(grid, ctx.states, ctx.f_history, info={"scheme": config.scheme.value})
