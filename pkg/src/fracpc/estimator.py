"""scikit-learn style wrapper around :func:`fracpc.schemes.solve`."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .model import DerivativeKind, FractionalIVP, Scheme, SolverConfig, make_grid
from .schemes import solve


class FractionalPCSolver(BaseEstimator):
    """Fit integrates an initial value problem; predict reads the grid solution.

    Hyper-parameters mirror the CLI flags, so ``get_params``/``set_params``
    and :func:`sklearn.base.clone` work as usual. There is no interpolation:
    :meth:`predict` only accepts times that are grid nodes.

    Examples
    --------
    >>> est = FractionalPCSolver(kind="caputo", alpha=0.5, dt=0.01, t_end=1.0)
    >>> est.fit(lambda t, y: -y, y0=[1.0]).predict([0.0, 1.0]).shape
    (2, 1)
    """

    def __init__(
        self,
        kind="classical",
        alpha=1.0,
        scheme="ppc",
        dt=0.01,
        t_end=1.0,
        corrector_sweeps=1,
        divergence_guard=1e12,
    ):
        self.kind = kind
        self.alpha = alpha
        self.scheme = scheme
        self.dt = dt
        self.t_end = t_end
        self.corrector_sweeps = corrector_sweeps
        self.divergence_guard = divergence_guard

    def _build(self, rhs, y0):
        ivp = FractionalIVP(rhs, y0, DerivativeKind(self.kind), self.alpha)
        config = SolverConfig(Scheme(self.scheme), self.corrector_sweeps, self.divergence_guard)
        config.check_compatible(ivp.kind)
        return ivp, config, make_grid(self.dt, self.t_end)

    def fit(self, rhs, y0):
        """Solve ``D^alpha y = rhs(t, y)`` with ``y(0) = y0``.

        Sets ``trajectory_``, ``t_`` and ``states_``. Divergence propagates
        as :class:`fracpc.errors.DivergenceError`.
        """
        if not callable(rhs):
            raise TypeError("rhs must be callable as rhs(t, y)")
        ivp, config, grid = self._build(rhs, y0)
        self.trajectory_ = solve(ivp, config, grid)
        self.t_ = self.trajectory_.t
        self.states_ = self.trajectory_.states
        self.n_features_out_ = ivp.dim
        return self

    def _node_index(self, t):
        t = check_array(np.asarray(t, dtype=float).reshape(-1, 1), ensure_2d=True).ravel()
        dt = self.trajectory_.grid.dt
        idx = np.rint(t / dt).astype(int)
        bad = (idx < 0) | (idx >= len(self.t_)) | (np.abs(idx * dt - t) > 1e-9 * max(dt, 1.0))
        if np.any(bad):
            raise ValueError(f"times {t[bad][:5].tolist()} are not grid nodes")
        return idx

    def predict(self, t):
        """States at grid-node times ``t``; shape ``(len(t), dim)``."""
        check_is_fitted(self, "trajectory_")
        return self.states_[self._node_index(t)]

    def score(self, t, y):
        """Negative maximum absolute error against reference values ``y``."""
        pred = self.predict(t)
        ref = check_array(np.asarray(y, dtype=float).reshape(len(pred), -1))
        return -float(np.max(np.abs(pred - ref)))
