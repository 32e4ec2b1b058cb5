"""Closed-form product-integration weights and the memory sum.

Every weight is an integral of a low-degree polynomial in ``s`` against the
kernel ``(t_{m+1} - s)**(alpha - 1)`` over one grid cell ``[t_i, t_{i+1}]``.
After factoring out ``dt`` powers they depend only on ``alpha`` and the lag
``k = m - i``, so the lag-indexed coefficient functions below are the single
source of truth for both the scalar ``kernel_weight`` entry point and the
vectorised tables used by the steppers.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import UsageError
from .specfun import gamma


class KernelId(str, Enum):
    C_STEP = "C_Step"  # int (t_{m+1}-s)^(a-1)
    C_LIN = "C_Lin"  # int (s - t_{i+1}) (t_{m+1}-s)^(a-1)
    C_QUAD = "C_Quad"  # int (s - t_i)(s - t_{i+1}) (t_{m+1}-s)^(a-1)
    C_FIRST_LIN = "C_FirstLin"  # int_0^{t_1} s (t_{m+1}-s)^(a-1)
    P_LIN = "P_Lin"  # int (s - t_i) (t_{m+1}-s)^(a-1)
    P_SHIFT = "P_Shift"  # int (s - t_{i-2}) (t_{m+1}-s)^(a-1)
    P_QUAD = "P_Quad"  # int (s - t_{i-2})(s - t_{i-1}) (t_{m+1}-s)^(a-1)
    CL_LIN = "Cl_Lin"  # int (s - t_{m+1}) over [t_m, t_{m+1}]
    CL_QUAD = "Cl_Quad"  # int (s - t_m)(s - t_{m+1}) over [t_m, t_{m+1}]


def lag_power(k, p):
    """``k**p`` with ``0**p = 0``; ``k`` may be an array.

    ``pow`` is exact for integer ``p``, which keeps the unit-order brackets
    below in exact integer arithmetic.
    """
    k = np.asarray(k, dtype=float)
    out = np.zeros_like(k)
    pos = k > 0
    out[pos] = np.power(k[pos], p)
    return out if out.ndim else float(out)


# Lag coefficients: the bracketed factors of the closed forms. Each takes the
# lag k (scalar or array) and returns the same shape.
#
# Every bracket has the shape (k+1)^a P(k) - k^a Q(k) with polynomials P, Q of
# degree <= 2 and is O(k^(a-1)), so evaluating it directly loses ~k^3 ulps.
# For large k, (1 + 1/k)^a is expanded binomially; the non-negative powers of
# k cancel identically and only the tail sum_j c_j k^(a-j) is evaluated.

_SERIES_FROM = 4.0
_SERIES_TERMS = 34


def _binomials(a, count):
    out = [1.0]
    for j in range(1, count):
        out.append(out[-1] * (a - j + 1) / j)
    return out


def _bracket(alpha, k, p_coefs, q_coefs):
    """``(k+1)^a P(k) - k^a Q(k)``; coefficient lists run from degree 0 upward."""
    k = np.asarray(k, dtype=float)
    kk = np.atleast_1d(k)
    out = np.empty_like(kk)
    small = kk < _SERIES_FROM
    if np.any(small):
        ks = kk[small]
        poly = lambda c, x: sum(cj * x**j for j, cj in enumerate(c))  # noqa: E731
        out[small] = lag_power(ks + 1, alpha) * poly(p_coefs, ks) - lag_power(ks, alpha) * poly(
            q_coefs, ks
        )
    if not np.all(small):
        kl = kk[~small]
        binom = _binomials(alpha, _SERIES_TERMS + len(p_coefs))
        # coefficient of k^(a - j): sum_d p_d binom(a, d + j)
        tail = [
            sum(pd * binom[d + j] for d, pd in enumerate(p_coefs))
            for j in range(1, _SERIES_TERMS + 1)
        ]
        x = 1.0 / kl
        acc = np.zeros_like(kl)
        for c in reversed(tail):
            acc = (acc + c) * x
        out[~small] = np.power(kl, alpha) * acc
    return out.reshape(k.shape) if k.ndim else float(out[0])


def step_coef(alpha, k):
    return _bracket(alpha, k, [1.0], [1.0])


def lin_coef(alpha, k):
    # (k - a)(k+1)^a - k^(a+1)
    return _bracket(alpha, k, [-alpha, 1.0], [0.0, 1.0])


def quad_coef(alpha, k):
    # (k+1)^a (2k^2 - a(k+1) + 2k) - k^a (2k^2 + ak + 2k)
    a = alpha
    return _bracket(a, k, [-a, 2.0 - a, 2.0], [0.0, a + 2.0, 2.0])


def rising_lin_coef(alpha, k):
    """Bracket of the ``(s - t_i)`` weight; with ``k = m`` it is the first-cell weight.

    ``(k+1)^(a+1) - k^(a+1) - (a+1) k^a``.
    """
    return _bracket(alpha, k, [1.0, 1.0], [alpha + 1.0, 1.0])


def shift_coef(alpha, k):
    # (k+1)^a (k + 3 + 2a) - k^a (k + 3 + 3a)
    a = alpha
    return _bracket(a, k, [3.0 + 2.0 * a, 1.0], [3.0 + 3.0 * a, 1.0])


def shift_quad_coef(alpha, k):
    a = alpha
    return _bracket(
        a,
        k,
        [2.0 * a * a + 9.0 * a + 12.0, 3.0 * a + 10.0, 2.0],
        [6.0 * a * a + 18.0 * a + 12.0, 5.0 * a + 10.0, 2.0],
    )


def kernel_weight(kernel, alpha, m, i, dt):
    """Closed-form value of one product-integration integral.

    ``kernel`` is a :class:`KernelId` (or its string value). The classical
    kernels ignore ``alpha``, ``m`` and ``i``.
    """
    kernel = KernelId(kernel)
    m, i = int(m), int(i)
    if i < 0 or m < 0 or i > m:
        raise UsageError(f"need 0 <= i <= m, got m={m}, i={i}")
    if not dt > 0:
        raise UsageError(f"dt must be positive, got {dt!r}")
    if kernel is KernelId.CL_LIN:
        return -dt * dt / 2.0
    if kernel is KernelId.CL_QUAD:
        return -dt**3 / 6.0
    if not (0.0 < alpha <= 1.0):
        raise UsageError(f"alpha must lie in (0, 1], got {alpha!r}")
    a = float(alpha)
    k = m - i
    if kernel is KernelId.C_STEP:
        val = dt**a / a * step_coef(a, k)
    elif kernel is KernelId.C_LIN:
        val = dt ** (a + 1) / (a * (a + 1)) * lin_coef(a, k)
    elif kernel is KernelId.C_QUAD:
        val = dt ** (a + 2) / (a * (a + 1) * (a + 2)) * quad_coef(a, k)
    elif kernel is KernelId.C_FIRST_LIN:
        if i != 0:
            raise UsageError("C_FirstLin is the first-cell integral and needs i = 0")
        val = dt ** (a + 1) / (a * (a + 1)) * rising_lin_coef(a, m)
    elif kernel is KernelId.P_LIN:
        val = dt ** (a + 1) / (a * (a + 1)) * rising_lin_coef(a, k)
    elif kernel is KernelId.P_SHIFT:
        val = dt ** (a + 1) / (a * (a + 1)) * shift_coef(a, k)
    else:
        val = dt ** (a + 2) / (a * (a + 1) * (a + 2)) * shift_quad_coef(a, k)
    val = float(val)
    if not np.isfinite(val):
        raise OverflowError(f"{kernel.value} weight overflowed for m={m}, i={i}, dt={dt}")
    return val


@dataclass(frozen=True)
class LagTables:
    """All lag coefficients for ``k = 0..n`` at one ``alpha``.

    ``c1, c2, c3`` are the common prefactors ``dt^a/G(a+1)``,
    ``dt^a/G(a+2)`` and ``dt^a/(2 G(a+3))`` that turn the brackets into
    weights of ``f`` values and their differences.
    """

    alpha: float
    dt: float
    step: np.ndarray
    lin: np.ndarray
    quad: np.ndarray
    rising: np.ndarray
    shift: np.ndarray
    shift_quad: np.ndarray
    c1: float
    c2: float
    c3: float

    @classmethod
    def build(cls, alpha, dt, n):
        a = float(alpha)
        k = np.arange(n + 1, dtype=float)
        dta = dt**a
        return cls(
            alpha=a,
            dt=dt,
            step=step_coef(a, k),
            lin=lin_coef(a, k),
            quad=quad_coef(a, k),
            rising=rising_lin_coef(a, k),
            shift=shift_coef(a, k),
            shift_quad=shift_quad_coef(a, k),
            c1=dta / gamma(a + 1),
            c2=dta / gamma(a + 2),
            c3=dta / (2.0 * gamma(a + 3)),
        )


def _lagged_dot(weights, values):
    # fixed-order pairwise summation along the contiguous axis: values is (dim, p)
    return np.sum(weights * values, axis=-1)


def memory_sum(tables, m, p, f_hist):
    """Memory term for step ``m`` truncated at ``p`` using prebuilt lag tables.

    ``f_hist`` is an ``(rows, dim)`` array with at least ``p + 2`` rows.
    """
    f = np.asarray(f_hist, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    dim = f.shape[1]
    if p == 0:
        return np.zeros(dim)
    i = np.arange(1, p + 1)
    k = m - i
    fT = f[: p + 2].T
    cur = fT[:, 2 : p + 2]  # f_{i+1}
    prev = fT[:, 1 : p + 1]  # f_i
    prev2 = fT[:, 0:p]  # f_{i-1}
    return (
        tables.c1 * _lagged_dot(tables.step[k], cur)
        + tables.c2 * _lagged_dot(tables.lin[k], cur - prev)
        + tables.c3 * _lagged_dot(tables.quad[k], cur - 2.0 * prev + prev2)
    )


def upsilon(alpha, m, p, dt, f_hist):
    """Accumulated memory sum over cells ``i = 1..p`` seen from step ``m``.

    Returns the zero vector for ``p = 0``. The corrector for step ``m`` uses
    ``p = m - 1``.
    """
    m, p = int(m), int(p)
    if p < 0 or p >= m:
        raise UsageError(f"need 0 <= p <= m - 1, got m={m}, p={p}")
    f = np.asarray(f_hist, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    if p > 0 and len(f) < p + 2:
        raise UsageError(f"upsilon with p={p} needs {p + 2} history rows, got {len(f)}")
    tables = LagTables.build(alpha, dt, m)
    return memory_sum(tables, m, p, f)
