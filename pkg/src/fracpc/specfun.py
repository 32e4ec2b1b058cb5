"""Gamma function and the normalisation constants of the CF and AB operators."""

import math

from .errors import DomainError

# Lanczos approximation, g = 7, n = 9 (Godfrey's coefficient set).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_RECURRENCE_FROM = 20.0


def gamma(x):
    """Gamma function for real ``x > 0``.

    Uses the Lanczos series on ``[0.5, 20]``, ``G(x) = G(x + 1) / x`` below
    that and the upward recurrence above it. Relative error stays under
    1e-13 on ``(0, 170)``.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"gamma requires a finite positive argument, got {x!r}")
    if x < 0.5:
        return _lanczos(x + 1.0) / x
    if x > _RECURRENCE_FROM:
        # exp(-t) * t**z amplifies rounding in t by ~x ulps; a product of
        # factors only accumulates it additively
        n = int(x - 10.0)
        base = x - n
        prod = 1.0
        for j in range(n):
            prod *= base + j
        return _lanczos(base) * prod
    return _lanczos(x)


def _lanczos(x):
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for j in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[j] / (z + j)
    t = z + _LANCZOS_G + 0.5
    # split the power so t**(z + 0.5) does not overflow before exp(-t) pulls it back
    half = t ** ((z + 0.5) / 2.0)
    return _SQRT_2PI * half * (half * math.exp(-t)) * acc


def _check_order(alpha):
    alpha = float(alpha)
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"fractional order must lie in (0, 1], got {alpha!r}")
    return alpha


def m_norm(alpha):
    """Caputo-Fabrizio normalisation M(alpha); the constant-one choice."""
    _check_order(alpha)
    return 1.0


def ab_norm(alpha):
    """Atangana-Baleanu normalisation ``1 - alpha + alpha / Gamma(alpha)``."""
    alpha = _check_order(alpha)
    return 1.0 - alpha + alpha / gamma(alpha)
