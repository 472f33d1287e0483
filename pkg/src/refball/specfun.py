"""Cylinder functions of orders 0 and 1.

Thin wrappers around :mod:`scipy.special` that enforce the real, positive
argument domain used by the boundary kernels. The Cephes routines behind
``j0``/``y0``/``j1``/``y1`` switch from rational approximations to
asymptotic forms around ``x = 5`` and are accurate to a few ulp on the range
the kernels need (``kappa * |x - y|`` well below 200).
"""

import numpy as np
from scipy import special

EULER_GAMMA = 0.5772156649015329


def _positive(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)):
        raise ValueError(f"{name}: argument must be finite")
    if np.any(x <= 0.0):
        raise ValueError(f"{name}: argument must be positive")
    return x


def bessel_j0(x):
    """Bessel function of the first kind, order 0."""
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)):
        raise ValueError("bessel_j0: argument must be finite")
    return special.j0(x)


def bessel_j1(x):
    """Bessel function of the first kind, order 1."""
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)):
        raise ValueError("bessel_j1: argument must be finite")
    return special.j1(x)


def bessel_y0(x):
    """Neumann function of order 0; raises ``ValueError`` for ``x <= 0``."""
    return special.y0(_positive(x, "bessel_y0"))


def bessel_y1(x):
    """Neumann function of order 1; raises ``ValueError`` for ``x <= 0``."""
    return special.y1(_positive(x, "bessel_y1"))


def hankel1_0(x):
    """``H_0^(1)(x) = J_0(x) + i Y_0(x)`` for real ``x > 0``."""
    x = _positive(x, "hankel1_0")
    return special.j0(x) + 1j * special.y0(x)


def hankel1_1(x):
    """``H_1^(1)(x) = J_1(x) + i Y_1(x)`` for real ``x > 0``."""
    x = _positive(x, "hankel1_1")
    return special.j1(x) + 1j * special.y1(x)
