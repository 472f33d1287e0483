"""Star-like boundaries, the reference disk and the periodic parameter grid.

Every boundary here is star-like about a center ``c``::

    p(t) = c + r(t) (cos t, sin t),    0 <= t < 2 pi

:class:`StarCurve` carries a truncated trigonometric radius and is the type
the inversion iterates on. :class:`ClosedFormCurve` wraps an exact radius
function (the apple, peanut and rounded-rectangle test obstacles) and is only
used to synthesize data and measure reconstruction error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from refball.errors import DegenerateCurveError, GeometryError


@dataclass(frozen=True)
class ParamGrid:
    """Equidistant knots ``tau_j = pi j / n``, ``j = 0 .. 2n-1``."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4:
            raise ValueError(f"grid parameter n must be an integer >= 4, got {self.n}")

    @property
    def size(self) -> int:
        return 2 * self.n

    @property
    def knots(self) -> np.ndarray:
        return np.pi * np.arange(2 * self.n) / self.n

    @property
    def weight(self) -> float:
        """Trapezoid weight ``pi / n``."""
        return np.pi / self.n


class StarShaped:
    """Shared evaluation for boundaries of the form ``c + r(t) e(t)``.

    Subclasses provide ``center`` and the radius with its first two
    derivatives.
    """

    center: np.ndarray

    def radius(self, t):
        raise NotImplementedError

    def radial_derivative(self, t):
        raise NotImplementedError

    def radial_second_derivative(self, t):
        raise NotImplementedError

    def _checked_radius(self, t):
        r = self.radius(t)
        if np.any(r <= 0.0):
            raise DegenerateCurveError(
                f"nonpositive radius (min {np.min(r):.3g}) on the evaluation points"
            )
        return r

    def point(self, t):
        """Boundary point(s) ``c + r(t)(cos t, sin t)``, shape ``t.shape + (2,)``."""
        t = np.asarray(t, dtype=float)
        r = self._checked_radius(t)
        return np.asarray(self.center) + (r * np.array([np.cos(t), np.sin(t)])).T

    def jacobian(self, t):
        """Arc-length factor ``sqrt(r^2 + r'^2)``."""
        t = np.asarray(t, dtype=float)
        r = self._checked_radius(t)
        return np.hypot(r, self.radial_derivative(t))

    def derivatives(self, t):
        """Return ``(x, x', x'')`` at the parameters ``t``, each of shape ``(len(t), 2)``."""
        t = np.asarray(t, dtype=float)
        r = self._checked_radius(t)
        dr = self.radial_derivative(t)
        ddr = self.radial_second_derivative(t)
        e = np.stack([np.cos(t), np.sin(t)], axis=-1)
        e_perp = np.stack([-np.sin(t), np.cos(t)], axis=-1)
        x = np.asarray(self.center) + r[:, None] * e
        dx = dr[:, None] * e + r[:, None] * e_perp
        ddx = (ddr - r)[:, None] * e + 2.0 * dr[:, None] * e_perp
        return x, dx, ddx

    def contains(self, points) -> np.ndarray:
        """Strict interior test, valid because the curve is star-like about its center."""
        rel = np.atleast_2d(points) - np.asarray(self.center)
        rho = np.hypot(rel[:, 0], rel[:, 1])
        angle = np.arctan2(rel[:, 1], rel[:, 0])
        return rho < self.radius(angle)


@dataclass(frozen=True, eq=False)
class StarCurve(StarShaped):
    """Star-like curve with radius ``sum a_m cos(m t) + sum b_m sin(m t)``.

    ``coeffs`` is laid out as ``(a_0, ..., a_M, b_1, ..., b_M)`` so its length
    is ``2M + 1``.
    """

    center: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        center = np.array(self.center, dtype=float).reshape(2)
        coeffs = np.array(self.coeffs, dtype=float).ravel()
        if coeffs.size % 2 != 1:
            raise ValueError(f"coefficient vector must have odd length 2M+1, got {coeffs.size}")
        center.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def circle(cls, center, radius, M=1):
        coeffs = np.zeros(2 * M + 1)
        coeffs[0] = radius
        return cls(center, coeffs)

    @property
    def M(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def alpha(self) -> np.ndarray:
        return self.coeffs[: self.M + 1]

    @property
    def beta(self) -> np.ndarray:
        """Sine coefficients ``b_1 .. b_M``."""
        return self.coeffs[self.M + 1 :]

    def _modes(self, t):
        t = np.asarray(t, dtype=float)
        m = np.arange(self.M + 1)
        mt = np.multiply.outer(t, m)
        return m, np.cos(mt), np.sin(mt)

    def radius(self, t):
        m, c, s = self._modes(t)
        return c @ self.alpha + s[..., 1:] @ self.beta

    def radial_derivative(self, t):
        m, c, s = self._modes(t)
        return -s @ (m * self.alpha) + c[..., 1:] @ (m[1:] * self.beta)

    def radial_second_derivative(self, t):
        m, c, s = self._modes(t)
        return -c @ (m**2 * self.alpha) - s[..., 1:] @ (m[1:] ** 2 * self.beta)

    def translated(self, h) -> "StarCurve":
        return StarCurve(self.center + np.asarray(h, dtype=float), self.coeffs)

    def with_truncation(self, M: int) -> "StarCurve":
        """Pad with zeros or drop modes above ``M``."""
        alpha = np.zeros(M + 1)
        beta = np.zeros(M)
        k = min(M, self.M)
        alpha[: k + 1] = self.alpha[: k + 1]
        beta[:k] = self.beta[:k]
        return StarCurve(self.center, np.concatenate([alpha, beta]))


class ClosedFormCurve(StarShaped):
    """Star-like curve given by an exact radius function.

    Points are evaluated from the formula itself. The derivatives, needed only
    by the double-layer kernel of the synthesis solver, come from a
    trigonometric interpolant on ``n_fft`` samples, which converges
    geometrically for the analytic test boundaries.
    """

    def __init__(self, radius: Callable, center=(0.0, 0.0), name: str = "", n_fft: int = 1024):
        self._radius = radius
        self.center = np.array(center, dtype=float)
        self.name = name
        t = 2 * np.pi * np.arange(n_fft) / n_fft
        modes = np.fft.rfft(radius(t)) / n_fft
        modes[1:] *= 2.0
        if n_fft % 2 == 0:
            modes[-1] /= 2.0
        # roundoff-level modes only add noise once differentiated
        modes[np.abs(modes) < 1e-15 * np.abs(modes).max()] = 0.0
        self._modes_fft = modes

    def __repr__(self):
        return f"ClosedFormCurve(name={self.name!r}, center={tuple(self.center)})"

    def radius(self, t):
        return self._radius(np.asarray(t, dtype=float))

    def _series_derivative(self, t, order):
        t = np.asarray(t, dtype=float)
        m = np.arange(self._modes_fft.size)
        phase = np.exp(1j * np.multiply.outer(t, m))
        return np.real(phase @ (self._modes_fft * (1j * m) ** order))

    def radial_derivative(self, t):
        return self._series_derivative(t, 1)

    def radial_second_derivative(self, t):
        return self._series_derivative(t, 2)

    def translated(self, h) -> "ClosedFormCurve":
        return ClosedFormCurve(self._radius, self.center + np.asarray(h, dtype=float), self.name)


def apple_radius(t):
    return 0.55 * (1 + 0.9 * np.cos(t) + 0.1 * np.sin(2 * t)) / (1 + 0.75 * np.cos(t))


def peanut_radius(t):
    return 0.275 * np.sqrt(3 * np.cos(t) ** 2 + 1)


def rounded_rectangle_radius(t):
    return 0.45 * (np.cos(t) ** 10 + (2.0 / 3.0) * np.sin(t) ** 10) ** (-0.1)


def apple(center=(0.0, 0.0)) -> ClosedFormCurve:
    return ClosedFormCurve(apple_radius, center, "apple")


def peanut(center=(0.0, 0.0)) -> ClosedFormCurve:
    return ClosedFormCurve(peanut_radius, center, "peanut")


def rounded_rectangle(center=(0.0, 0.0)) -> ClosedFormCurve:
    return ClosedFormCurve(rounded_rectangle_radius, center, "rectangle")


SHAPES = {"apple": apple, "peanut": peanut, "rectangle": rounded_rectangle}


@dataclass(frozen=True, eq=False)
class Disk:
    """The reference ball: center ``b`` and radius ``R``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"disk radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", np.array(self.center, dtype=float).reshape(2))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def curve(self) -> StarCurve:
        return StarCurve(self.center, [self.radius])


def check_disjoint(*boundaries, grid: ParamGrid | None = None):
    """Raise :class:`GeometryError` if any two boundaries intersect on the grid."""
    t = (grid or ParamGrid(64)).knots
    curves = [b.curve if isinstance(b, Disk) else b for b in boundaries]
    for i, a in enumerate(curves):
        for b in curves[i + 1 :]:
            if np.any(b.contains(a.point(t))) or np.any(a.contains(b.point(t))):
                raise GeometryError("scatterer components overlap")


def fit_star_curve(boundary_samples, M: int, center=None):
    """Least-squares trigonometric fit of the radius about ``center``.

    Parameters
    ----------
    boundary_samples : array_like, shape (N, 2)
        Points on a closed curve, star-like about ``center``.
    M : int
        Number of retained modes.
    center : array_like, optional
        Expansion center; defaults to the centroid of the samples.

    Returns
    -------
    curve : StarCurve
    residual : float
        Root-mean-square radial misfit of the fit at the samples.
    """
    pts = np.asarray(boundary_samples, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("boundary samples must have shape (N, 2)")
    c = pts.mean(axis=0) if center is None else np.asarray(center, dtype=float)
    rel = pts - c
    rho = np.hypot(rel[:, 0], rel[:, 1])
    angle = np.arctan2(rel[:, 1], rel[:, 0])
    if np.any(rho == 0.0):
        raise GeometryError("fit center lies on the boundary")
    # a star-like polygon visits the angles monotonically exactly once
    step = np.angle(np.exp(1j * np.diff(np.append(angle, angle[0]))))
    if not (np.all(step > 0) or np.all(step < 0)) or abs(abs(step.sum()) - 2 * np.pi) > 1e-8:
        raise GeometryError("samples are not star-like about the fit center")
    if pts.shape[0] < 2 * M + 1:
        raise ValueError(f"need at least {2 * M + 1} samples for M={M}")
    m = np.arange(M + 1)
    basis = np.hstack([np.cos(np.outer(angle, m)), np.sin(np.outer(angle, m[1:]))])
    coeffs, *_ = np.linalg.lstsq(basis, rho, rcond=None)
    residual = float(np.sqrt(np.mean((basis @ coeffs - rho) ** 2)))
    return StarCurve(c, coeffs), residual


def boundary_error(reconstructed, exact, grid: ParamGrid) -> float:
    """Relative discrete L2 distance at matched parameters ``tau_j``."""
    t = grid.knots
    diff = reconstructed.point(t) - exact.point(t)
    return float(np.linalg.norm(diff) / np.linalg.norm(exact.point(t)))
