"""Far-field data synthesis for sound-soft scatterers.

The synthetic data are generated with a representation that differs from the
single-layer ansatz used during inversion. The scattered field is the combined
potential

    u^s(x) = int_Gamma (dPhi(x, y)/dnu(y) - i eta Phi(x, y)) phi(y) ds(y)

over all components, whose Dirichlet trace gives the second-kind equation
``phi + 2 K phi - 2 i eta S phi = -2 u^i``. It is discretized with the
Nystrom method using the same logarithmic product quadrature as the field
equations; blocks coupling distinct components are smooth and use the plain
trapezoid rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from refball.errors import SynthesisError
from refball.field_system import weight_matrix
from refball.geometry import Disk, ParamGrid, check_disjoint
from refball.specfun import EULER_GAMMA, bessel_j0, bessel_j1, hankel1_0, hankel1_1

MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class IncidentWave:
    """Plane wave ``exp(i kappa x . d)``."""

    wavenumber: float
    direction: np.ndarray

    def __post_init__(self):
        d = np.array(self.direction, dtype=float).reshape(2)
        if not self.wavenumber > 0:
            raise ValueError("wavenumber must be positive")
        if abs(np.hypot(*d) - 1.0) > 1e-12:
            raise ValueError(f"direction must be a unit vector, got {d}")
        object.__setattr__(self, "direction", d)

    @classmethod
    def from_angle(cls, wavenumber, angle):
        return cls(wavenumber, (np.cos(angle), np.sin(angle)))

    def __call__(self, x):
        return np.exp(1j * self.wavenumber * (np.asarray(x) @ self.direction))


@dataclass(frozen=True, eq=False)
class FarFieldSamples:
    angles: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if np.shape(self.angles) != np.shape(self.values):
            raise ValueError("angles and far-field values differ in length")

    @property
    def intensities(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def phaseless(self) -> "PhaselessSamples":
        return PhaselessSamples(self.angles, self.intensities)


@dataclass(frozen=True, eq=False)
class PhaselessSamples:
    angles: np.ndarray
    intensities: np.ndarray

    def __post_init__(self):
        if np.shape(self.angles) != np.shape(self.intensities):
            raise ValueError("angles and intensities differ in length")
        if np.any(np.asarray(self.intensities) < 0):
            raise ValueError("intensities must be nonnegative")


def farfield_constant(wavenumber):
    """``gamma = exp(i pi/4) / sqrt(8 pi kappa)``, the far-field factor of ``Phi``."""
    return np.exp(1j * np.pi / 4) / np.sqrt(8 * np.pi * wavenumber)


def _combined_block(x_obs, x_src, dx_src, kappa, eta):
    """Smooth kernel ``2 dPhi/dnu - 2 i eta Phi`` times the source speed."""
    diff = x_obs[:, None, :] - x_src[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    normal = np.stack([dx_src[:, 1], -dx_src[:, 0]], axis=-1)
    speed = np.hypot(dx_src[:, 0], dx_src[:, 1])
    ndiff = np.einsum("sjk,jk->sj", diff, normal)
    L = 0.5j * kappa * ndiff * hankel1_1(kappa * dist) / dist
    M = 0.5j * hankel1_0(kappa * dist) * speed[None, :]
    return L - 1j * eta * M


def _combined_self_block(x, dx, ddx, kappa, eta, n):
    t = np.pi * np.arange(2 * n) / n
    diff = x[:, None, :] - x[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    off = ~np.eye(2 * n, dtype=bool)
    normal = np.stack([dx[:, 1], -dx[:, 0]], axis=-1)
    speed = np.hypot(dx[:, 0], dx[:, 1])
    ndiff = np.einsum("sjk,jk->sj", diff, normal)

    safe = np.where(off, dist, 1.0)
    kd = kappa * safe
    logterm = np.where(off, np.log(4 * np.sin((t[:, None] - t[None, :]) / 2) ** 2 + ~off), 0.0)

    L = np.where(off, 0.5j * kappa * ndiff * hankel1_1(kd) / safe, 0.0)
    L1 = np.where(off, -kappa / (2 * np.pi) * ndiff * bessel_j1(kd) / safe, 0.0)
    L2 = L - L1 * logterm
    curvature = (dx[:, 1] * ddx[:, 0] - dx[:, 0] * ddx[:, 1]) / speed**2
    L2[~off] = curvature / (2 * np.pi)

    M = np.where(off, 0.5j * hankel1_0(kd), 0.0) * speed[None, :]
    M1 = -bessel_j0(kappa * dist) / (2 * np.pi) * speed[None, :]
    M2 = M - M1 * logterm
    M2[~off] = (
        0.5j - EULER_GAMMA / np.pi - np.log(kappa * speed / 2) / np.pi
    ) * speed

    return weight_matrix(n) * (L1 - 1j * eta * M1) + (np.pi / n) * (L2 - 1j * eta * M2)


def synthesize_farfield(obstacle, ball, wave: IncidentWave, n: int, eta=None,
                        return_density=False):
    """Far field of the sound-soft scatterer ``obstacle`` (plus ``ball``) on the 2n grid.

    Parameters
    ----------
    obstacle : StarShaped
        Obstacle boundary, e.g. a :class:`ClosedFormCurve` or :class:`StarCurve`.
    ball : Disk or None
        Optional reference ball.
    wave : IncidentWave
    n : int
        Grid parameter; boundaries and observation angles use ``2n`` points.
    eta : float, optional
        Coupling parameter of the combined potential, default ``kappa``.

    Returns
    -------
    FarFieldSamples
    """
    kappa = wave.wavenumber
    eta = kappa if eta is None else eta
    grid = ParamGrid(n)
    t = grid.knots
    curves = [obstacle] if ball is None else [obstacle, ball.curve if isinstance(ball, Disk) else ball]
    if len(curves) > 1:
        check_disjoint(*curves)
    geo = [c.derivatives(t) for c in curves]

    size = 2 * n
    A = np.eye(size * len(curves), dtype=complex)
    for l, (xl, dxl, ddxl) in enumerate(geo):
        for j, (xj, dxj, _) in enumerate(geo):
            rows = slice(l * size, (l + 1) * size)
            cols = slice(j * size, (j + 1) * size)
            if l == j:
                A[rows, cols] += _combined_self_block(xl, dxl, ddxl, kappa, eta, n)
            else:
                A[rows, cols] += (np.pi / n) * _combined_block(xl, xj, dxj, kappa, eta)
    rhs = np.concatenate([-2.0 * wave(x) for x, _, _ in geo])

    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SynthesisError(f"combined-potential system is ill-conditioned (cond={cond:.3g})", cond)
    phi = np.linalg.solve(A, rhs)

    xhat = np.stack([np.cos(t), np.sin(t)], axis=-1)
    values = np.zeros(size, dtype=complex)
    for j, (x, dx, _) in enumerate(geo):
        normal = np.stack([dx[:, 1], -dx[:, 0]], axis=-1)
        speed = np.hypot(dx[:, 0], dx[:, 1])
        kernel = (kappa * xhat @ normal.T + eta * speed[None, :]) * np.exp(-1j * kappa * xhat @ x.T)
        values += kernel @ phi[j * size : (j + 1) * size]
    values *= np.exp(-1j * np.pi / 4) / np.sqrt(8 * np.pi * kappa) * (np.pi / n)
    out = FarFieldSamples(t, values)
    if return_density:
        return out, phi
    return out


def mie_farfield(disk: Disk, wave: IncidentWave, angles, tol=1e-16):
    """Separation-of-variables far field of a sound-soft disk.

    For a disk of radius ``R`` at the origin::

        u_inf(theta) = -sqrt(2/(pi kappa)) exp(-i pi/4)
                       * sum_m J_m(kappa R)/H_m(kappa R) exp(i m (theta - theta_d))

    An offset center ``b`` is handled through the exact translation factor
    ``exp(i kappa b . (d - xhat))``.
    """
    kappa = wave.wavenumber
    kR = kappa * disk.radius
    angles = np.asarray(angles, dtype=float)
    theta_d = np.arctan2(wave.direction[1], wave.direction[0])

    coeffs = []
    for m in range(0, 10_000):
        a = special.jv(m, kR) / special.hankel1(m, kR)
        coeffs.append(a)
        if m > kR and abs(a) < tol * abs(coeffs[0]):
            break
    else:
        raise RuntimeError("Mie series did not reach the requested tail tolerance")
    coeffs = np.array(coeffs)
    m = np.arange(coeffs.size)
    weights = np.where(m == 0, 1.0, 2.0) * coeffs
    series = np.cos(np.multiply.outer(angles - theta_d, m)) @ weights
    values = -np.sqrt(2 / (np.pi * kappa)) * np.exp(-1j * np.pi / 4) * series

    xhat = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    values = values * np.exp(1j * kappa * (wave.direction - xhat) @ disk.center)
    return FarFieldSamples(angles, values)


def add_noise(data: PhaselessSamples, delta: float, seed: int, distribution="uniform"):
    """Multiplicative noise ``|u|^2 (1 + delta eta)`` with ``|eta| <= 1``.

    ``distribution`` is ``"uniform"`` (uniform on [-1, 1]) or ``"truncnormal"``
    (standard normal conditioned on [-1, 1]).
    """
    if not 0 <= delta < 1:
        raise ValueError(f"noise level must satisfy 0 <= delta < 1, got {delta}")
    rng = np.random.default_rng(seed)
    size = np.shape(data.intensities)
    if distribution == "uniform":
        eta = rng.uniform(-1.0, 1.0, size)
    elif distribution == "truncnormal":
        eta = np.empty(size).ravel()
        filled = 0
        while filled < eta.size:
            draw = rng.standard_normal(eta.size)
            draw = draw[np.abs(draw) <= 1.0][: eta.size - filled]
            eta[filled : filled + draw.size] = draw
            filled += draw.size
        eta = eta.reshape(size)
    else:
        raise ValueError(f"unknown noise distribution {distribution!r}")
    if delta == 0:
        return PhaselessSamples(data.angles, np.array(data.intensities, copy=True))
    return PhaselessSamples(data.angles, data.intensities * (1.0 + delta * eta))
