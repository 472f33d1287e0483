"""Far-field operators, their boundary derivative, and the phaseless misfit.

With densities held fixed the far field of the two-component scene is::

    u_inf(t) = -gamma sum_j int exp(-i kappa xhat(t) . p_j(tau)) psi_j(tau) dtau

Only the obstacle term depends on the boundary; its derivative in direction
``q(tau) = (dc1, dc2) + dr(tau) (cos tau, sin tau)`` is::

    i kappa gamma int exp(-i kappa xhat(t) . p_1(tau)) xhat(t) . q(tau) psi_1(tau) dtau
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from refball.forward import FarFieldSamples, PhaselessSamples, farfield_constant
from refball.geometry import ParamGrid, StarCurve


@dataclass(frozen=True, eq=False)
class FrechetKernels:
    """Kernel samples at ``(t_s, tau_j)``; rows index observation angles."""

    M1: np.ndarray
    M2: np.ndarray
    L1: np.ndarray
    L2: np.ndarray
    L3: np.ndarray


def exponential_table(curve, kappa, grid: ParamGrid) -> np.ndarray:
    """``exp(-i kappa xhat(t_s) . p(tau_j))`` for all observation/source pairs."""
    t = grid.knots
    xhat = np.stack([np.cos(t), np.sin(t)], axis=-1)
    return np.exp(-1j * kappa * xhat @ curve.point(t).T)


def farfield_operator(curve, psi, kappa, grid: ParamGrid) -> np.ndarray:
    """One term ``A_inf_j(p_j, psi_j)`` sampled on the grid."""
    gamma = farfield_constant(kappa)
    return -gamma * grid.weight * (exponential_table(curve, kappa, grid) @ psi)


def farfield_from_densities(obstacle, ball, densities, grid: ParamGrid, kappa) -> FarFieldSamples:
    values = farfield_operator(obstacle, densities.psi1, kappa, grid) + farfield_operator(
        ball.curve, densities.psi2, kappa, grid
    )
    return FarFieldSamples(grid.knots, values)


def frechet_kernels(obstacle, ball, densities, grid: ParamGrid, kappa) -> FrechetKernels:
    t = grid.knots
    gamma = farfield_constant(kappa)
    E1 = exponential_table(obstacle, kappa, grid)
    E2 = exponential_table(ball.curve, kappa, grid)
    psi1 = densities.psi1[None, :]
    base = 1j * kappa * gamma * E1 * psi1
    return FrechetKernels(
        M1=-gamma * E1 * psi1,
        M2=-gamma * E2 * densities.psi2[None, :],
        L1=base * np.cos(t)[:, None],
        L2=base * np.sin(t)[:, None],
        L3=base * np.cos(t[:, None] - t[None, :]),
    )


def farfield_derivative(kernels: FrechetKernels, update, grid: ParamGrid) -> np.ndarray:
    """Apply the derivative kernels to ``update = (dc1, dc2, coeffs...)``."""
    update = np.asarray(update, dtype=float)
    dr = StarCurve((0.0, 0.0), update[2:]).radius(grid.knots)
    integrand = kernels.L1 * update[0] + kernels.L2 * update[1] + kernels.L3 * dr[None, :]
    return grid.weight * integrand.sum(axis=1)


def phaseless_residual(model: FarFieldSamples, data: PhaselessSamples) -> np.ndarray:
    """``f = |w_inf|^2 - |u_model|^2`` at each observation angle."""
    if np.shape(model.values) != np.shape(data.intensities) or not np.allclose(
        model.angles, data.angles
    ):
        raise ValueError("model and data live on different observation grids")
    return data.intensities - np.abs(model.values) ** 2


def l2_norm(values, grid: ParamGrid) -> float:
    """Trapezoid-rule L2 norm on ``[0, 2 pi)``."""
    return float(np.sqrt(grid.weight) * np.linalg.norm(values))


def stopping_error(model: FarFieldSamples, data: PhaselessSamples) -> float:
    """Relative intensity misfit ``||f|| / || |w_inf|^2 ||``."""
    f = phaseless_residual(model, data)
    grid = ParamGrid(len(f) // 2)
    denom = l2_norm(data.intensities, grid)
    if denom == 0.0:
        raise ValueError("stopping error undefined for identically zero data")
    return l2_norm(f, grid) / denom
