"""Regularized linearized update of the obstacle boundary.

The squared far-field modulus is linearized in the boundary with the
densities frozen::

    2 Re( conj(u_model(t)) A'_inf[p_1, psi_1] q (t) ) = f(t)

The unknown ``xi = (dc1, dc2, a_0..a_M, b_1..b_M)`` parametrizes
``q(tau) = (dc1, dc2) + dr(tau)(cos tau, sin tau)``. The overdetermined real
system is solved in the Tikhonov sense with an H^2 penalty.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from refball.errors import DegenerateCurveError
from refball.farfield import FrechetKernels
from refball.geometry import ParamGrid, StarCurve

MAX_HALVINGS = 10


@dataclass(frozen=True, eq=False)
class UpdateVector:
    dc: np.ndarray
    dcoeffs: np.ndarray

    @classmethod
    def from_array(cls, xi):
        xi = np.asarray(xi, dtype=float)
        return cls(xi[:2].copy(), xi[2:].copy())

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.dc, self.dcoeffs])

    @property
    def M(self) -> int:
        return (self.dcoeffs.size - 1) // 2

    def __mul__(self, factor):
        return UpdateVector(self.dc * factor, self.dcoeffs * factor)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_array()))


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    B: np.ndarray
    f: np.ndarray
    penalty: np.ndarray

    @property
    def M(self) -> int:
        return (self.B.shape[1] - 3) // 2


def penalty_weights(M: int) -> np.ndarray:
    """Diagonal of the H^2 penalty: ``1, 1, 2 pi``, then ``pi (1 + m^2)^2`` twice."""
    m = np.arange(1, M + 1)
    h2 = np.pi * (1.0 + m**2) ** 2
    return np.concatenate([[1.0, 1.0, 2 * np.pi], h2, h2])


def basis_functions(M: int, grid: ParamGrid) -> np.ndarray:
    """Columns ``chi`` for every unknown: constants for the shifts, then cos/sin modes."""
    t = grid.knots
    m = np.arange(M + 1)
    ones = np.ones((t.size, 2))
    return np.hstack([ones, np.cos(np.outer(t, m)), np.sin(np.outer(t, m[1:]))])


def assemble_design(kernels: FrechetKernels, residual, grid: ParamGrid, M: int) -> DesignMatrix:
    """Discretize ``B q`` column by column with the trapezoid rule.

    Row ``s`` of column ``chi`` is::

        2 (pi/n)^2 Re{ conj(sum_j' (M1 + M2)(t_s, tau_j')) * sum_j L_i(t_s, tau_j) chi(tau_j) }

    with ``L_1`` for ``dc1``, ``L_2`` for ``dc2`` and ``L_3`` for the radial modes.
    """
    h = grid.weight
    model = h * (kernels.M1 + kernels.M2).sum(axis=1)
    chi = basis_functions(M, grid)
    derivative = np.empty((grid.size, 2 * M + 3), dtype=complex)
    derivative[:, 0] = h * kernels.L1.sum(axis=1)
    derivative[:, 1] = h * kernels.L2.sum(axis=1)
    derivative[:, 2:] = h * kernels.L3 @ chi[:, 2:]
    B = 2.0 * np.real(np.conj(model)[:, None] * derivative)
    return DesignMatrix(B, np.asarray(residual, dtype=float), penalty_weights(M))


def regularization_parameter(previous_residual_norm: float) -> float:
    """Misfit-driven choice: the parameter equals the current intensity misfit norm."""
    if previous_residual_norm < 0:
        raise ValueError("residual norm must be nonnegative")
    return float(previous_residual_norm)


def frozen_indices(M: int) -> list[int]:
    """Positions of ``a_1`` and ``b_1`` in the update vector."""
    return [3, 3 + M]


def solve_update(design: DesignMatrix, lam: float, rho: float = 1.0, frozen=()) -> UpdateVector:
    """Solve ``(lam I + B^T B) xi = B^T f`` and return ``rho * xi``.

    Entries listed in ``frozen`` are removed from the system and returned as
    zero. ``lam`` is raised to ``1e-12 trace(B^T B) / (2M + 3)`` so the
    system stays positive definite once the misfit is tiny.
    """
    B, f, penalty = design.B, design.f, design.penalty
    active = np.setdiff1d(np.arange(B.shape[1]), np.asarray(frozen, dtype=int))
    Ba = B[:, active]
    BtB = Ba.T @ Ba
    floor = 1e-12 * np.sum(B**2) / B.shape[1]
    if lam < floor:
        lam = floor
    lhs = lam * np.diag(penalty[active]) + BtB
    rhs = Ba.T @ f
    try:
        sol = linalg.solve(lhs, rhs, assume_a="pos")
    except (linalg.LinAlgError, ValueError):
        warnings.warn("regularized normal matrix not positive definite; raising the floor",
                      RuntimeWarning, stacklevel=2)
        lhs = lhs + 1e-8 * np.sum(B**2) / B.shape[1] * np.diag(penalty[active])
        sol = linalg.lstsq(lhs, rhs)[0]
    xi = np.zeros(B.shape[1])
    xi[active] = rho * sol
    return UpdateVector.from_array(xi)


def apply_update(curve: StarCurve, xi: UpdateVector, freeze_first_modes=False,
                 exact_first_modes=None, grid: ParamGrid | None = None) -> StarCurve:
    """Return ``curve + q``, optionally pinning ``a_1`` and ``b_1``.

    Pinning is folded into the step: the pinned modes move to their supplied
    values together with the rest of the update. If the result has a
    nonpositive radius on ``grid`` the whole step is halved, at most
    ``MAX_HALVINGS`` times, before :class:`DegenerateCurveError` is raised.
    """
    grid = grid or ParamGrid(32)
    M = curve.M
    step_c = np.asarray(xi.dc, dtype=float)
    step = np.asarray(xi.dcoeffs, dtype=float).copy()
    if step.size != curve.coeffs.size:
        raise ValueError("update and curve use different truncations")
    if freeze_first_modes:
        if exact_first_modes is None:
            raise ValueError("freezing the first modes requires their exact values")
        a1, b1 = exact_first_modes
        step[1] = a1 - curve.coeffs[1]
        step[M + 1] = b1 - curve.coeffs[M + 1]
    for _ in range(MAX_HALVINGS + 1):
        candidate = StarCurve(curve.center + step_c, curve.coeffs + step)
        if np.all(candidate.radius(grid.knots) > 0):
            return candidate
        step_c = step_c / 2
        step = step / 2
    raise DegenerateCurveError(f"update keeps the radius nonpositive after {MAX_HALVINGS} halvings")
