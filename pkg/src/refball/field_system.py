"""Nystrom discretization of the coupled single-layer field equations.

On the obstacle boundary ``Gamma_1`` and the reference circle ``Gamma_2`` the
total field vanishes, which gives for the densities ``psi_j = G_j g_j``::

    A_11 psi_1 + A_21 psi_2 = w_1   on Gamma_1
    A_12 psi_1 + A_22 psi_2 = w_2   on Gamma_2

where ``A_jl`` integrates ``(i/4) H_0(kappa |p_l(t) - p_j(tau)|)`` against
``psi_j``. Self blocks split the kernel into ``K1 ln(4 sin^2((t-tau)/2)) + K2``
and integrate the logarithmic part with the weights ``R_j``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from refball.errors import ConditioningError, GeometryError
from refball.geometry import Disk, ParamGrid, check_disjoint
from refball.specfun import EULER_GAMMA, bessel_j0, hankel1_0

MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class DensityPair:
    """Samples ``psi_1(tau_j)`` on the obstacle and ``psi_2(tau_j)`` on the ball."""

    psi1: np.ndarray
    psi2: np.ndarray
    condition: float = float("nan")

    def __post_init__(self):
        if np.shape(self.psi1) != np.shape(self.psi2):
            raise ValueError("density samples must share one grid")


@dataclass(frozen=True, eq=False)
class FieldSystemMatrix:
    A11: np.ndarray
    A21: np.ndarray
    A12: np.ndarray
    A22: np.ndarray
    rhs: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.A11, self.A21], [self.A12, self.A22]])

    def dump(self, path):
        """Write the four blocks as a raw little-endian dump.

        Layout: ``b"FSYS"``, then ``uint32`` block count and per block
        ``uint32 rows, uint32 cols`` followed by ``rows * cols`` complex
        entries stored row-major as ``float64`` (re, im) pairs. The right-hand
        side follows as a final ``(4n, 1)`` block.
        """
        blocks = [self.A11, self.A21, self.A12, self.A22, self.rhs.reshape(-1, 1)]
        with open(path, "wb") as fh:
            fh.write(b"FSYS")
            fh.write(struct.pack("<I", len(blocks)))
            for b in blocks:
                b = np.ascontiguousarray(b, dtype="<c16")
                fh.write(struct.pack("<II", *b.shape))
                fh.write(b.tobytes(order="C"))

    @staticmethod
    def load(path) -> "FieldSystemMatrix":
        with open(path, "rb") as fh:
            if fh.read(4) != b"FSYS":
                raise ValueError("not a field-system dump")
            (count,) = struct.unpack("<I", fh.read(4))
            blocks = []
            for _ in range(count):
                rows, cols = struct.unpack("<II", fh.read(8))
                data = np.frombuffer(fh.read(16 * rows * cols), dtype="<c16")
                blocks.append(data.reshape(rows, cols).astype(complex))
        return FieldSystemMatrix(*blocks[:4], blocks[4].ravel())


def log_quadrature_weights(n: int) -> np.ndarray:
    """Weights ``R_j``, ``j = 0 .. 2n-1``, for ``int ln(4 sin^2((t-tau)/2)) f(tau) dtau``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    j = np.arange(2 * n)
    m = np.arange(1, n)
    cos_sum = np.cos(np.outer(j, m) * np.pi / n) @ (1.0 / m) if n > 1 else np.zeros(2 * n)
    return -2 * np.pi / n * cos_sum - (-1.0) ** j * np.pi / n**2


def weight_matrix(n: int) -> np.ndarray:
    """``R_{|s-j|}`` as a ``2n x 2n`` matrix."""
    R = log_quadrature_weights(n)
    idx = np.arange(2 * n)
    return R[np.abs(idx[:, None] - idx[None, :])]


def kernel_split(points, jacobian, kappa, t):
    """Smooth factors ``K1`` and ``K2`` of the self kernel on one curve.

    Parameters
    ----------
    points : ndarray, shape (N, 2)
        Curve points ``p_l(t_s)``.
    jacobian : ndarray, shape (N,)
        ``G_l(t_s)``, used on the diagonal only.
    kappa : float
    t : ndarray, shape (N,)
        Parameter values of ``points``.

    Returns
    -------
    K1 : ndarray, real, shape (N, N)
    K2 : ndarray, complex, shape (N, N)
    """
    diff = points[:, None, :] - points[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    off = ~np.eye(len(t), dtype=bool)
    if np.any(dist[off] == 0.0):
        raise GeometryError("distinct parameters map to coincident boundary points")
    K1 = -bessel_j0(kappa * dist) / (4 * np.pi)
    safe = np.where(off, dist, 1.0)
    logterm = np.log(4 * np.sin((t[:, None] - t[None, :]) / 2) ** 2 + ~off)
    K2 = 0.25j * hankel1_0(kappa * safe) - K1 * logterm
    K2[~off] = 0.25j - EULER_GAMMA / (2 * np.pi) - np.log(kappa * jacobian / 2) / (2 * np.pi)
    return K1, K2


def _self_block(curve, kappa, grid: ParamGrid):
    t = grid.knots
    K1, K2 = kernel_split(curve.point(t), curve.jacobian(t), kappa, t)
    return weight_matrix(grid.n) * K1 + grid.weight * K2


def _cross_block(obs_points, src_points, kappa, grid: ParamGrid):
    diff = obs_points[:, None, :] - src_points[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    if np.any(dist == 0.0):
        raise GeometryError("scatterer components touch")
    return grid.weight * 0.25j * hankel1_0(kappa * dist)


def assemble_field_system(obstacle, ball: Disk, wave, grid: ParamGrid) -> FieldSystemMatrix:
    """Assemble the ``4n x 4n`` Nystrom system for the current obstacle iterate."""
    check_disjoint(obstacle, ball, grid=grid)
    kappa = wave.wavenumber
    t = grid.knots
    p1 = obstacle.point(t)
    p2 = ball.curve.point(t)
    A11 = _self_block(obstacle, kappa, grid)
    A22 = _self_block(ball.curve, kappa, grid)
    A21 = _cross_block(p1, p2, kappa, grid)
    A12 = _cross_block(p2, p1, kappa, grid)
    rhs = np.concatenate([wave(p1), wave(p2)])
    return FieldSystemMatrix(A11, A21, A12, A22, rhs)


def solve_densities(system: FieldSystemMatrix, max_condition=MAX_CONDITION) -> DensityPair:
    """Dense direct solve; raises :class:`ConditioningError` near interior resonances."""
    A = system.matrix
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > max_condition:
        raise ConditioningError(
            f"field system is near-singular (cond={cond:.3g}); kappa^2 may be close to an "
            "interior Dirichlet eigenvalue of one component",
            cond,
        )
    psi = np.linalg.solve(A, system.rhs)
    residual = np.max(np.abs(A @ psi - system.rhs)) / np.max(np.abs(system.rhs))
    if residual > 1e-10:
        raise ConditioningError(f"field system residual {residual:.3g} exceeds 1e-10", cond)
    half = system.A11.shape[0]
    return DensityPair(psi[:half], psi[half:], float(cond))
