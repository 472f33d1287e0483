"""Self-contained numerical checks against independent oracles.

Each check returns a :class:`CheckResult` so the same code backs the test
suite and the ``oracle`` command.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from refball.farfield import farfield_derivative, farfield_operator, frechet_kernels
from refball.field_system import assemble_field_system, log_quadrature_weights, solve_densities
from refball.forward import IncidentWave, mie_farfield, synthesize_farfield
from refball.geometry import Disk, ParamGrid, StarCurve, apple


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<28s} value={self.value:.3e}  threshold={self.threshold:.1e}  {self.detail}"


def mie_error(radius=1.0, kappa=2.0, n=32, direction_angle=0.0, center=(0.0, 0.0)) -> float:
    """Sup-norm gap between the Nystrom synthesis and the series solution for a disk."""
    disk = Disk(center, radius)
    wave = IncidentWave.from_angle(kappa, direction_angle)
    nystrom = synthesize_farfield(disk.curve, None, wave, n)
    series = mie_farfield(disk, wave, nystrom.angles)
    return float(np.max(np.abs(nystrom.values - series.values)))


def check_mie(tol=1e-6) -> CheckResult:
    start = time.perf_counter()
    err = mie_error()
    return CheckResult("mie unit disk kappa=2 n=32", err, tol, err < tol,
                       seconds=time.perf_counter() - start)


def check_weights(ns=(4, 8, 16, 32, 64), tol=1e-12) -> CheckResult:
    """``sum_j R_j = 0`` and ``R`` integrates ``ln(4 sin^2(t/2)) cos(tau)`` to ``-2 pi cos t``."""
    start = time.perf_counter()
    worst = 0.0
    for n in ns:
        R = log_quadrature_weights(n)
        worst = max(worst, abs(R.sum()))
        t = ParamGrid(n).knots
        idx = np.arange(2 * n)
        W = R[np.abs(idx[:, None] - idx[None, :])]
        worst = max(worst, np.max(np.abs(W @ np.cos(t) + 2 * np.pi * np.cos(t))))
    return CheckResult(f"log weights n={list(ns)}", worst, tol, worst < tol,
                       seconds=time.perf_counter() - start)


def default_probe():
    """Smooth star curve, reference ball, wave and unit boundary direction for derivative checks."""
    kappa = 2.0
    grid = ParamGrid(32)
    curve = StarCurve((0.1, -0.2), [0.5, 0.1, 0.05, -0.03, 0.02, 0.04, -0.01])
    ball = Disk((4.0, 0.0), 0.4)
    wave = IncidentWave.from_angle(kappa, -np.pi / 6)
    direction = np.array([0.3, -0.2, 0.1, 0.05, -0.04, 0.02, 0.03, 0.01, -0.02])
    # unit length keeps the O(h^2) term above roundoff down to h = 1e-5
    return curve, ball, wave, grid, direction / np.linalg.norm(direction)


def derivative_fd_errors(steps=(1e-3, 1e-4, 1e-5)):
    """Errors of central differences of ``A_inf_1`` against the assembled derivative.

    The density on the obstacle is held fixed, so the operator is smooth in
    the boundary and the error should fall like ``h^2``.
    """
    curve, ball, wave, grid, direction = default_probe()
    kappa = wave.wavenumber
    dens = solve_densities(assemble_field_system(curve, ball, wave, grid))
    exact = farfield_derivative(frechet_kernels(curve, ball, dens, grid, kappa), direction, grid)

    def shifted(h):
        c = StarCurve(curve.center + h * direction[:2], curve.coeffs + h * direction[2:])
        return farfield_operator(c, dens.psi1, kappa, grid)

    errors = []
    for h in steps:
        fd = (shifted(h) - shifted(-h)) / (2 * h)
        errors.append(float(np.max(np.abs(fd - exact))))
    return np.asarray(steps), np.asarray(errors)


def convergence_order(steps, errors) -> float:
    """Least-squares slope of ``log error`` against ``log h``."""
    return float(np.polyfit(np.log(steps), np.log(errors), 1)[0])


def check_gradient(min_order=1.9) -> CheckResult:
    start = time.perf_counter()
    steps, errors = derivative_fd_errors()
    order = convergence_order(steps, errors)
    detail = " ".join(f"h={h:.0e}:{e:.2e}" for h, e in zip(steps, errors))
    return CheckResult("derivative FD order", order, min_order, order >= min_order, detail,
                       time.perf_counter() - start)


def translation_gap(shift=(0.5, -0.3), with_ball=False, kappa=2.0, n=32, direction_angle=-np.pi / 6):
    """Intensity gap and phase-relation error between the apple and its translate.

    Returns ``(max | |u_shift| - |u| |, max |u_shift - exp(i kappa h.(d - xhat)) u|)``.
    """
    wave = IncidentWave.from_angle(kappa, direction_angle)
    ball = Disk((4.0, 0.0), 0.4) if with_ball else None
    base = synthesize_farfield(apple(), ball, wave, n)
    moved = synthesize_farfield(apple(shift), ball, wave, n)
    t = base.angles
    xhat = np.stack([np.cos(t), np.sin(t)], axis=-1)
    phase = np.exp(1j * kappa * (wave.direction - xhat) @ np.asarray(shift))
    modulus_gap = float(np.max(np.abs(np.abs(moved.values) - np.abs(base.values))))
    phase_gap = float(np.max(np.abs(moved.values - phase * base.values)))
    return modulus_gap, phase_gap


SUITES = {
    "mie": [check_mie],
    "weights": [check_weights],
    "gradient": [check_gradient],
}


def run_suite(name: str) -> list[CheckResult]:
    if name == "all":
        return [c() for checks in SUITES.values() for c in checks]
    if name not in SUITES:
        raise KeyError(f"unknown oracle suite {name!r}; choose from {sorted(SUITES) + ['all']}")
    return [c() for c in SUITES[name]]
