"""Iterative reconstruction driver and the example configurations.

Each pass solves the field equations on the current boundary, measures the
relative intensity misfit, and then takes one damped, regularized Newton
step on the phaseless data equation. The reference ball stays fixed.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np

from refball.errors import ConditioningError, DegenerateCurveError, GeometryError
from refball.farfield import (
    farfield_from_densities,
    frechet_kernels,
    l2_norm,
    phaseless_residual,
    stopping_error,
)
from refball.field_system import assemble_field_system, solve_densities
from refball.forward import IncidentWave, PhaselessSamples, add_noise, synthesize_farfield
from refball.geometry import SHAPES, Disk, ParamGrid, StarCurve, boundary_error, fit_star_curve
from refball.newton import (
    apply_update,
    assemble_design,
    frozen_indices,
    regularization_parameter,
    solve_update,
)

logger = logging.getLogger(__name__)

CONVERGED = "converged"
BUDGET = "budget"
DEGENERATE = "degenerate"
ILL_CONDITIONED = "ill_conditioned"


@dataclass(frozen=True)
class SolverConfig:
    """Everything needed to synthesize data and run one reconstruction."""

    wavenumber: float = 2.0
    direction_angle: float = -np.pi / 6
    n: int = 32
    M: int = 5
    rho: float = 0.6
    epsilon: float = 0.015
    max_iterations: int = 200
    noise: float = 0.01
    seed: int = 0
    noise_distribution: str = "uniform"
    init_center: tuple = (-0.7, 0.45)
    init_radius: float = 0.1
    ball_center: tuple = (4.0, 0.0)
    ball_radius: float = 0.4
    freeze_modes: bool = True
    shape: str = "apple"
    shape_center: tuple = (0.0, 0.0)
    shape_radius: float = 1.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.M < 1 or self.n < 4:
            raise ValueError("need M >= 1 and n >= 4")
        if self.shape not in SHAPES and self.shape != "circle":
            raise ValueError(f"unknown shape {self.shape!r}")
        for name in ("init_center", "ball_center", "shape_center"):
            value = tuple(float(v) for v in getattr(self, name))
            if len(value) != 2:
                raise ValueError(f"{name} needs two components")
            object.__setattr__(self, name, value)

    @property
    def wave(self) -> IncidentWave:
        return IncidentWave.from_angle(self.wavenumber, self.direction_angle)

    @property
    def ball(self) -> Disk:
        return Disk(self.ball_center, self.ball_radius)

    @property
    def grid(self) -> ParamGrid:
        return ParamGrid(self.n)

    def initial_curve(self) -> StarCurve:
        return StarCurve.circle(self.init_center, self.init_radius, self.M)

    def exact_curve(self):
        """The true obstacle named by ``shape``, placed at ``shape_center``."""
        if self.shape == "circle":
            return StarCurve.circle(self.shape_center, self.shape_radius, 1)
        return SHAPES[self.shape](self.shape_center)

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True, eq=False)
class IterationRecord:
    k: int
    curve: StarCurve
    E: float
    Er: float
    lam: float
    update_norm: float
    condition: float = float("nan")
    step: np.ndarray | None = None


@dataclass
class RunHistory:
    records: list = field(default_factory=list)
    reason: str = BUDGET
    message: str = ""

    @property
    def final(self) -> IterationRecord:
        return self.records[-1]

    @property
    def iterations(self) -> int:
        return self.final.k

    @property
    def converged(self) -> bool:
        return self.reason == CONVERGED


def exact_first_modes(exact) -> tuple:
    """Cosine and sine first modes of ``exact`` expanded about its own center."""
    t = ParamGrid(256).knots
    fitted, _ = fit_star_curve(exact.point(t), 1, center=exact.center)
    return float(fitted.coeffs[1]), float(fitted.coeffs[2])


def reconstruct(config: SolverConfig, data: PhaselessSamples, exact=None,
                first_modes=None, callback=None) -> RunHistory:
    """Run the alternating density-solve / boundary-update iteration.

    Parameters
    ----------
    config : SolverConfig
    data : PhaselessSamples
        Intensities on the ``2n`` observation grid of ``config``.
    exact : StarShaped, optional
        True boundary; enables the boundary error ``Er_k`` and supplies the
        pinned first modes when ``config.freeze_modes`` is set.
    first_modes : (float, float), optional
        Explicit pinned values of ``a_1, b_1``; overrides ``exact``.
    callback : callable, optional
        Called with each :class:`IterationRecord` as it is produced.

    Returns
    -------
    RunHistory
        Failures (degenerate curve, ill-conditioned field system) end the run
        with the matching ``reason``; they are not raised.
    """
    grid = config.grid
    if len(data.intensities) != grid.size:
        raise ValueError(f"data has {len(data.intensities)} samples, grid expects {grid.size}")
    wave, ball, kappa = config.wave, config.ball, config.wavenumber
    if config.freeze_modes and first_modes is None:
        if exact is None:
            raise ValueError("freeze_modes needs the exact curve or explicit first modes")
        first_modes = exact_first_modes(exact)
    frozen = frozen_indices(config.M) if config.freeze_modes else ()

    curve = config.initial_curve()
    history = RunHistory()
    update_norm = 0.0
    step = None
    for k in range(config.max_iterations + 1):
        try:
            densities = solve_densities(assemble_field_system(curve, ball, wave, grid))
        except ConditioningError as exc:
            history.reason, history.message = ILL_CONDITIONED, str(exc)
            break
        except GeometryError as exc:
            history.reason, history.message = DEGENERATE, str(exc)
            break
        model = farfield_from_densities(curve, ball, densities, grid, kappa)
        f = phaseless_residual(model, data)
        E = stopping_error(model, data)
        lam = regularization_parameter(l2_norm(f, grid))
        Er = boundary_error(curve, exact, grid) if exact is not None else float("nan")
        record = IterationRecord(k, curve, E, Er, lam, update_norm,
                                 densities.condition, step)
        history.records.append(record)
        if callback is not None:
            callback(record)
        logger.debug("k=%d E=%.3e Er=%.3e lambda=%.3e", k, E, Er, lam)

        if k >= 1 and E < config.epsilon:
            history.reason = CONVERGED
            break
        if k == config.max_iterations:
            history.reason = BUDGET
            break

        kernels = frechet_kernels(curve, ball, densities, grid, kappa)
        design = assemble_design(kernels, f, grid, config.M)
        xi = solve_update(design, lam, config.rho, frozen=frozen)
        try:
            new_curve = apply_update(curve, xi, config.freeze_modes, first_modes, grid)
        except DegenerateCurveError as exc:
            history.reason, history.message = DEGENERATE, str(exc)
            break
        step = np.concatenate([new_curve.center - curve.center, new_curve.coeffs - curve.coeffs])
        update_norm = float(np.linalg.norm(step))
        curve = new_curve
    return history


PRESETS = {
    "apple": SolverConfig(),
    "peanut": SolverConfig(
        shape="peanut",
        direction_angle=2 * np.pi / 3,
        init_center=(0.3, -0.6),
        noise=0.05,
        epsilon=0.035,
    ),
    "rectangle": SolverConfig(
        shape="rectangle",
        direction_angle=np.pi / 6,
        init_center=(0.4, -0.8),
        ball_radius=0.5,
    ),
}


def synthesize_data(config: SolverConfig, exact=None):
    """Noisy phaseless data for ``config``; returns ``(clean far field, noisy intensities)``."""
    exact = config.exact_curve() if exact is None else exact
    clean = synthesize_farfield(exact, config.ball, config.wave, config.n)
    noisy = add_noise(clean.phaseless(), config.noise, config.seed, config.noise_distribution)
    return clean, noisy


def run_preset(name: str, **overrides):
    """Synthesize data for a named example and reconstruct it.

    Returns ``(history, config, data)``.
    """
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    config = PRESETS[name].replace(**overrides)
    exact = config.exact_curve()
    _, data = synthesize_data(config, exact)
    history = reconstruct(config, data, exact=exact)
    return history, config, data
