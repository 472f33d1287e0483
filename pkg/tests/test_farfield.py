import numpy as np
import pytest

from refball.checks import check_gradient, convergence_order, derivative_fd_errors
from refball.farfield import (
    exponential_table,
    farfield_derivative,
    farfield_from_densities,
    farfield_operator,
    frechet_kernels,
    l2_norm,
    phaseless_residual,
    stopping_error,
)
from refball.field_system import DensityPair, assemble_field_system, solve_densities
from refball.forward import FarFieldSamples, IncidentWave, PhaselessSamples, farfield_constant
from refball.geometry import Disk, ParamGrid, StarCurve, apple
from refball.inversion import SolverConfig, reconstruct, synthesize_data

GRID = ParamGrid(32)
BALL = Disk((4, 0), 0.4)
WAVE = IncidentWave.from_angle(2.0, -np.pi / 6)
CURVE = StarCurve((0.1, -0.2), [0.5, 0.1, 0.05, -0.03, 0.02, 0.04, -0.01])


@pytest.fixture(scope="module")
def densities():
    return solve_densities(assemble_field_system(CURVE, BALL, WAVE, GRID))


def test_gamma():
    assert farfield_constant(2.0) == pytest.approx(0.09974 + 0.09974j, abs=1e-5)


def test_zero_densities_give_zero():
    zero = DensityPair(np.zeros(64, complex), np.zeros(64, complex))
    u = farfield_from_densities(CURVE, BALL, zero, GRID, 2.0)
    assert np.all(u.values == 0)
    assert np.all(frechet_kernels(CURVE, BALL, zero, GRID, 2.0).L3 == 0)


def test_operator_is_trapezoid_sum(densities):
    t = GRID.knots
    x = CURVE.point(t)
    gamma = farfield_constant(2.0)
    s = 5
    direct = -gamma * np.pi / 32 * sum(
        np.exp(-2j * (np.cos(t[s]) * x[j, 0] + np.sin(t[s]) * x[j, 1])) * densities.psi1[j] for j in range(64)
    )
    assert farfield_operator(CURVE, densities.psi1, 2.0, GRID)[s] == pytest.approx(direct, abs=1e-14)
    assert exponential_table(CURVE, 2.0, GRID).shape == (64, 64)


def test_kernel_identity(densities):
    k = frechet_kernels(CURVE, BALL, densities, GRID, 2.0)
    tau = GRID.knots[None, :]
    assert np.max(np.abs(k.L1 * np.cos(tau) + k.L2 * np.sin(tau) - k.L3)) < 1e-14
    model = farfield_from_densities(CURVE, BALL, densities, GRID, 2.0).values
    np.testing.assert_allclose(GRID.weight * (k.M1 + k.M2).sum(axis=1), model, atol=1e-14)


def test_directional_derivative_random_update(densities):
    rng = np.random.default_rng(9)
    q = rng.normal(0, 0.1, 9)
    k = frechet_kernels(CURVE, BALL, densities, GRID, 2.0)
    h = 1e-5

    def moved(s):
        c = StarCurve(CURVE.center + s * q[:2], CURVE.coeffs + s * q[2:])
        return farfield_operator(c, densities.psi1, 2.0, GRID)

    fd = (moved(h) - moved(-h)) / (2 * h)
    assert np.max(np.abs(fd - farfield_derivative(k, q, GRID))) < 1e-7


def test_derivative_second_order():
    steps, errors = derivative_fd_errors()
    assert convergence_order(steps, errors) >= 1.9
    assert check_gradient().passed


def test_residual_and_stopping_error():
    t = GRID.knots
    model = FarFieldSamples(t, np.exp(1j * t) * (1 + 0.3 * np.cos(t)))
    exact = model.phaseless()
    assert np.all(phaseless_residual(model, exact) == 0)
    assert stopping_error(model, exact) == 0
    scaled = PhaselessSamples(t, exact.intensities * 1.05)
    np.testing.assert_allclose(phaseless_residual(model, scaled), 0.05 * exact.intensities, rtol=1e-12)
    assert stopping_error(FarFieldSamples(t, np.zeros(64, complex)), exact) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        phaseless_residual(FarFieldSamples(t[:10], model.values[:10]), exact)
    with pytest.raises(ValueError):
        stopping_error(model, PhaselessSamples(t, np.zeros(64)))


def test_l2_norm_weight():
    assert l2_norm(np.ones(64), GRID) == pytest.approx(np.sqrt(2 * np.pi))


def test_first_regularization_parameter_is_misfit_norm():
    config = SolverConfig(max_iterations=1)
    _, data = synthesize_data(config)
    history = reconstruct(config, data, exact=apple())
    first = history.records[0]
    dens = solve_densities(assemble_field_system(first.curve, config.ball, config.wave, config.grid))
    model = farfield_from_densities(first.curve, config.ball, dens, config.grid, 2.0)
    f = phaseless_residual(model, data)
    assert np.linalg.norm(f) > 0
    assert first.lam == pytest.approx(l2_norm(f, config.grid), rel=1e-14)


def test_joint_translation_keeps_intensity():
    h = np.array([0.7, -0.4])
    moved_curve = CURVE.translated(h)
    moved_ball = Disk(BALL.center + h, BALL.radius)
    a = solve_densities(assemble_field_system(CURVE, BALL, WAVE, GRID))
    b = solve_densities(assemble_field_system(moved_curve, moved_ball, WAVE, GRID))
    ua = farfield_from_densities(CURVE, BALL, a, GRID, 2.0).values
    ub = farfield_from_densities(moved_curve, moved_ball, b, GRID, 2.0).values
    assert np.max(np.abs(np.abs(ua) - np.abs(ub))) < 1e-7
