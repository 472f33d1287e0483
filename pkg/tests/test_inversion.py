import time

import numpy as np
import pytest

import refball.inversion as inv
from refball.errors import ConditioningError
from refball.forward import synthesize_farfield
from refball.geometry import StarCurve, apple
from refball.inversion import (
    BUDGET,
    CONVERGED,
    DEGENERATE,
    ILL_CONDITIONED,
    PRESETS,
    SolverConfig,
    exact_first_modes,
    reconstruct,
    run_preset,
    synthesize_data,
)


@pytest.fixture(scope="module")
def apple_run():
    start = time.perf_counter()
    history, config, data = run_preset("apple")
    return history, config, data, time.perf_counter() - start


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        SolverConfig(max_iterations=0)
    with pytest.raises(ValueError):
        SolverConfig(shape="teapot")
    with pytest.raises(ValueError):
        SolverConfig(init_center=(1.0, 2.0, 3.0))
    c = SolverConfig()
    assert c.replace(seed=4).seed == 4 and c.seed == 0
    assert c.to_dict()["ball_center"] == (4.0, 0.0)


def test_preset_parameters():
    apple_cfg = PRESETS["apple"]
    assert (apple_cfg.wavenumber, apple_cfg.rho, apple_cfg.M, apple_cfg.n) == (2.0, 0.6, 5, 32)
    assert apple_cfg.ball_center == (4.0, 0.0) and apple_cfg.ball_radius == 0.4
    assert apple_cfg.init_center == (-0.7, 0.45) and apple_cfg.init_radius == 0.1
    np.testing.assert_allclose(apple_cfg.wave.direction, [np.cos(-np.pi / 6), np.sin(-np.pi / 6)])
    rect = PRESETS["rectangle"]
    assert rect.ball_radius == 0.5 and rect.init_center == (0.4, -0.8)
    np.testing.assert_allclose(rect.wave.direction, [np.cos(np.pi / 6), np.sin(np.pi / 6)])
    init = apple_cfg.initial_curve()
    assert init.coeffs[0] == 0.1 and np.all(init.coeffs[1:] == 0)
    with pytest.raises(KeyError):
        run_preset("teapot")


def test_exact_first_modes():
    a1, b1 = exact_first_modes(apple())
    assert a1 == pytest.approx(0.1501, abs=1e-4)
    assert b1 == pytest.approx(-0.0299, abs=1e-4)


def test_fixed_point_converges_immediately():
    config = SolverConfig(noise=0.0)
    data = synthesize_farfield(config.initial_curve(), config.ball, config.wave, config.n).phaseless()
    history = reconstruct(config, data, first_modes=(0.0, 0.0))
    assert history.reason == CONVERGED
    assert history.iterations == 1
    assert history.records[1].E < 1e-8


def test_apple_preset(apple_run):
    history, config, _, seconds = apple_run
    assert history.converged and history.iterations <= 50
    assert seconds < 10
    assert history.final.E < config.epsilon
    assert history.final.Er < 0.10


def test_error_curves_trend_together(apple_run):
    history = apple_run[0]
    E = np.array([r.E for r in history.records])
    Er = np.array([r.Er for r in history.records])
    half = len(E) // 2
    agree = np.mean(np.sign(np.diff(E[half:])) == np.sign(np.diff(Er[half:])))
    assert agree >= 0.7
    assert E[-1] < E[0] / 10


def test_record_invariants(apple_run):
    history, config = apple_run[:2]
    for k, rec in enumerate(history.records):
        assert rec.k == k and rec.E >= 0 and rec.Er >= 0 and rec.lam >= 0
        assert rec.condition > 1
    assert history.records[0].step is None
    assert history.records[1].update_norm == pytest.approx(np.linalg.norm(history.records[1].step))
    # first modes are pinned from the first step on
    a1, b1 = exact_first_modes(apple())
    assert history.final.curve.coeffs[1] == a1 and history.final.curve.coeffs[1 + config.M] == b1


def test_determinism():
    a, _, _ = run_preset("apple", max_iterations=8)
    b, _, _ = run_preset("apple", max_iterations=8)
    for ra, rb in zip(a.records, b.records):
        assert ra.curve.coeffs.tobytes() == rb.curve.coeffs.tobytes()
        assert (ra.E, ra.Er, ra.lam) == (rb.E, rb.Er, rb.lam)


def test_rectangle_preset():
    history, _, _ = run_preset("rectangle")
    assert history.converged and history.iterations <= 50


def test_other_ball_still_converges():
    # a larger, more distant reference ball with the matching stopping level
    history, _, _ = run_preset("apple", ball_center=(6.0, 0.0), ball_radius=0.8,
                               init_center=(-0.4, -0.8), epsilon=0.011)
    assert history.converged


def test_budget_exhaustion_is_reported():
    history, config, _ = run_preset("apple", epsilon=1e-9, max_iterations=12)
    assert history.reason == BUDGET
    assert history.iterations == 12 and history.final.E >= config.epsilon


def test_ill_conditioning_is_reported(monkeypatch):
    def fail(system):
        raise ConditioningError("forced", 1e13)

    monkeypatch.setattr(inv, "solve_densities", fail)
    config = SolverConfig(max_iterations=3)
    _, data = synthesize_data(config)
    history = reconstruct(config, data, exact=apple())
    assert history.reason == ILL_CONDITIONED and history.records == []
    assert "forced" in history.message


def test_overlap_with_ball_is_reported_as_degenerate():
    config = SolverConfig(init_center=(4.0, 0.0), max_iterations=3)
    _, data = synthesize_data(config)
    history = reconstruct(config, data, exact=apple())
    assert history.reason == DEGENERATE


def test_freeze_modes_off_runs_without_exact_curve():
    config = SolverConfig(freeze_modes=False, max_iterations=5)
    _, data = synthesize_data(config)
    history = reconstruct(config, data)
    assert len(history.records) >= 2
    assert np.isnan(history.final.Er)
    with pytest.raises(ValueError):
        reconstruct(config.replace(freeze_modes=True), data)


def test_grid_mismatch():
    config = SolverConfig()
    _, data = synthesize_data(config.replace(n=16))
    with pytest.raises(ValueError):
        reconstruct(config, data, exact=apple())


def test_circle_shape():
    config = SolverConfig(shape="circle", shape_center=(0.2, 0.1), shape_radius=0.5)
    curve = config.exact_curve()
    assert isinstance(curve, StarCurve) and curve.coeffs[0] == 0.5


def test_callback_sees_every_record():
    seen = []
    config = SolverConfig(max_iterations=4)
    _, data = synthesize_data(config)
    history = reconstruct(config, data, exact=apple(), callback=seen.append)
    assert seen == history.records
