"""Benchmark problems: exact-solution accuracy and derived quantities."""

import numpy as np
import pytest

from wicm.problems import (BRATU_LAMBDA_CRITICAL, bratu_1d, bratu_2d,
                           bratu_theta, circular_plate,
                           estimate_convergence_rate, five_point_bvp,
                           fourth_order_geng, integral_sin_errors,
                           solve_problem, solve_problem_2d)
from wicm.solver import NewtonConfig


def test_bratu_theta_transcendental_identity():
    for lam in (0.5, 1.0, 2.0, 3.0):
        theta = bratu_theta(lam)
        assert theta == pytest.approx(
            np.sqrt(2.0 * lam) * np.cosh(theta / 4.0), rel=1e-12)


def test_bratu_theta_rejects_supercritical():
    with pytest.raises(ValueError):
        bratu_theta(BRATU_LAMBDA_CRITICAL + 0.1)


def test_bratu_solve_level4():
    sol = solve_problem(bratu_1d(1.0), 4, probe=0.5)
    assert sol.report.converged
    assert sol.max_abs_error < 1e-10
    assert sol.error_at_probe < 1e-11


def test_bratu_near_critical_with_continuation():
    lam = 3.5
    cfg = NewtonConfig(continuation=[1.0, 2.0, 3.0, 3.25, 3.5])
    sol = solve_problem(bratu_1d(lam), 6, cfg=cfg, factory=bratu_1d)
    assert sol.report.converged
    assert sol.max_abs_error < 1e-9


def test_geng_solve_level4():
    sol = solve_problem(fourth_order_geng(), 4)
    assert sol.report.converged
    assert sol.max_abs_error < 1e-13


def test_five_point_solve_level4():
    sol = solve_problem(five_point_bvp(), 4)
    assert sol.report.converged
    assert sol.max_abs_error < 5e-9


def test_five_point_recovered_fields_satisfy_ode():
    sol = solve_problem(five_point_bvp(), 4)
    problem = five_point_bvp()
    x = sol.x
    y = sol.fields[0]
    residual = problem.residual(x, sol.fields)
    assert np.abs(residual).max() < 1e-10


def test_plate_zero_load_is_zero():
    sol = solve_problem(circular_plate(0.0), 4)
    assert sol.report.converged
    for field in sol.fields:
        for values in field:
            assert np.abs(values).max() == 0.0


def test_plate_deflection_monotone_in_load():
    values = []
    for q in (10.0, 30.0, 50.0):
        cfg = None
        factory = None
        if q > 10.0:
            stages = [10.0] + [v for v in (30.0, 50.0) if v <= q]
            cfg = NewtonConfig(continuation=stages)
            factory = circular_plate
        sol = solve_problem(circular_plate(q), 5, cfg=cfg, factory=factory)
        assert sol.report.converged
        values.append(sol.scalars["W_m"])
    assert values[0] < values[1] < values[2]


def test_plate_deflection_level_consistency():
    w = []
    for j in (4, 5):
        sol = solve_problem(circular_plate(10.0), j)
        assert sol.report.converged
        w.append(sol.scalars["W_m"])
    assert w[0] == pytest.approx(w[1], rel=1e-6)


def test_plate_fields_are_smooth():
    sol = solve_problem(circular_plate(10.0), 5)
    h = sol.x[1] - sol.x[0]
    for field in sol.fields:
        second = np.diff(field[0], 2) / h ** 2
        assert np.abs(second).max() < 1e3


def test_bratu_2d_level4():
    sol = solve_problem_2d(bratu_2d(1.0), 4)
    assert sol.report.converged
    assert sol.max_abs_error < 1e-7


def test_bratu_2d_strong_nonlinearity_needs_continuation():
    cfg = NewtonConfig(continuation=[1.0, 4.0, 7.0, 10.0])
    sol = solve_problem_2d(bratu_2d(10.0), 4, cfg=cfg, factory=bratu_2d)
    assert sol.report.converged
    assert sol.max_abs_error < 1e-6


def test_poisson_limit_2d():
    sol = solve_problem_2d(bratu_2d(0.0), 4)
    assert sol.report.converged
    assert sol.max_abs_error < 1e-7


def test_estimate_convergence_rate():
    levels = [4, 5, 6]
    errors = [2.0 ** (-7 * j) for j in levels]
    assert estimate_convergence_rate(errors, levels) == pytest.approx(7.0)


def test_estimate_convergence_rate_excludes_zeros():
    with pytest.raises(ValueError):
        estimate_convergence_rate([1e-10, 0.0, 0.0], [4, 5, 6])
    with pytest.raises(ValueError):
        estimate_convergence_rate([1e-3], [4])


def test_integral_sin_errors_magnitude_and_decay():
    e4 = integral_sin_errors(4)
    e5 = integral_sin_errors(5)
    assert e4.shape == (4,)
    assert e4.max() < 1e-7
    assert np.all(e5 < e4)
