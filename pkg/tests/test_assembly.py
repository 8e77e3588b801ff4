"""Boundary-value elimination and system assembly."""

import math

import numpy as np
import pytest

from wicm.assembly import (BoundaryCondition, EliminationError, FieldSpec,
                           assemble, assemble_2d, integral_operator_matrix,
                           recover_lower_derivatives, reduce_to_integral_form)
from wicm.problems import bratu_1d, bratu_2d, five_point_bvp, fourth_order_geng


def _poly_spec(order, coeffs, conditions):
    return FieldSpec(order=order, conditions=tuple(conditions))


def test_elimination_exact_on_polynomial():
    # order-4 problem, y a degree-5 polynomial so y_4 is represented exactly
    c = np.array([1.0, -0.5, 2.0, 0.3, -1.2, 0.7])

    def y(x, d=0):
        return sum(c[p] * math.factorial(p) / math.factorial(p - d)
                   * x ** (p - d) for p in range(d, 6))

    j = 4
    x = np.linspace(0.0, 1.0, 2 ** j + 1)
    spec = FieldSpec(order=4, conditions=(
        BoundaryCondition.dirichlet(0.0, y(0.0)),
        BoundaryCondition.derivative(1, 0.0, y(0.0, 1)),
        BoundaryCondition.dirichlet(1.0, y(1.0)),
        BoundaryCondition.derivative(1, 1.0, y(1.0, 1)),
    ))
    c0, C = reduce_to_integral_form(spec, j)
    y4 = np.array([y(v, 4) for v in x])
    got = c0 + C @ y4
    expected = np.array([y(0.0, d) for d in range(4)])
    # the recovered initial values inherit the filter-precision floor
    assert np.abs(got - expected).max() < 1e-9


def test_elimination_satisfies_conditions_exactly():
    # for arbitrary nodal data the eliminated constants make every boundary
    # condition hold to rounding accuracy
    from wicm.assembly import _node_index
    from wicm.coiflet import _factorial

    j = 4
    spec = FieldSpec(order=4, conditions=(
        BoundaryCondition.dirichlet(0.0, 0.7),
        BoundaryCondition.derivative(1, 0.0, -0.2),
        BoundaryCondition.dirichlet(1.0, 1.3),
        BoundaryCondition.derivative(1, 1.0, 0.4),
    ))
    c0, C = reduce_to_integral_form(spec, j)
    rng = np.random.default_rng(3)

    def field(yn, c, i, xs):
        l = _node_index(xs, j)
        val = (integral_operator_matrix(j, 4 - i) @ yn)[l]
        for q in range(i, 4):
            val += c[q] * xs ** (q - i) / _factorial(q - i)
        return val

    for _ in range(5):
        yn = rng.standard_normal(2 ** j + 1)
        c = c0 + C @ yn
        residuals = [field(yn, c, 0, 0.0) - 0.7,
                     field(yn, c, 1, 0.0) + 0.2,
                     field(yn, c, 0, 1.0) - 1.3,
                     field(yn, c, 1, 1.0) - 0.4]
        assert np.abs(residuals).max() < 1e-11


def test_elimination_rejects_dependent_conditions():
    spec = FieldSpec(order=2, conditions=(
        BoundaryCondition.dirichlet(0.0, 0.0),
        BoundaryCondition.dirichlet(0.0, 0.0),
    ))
    with pytest.raises(EliminationError):
        reduce_to_integral_form(spec, 4)


def test_condition_point_must_be_a_node():
    spec = FieldSpec(order=2, conditions=(
        BoundaryCondition.dirichlet(0.0, 0.0),
        BoundaryCondition.dirichlet(0.3, 0.0),
    ))
    with pytest.raises(EliminationError):
        reduce_to_integral_form(spec, 4)


def test_multipoint_functional_condition():
    # a weighted two-point condition is eliminated exactly on a polynomial
    def y(x, d=0):
        c = [0.0, 1.0, 0.0, -1.0 / 6.0]
        return sum(c[p] * math.factorial(p) / math.factorial(p - d)
                   * x ** (p - d) for p in range(d, 4))

    j = 4
    value = 2.0 * y(0.25) - y(0.75)
    spec = FieldSpec(order=2, conditions=(
        BoundaryCondition.dirichlet(0.0, y(0.0)),
        BoundaryCondition(terms=((0, 0.25, 2.0), (0, 0.75, -1.0)),
                          value=value),
    ))
    c0, C = reduce_to_integral_form(spec, j)
    x = np.linspace(0.0, 1.0, 2 ** j + 1)
    y2 = np.array([y(v, 2) for v in x])
    got = c0 + C @ y2
    assert got == pytest.approx([y(0.0), y(0.0, 1)], abs=1e-11)


@pytest.mark.parametrize("problem", [bratu_1d(1.0), fourth_order_geng(),
                                     five_point_bvp()])
def test_jacobian_matches_finite_differences(problem):
    j = 4
    system = assemble(problem, j)
    rng = np.random.default_rng(7)
    z = 0.1 * rng.standard_normal(system.size)
    J = system.jacobian(z)
    h = 1e-7
    for col in range(0, system.size, 5):
        e = np.zeros(system.size)
        e[col] = h
        fd = (system.residual(z + e) - system.residual(z - e)) / (2 * h)
        scale = max(1.0, np.abs(J[:, col]).max())
        assert np.abs(fd - J[:, col]).max() / scale < 1e-6, f"column {col}"


def test_residual_vanishes_at_exact_solution_2d():
    problem = bratu_2d(1.0)
    j = 4
    system = assemble_2d(problem, j)
    x = system.x
    X, Y = np.meshgrid(x, x)
    exact = problem.exact(X, Y)
    pi2 = np.pi ** 2
    u2 = -pi2 * exact  # d2u/dx2 for sin(pi x) sin(pi y)
    v2 = -pi2 * exact
    z = np.concatenate([u2.ravel(), v2.ravel()])
    r = system.residual(z)
    # discretization error only: the exact fields nearly annihilate the
    # residual at j = 4
    assert np.abs(r).max() < 1e-7


def test_recover_lower_derivatives_geng():
    problem = fourth_order_geng()
    j = 4
    system = assemble(problem, j)
    x = system.x
    y4 = np.sinh(x)  # exact fourth derivative of 1 + sinh
    fields = recover_lower_derivatives(system, np.copy(y4))
    exact = [1.0 + np.sinh(x), np.cosh(x), np.sinh(x), np.cosh(x), y4]
    for i in range(4):
        assert np.abs(fields[0][i] - exact[i]).max() < 1e-9, f"order {i}"


def test_integral_operator_rows_are_cached():
    a = integral_operator_matrix(4, 2)
    b = integral_operator_matrix(4, 2)
    assert a is b or np.array_equal(a, b)
