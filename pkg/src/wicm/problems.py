"""Benchmark boundary value problems and the linear fourth-order family.

Each problem packages its residual, analytic partial derivatives, boundary
conditions and (when one exists) the exact solution with enough derivatives
for a registration-time self-check.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .assembly import (BoundaryCondition, FieldSpec, DiscretizedSystem,
                       assemble, assemble_2d, integral_operator_matrix)
from .solver import NewtonConfig, SolveReport, newton_solve

__all__ = [
    "BvpProblem",
    "Bvp2DProblem",
    "Solution",
    "linear_fourth_order",
    "fourth_order_condition_matrix",
    "bratu_1d",
    "bratu_theta",
    "fourth_order_geng",
    "five_point_bvp",
    "circular_plate",
    "plate_central_deflection",
    "bratu_2d",
    "estimate_convergence_rate",
    "solve_problem",
    "solve_problem_2d",
    "BRATU_LAMBDA_CRITICAL",
]

BRATU_LAMBDA_CRITICAL = 3.513830719125162  # fold point of the 1D problem


@dataclass(frozen=True)
class BvpProblem:
    """A (possibly coupled) 1D BVP in residual form.

    ``residual(x, Y)`` returns one residual vector per equation, where
    ``Y[f][i]`` holds nodal values of the i-th derivative of field f.
    ``partials(x, Y)`` maps (equation, field, derivative order) to the
    pointwise derivative of the residual w.r.t. that variable.
    ``exact[f][i]``, when present, evaluates the i-th derivative of field f's
    exact solution.
    """

    name: str
    fields: tuple[FieldSpec, ...]
    residual: Callable = field(repr=False)
    partials: Callable = field(repr=False)
    exact: tuple[tuple[Callable, ...], ...] | None = field(default=None,
                                                           repr=False)
    parameters: dict = field(default_factory=dict)
    row_override: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.exact is not None:
            self._self_check()

    def _self_check(self, npts: int = 100, tol: float = 1e-10):
        x = np.linspace(0.0, 1.0, npts)
        Y = [[np.asarray(fi(x), dtype=float) for fi in fs]
             for fs in self.exact]
        res = self.residual(x, Y)
        worst = max(float(np.abs(np.asarray(r)).max()) for r in res)
        if worst > tol:
            raise ValueError(
                f"{self.name}: exact solution violates residual by {worst:.3e}")
        for f, spec in enumerate(self.fields):
            for bc in spec.conditions:
                acc = -bc.value
                for (i, pt, w) in bc.terms:
                    acc += w * float(self.exact[f][i](np.asarray(pt)))
                if abs(acc) > tol:
                    raise ValueError(
                        f"{self.name}: exact solution violates a boundary "
                        f"condition by {abs(acc):.3e}")


@dataclass(frozen=True)
class Bvp2DProblem:
    """Second-order 2D problem u_xx + u_yy + g(u) = f on the unit square."""

    name: str
    source: Callable = field(repr=False)
    nonlinear: Callable = field(repr=False)
    nonlinear_deriv: Callable = field(repr=False)
    exact: Callable | None = field(default=None, repr=False)
    parameters: dict = field(default_factory=dict)


@dataclass
class Solution:
    """Converged nodal fields of one solve plus its error metrics."""

    problem: str
    level: int
    x: np.ndarray
    fields: list[list[np.ndarray]]  # fields[f][i] nodal values
    report: SolveReport
    max_abs_error: float | None = None
    error_at_probe: float | None = None
    probe: float | tuple[float, float] | None = None
    scalars: dict = None

    def __post_init__(self):
        if self.scalars is None:
            self.scalars = {}


# ---------------------------------------------------------------------------
# linear fourth-order family

def linear_fourth_order(alpha: Sequence[float], f: Callable,
                        a0: float, a1: float, b0: float, b1: float
                        ) -> BvpProblem:
    """sum_i alpha_i u^(i) = f(x) with u and u'' pinned at both ends."""
    alpha = [float(a) for a in alpha]
    if len(alpha) != 5:
        raise ValueError("alpha must have 5 entries")
    if alpha[4] == 0.0:
        raise ValueError("alpha_4 = 0 degenerates the order")
    spec = FieldSpec(order=4, conditions=(
        BoundaryCondition.dirichlet(0.0, a0),
        BoundaryCondition.dirichlet(1.0, a1),
        BoundaryCondition.derivative(2, 0.0, b0),
        BoundaryCondition.derivative(2, 1.0, b1),
    ))

    def residual(x, Y):
        return [sum(alpha[i] * Y[0][i] for i in range(5)) - f(x)]

    def partials(x, Y):
        ones = np.ones_like(x)
        return {(0, 0, i): alpha[i] * ones for i in range(5) if alpha[i]}

    return BvpProblem(name="linear4", fields=(spec,), residual=residual,
                      partials=partials,
                      parameters={"alpha": alpha, "a0": a0, "a1": a1,
                                  "b0": b0, "b1": b1})


def fourth_order_condition_matrix(alpha: Sequence[float], j: int) -> np.ndarray:
    """The published system matrix of the linear fourth-order analysis.

    Assembled verbatim from the reference formulation (including its
    particular boundary-elimination algebra) so condition-number diagnostics
    are comparable with the published tables.
    """
    alpha = [float(a) for a in alpha]
    if alpha[4] == 0.0:
        raise ValueError("alpha_4 = 0 degenerates the order")
    m = 2 ** j + 1
    x = np.arange(m) / 2 ** j
    ops = {i: integral_operator_matrix(j, i) for i in (1, 2, 3, 4)}
    beta = (alpha[2] + alpha[3] + alpha[4]) * x - alpha[4] * x ** 3
    A = alpha[4] * np.eye(m)
    for i in range(4):
        A = A + alpha[i] * ops[4 - i]
    A -= alpha[4] * np.outer(x ** 3, ops[4][-1])
    A -= np.outer(beta, ops[2][-1])
    return A


# ---------------------------------------------------------------------------
# Problem 1: Bratu equation

def bratu_theta(lam: float) -> float:
    """Lower-branch root of theta = sqrt(2 lam) cosh(theta / 4)."""
    if lam <= 0:
        raise ValueError("theta is defined for lam > 0")
    if lam > BRATU_LAMBDA_CRITICAL:
        raise ValueError(f"no solution branch beyond the fold at "
                         f"lam ~ {BRATU_LAMBDA_CRITICAL:.4f}")
    s = math.sqrt(2.0 * lam)

    def g(t):
        return t - s * math.cosh(t / 4.0)

    # g rises from -s to its maximum then falls; the lower root sits before
    # the maximum, located where sinh(t/4) = 4/s
    t_max = 4.0 * math.asinh(4.0 / s)
    if g(t_max) < 0:
        raise ValueError(f"no real branch for lam = {lam}")
    return brentq(g, 0.0, t_max, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _bratu_negative_k() -> float:
    # k sec(k/4) = sqrt(2) fixes the lam = -1 closed form
    return brentq(lambda k: k / math.cos(k / 4.0) - math.sqrt(2.0),
                  0.1, 2.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def bratu_1d(lam: float) -> BvpProblem:
    """u'' + lam e^u = 0, u(0) = u(1) = 0 (lower branch for lam > 0)."""
    spec = FieldSpec(order=2, conditions=(
        BoundaryCondition.dirichlet(0.0, 0.0),
        BoundaryCondition.dirichlet(1.0, 0.0),
    ))

    def residual(x, Y):
        return [Y[0][2] + lam * np.exp(Y[0][0])]

    def partials(x, Y):
        return {(0, 0, 2): np.ones_like(x), (0, 0, 0): lam * np.exp(Y[0][0])}

    exact = None
    if lam == 0.0:
        exact = ((lambda x: np.zeros_like(np.asarray(x, dtype=float)),) * 3,)
    elif 0.0 < lam <= BRATU_LAMBDA_CRITICAL:
        th = bratu_theta(lam)
        c = math.cosh(th / 4.0)

        def u0(x, th=th, c=c):
            return -2.0 * np.log(np.cosh(th * (np.asarray(x) / 2 - 0.25)) / c)

        def u1(x, th=th):
            return -th * np.tanh(th * (np.asarray(x) / 2 - 0.25))

        def u2(x, th=th):
            return -(th ** 2 / 2.0) / np.cosh(th * (np.asarray(x) / 2 - 0.25)) ** 2

        exact = ((u0, u1, u2),)
    elif lam == -1.0:
        k = _bratu_negative_k()

        def u0(x, k=k):
            return 2.0 * np.log(k / np.cos(k * (np.asarray(x) / 2 - 0.25))) \
                - math.log(2.0)

        def u1(x, k=k):
            return k * np.tan(k * (np.asarray(x) / 2 - 0.25))

        def u2(x, k=k):
            return (k ** 2 / 2.0) / np.cos(k * (np.asarray(x) / 2 - 0.25)) ** 2

        exact = ((u0, u1, u2),)

    return BvpProblem(name="bratu", fields=(spec,), residual=residual,
                      partials=partials, exact=exact,
                      parameters={"lambda": lam})


# ---------------------------------------------------------------------------
# Problem 2: nonlinear fourth-order equation (exact solution 1 + sinh x)

def fourth_order_geng() -> BvpProblem:
    """u'''' - e^x u'' + u + sin(u) = f with clamped-type data at both ends."""

    def f(x):
        return 1.0 + np.sin(1.0 + np.sinh(x)) - (np.exp(x) - 2.0) * np.sinh(x)

    spec = FieldSpec(order=4, conditions=(
        BoundaryCondition.dirichlet(0.0, 1.0),
        BoundaryCondition.derivative(1, 0.0, 1.0),
        BoundaryCondition.dirichlet(1.0, 1.0 + math.sinh(1.0)),
        BoundaryCondition.derivative(1, 1.0, math.cosh(1.0)),
    ))

    def residual(x, Y):
        u = Y[0][0]
        return [Y[0][4] - np.exp(x) * Y[0][2] + u + np.sin(u) - f(x)]

    def partials(x, Y):
        return {(0, 0, 4): np.ones_like(x),
                (0, 0, 2): -np.exp(x),
                (0, 0, 0): 1.0 + np.cos(Y[0][0])}

    exact = ((lambda x: 1.0 + np.sinh(x), np.cosh, np.sinh, np.cosh, np.sinh),)
    return BvpProblem(name="geng", fields=(spec,), residual=residual,
                      partials=partials, exact=exact)


# ---------------------------------------------------------------------------
# Problem 3: fourth-order five-point BVP

def five_point_bvp() -> BvpProblem:
    """u'''' = u'' / (1 + u) + q with four multipoint boundary conditions.

    The exact solution sin(theta x + pi/6) satisfies all five-point
    conditions for theta = 2 pi / 3.
    """
    th = 2.0 * math.pi / 3.0
    r3 = math.sqrt(3.0)

    def q(x):
        s = np.sin(th * np.asarray(x) + math.pi / 6.0)
        return th ** 4 * s + th ** 2 * s / (1.0 + s)

    spec = FieldSpec(order=4, conditions=(
        BoundaryCondition(terms=((0, 0.0, 1.0), (0, 0.5, -0.5)), value=0.0),
        BoundaryCondition(terms=((0, 1.0, 1.0), (0, 0.5, -0.25),
                                 (0, 0.75, -r3 / 6.0)), value=0.0),
        BoundaryCondition(terms=((2, 0.0, 1.0), (2, 0.25, -r3 / 3.0)), value=0.0),
        BoundaryCondition(terms=((2, 1.0, 1.0), (2, 0.25, -r3 / 12.0),
                                 (2, 0.75, -r3 / 4.0)), value=0.0),
    ))

    def residual(x, Y):
        return [Y[0][4] - Y[0][2] / (1.0 + Y[0][0]) - q(x)]

    def partials(x, Y):
        u, u2 = Y[0][0], Y[0][2]
        return {(0, 0, 4): np.ones_like(x),
                (0, 0, 2): -1.0 / (1.0 + u),
                (0, 0, 0): u2 / (1.0 + u) ** 2}

    def d(i):
        def fi(x, i=i):
            w = th * np.asarray(x) + math.pi / 6.0
            return th ** i * np.sin(w + i * math.pi / 2.0)
        return fi

    exact = (tuple(d(i) for i in range(5)),)
    return BvpProblem(name="five-point", fields=(spec,), residual=residual,
                      partials=partials, exact=exact)


# ---------------------------------------------------------------------------
# Problem 4: large deformation bending of a circular plate

class _PlateOverride:
    """L'Hopital replacement of the singular collocation rows at y = 0."""

    def __init__(self, system: DiscretizedSystem, Q: float):
        self.Q = Q
        # first-derivative-at-0 functionals of the two fields
        self.c_phi = system.const_c0[0][1]
        self.r_phi = system.const_C[0][1]
        self.c_S = system.const_c0[1][1]
        self.r_S = system.const_C[1][1]

    def _slopes(self, system, z):
        z_phi, z_S = system.split(z)
        dphi0 = self.c_phi + self.r_phi @ z_phi
        dS0 = self.c_S + self.r_S @ z_S
        return z_phi, z_S, float(dphi0), float(dS0)

    def apply_residual(self, system, z, Y, R):
        z_phi, z_S, dphi0, dS0 = self._slopes(system, z)
        m = system.n_nodes
        R[0] = z_phi[0] - dphi0 * dS0 - self.Q
        R[m] = z_S[0] + 0.5 * dphi0 ** 2
        return R

    def apply_jacobian(self, system, z, Y, J):
        z_phi, z_S, dphi0, dS0 = self._slopes(system, z)
        m = system.n_nodes
        J[0, :] = 0.0
        J[0, 0] = 1.0
        J[0, :m] -= dS0 * self.r_phi
        J[0, m:] = -dphi0 * self.r_S
        J[m, :] = 0.0
        J[m, :m] = dphi0 * self.r_phi
        J[m, m] = 1.0
        return J


def circular_plate(Q: float, lam: float = 0.0, mu: float | None = None,
                   nu: float = 0.3) -> BvpProblem:
    """Coupled deflection/axial-force equations of a circular plate.

    ``lam`` and ``mu`` encode the edge support (clamped: lam = 0,
    mu = 2 / (1 - nu)); Q is the normalized uniform load.
    """
    if mu is None:
        mu = 2.0 / (1.0 - nu)
    phi_spec = FieldSpec(order=2, conditions=(
        BoundaryCondition.dirichlet(0.0, 0.0),
        BoundaryCondition(terms=((0, 1.0, lam - 1.0), (1, 1.0, -lam)),
                          value=0.0),
    ))
    s_spec = FieldSpec(order=2, conditions=(
        BoundaryCondition.dirichlet(0.0, 0.0),
        BoundaryCondition(terms=((0, 1.0, mu - 1.0), (1, 1.0, -mu)),
                          value=0.0),
    ))

    def residual(x, Y):
        phi, phi2 = Y[0][0], Y[0][2]
        S, S2 = Y[1][0], Y[1][2]
        y2 = x ** 2
        return [y2 * phi2 - phi * S - y2 * Q,
                y2 * S2 + 0.5 * phi ** 2]

    def partials(x, Y):
        phi, S = Y[0][0], Y[1][0]
        y2 = x ** 2
        return {(0, 0, 2): y2, (0, 0, 0): -S, (0, 1, 0): -phi,
                (1, 1, 2): y2, (1, 0, 0): phi}

    exact = None
    if Q == 0.0:
        zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))
        exact = ((zero,) * 3, (zero,) * 3)

    return BvpProblem(name="plate", fields=(phi_spec, s_spec),
                      residual=residual, partials=partials, exact=exact,
                      parameters={"Q": Q, "lambda": lam, "mu": mu, "nu": nu},
                      row_override=lambda syst: _PlateOverride(syst, Q))


def plate_central_deflection(system: DiscretizedSystem,
                             z: np.ndarray) -> float:
    """W_m = -integral_0^1 phi(y)/y dy from converged unknowns.

    The y = 0 integrand value is the L'Hopital limit phi'(0), recovered from
    the eliminated constants.
    """
    Y = system.field_values(z)
    phi = Y[0][0]
    g = np.empty_like(phi)
    g[1:] = phi[1:] / system.x[1:]
    g[0] = float(system.initial_values(z)[0][1])
    row = integral_operator_matrix(system.level, 1)[-1]
    return -float(row @ g)


# ---------------------------------------------------------------------------
# Problem 5: two-dimensional Bratu-like equation

def bratu_2d(lam: float) -> Bvp2DProblem:
    """u_xx + u_yy + lam e^u = f with the manufactured sine-product solution."""

    def exact(x, y):
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    def source(x, y):
        s = exact(x, y)
        return lam * np.exp(s) - 2.0 * np.pi ** 2 * s

    return Bvp2DProblem(name="bratu2d", source=source,
                        nonlinear=lambda u: lam * np.exp(u),
                        nonlinear_deriv=lambda u: lam * np.exp(u),
                        exact=exact, parameters={"lambda": lam})


# ---------------------------------------------------------------------------
# pure approximation study: n-tuple integrals of sin(pi x)


def integral_sin_errors(j: int) -> np.ndarray:
    """Absolute errors at x = 1 of the wavelet n-tuple integrals of sin(pi x).

    Returns the four errors for n = 1..4. This is a pure approximation
    study: sin(pi x) is sampled at the collocation nodes and its iterated
    integrals are recovered with the modified integral operators, then
    compared with the closed forms at x = 1.
    """
    pi = np.pi
    x = np.linspace(0.0, 1.0, 2 ** j + 1)
    samples = np.sin(pi * x)
    exact = [2.0 / pi,
             1.0 / pi,
             0.5 / pi - 2.0 / pi ** 3,
             1.0 / (6.0 * pi) - 1.0 / pi ** 3]
    errs = np.empty(4)
    for n in range(1, 5):
        approx = integral_operator_matrix(j, n) @ samples
        errs[n - 1] = abs(approx[-1] - exact[n - 1])
    return errs


# ---------------------------------------------------------------------------
# convergence-rate estimation

def estimate_convergence_rate(errors: Sequence[float],
                              levels: Sequence[int]) -> float:
    """Least-squares slope of log2(error) against level, sign-flipped.

    Non-positive errors (machine floor) are excluded; at least two usable
    points must remain.
    """
    errors = np.asarray(errors, dtype=float)
    levels = np.asarray(levels, dtype=float)
    if len(errors) != len(levels) or len(errors) < 2:
        raise ValueError("need matching error/level sequences of length >= 2")
    if np.any(np.diff(levels) <= 0):
        raise ValueError("levels must be strictly increasing")
    usable = errors > 0.0
    if usable.sum() < 2:
        raise ValueError(
            "fewer than 2 usable points after excluding non-positive errors "
            "(machine-precision floor)")
    slope = np.polyfit(levels[usable], np.log2(errors[usable]), 1)[0]
    return float(-slope)


# ---------------------------------------------------------------------------
# solve drivers

def solve_problem(problem: BvpProblem, j: int,
                  cfg: NewtonConfig | None = None,
                  factory: Callable[[float], BvpProblem] | None = None,
                  probe: float | None = None) -> Solution:
    """Assemble and Newton-solve a 1D problem, collecting error metrics."""
    if cfg is not None and cfg.continuation is not None:
        if factory is None:
            raise ValueError("continuation requires a problem factory")
        z, report = newton_solve(None, cfg,
                                 factory=lambda v: assemble(factory(v), j))
        problem = factory(cfg.continuation[-1])
        system = assemble(problem, j)
    else:
        system = assemble(problem, j)
        z, report = newton_solve(system, cfg)
    Y = system.field_values(z)
    sol = Solution(problem=problem.name, level=j, x=system.x, fields=Y,
                   report=report)
    if problem.exact is not None:
        err = np.abs(Y[0][0] - problem.exact[0][0](system.x))
        sol.max_abs_error = float(err.max())
        if probe is not None:
            sol.error_at_probe = float(err[_probe_index(system.x, probe)])
            sol.probe = probe
    if problem.name == "plate" and report.converged:
        sol.scalars["W_m"] = plate_central_deflection(system, z)
        sol.scalars["phi_half"] = float(Y[0][0][len(system.x) // 2])
        sol.scalars["S_half"] = float(Y[1][0][len(system.x) // 2])
    return sol


def solve_problem_2d(problem: Bvp2DProblem, j: int,
                     cfg: NewtonConfig | None = None,
                     factory: Callable[[float], Bvp2DProblem] | None = None) -> Solution:
    """Assemble and Newton-solve a 2D problem on the unit square."""
    if cfg is not None and cfg.continuation is not None:
        if factory is None:
            raise ValueError("continuation requires a problem factory")
        z, report = newton_solve(None, cfg,
                                 factory=lambda v: assemble_2d(factory(v), j))
        problem = factory(cfg.continuation[-1])
        system = assemble_2d(problem, j)
    else:
        system = assemble_2d(problem, j)
        z, report = newton_solve(system, cfg)
    u = system.solution_values(z)
    sol = Solution(problem=problem.name, level=j, x=system.x,
                   fields=[[u]], report=report)
    if problem.exact is not None:
        X, Yg = np.meshgrid(system.x, system.x)
        err = np.abs(u - problem.exact(X, Yg))
        sol.max_abs_error = float(err.max())
        c = len(system.x) // 2
        sol.error_at_probe = float(err[c, c])
        sol.probe = (0.5, 0.5)
    return sol


def _probe_index(x: np.ndarray, probe: float) -> int:
    idx = int(np.argmin(np.abs(x - probe)))
    if abs(x[idx] - probe) > 1e-9:
        raise ValueError(f"probe {probe} is not a collocation node")
    return idx
