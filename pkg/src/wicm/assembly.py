"""Discretization of integral-reformulated BVPs into nonlinear systems.

An order-n problem is solved for the nodal samples of its highest derivative
y_n; every lower derivative is an iterated-integral operator applied to y_n
plus an initial-value polynomial.  Unknown initial values y_i(0) are
eliminated by evaluating those integral identities at the boundary-condition
points and solving the resulting small linear system, so each y_i becomes an
affine function of the nodal y_n vector.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .coiflet import ScalingTables, build_tables, _factorial
from .extension import (ExtensionSystem, build_extension_system,
                        build_integral_operator, min_level)

__all__ = [
    "BoundaryCondition",
    "FieldSpec",
    "DiscretizedSystem",
    "EliminationError",
    "assemble",
    "assemble_2d",
    "recover_lower_derivatives",
    "reduce_to_integral_form",
    "default_tables",
    "default_extension",
    "integral_operator_matrix",
]


class EliminationError(ValueError):
    pass


@lru_cache(maxsize=1)
def default_tables() -> ScalingTables:
    return build_tables()


@lru_cache(maxsize=1)
def default_extension() -> ExtensionSystem:
    return build_extension_system(default_tables())


@lru_cache(maxsize=64)
def integral_operator_matrix(j: int, i: int) -> np.ndarray:
    """Cached dense i-tuple integral operator at level j (read-only)."""
    m = build_integral_operator(default_tables(), default_extension(), j, i).entries
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class BoundaryCondition:
    """A linear functional sum_t w_t * y^(i_t)(x_t) = value.

    ``terms`` holds (derivative order, point, weight) triples; points must be
    dyadic collocation nodes at the assembly level.
    """

    terms: tuple[tuple[int, float, float], ...]
    value: float = 0.0

    @staticmethod
    def dirichlet(point: float, value: float) -> "BoundaryCondition":
        return BoundaryCondition(terms=((0, point, 1.0),), value=value)

    @staticmethod
    def derivative(order: int, point: float, value: float) -> "BoundaryCondition":
        return BoundaryCondition(terms=((order, point, 1.0),), value=value)


@dataclass(frozen=True)
class FieldSpec:
    """One unknown field: its derivative order and boundary conditions."""

    order: int
    conditions: tuple[BoundaryCondition, ...]

    def __post_init__(self):
        if len(self.conditions) != self.order:
            raise EliminationError(
                f"field of order {self.order} needs exactly {self.order} "
                f"boundary conditions, got {len(self.conditions)}")


def _node_index(x: float, j: int) -> int:
    l = x * 2 ** j
    li = int(round(l))
    if abs(l - li) > 1e-9 or not 0 <= li <= 2 ** j:
        raise EliminationError(
            f"condition point {x} is not a collocation node at level {j}")
    return li


def reduce_to_integral_form(spec: FieldSpec, j: int
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Express the initial values y_i(0) as affine functionals of nodal y_n.

    Returns (c0, C) with c = c0 + C @ y_n, where c stacks y_0(0)..y_{n-1}(0).
    Raises EliminationError when the conditions are not independent.
    """
    n = spec.order
    m = 2 ** j + 1
    E = np.zeros((n, n))
    G = np.zeros((n, m))
    v = np.zeros(n)
    for r, bc in enumerate(spec.conditions):
        v[r] = bc.value
        for (i, x, w) in bc.terms:
            if not 0 <= i < n:
                raise EliminationError(
                    f"condition references derivative order {i} outside "
                    f"[0, {n - 1}]")
            l = _node_index(x, j)
            G[r] += w * integral_operator_matrix(j, n - i)[l]
            for q in range(i, n):
                E[r, q] += w * x ** (q - i) / _factorial(q - i)
    try:
        Einv = np.linalg.inv(E)
    except np.linalg.LinAlgError:
        rank = np.linalg.matrix_rank(E)
        raise EliminationError(
            f"boundary conditions not independent: elimination matrix has "
            f"rank {rank} < {n}") from None
    return Einv @ v, -Einv @ G


@dataclass
class DiscretizedSystem:
    """Residual/Jacobian view of a collocated BVP at one resolution level.

    Unknowns are the stacked nodal samples of each field's highest
    derivative.  ``operators[f][i]`` maps field f's unknown block to its
    i-th derivative at the nodes (boundary eliminations folded in);
    ``affine[f][i]`` is the matching constant part.
    """

    problem: object
    level: int
    x: np.ndarray
    orders: list[int]
    operators: list[list[np.ndarray]]
    affine: list[list[np.ndarray]]
    const_c0: list[np.ndarray]
    const_C: list[np.ndarray]
    _override: object | None = None

    @property
    def n_nodes(self) -> int:
        return len(self.x)

    @property
    def size(self) -> int:
        return self.n_nodes * len(self.orders)

    def split(self, z: np.ndarray) -> list[np.ndarray]:
        m = self.n_nodes
        return [z[f * m:(f + 1) * m] for f in range(len(self.orders))]

    def field_values(self, z: np.ndarray) -> list[list[np.ndarray]]:
        """Y[f][i]: nodal values of the i-th derivative of field f."""
        parts = self.split(np.asarray(z, dtype=float))
        out = []
        for f, zf in enumerate(parts):
            out.append([self.operators[f][i] @ zf + self.affine[f][i]
                        for i in range(self.orders[f] + 1)])
        return out

    def initial_values(self, z: np.ndarray) -> list[np.ndarray]:
        """Eliminated constants y_i(0) per field at the given unknowns."""
        parts = self.split(np.asarray(z, dtype=float))
        return [self.const_c0[f] + self.const_C[f] @ parts[f]
                for f in range(len(self.orders))]

    def residual(self, z: np.ndarray) -> np.ndarray:
        Y = self.field_values(z)
        blocks = self.problem.residual(self.x, Y)
        R = np.concatenate([np.asarray(b, dtype=float) for b in blocks])
        if self._override is not None:
            R = self._override.apply_residual(self, z, Y, R)
        return R

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        Y = self.field_values(z)
        parts = self.problem.partials(self.x, Y)
        m = self.n_nodes
        nf = len(self.orders)
        J = np.zeros((self.size, self.size))
        for (e, f, i), w in parts.items():
            J[e * m:(e + 1) * m, f * m:(f + 1) * m] += \
                np.asarray(w, dtype=float)[:, None] * self.operators[f][i]
        if self._override is not None:
            J = self._override.apply_jacobian(self, z, Y, J)
        return J


def assemble(problem, j: int) -> DiscretizedSystem:
    """Discretize a (possibly coupled) 1D BVP at resolution level j."""
    tables = default_tables()
    if j < min_level(tables):
        raise EliminationError(
            f"level {j} below minimal admissible level {min_level(tables)}")
    m = 2 ** j + 1
    x = np.arange(m) / 2 ** j

    operators, affine, c0s, Cs = [], [], [], []
    for spec in problem.fields:
        n = spec.order
        c0, C = reduce_to_integral_form(spec, j)
        ops_f, aff_f = [], []
        for i in range(n):
            A = integral_operator_matrix(j, n - i)
            V = np.zeros((m, n))
            for q in range(i, n):
                V[:, q] = x ** (q - i) / _factorial(q - i)
            ops_f.append(A + V @ C)
            aff_f.append(V @ c0)
        ops_f.append(np.eye(m))
        aff_f.append(np.zeros(m))
        operators.append(ops_f)
        affine.append(aff_f)
        c0s.append(c0)
        Cs.append(C)

    system = DiscretizedSystem(problem=problem, level=j, x=x,
                               orders=[s.order for s in problem.fields],
                               operators=operators, affine=affine,
                               const_c0=c0s, const_C=Cs)
    hook = getattr(problem, "row_override", None)
    if hook is not None:
        system._override = hook(system)
    return system


def recover_lower_derivatives(system: DiscretizedSystem,
                              y_n: np.ndarray) -> list[list[np.ndarray]]:
    """Nodal values of every derivative order from the converged unknowns."""
    y_n = np.asarray(y_n, dtype=float)
    if y_n.shape != (system.size,):
        raise EliminationError(
            f"unknown vector length {y_n.shape} != system size {system.size}")
    return system.field_values(y_n)


@dataclass
class Discretized2DSystem:
    """Stacked second-derivative system for a 2D problem on the unit square.

    Unknowns are [u2; v2], the nodal grids of the two directional second
    derivatives, flattened row-major (x-index fastest).  One block of
    equations collocates the PDE, the other enforces consistency of the two
    integral representations of u.
    """

    problem: object
    level: int
    x: np.ndarray
    A: np.ndarray = field(repr=False)  # x-direction double integral
    B: np.ndarray = field(repr=False)  # y-direction double integral
    f_grid: np.ndarray = field(repr=False)

    @property
    def n_grid(self) -> int:
        return len(self.x) ** 2

    @property
    def size(self) -> int:
        return 2 * self.n_grid

    def split(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g = self.n_grid
        return z[:g], z[g:]

    def solution_values(self, z: np.ndarray) -> np.ndarray:
        """u on the grid (shape (m, m), row index y, column index x)."""
        u2, _ = self.split(np.asarray(z, dtype=float))
        m = len(self.x)
        return (self.A @ u2).reshape(m, m)

    @property
    def _corners(self) -> list[int]:
        m = len(self.x)
        return [0, m - 1, (m - 1) * m, m * m - 1]

    def residual(self, z: np.ndarray) -> np.ndarray:
        u2, v2 = self.split(np.asarray(z, dtype=float))
        u = self.A @ u2
        r1 = u2 + v2 + self.problem.nonlinear(u) - self.f_grid
        r2 = self.A @ u2 - self.B @ v2
        # the consistency rows vanish identically at the corners (both
        # boundary operator rows are zero); replace them with u2 = v2 there,
        # which holds exactly for zero Dirichlet data on all edges
        for c in self._corners:
            r2[c] = u2[c] - v2[c]
        return np.concatenate([r1, r2])

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        u2, v2 = self.split(np.asarray(z, dtype=float))
        u = self.A @ u2
        g = self.n_grid
        J = np.zeros((2 * g, 2 * g))
        J[:g, :g] = np.eye(g) + self.problem.nonlinear_deriv(u)[:, None] * self.A
        J[:g, g:] = np.eye(g)
        J[g:, :g] = self.A
        J[g:, g:] = -self.B
        for c in self._corners:
            J[g + c, :] = 0.0
            J[g + c, c] = 1.0
            J[g + c, g + c] = -1.0
        return J


def assemble_2d(problem, j: int) -> Discretized2DSystem:
    """Discretize a 2D Dirichlet problem via tensor products of 1D operators."""
    tables = default_tables()
    if j < min_level(tables):
        raise EliminationError(
            f"level {j} below minimal admissible level {min_level(tables)}")
    m = 2 ** j + 1
    x = np.arange(m) / 2 ** j
    op2 = integral_operator_matrix(j, 2)
    # homogeneous Dirichlet elimination along one line: u = I2 u2 - x * I2(1)
    A1 = op2 - np.outer(x, op2[-1])
    A = np.kron(np.eye(m), A1)
    B = np.kron(A1, np.eye(m))
    X, Yg = np.meshgrid(x, x)  # row index y, column index x
    f_grid = problem.source(X, Yg).ravel()
    return Discretized2DSystem(problem=problem, level=j, x=x, A=A, B=B,
                               f_grid=f_grid)
