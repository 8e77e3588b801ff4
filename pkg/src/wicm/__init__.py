"""Wavelet integral collocation method for nonlinear boundary value
problems on [0, 1] and the unit square.

The method expands the highest derivative of the unknown in a Coiflet
scaling basis, recovers the lower derivatives through exact iterated
integral operators with a polynomial boundary extension, eliminates the
unknown boundary constants, and solves the resulting dense nonlinear
system by Newton iteration with optional parameter continuation.
"""

from . import assembly, cli, coiflet, extension, problems, solver
from .assembly import (BoundaryCondition, FieldSpec, assemble, assemble_2d,
                       integral_operator_matrix)
from .problems import (BvpProblem, Bvp2DProblem, Solution, bratu_1d,
                       bratu_2d, circular_plate, estimate_convergence_rate,
                       five_point_bvp, fourth_order_condition_matrix,
                       fourth_order_geng, integral_sin_errors,
                       linear_fourth_order, solve_problem, solve_problem_2d)
from .solver import NewtonConfig, SolveReport, condition_number_2, newton_solve

__version__ = "0.1.0"

__all__ = [
    "assembly", "cli", "coiflet", "extension", "problems", "solver",
    "BoundaryCondition", "FieldSpec", "assemble", "assemble_2d",
    "integral_operator_matrix",
    "BvpProblem", "Bvp2DProblem", "Solution", "bratu_1d", "bratu_2d",
    "circular_plate", "estimate_convergence_rate", "five_point_bvp",
    "fourth_order_condition_matrix", "fourth_order_geng",
    "integral_sin_errors", "linear_fourth_order", "solve_problem",
    "solve_problem_2d",
    "NewtonConfig", "SolveReport", "condition_number_2", "newton_solve",
    "__version__",
]
