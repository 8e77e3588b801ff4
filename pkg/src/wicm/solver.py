"""Dense linear algebra and the Newton driver with parameter continuation."""

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

__all__ = [
    "NewtonConfig",
    "SolveReport",
    "ConditionReport",
    "SingularMatrixError",
    "lu_solve",
    "condition_number_2",
    "newton_solve",
]


class SingularMatrixError(np.linalg.LinAlgError):
    """A pivot fell below threshold during LU factorization."""

    def __init__(self, pivot_index: int, pivot: float):
        self.pivot_index = pivot_index
        self.pivot = pivot
        super().__init__(f"numerically singular matrix: pivot {pivot:.3e} "
                         f"at index {pivot_index}")


def lu_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A x = b by dense LU with partial pivoting.

    Raises SingularMatrixError (with the offending pivot index) when a
    diagonal pivot of U is negligible relative to the matrix scale.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got {A.shape}")
    if b.shape[0] != A.shape[0]:
        raise ValueError(f"dimension mismatch: {A.shape} vs {b.shape}")
    with warnings.catch_warnings():
        # the zero-pivot warning duplicates the SingularMatrixError below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    diag = np.abs(np.diag(lu))
    scale = max(np.abs(A).max(), 1e-300)
    small = np.where(diag <= scale * A.shape[0] * np.finfo(float).eps)[0]
    if small.size:
        raise SingularMatrixError(int(small[0]), float(diag[small[0]]))
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


@dataclass(frozen=True)
class ConditionReport:
    """2-norm condition number and inverse norm from a full SVD."""

    cond: float
    inv_norm: float
    sigma_max: float
    sigma_min: float


def condition_number_2(A: np.ndarray) -> ConditionReport:
    """K_2(A) = sigma_max / sigma_min plus ||A^-1||_2 = 1/sigma_min."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got {A.shape}")
    s = np.linalg.svd(A, compute_uv=False)
    smax, smin = float(s[0]), float(s[-1])
    if smin == 0.0:
        return ConditionReport(cond=np.inf, inv_norm=np.inf,
                               sigma_max=smax, sigma_min=0.0)
    return ConditionReport(cond=smax / smin, inv_norm=1.0 / smin,
                           sigma_max=smax, sigma_min=smin)


@dataclass
class NewtonConfig:
    residual_tol: float = 1e-12
    step_tol: float = 1e-13
    max_iters: int = 50
    continuation: Sequence[float] | None = None

    def __post_init__(self):
        if self.residual_tol <= 0 or self.step_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class SolveReport:
    converged: bool
    iterations: list[int] = field(default_factory=list)
    final_residual: float = np.inf
    residual_history: list[float] = field(default_factory=list)
    jacobian_condition: float | None = None
    continuation_values: list[float] = field(default_factory=list)

    @property
    def total_iterations(self) -> int:
        return sum(self.iterations)


def _newton_stage(system, cfg: NewtonConfig, x: np.ndarray, stage: str,
                  report: SolveReport) -> tuple[np.ndarray, bool]:
    history = []
    for it in range(1, cfg.max_iters + 1):
        r = system.residual(x)
        rnorm = float(np.abs(r).max())
        history.append(rnorm)
        if rnorm <= cfg.residual_tol:
            report.iterations.append(it - 1)
            report.residual_history.extend(history)
            report.final_residual = rnorm
            return x, True
        J = system.jacobian(x)
        try:
            step = lu_solve(J, -r)
        except SingularMatrixError as exc:
            exc.args = (f"singular Jacobian at {stage}: {exc.args[0]}",)
            raise
        x = x + step
        if float(np.abs(step).max()) <= cfg.step_tol:
            rnorm = float(np.abs(system.residual(x)).max())
            history.append(rnorm)
            report.iterations.append(it)
            report.residual_history.extend(history)
            report.final_residual = rnorm
            return x, rnorm <= cfg.residual_tol
    rnorm = float(np.abs(system.residual(x)).max())
    history.append(rnorm)
    report.iterations.append(cfg.max_iters)
    report.residual_history.extend(history)
    report.final_residual = rnorm
    return x, rnorm <= cfg.residual_tol


def newton_solve(system, cfg: NewtonConfig | None = None,
                 initial: np.ndarray | None = None,
                 factory: Callable[[float], object] | None = None,
                 with_condition: bool = False) -> tuple[np.ndarray, SolveReport]:
    """Newton-Raphson solve of a discretized system.

    ``system`` must expose ``residual(x)`` and ``jacobian(x)`` (and ``size``).
    With ``cfg.continuation`` set, ``factory`` maps each parameter value to a
    system and each stage warm-starts from the previous solution; ``system``
    is then ignored and may be None.

    Non-convergence yields ``report.converged = False`` rather than an
    exception; a singular Jacobian raises SingularMatrixError.
    """
    cfg = cfg or NewtonConfig()
    report = SolveReport(converged=False)

    if cfg.continuation is not None:
        if factory is None:
            raise ValueError("continuation requires a system factory")
        values = [float(v) for v in cfg.continuation]
        system = factory(values[0])
        x = np.zeros(system.size) if initial is None else np.asarray(initial, float)
        ok = True
        for value in values:
            system = factory(value)
            report.continuation_values.append(value)
            x, ok = _newton_stage(system, cfg, x,
                                  f"continuation value {value}", report)
            if not ok:
                break
        report.converged = ok and report.final_residual <= cfg.residual_tol
    else:
        if system is None:
            raise ValueError("system required without continuation")
        x = np.zeros(system.size) if initial is None else np.asarray(initial, float)
        x, ok = _newton_stage(system, cfg, x, "single stage", report)
        report.converged = report.final_residual <= cfg.residual_tol

    if with_condition and report.converged:
        report.jacobian_condition = condition_number_2(system.jacobian(x)).cond
    return x, report
