"""Boundary extension and the modified integral-operator matrices.

Interior samples of a function on [0, 1] are continued past the boundary with
degree N-1 power series whose coefficients are fixed linear combinations of
interior samples (coefficient matrices zeta0 / zeta1).  Folding that extension
into the n-tuple integrals of the scaling basis gives dense operators mapping
nodal samples of a function to its iterated integrals at all collocation
points l/2^j.  All entries reduce to scaling-function values at integer
arguments, so they carry no quadrature error.
"""

from dataclasses import dataclass, field

import numpy as np

from .coiflet import ScalingTables, _factorial

__all__ = [
    "ExtensionSystem",
    "IntegralOperator",
    "build_extension_system",
    "extension_polynomial_left",
    "extension_polynomial_right",
    "build_integral_operator",
    "approximate_multiple_integral",
]


class ExtensionError(ValueError):
    pass


@dataclass(frozen=True)
class ExtensionSystem:
    """Coefficient matrices of the boundary power-series extension.

    ``zeta0[i, k]`` weights interior sample f_k (k = 0..alpha1) in the i-th
    left expansion coefficient; ``zeta1[i, k]`` weights f_{2^j - k}
    (k = 0..alpha2) in the right one.
    """

    tables: ScalingTables = field(repr=False)
    alpha1: int
    alpha2: int
    zeta0: np.ndarray = field(repr=False)
    zeta1: np.ndarray = field(repr=False)


def build_extension_system(tables: ScalingTables) -> ExtensionSystem:
    """Solve the self-consistency systems for zeta0 and zeta1."""
    N = tables.filter.N
    M1 = tables.filter.M1
    alpha1 = M1 - 1
    alpha2 = 3 * N - 2 - M1

    # right side: exterior samples sit at 2^j + m, m = 1..alpha1
    R1 = np.zeros((N, alpha2 + 1))
    S1 = np.zeros((N, N))
    for i in range(N):
        d = tables.derivative(i)
        for k in range(alpha2 + 1):
            R1[i, k] = d[k + M1]
        for l in range(N):
            S1[i, l] = sum(t ** l / _factorial(l) * d[M1 - t]
                           for t in range(1, M1))
    try:
        zeta1 = np.linalg.solve(np.eye(N) - S1, R1)
    except np.linalg.LinAlgError as exc:
        raise ExtensionError("(I - S1) singular on the right side") from exc

    # left side: exterior samples sit at m = -alpha2..-1
    R0 = np.zeros((N, alpha1 + 1))
    S0 = np.zeros((N, N))
    for i in range(N):
        d = tables.derivative(i)
        for k in range(alpha1 + 1):
            R0[i, k] = d[M1 - k]
        for l in range(N):
            S0[i, l] = sum(t ** l / _factorial(l) * d[M1 - t]
                           for t in range(-alpha2, 0))
    try:
        zeta0 = np.linalg.solve(np.eye(N) - S0, R0)
    except np.linalg.LinAlgError as exc:
        raise ExtensionError("(I - S0) singular on the left side") from exc

    return ExtensionSystem(tables=tables, alpha1=alpha1, alpha2=alpha2,
                           zeta0=zeta0, zeta1=zeta1)


def extension_polynomial_left(sys: ExtensionSystem, k: int, m: int) -> float:
    """T_L,k at the dyadic exterior point m/2^j (independent of j).

    ``k`` indexes the interior sample f_k, 0 <= k <= alpha1; ``m`` is the
    (non-positive) exterior node offset.
    """
    if not 0 <= k <= sys.alpha1:
        raise ExtensionError(f"left index {k} outside [0, {sys.alpha1}]")
    if not -sys.alpha2 <= m <= 0:
        raise ExtensionError(f"left offset {m} outside [{-sys.alpha2}, 0]")
    powers = np.array([float(m) ** i for i in range(sys.zeta0.shape[0])])
    fac = np.array([_factorial(i) for i in range(sys.zeta0.shape[0])])
    return float(np.dot(powers / fac, sys.zeta0[:, k]))


def extension_polynomial_right(sys: ExtensionSystem, k: int, m: int) -> float:
    """T_R,k at the dyadic exterior point 1 + m/2^j (independent of j).

    ``k`` indexes the interior sample f_{2^j - k}, 0 <= k <= alpha2; ``m`` is
    the (positive) exterior node offset, 1 <= m <= alpha1.
    """
    if not 0 <= k <= sys.alpha2:
        raise ExtensionError(f"right index {k} outside [0, {sys.alpha2}]")
    if not 1 <= m <= sys.alpha1:
        raise ExtensionError(f"right offset {m} outside [1, {sys.alpha1}]")
    powers = np.array([float(m) ** i for i in range(sys.zeta1.shape[0])])
    fac = np.array([_factorial(i) for i in range(sys.zeta1.shape[0])])
    return float(np.dot(powers / fac, sys.zeta1[:, k]))


@dataclass(frozen=True)
class IntegralOperator:
    """Dense matrix of i-tuple integral values of the modified basis.

    ``entries[l, k]`` approximates the contribution of the nodal sample at
    k/2^j to the i-tuple integral evaluated at l/2^j.  Tuple 0 is the
    point-evaluation (identity) operator.
    """

    level: int
    tuple: int
    entries: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def boundary_row(self) -> np.ndarray:
        """The row evaluating the integral at x = 1."""
        return self.entries[-1]


def min_level(tables: ScalingTables) -> int:
    """Smallest resolution level the extension construction admits."""
    N, M1 = tables.filter.N, tables.filter.M1
    j = 1
    while 2 ** j - 3 * N + 2 + M1 <= 0:
        j += 1
    return j


def _lambda_block(tables: ScalingTables, j: int, i: int,
                  cols: np.ndarray, n_nodes: int) -> np.ndarray:
    """2^j * (i-tuple integral of the shifted raw basis) at all nodes.

    ``cols`` are basis sample offsets (may be exterior).  Row l gives the
    value at l/2^j scaled by 2^j, which stays O(1) in j.
    """
    M1 = tables.filter.M1
    l = np.arange(n_nodes, dtype=float)[:, None]
    # phi^Ii(l - c + M1) over the needed integer range, via lookup
    args = (np.arange(n_nodes)[:, None] - cols[None, :]) + M1
    lo, hi = int(args.min()), int(args.max())
    table = tables.phi_int_array(i, lo, hi)
    first = table[args - lo]
    second = np.zeros_like(first)
    for m in range(1, i + 1):
        head = np.array([tables.phi_int(m, M1 - int(c)) for c in cols])
        second += (l ** (i - m) / _factorial(i - m)) * head[None, :]
    return 2.0 ** (-(i - 1) * j) * (first - second)


def build_integral_operator(tables: ScalingTables, sys: ExtensionSystem,
                            j: int, i: int) -> IntegralOperator:
    """Assemble the (2^j+1)^2 operator for the i-tuple integral at level j."""
    if i < 0:
        raise ExtensionError(f"tuple must be >= 0, got {i}")
    n = 2 ** j + 1
    if i == 0:
        return IntegralOperator(level=j, tuple=0, entries=np.eye(n))
    if i > tables.n_max:
        raise ExtensionError(f"tuple {i} exceeds table n_max = {tables.n_max}")
    jmin = min_level(tables)
    if j < jmin:
        raise ExtensionError(
            f"level {j} too small for this filter; minimal admissible level "
            f"is {jmin}")

    a1, a2 = sys.alpha1, sys.alpha2
    cols = np.arange(-a2, 2 ** j + a1 + 1)
    lam = _lambda_block(tables, j, i, cols, n)  # n x len(cols)
    off = a2  # column index of sample offset 0 inside ``cols``

    K = lam[:, off:off + n].copy()
    # left extension: exterior offsets m = -alpha2..-1 feed samples 0..alpha1
    for k in range(a1 + 1):
        for m in range(-a2, 0):
            K[:, k] += extension_polynomial_left(sys, k, m) * lam[:, off + m]
    # right extension: exterior offsets 2^j + m, m = 1..alpha1
    for k in range(2 ** j - a2, 2 ** j + 1):
        for m in range(1, a1 + 1):
            K[:, k] += extension_polynomial_right(sys, 2 ** j - k, m) \
                * lam[:, off + 2 ** j + m]
    return IntegralOperator(level=j, tuple=i, entries=K / 2.0 ** j)


def approximate_multiple_integral(op: IntegralOperator,
                                  samples: np.ndarray) -> np.ndarray:
    """i-tuple integral values at all nodes from nodal samples."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (op.size,):
        raise ExtensionError(
            f"sample vector of length {samples.shape} does not match "
            f"operator dimension {op.size}")
    return op.entries @ samples
