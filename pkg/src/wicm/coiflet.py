"""Coiflet filter constants and scaling-function tables at integer points.

Everything downstream (boundary extension, integral operators) only ever needs
the scaling function phi, its derivatives and its n-tuple integrals evaluated
at integer arguments.  Those values come from small eigenproblems / linear
systems driven by the two-scale refinement relation, so no cascade sampling is
required in the method itself (a cascade helper is provided for cross-checks).
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CoifletFilter",
    "ScalingTables",
    "load_filter",
    "scaling_values_at_integers",
    "derivative_values_at_integers",
    "integral_values_at_integers",
    "integral_boundary_values",
    "build_tables",
    "cascade_values",
    "REFERENCE_INTEGRALS",
]

# Reference values of the iterated integrals phi_int_n(k), n = 1..4,
# k = 1..17, used by the tables diff report and the regression tests.
# Two entries of the original tabulation drop one repeated digit
# (n = 1, k = 15 and n = 2, k = 14); they are listed here with the digit
# reinstated, which the independently computed values confirm.
REFERENCE_INTEGRALS = {
    1: [-4.527262019294291e-09, 3.793659018256384e-06, 2.929388903777156e-06,
        -3.134173582887661e-03, 2.264311126637817e-02, -8.486417521139951e-02,
        5.234649707003830e-01, 1.051493179855499e+00, 9.875787622086671e-01,
        1.003591003107596e+00, 9.991452076341547e-01, 1.000073554299164e+00,
        1.000001685301915e+00, 1.000000156123390e+00, 9.999999997921172e-01,
        1.00000000000944e+00, 1.00000000000000e+00],
    2: [-2.640542520280718e-10, 4.419887973421076e-07, -3.394779202257466e-06,
        -7.269055985025437e-04, 3.381871078932003e-03, -9.611317252824955e-03,
        9.430655504920177e-02, 9.976688497344420e-01, 1.997725744751554e+00,
        3.000516645305960e+00, 4.000084460530419e+00, 4.999990068904882e+00,
        6.000000321738184e+00, 6.999999992224733e+00, 7.9999999985318e+00,
        9.00000000012078e+00, 1.00000000000843e+01],
    3: [-1.177917982279285e-11, 3.940901828183616e-08, -1.601106900878482e-06,
        -1.280198775311740e-04, -1.008794458421603e-03, 5.958177925875930e-03,
        -3.787403971467576e-03, 4.980359246292250e-01, 2.001481573098073e+00,
        4.499416305495880e+00, 8.000033233268191e+00, 1.250000065760564e+01,
        1.799999990934045e+01, 2.44999999879408e+01, 3.20000000005910e+01,
        4.05000000006736e+01, 5.00000000006850e+01],
    4: [-4.830484119726849e-13, 3.231226434268301e-09, -1.390327115561728e-07,
        -2.128451273233253e-05, -8.249450856216146e-04, 2.387016412381357e-03,
        -3.184751382798324e-03, 1.666535756413486e-01, 1.333433158829295e+00,
        4.500187806094493e+00, 1.066664726952882e+01, 2.083333339909631e+01,
        3.600000000204158e+01, 5.716666666713520e+01, 8.533333333347005e+01,
        1.215000000001882e+02, 1.666666666668998e+02],
}

# Low-pass filter for the 18-tap Coiflet (N = 6, first moment M1 = 7),
# normalized so the coefficients sum to 2.
_COIFLET_N6_P = np.array(
    [
        -2.3926386572801e-03,
        -4.9326018541804e-03,
        2.7140399711400e-02,
        3.0647555946200e-02,
        -1.3931023707080e-01,
        -8.0606530717800e-02,
        6.4599454329399e-01,
        1.1162662132580e00,
        5.3818905570800e-01,
        -9.9615433862400e-02,
        -7.9923139434800e-02,
        5.1491462932400e-02,
        1.2388695657060e-02,
        -1.5831780392559e-02,
        -2.7171786005400e-03,
        2.8869486640200e-03,
        6.3049939470800e-04,
        -3.0583397359600e-04,
    ]
)


class CoifletError(ValueError):
    """Raised when a filter fails a structural requirement."""


@dataclass(frozen=True)
class CoifletFilter:
    """Low-pass filter p_k of a Coiflet-type scaling function.

    Attributes:
        N: even vanishing-moment parameter; support of phi is [0, 3N-1].
        M1: first moment of phi (an integer for this family).
        p: the 3N filter coefficients.
    """

    N: int
    M1: int
    p: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        object.__setattr__(self, "p", p)
        if self.N <= 0 or self.N % 2:
            raise CoifletError(f"N must be a positive even integer, got {self.N}")
        if len(p) != 3 * self.N:
            raise CoifletError(f"filter length {len(p)} != 3N = {3 * self.N}")
        # the published 14-digit constants sum to 2 + 1.8e-12, so allow that
        if abs(p.sum() - 2.0) > 5e-12:
            raise CoifletError(f"filter sum {p.sum()!r} != 2")
        m1 = np.dot(np.arange(len(p)), p) / 2.0
        if abs(m1 - self.M1) > 1e-10:
            raise CoifletError(f"first moment {m1!r} != M1 = {self.M1}")

    @property
    def support_end(self) -> int:
        return 3 * self.N - 1


def load_filter() -> CoifletFilter:
    """Return the built-in N = 6, M1 = 7 Coiflet filter."""
    return CoifletFilter(N=6, M1=7, p=_COIFLET_N6_P.copy())


def _transition_matrix(filt: CoifletFilter) -> np.ndarray:
    """T[m, k] = p_{2m-k} over the interior integers m, k = 1..3N-2."""
    n = filt.support_end - 1  # number of interior integers
    p = filt.p
    T = np.zeros((n, n))
    for m in range(1, n + 1):
        for k in range(1, n + 1):
            idx = 2 * m - k
            if 0 <= idx < len(p):
                T[m - 1, k - 1] = p[idx]
    return T


def _eigenvector_for(T: np.ndarray, target: float, what: str) -> np.ndarray:
    """Real eigenvector of T for the eigenvalue closest to ``target``.

    The eigenvalue must be simple and within a loose tolerance of the target;
    otherwise the filter does not support the requested table.
    """
    vals, vecs = np.linalg.eig(T)
    dist = np.abs(vals - target)
    order = np.argsort(dist)
    best = order[0]
    if dist[best] > 1e-8 * max(1.0, abs(target)) + 1e-10:
        raise CoifletError(f"eigenvalue {target!r} absent for {what} "
                           f"(closest: {vals[best]!r})")
    if len(order) > 1 and dist[order[1]] < 1e-8:
        raise CoifletError(f"eigenvalue {target!r} degenerate for {what}")
    v = np.real(vecs[:, best])
    return v


def scaling_values_at_integers(filt: CoifletFilter) -> np.ndarray:
    """phi(k) for k = 0..3N-1, normalized to a partition of unity."""
    v = _eigenvector_for(_transition_matrix(filt), 1.0, "phi")
    v = v / v.sum()
    out = np.zeros(filt.support_end + 1)
    out[1:-1] = v
    return out


def derivative_values_at_integers(filt: CoifletFilter, order: int) -> np.ndarray:
    """phi^(i)(k) for k = 0..3N-1 and a derivative order 1 <= i <= N-1.

    The values satisfy the differentiated refinement relation
    phi^(i)(m) = 2^i sum_k p_k phi^(i)(2m - k), i.e. they form the eigenvector
    of the transition matrix for eigenvalue 2^-i.  Normalization fixes the
    i-th derivative of the degree-i monomial reproduction:
    sum_l (M1 - l)^i phi^(i)(l) = i!.
    """
    if not 1 <= order <= filt.N - 1:
        raise CoifletError(f"derivative order {order} outside [1, {filt.N - 1}]")
    try:
        v = _eigenvector_for(_transition_matrix(filt), 2.0 ** (-order),
                             f"phi^({order})")
    except CoifletError as exc:
        raise CoifletError(
            f"Coiflet smoothness insufficient for derivative order {order}: {exc}"
        ) from exc
    l = np.arange(1, filt.support_end)
    scale = np.dot((filt.M1 - l).astype(float) ** order, v)
    if abs(scale) < 1e-14:
        raise CoifletError(f"normalization failed for derivative order {order}")
    v = v * (_factorial(order) / scale)
    out = np.zeros(filt.support_end + 1)
    out[1:-1] = v
    return out


def _factorial(n: int) -> float:
    out = 1.0
    for i in range(2, n + 1):
        out *= i
    return out


def integral_boundary_values(filt: CoifletFilter, n_max: int) -> np.ndarray:
    """phi^In(3N-1) for n = 1..n_max.

    The single integral over the full support is 1; higher tuples follow from
    the refinement relation evaluated at the right support endpoint.
    """
    p, e = filt.p, filt.support_end
    b = np.zeros(n_max + 1)  # b[n] = phi^In(3N-1); b[0] unused
    if n_max >= 1:
        b[1] = 1.0
    for n in range(2, n_max + 1):
        acc = 0.0
        for m in range(1, n):
            acc += np.dot(p, (e - np.arange(len(p))).astype(float) ** m) \
                / _factorial(m) * b[n - m]
        b[n] = acc / (2.0 ** n - 2.0)
    return b


def integral_values_at_integers(filt: CoifletFilter, tuple_n: int,
                                bvals: np.ndarray | None = None) -> np.ndarray:
    """phi^In(k) for k = 0..3N-1 for the n-tuple integral, n >= 1.

    Interior values solve (I - 2^-n M) x = c where M is the even/odd filter
    transition matrix and c collects known tail values beyond the support.
    """
    if tuple_n < 1:
        raise CoifletError(f"tuple must be >= 1, got {tuple_n}")
    p, e = filt.p, filt.support_end
    if bvals is None:
        bvals = integral_boundary_values(filt, tuple_n)

    def tail(x: int) -> float:
        # phi^In(x) for x >= 3N-1: polynomial continuation of degree n-1
        acc = 0.0
        for k in range(tuple_n):
            acc += (x - e) ** k / _factorial(k) * bvals[tuple_n - k]
        return acc

    m = e - 1  # interior count 3N-2
    M = np.zeros((m, m))
    c = np.zeros(m)
    fac = 2.0 ** (-tuple_n)
    for i in range(1, m + 1):
        for k in range(len(p)):
            arg = 2 * i - k
            if 1 <= arg <= m:
                M[i - 1, arg - 1] += p[k]
            elif arg >= e:
                c[i - 1] += fac * p[k] * tail(arg)
    A = np.eye(m) - fac * M
    try:
        x = np.linalg.solve(A, c)
    except np.linalg.LinAlgError as exc:
        raise CoifletError(f"(I - 2^-n M) singular for n = {tuple_n}") from exc
    out = np.zeros(e + 1)
    out[1:-1] = x
    out[-1] = bvals[tuple_n]
    return out


@dataclass(frozen=True)
class ScalingTables:
    """Point values, derivatives and n-tuple integrals of phi at integers.

    ``phi[k]``, ``deriv[i][k]`` and ``integral[n][k]`` cover k = 0..3N-1;
    ``boundary[n]`` holds phi^In(3N-1) so the tail continuation past the
    support can be evaluated for any argument.
    """

    filter: CoifletFilter
    phi: np.ndarray
    deriv: dict[int, np.ndarray]
    integral: dict[int, np.ndarray]
    boundary: np.ndarray
    n_max: int

    @property
    def support_end(self) -> int:
        return self.filter.support_end

    def derivative(self, order: int) -> np.ndarray:
        """phi^(i) values at integers; order 0 returns phi itself."""
        if order == 0:
            return self.phi
        return self.deriv[order]

    def phi_int(self, n: int, x: int) -> float:
        """phi^In at an arbitrary integer argument (0 left of support)."""
        if n > self.n_max:
            raise CoifletError(f"tuple {n} exceeds table n_max = {self.n_max}")
        if x <= 0:
            return 0.0
        e = self.support_end
        if x <= e:
            return float(self.integral[n][x])
        acc = 0.0
        for k in range(n):
            acc += (x - e) ** k / _factorial(k) * self.boundary[n - k]
        return acc

    def phi_int_array(self, n: int, lo: int, hi: int) -> np.ndarray:
        """phi^In over the inclusive integer range [lo, hi]."""
        return np.array([self.phi_int(n, x) for x in range(lo, hi + 1)])


def build_tables(filt: CoifletFilter | None = None, n_max: int = 4) -> ScalingTables:
    """Compute all scaling-function tables for the given filter."""
    if filt is None:
        filt = load_filter()
    phi = scaling_values_at_integers(filt)
    deriv = {i: derivative_values_at_integers(filt, i)
             for i in range(1, filt.N)}
    bvals = integral_boundary_values(filt, n_max)
    integral = {n: integral_values_at_integers(filt, n, bvals)
                for n in range(1, n_max + 1)}
    return ScalingTables(filter=filt, phi=phi, deriv=deriv,
                         integral=integral, boundary=bvals, n_max=n_max)


def cascade_values(filt: CoifletFilter, levels: int) -> tuple[np.ndarray, np.ndarray]:
    """phi sampled on the dyadic grid k/2^levels by cascade refinement.

    Test-support helper: repeatedly applies the refinement relation starting
    from the integer-point values.  Returns (grid, values).
    """
    e = filt.support_end
    vals = scaling_values_at_integers(filt)
    step = 1.0
    grid = np.arange(e + 1, dtype=float)
    for _ in range(levels):
        step /= 2.0
        new_grid = np.arange(0.0, e + step / 2, step)
        new_vals = np.zeros_like(new_grid)
        for idx, x in enumerate(new_grid):
            acc = 0.0
            for k in range(len(filt.p)):
                arg = 2.0 * x - k
                if 0.0 <= arg <= e:
                    # arg lies on the previous (coarser) grid
                    jj = int(round(arg / (2.0 * step)))
                    acc += filt.p[k] * vals[jj]
            new_vals[idx] = acc
        grid, vals = new_grid, new_vals
    return grid, vals
