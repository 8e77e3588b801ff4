"""Boundary extension and modified integral operators."""

import math

import numpy as np
import pytest

from wicm import coiflet, extension
from wicm.assembly import integral_operator_matrix


@pytest.fixture(scope="module")
def tables():
    return coiflet.build_tables()


@pytest.fixture(scope="module")
def ext(tables):
    return extension.build_extension_system(tables)


def test_min_level(tables):
    assert extension.min_level(tables) == 4


def test_level_below_minimum_rejected(tables, ext):
    with pytest.raises(extension.ExtensionError):
        extension.build_integral_operator(tables, ext, 3, 1)


def test_monomial_exactness():
    # iterated integrals of x^d are exact for d <= 5 (degree N - 1 extension)
    j = 4
    x = np.linspace(0.0, 1.0, 2 ** j + 1)
    for i in range(1, 5):
        op = integral_operator_matrix(j, i)
        for d in range(6):
            approx = op @ x ** d
            exact = x ** (d + i) * math.factorial(d) / math.factorial(d + i)
            err = np.abs(approx - exact).max()
            assert err < 1e-10, f"i={i}, degree {d}: {err:.3e}"


def test_interior_entries_scale_dyadically():
    # away from the boundary columns the operator entry depends on l - k
    # only through the dyadic prefactor 2^(-ij)
    for i in range(1, 5):
        o4 = integral_operator_matrix(4, i)
        o5 = integral_operator_matrix(5, i)
        ratio = o5[16, 16] * 2.0 ** i / o4[8, 8]
        assert ratio == pytest.approx(1.0, rel=1e-11), f"i={i}"


def test_operator_composition_on_smooth_function():
    # applying the single integral twice agrees with the double integral;
    # the boundary-extension corrections differ at the matrix level, so the
    # identity holds on smooth data, not entrywise
    j = 5
    x = np.linspace(0.0, 1.0, 2 ** j + 1)
    f = np.exp(x)
    o1 = integral_operator_matrix(j, 1)
    o2 = integral_operator_matrix(j, 2)
    err = np.abs(o1 @ (o1 @ f) - o2 @ f).max()
    assert err < 1e-9


def test_matrix_composition_defect_decays():
    # the entrywise defect of O1 @ O1 - O2 shrinks like 4^-j
    defects = []
    for j in (4, 5, 6):
        o1 = integral_operator_matrix(j, 1)
        o2 = integral_operator_matrix(j, 2)
        defects.append(np.abs(o1 @ o1 - o2).max())
    assert defects[0] > defects[1] > defects[2]
    assert defects[2] < 1e-4


def test_operator_maps_zero_to_zero():
    j = 4
    for i in range(1, 5):
        op = integral_operator_matrix(j, i)
        assert np.abs(op[0]).max() < 1e-14, f"row at x=0, i={i}"


def test_smooth_function_accuracy(tables, ext):
    # single integral of exp(x) at x = 1 to near machine accuracy at j = 6
    j = 6
    x = np.linspace(0.0, 1.0, 2 ** j + 1)
    op = integral_operator_matrix(j, 1)
    approx = (op @ np.exp(x))[-1]
    assert approx == pytest.approx(np.e - 1.0, abs=1e-11)
