"""Filter identities, scaling-function values and the integral tables."""

import math

import numpy as np
import pytest

from wicm import coiflet


@pytest.fixture(scope="module")
def filt():
    return coiflet.load_filter()


@pytest.fixture(scope="module")
def tables(filt):
    return coiflet.build_tables(filt)


def test_filter_normalization(filt):
    assert abs(filt.p.sum() - 2.0) < 1e-11


def test_filter_orthonormality(filt):
    p = filt.p
    for m in range(1, 9):
        s = np.dot(p[2 * m:], p[:len(p) - 2 * m])
        assert abs(s) < 1e-11, f"shift {m}"
    assert abs(np.dot(p, p) - 2.0) < 1e-11


def test_partition_of_unity(tables):
    assert abs(tables.phi.sum() - 1.0) < 1e-12


def test_shifted_vanishing_moments(tables):
    k = np.arange(len(tables.phi), dtype=float)
    for m in range(1, 6):
        assert abs(np.dot((k - 7.0) ** m, tables.phi)) < 1e-10, f"moment {m}"


def test_derivative_sum_rules(tables):
    k = np.arange(len(tables.phi), dtype=float)
    for i in range(1, 6):
        d = tables.derivative(i)
        assert abs(d.sum()) < 1e-9, f"order {i} zeroth moment"
        val = np.dot((7.0 - k) ** i, d)
        assert abs(val - math.factorial(i)) < 1e-8, f"order {i} normalization"


def test_first_derivative_linear_reproduction(tables):
    k = np.arange(len(tables.phi), dtype=float)
    assert abs(np.dot(k, tables.derivative(1)) + 1.0) < 1e-10


def test_integral_tail_polynomial(tables):
    # beyond the support the n-tuple integral is (x - 7)^(n-1)/(n-1)!
    for n in range(1, 5):
        for x in (17, 20, 25):
            expected = (x - 7.0) ** (n - 1) / math.factorial(n - 1)
            assert tables.phi_int(n, x) == pytest.approx(expected, rel=1e-9)


def test_reference_integral_table(tables):
    for n in range(1, 5):
        got = tables.phi_int_array(n, 1, 17)
        ref = np.asarray(coiflet.REFERENCE_INTEGRALS[n])
        rel = np.abs(got - ref) / np.abs(ref)
        assert rel.max() < 1e-9, f"n={n}, worst k={rel.argmax() + 1}"


def test_cascade_matches_eigenvector_values(filt, tables):
    x, phi = coiflet.cascade_values(filt, 5)
    step = 2 ** 5
    at_integers = phi[::step]
    n = min(len(at_integers), len(tables.phi))
    assert np.abs(at_integers[:n] - tables.phi[:n]).max() < 1e-9
