import numpy as np
import pytest

from banditlab.errors import HorizonTooLarge
from banditlab.quad import Budget, composite_rule, gauss_legendre, kinked_expectation, smooth_expectation


def identity(xi):
    return xi, np.ones_like(xi)


def test_gauss_legendre_is_exact_for_polynomials():
    x, w = gauss_legendre(8)
    for k in range(16):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        np.testing.assert_allclose(np.dot(w, x**k), exact, atol=1e-14)


def test_composite_rule_integrates_a_panelled_interval():
    nodes, weights = composite_rule(np.linspace(0.0, 3.0, 7))
    np.testing.assert_allclose(weights.sum(), 3.0, rtol=1e-14)
    np.testing.assert_allclose(np.dot(weights, np.exp(nodes)), np.expm1(3.0), rtol=1e-13)


def test_smooth_expectation():
    val = smooth_expectation(identity, [0.0, 1.0, 2.0], np.sin)
    np.testing.assert_allclose(val, 1.0 - np.cos(2.0), rtol=1e-13)


@pytest.mark.parametrize("kink", [0.1234, 0.5, 0.987654])
def test_kinked_expectation_splits_at_the_kink(kink):
    # E max(x, kink) over U(0, 1) = (1 + kink^2) / 2
    val = kinked_expectation(identity, [0.0, 0.5, 1.0],
                             lambda x: (x, np.full_like(x, kink)), np.maximum)
    np.testing.assert_allclose(val, 0.5 * (1.0 + kink**2), rtol=1e-14)


def test_kinked_expectation_without_a_kink_equals_the_plain_rule():
    val = kinked_expectation(identity, [0.0, 1.0], lambda x: (x, x - 1.0), np.maximum)
    np.testing.assert_allclose(val, 0.5, rtol=1e-14)


def test_budget_aborts():
    b = Budget(10)
    b.charge(10)
    with pytest.raises(HorizonTooLarge):
        b.charge(1)
    with pytest.raises(HorizonTooLarge):
        kinked_expectation(identity, [0.0, 0.5, 1.0], lambda x: (x, 0.3 + 0 * x), np.maximum,
                           budget=Budget(12))
