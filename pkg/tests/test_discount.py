import numpy as np
import pytest
from hypothesis import given, strategies as st

from banditlab import discount as disc
from banditlab.errors import NegativeWeight, SchemaError, ZeroMass

weights = st.lists(st.floats(0.0, 10.0, allow_nan=False), min_size=1, max_size=8).filter(lambda v: sum(v) > 0)


def test_validate_rejects_bad_weights():
    with pytest.raises(NegativeWeight):
        disc.validate([1.0, -0.5])
    with pytest.raises(ZeroMass):
        disc.validate([0.0, 0.0])
    with pytest.raises(ZeroMass):
        disc.validate([])
    with pytest.raises(SchemaError):
        disc.validate([1.0, float("nan")])


def test_tail_sums_and_tail():
    A = disc.validate([3.0, 2.0, 1.0])
    np.testing.assert_allclose(A.tail_sums(), [6.0, 3.0, 1.0, 0.0, 0.0])
    assert disc.tail(A).values == (2.0, 1.0)
    assert disc.tail(disc.uniform(1)).n == 0


def test_constructors_and_json():
    assert disc.uniform(3).values == (1.0, 1.0, 1.0)
    np.testing.assert_allclose(disc.geometric(0.5, 3).values, [1.0, 0.5, 0.25])
    assert disc.from_json({"kind": "uniform", "n": 2}) == disc.uniform(2)
    assert disc.from_json({"kind": "geometric", "beta": 0.9, "n": 3}) == disc.geometric(0.9, 3)
    assert disc.from_json([1, 2]).values == (1.0, 2.0)
    with pytest.raises(SchemaError):
        disc.from_json({"kind": "harmonic", "n": 3})
    with pytest.raises(SchemaError):
        disc.geometric(1.5, 3)


def test_regularity_examples():
    assert disc.is_regular(disc.uniform(5))
    assert disc.is_regular(disc.geometric(0.7, 6))
    assert disc.is_regular(disc.validate([1.0, 1.0, 0.0]))
    assert not disc.is_regular(disc.validate([1.0, 0.0, 1.0]))
    assert disc.is_decreasing(disc.validate([3.0, 2.0, 2.0]))
    assert not disc.is_decreasing(disc.validate([1.0, 2.0]))


@given(weights, st.floats(1e-3, 1e3))
def test_regularity_is_scale_free(values, k):
    A = disc.validate(values)
    assert disc.is_regular(A) == disc.is_regular(A.scaled(k))


@given(st.lists(st.floats(0.01, 3.0), min_size=0, max_size=7))
def test_concave_log_tail_sums_are_regular(decrements):
    d = np.sort(decrements)
    b = np.exp(-np.concatenate([[0.0], np.cumsum(d)]))
    a = b - np.concatenate([b[1:], [0.0]])
    assert disc.is_regular(disc.validate(a))
