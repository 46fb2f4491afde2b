import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from banditlab import discount as disc
from banditlab.engine import (
    BanditInstance,
    advantage_decomposition,
    brute_force_value,
    one_armed,
    optimal_policy_trace,
    two_armed,
    value,
)
from banditlab.errors import (
    HistoryLongerThanHorizon,
    HorizonTooLarge,
    OneArmedUnsupported,
    SchemaError,
    UnsupportedFamily,
)
from banditlab.expfam import ConjugateArm

FAMILY_ARMS = {
    "bernoulli": ((1.0, 3.0), (2.0, 4.0)),
    "poisson": ((2.0, 1.5), (3.0, 2.5)),
    "normal": ((0.3, 1.0), (0.0, 2.0)),
    "exponential": ((2.0, 2.0), (3.0, 2.5)),
}


def test_hand_derived_two_stage_value():
    r = value(two_armed("bernoulli", 1, 2, 1, 2, disc.uniform(2)))
    assert r.v == pytest.approx(13 / 12, abs=1e-15)
    assert r.advantage == 0.0


@pytest.mark.parametrize("family", sorted(FAMILY_ARMS))
def test_one_stage_value_is_the_better_mean(family):
    (g1, t1), (g2, t2) = FAMILY_ARMS[family]
    r = value(two_armed(family, g1, t1, g2, t2, [2.5]))
    np.testing.assert_allclose(r.v, 2.5 * max(g1 / t1, g2 / t2), rtol=1e-14)


@pytest.mark.parametrize("family", sorted(FAMILY_ARMS))
def test_swapping_arms_negates_the_advantage(family):
    (g1, t1), (g2, t2) = FAMILY_ARMS[family]
    inst = two_armed(family, g1, t1, g2, t2, disc.uniform(3))
    a, b = value(inst), value(inst.swapped())
    np.testing.assert_allclose(a.advantage, -b.advantage, atol=1e-12)
    np.testing.assert_allclose(a.v, b.v, rtol=1e-12)


@pytest.mark.parametrize("family", sorted(FAMILY_ARMS))
def test_decomposition_sums_to_the_advantage(family):
    (g1, t1), (g2, t2) = FAMILY_ARMS[family]
    inst = two_armed(family, g1, t1, g2, t2, [1.0, 0.8, 0.5])
    parts = advantage_decomposition(inst)
    tol = 1e-12 if inst.family.discrete else 1e-8
    np.testing.assert_allclose(sum(parts), value(inst).advantage, atol=tol)
    assert parts[1] >= 0.0 >= parts[2]


def test_one_armed_with_a_dominant_known_arm():
    r = value(one_armed("bernoulli", 1, 2, 0.9, disc.uniform(3)))
    assert r.optimal_arm == 2
    np.testing.assert_allclose(r.v, 2.7, rtol=1e-15)


@pytest.mark.parametrize("A", [(1, 1), (3, 2, 1), (1, 1, 0), (1, 0.5, 0.25, 0.1)])
def test_engine_matches_strategy_enumeration(A):
    for g1, t1, g2, t2 in [(1, 2, 1, 3), (2, 3, 1, 4), (1, 5, 4, 5)]:
        inst = two_armed("bernoulli", g1, t1, g2, t2, A)
        assert abs(value(inst).v - brute_force_value(inst)) <= 1e-12
    inst = one_armed("bernoulli", 2, 5, 0.45, A)
    assert abs(value(inst).v - brute_force_value(inst)) <= 1e-12


def test_brute_force_limits():
    with pytest.raises(UnsupportedFamily):
        brute_force_value(two_armed("poisson", 1, 1, 1, 1, [1.0]))
    with pytest.raises(HorizonTooLarge):
        brute_force_value(two_armed("bernoulli", 1, 2, 1, 2, disc.uniform(5)))


def test_policy_trace():
    inst = two_armed("bernoulli", 1, 2, 1, 2, disc.uniform(3))
    arm, res = optimal_policy_trace(inst, [(1, 1.0)])
    assert arm == 1
    assert res.v == pytest.approx(value(two_armed("bernoulli", 2, 3, 1, 2, disc.uniform(2))).v)
    arm, res = optimal_policy_trace(inst, [(1, 0.0)])
    assert arm == 2
    with pytest.raises(HistoryLongerThanHorizon):
        optimal_policy_trace(inst, [(1, 1.0)] * 4)
    with pytest.raises(SchemaError):
        optimal_policy_trace(inst, [(3, 1.0)])


def test_instance_errors():
    with pytest.raises(SchemaError):
        BanditInstance("bernoulli", ConjugateArm(1, 2), disc.uniform(2))
    with pytest.raises(OneArmedUnsupported):
        one_armed("bernoulli", 1, 2, 0.5, disc.uniform(2)).swapped()
    with pytest.raises(OneArmedUnsupported):
        advantage_decomposition(one_armed("bernoulli", 1, 2, 0.5, disc.uniform(2)))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 0.9), st.floats(0.5, 6.0), st.floats(0.1, 0.9), st.floats(0.5, 6.0),
       st.integers(1, 5))
def test_value_bounds(m1, t1, m2, t2, n):
    # the value lies between the best myopic payoff and perfect information
    inst = two_armed("bernoulli", m1 * t1, t1, m2 * t2, t2, disc.uniform(n))
    r = value(inst)
    assert r.v >= n * max(m1, m2) - 1e-12
    assert r.v <= n + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 0.9), st.floats(0.5, 6.0), st.floats(0.0, 1.0), st.floats(0.0, 0.2),
       st.integers(1, 5))
def test_one_armed_value_is_increasing_and_one_lipschitz_in_lambda(m, t, lam, dl, n):
    A = disc.uniform(n)
    lo = value(one_armed("bernoulli", m * t, t, lam, A)).v
    hi = value(one_armed("bernoulli", m * t, t, lam + dl, A)).v
    assert lo - 1e-12 <= hi <= lo + n * dl + 1e-12
