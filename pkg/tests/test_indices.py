import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from banditlab import discount as disc
from banditlab.engine import one_armed, value
from banditlab.errors import InsufficientHorizon, NotRegular, ZeroFirstWeight
from banditlab.expfam import ConjugateArm
from banditlab.indices import breakeven_observation, breakeven_value, root_decreasing


@pytest.mark.parametrize("arm, expected", [((1, 2), 5 / 9), ((2, 4), 8 / 15)])
def test_hand_derived_breakeven_values(arm, expected):
    r = breakeven_value("bernoulli", ConjugateArm(*arm), disc.uniform(2))
    assert abs(r.lam - expected) <= 1e-9
    assert r.bracket[0] <= expected <= r.bracket[1]


def test_hand_derived_breakeven_observation():
    assert abs(breakeven_observation("bernoulli", ConjugateArm(1, 2), disc.uniform(2)) - 2 / 3) <= 1e-8


def test_preconditions():
    with pytest.raises(NotRegular):
        breakeven_value("bernoulli", ConjugateArm(1, 2), disc.validate([1, 0, 1]))
    with pytest.raises(ZeroFirstWeight):
        breakeven_value("bernoulli", ConjugateArm(1, 2), disc.validate([0, 1, 1]))
    with pytest.raises(InsufficientHorizon):
        breakeven_observation("bernoulli", ConjugateArm(1, 2), disc.uniform(1))


def test_one_stage_breakeven_is_the_mean():
    assert breakeven_value("poisson", ConjugateArm(3, 2), disc.uniform(1)).lam == 1.5


def test_root_finder():
    fn = lambda x: math.cos(x) - x
    lo, hi = 0.0, 1.0
    root, blo, bhi, _ = root_decreasing(fn, lo, hi, fn(lo), fn(hi), 1e-14)
    assert abs(root - 0.7390851332151607) < 1e-13
    assert bhi - blo <= 1e-14


@pytest.mark.parametrize("family, arm", [("bernoulli", (1.0, 3.0)), ("poisson", (2.0, 1.5)),
                                         ("normal", (0.4, 1.5)), ("exponential", (3.0, 2.0))])
def test_breakeven_makes_both_arms_equally_good(family, arm):
    A = disc.uniform(3)
    lam = breakeven_value(family, ConjugateArm(*arm), A).lam
    assert lam > arm[0] / arm[1]
    tol = 1e-9 if family in ("bernoulli", "poisson") else 1e-5
    res = value(one_armed(family, *arm, lam, A))
    assert abs(res.advantage) <= 3 * tol


@pytest.mark.parametrize("family, tau", [("normal", 1.5), ("exponential", 2.0)])
def test_invariance_shortcut_agrees_with_a_direct_solve(family, tau):
    A = disc.uniform(3)
    gamma = 0.7 if family == "normal" else 2.6
    arm = ConjugateArm(gamma, tau)
    fast = breakeven_value(family, arm, A).lam
    slow = breakeven_value(family, arm, A, use_invariance=False).lam
    assert abs(fast - slow) <= 1e-5


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.5, 8.0), st.integers(2, 6))
def test_bernoulli_breakeven_lies_between_mean_and_one(m, t, n):
    lam = breakeven_value("bernoulli", ConjugateArm(m * t, t), disc.uniform(n)).lam
    assert m <= lam < 1.0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.5, 8.0), st.integers(2, 5))
def test_breakeven_observation_fixed_point(m, t, n):
    A = disc.uniform(n)
    arm = ConjugateArm(m * t, t)
    b = breakeven_observation("bernoulli", arm, A)
    lam = breakeven_value("bernoulli", arm, A, 1e-12).lam
    after = breakeven_value("bernoulli", ConjugateArm(arm.gamma + b, t + 1), disc.tail(A), 1e-12).lam
    assert m <= b < 1.0
    assert abs(after - lam) <= 1e-6
