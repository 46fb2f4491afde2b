import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from banditlab.errors import ImproperPrior, NonPositiveScale, ObservationOutOfSupport, UnsupportedFamily
from banditlab.expfam import (
    ConjugateArm,
    arm_from_json,
    get_family,
    posterior_update,
    predictive,
    predictive_density_numeric,
    scale_arm,
    validate_arm,
)

ARMS = {
    "bernoulli": ConjugateArm(1.3, 3.1),
    "poisson": ConjugateArm(2.5, 1.7),
    "normal": ConjugateArm(-0.4, 2.2),
    "exponential": ConjugateArm(3.0, 2.5),
}


def test_families_and_errors():
    assert set(ARMS) == {get_family(n).name for n in ARMS}
    with pytest.raises(UnsupportedFamily):
        get_family("cauchy")
    with pytest.raises(ImproperPrior):
        validate_arm("bernoulli", ConjugateArm(2.0, 2.0))
    with pytest.raises(ImproperPrior):
        validate_arm("poisson", ConjugateArm(1.0, 0.0))
    with pytest.raises(ObservationOutOfSupport):
        posterior_update(ConjugateArm(1.0, 2.0), 2.0, "bernoulli")
    with pytest.raises(NonPositiveScale):
        scale_arm(ConjugateArm(1.0, 2.0), 0.0)


def test_posterior_update_and_json():
    arm = posterior_update(ConjugateArm(1.0, 2.0), 1.0, "bernoulli")
    assert arm == ConjugateArm(2.0, 3.0)
    assert arm_from_json(arm.to_json()) == arm
    assert scale_arm(arm, 2.0) == ConjugateArm(4.0, 6.0)


@pytest.mark.parametrize("name", sorted(ARMS))
def test_predictive_moments(name):
    arm = ARMS[name]
    pr = predictive(name, arm)
    np.testing.assert_allclose(pr.weights.sum(), 1.0, rtol=1e-12)
    np.testing.assert_allclose(np.dot(pr.weights, pr.nodes), arm.mean, rtol=1e-9)
    assert pr.mean == pytest.approx(arm.mean)


@pytest.mark.parametrize("name", sorted(ARMS))
def test_closed_form_predictive_matches_integral(name):
    fam = get_family(name)
    arm = ARMS[name]
    xs = {"bernoulli": [0.0, 1.0], "poisson": [0.0, 2.0, 5.0],
          "normal": [-1.0, 0.3, 2.0], "exponential": [0.1, 1.0, 4.0]}[name]
    for x in xs:
        closed = float(fam.predictive_pdf(arm.gamma, arm.tau, x))
        np.testing.assert_allclose(predictive_density_numeric(fam, arm, x), closed, rtol=1e-7)


def test_poisson_truncation_controls_tail():
    fam = get_family("poisson")
    m = fam.truncation(4.0, 0.5)
    k = np.arange(m + 1)
    mass = fam.predictive_pdf(4.0, 0.5, k)
    assert 1.0 - mass.sum() < 1e-10
    assert fam.predictive_pdf(4.0, 0.5, 1.5) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.2, 20.0))
def test_bernoulli_predictive_is_the_mean(mu, tau):
    fam = get_family("bernoulli")
    assert float(fam.predictive_pdf(mu * tau, tau, 1.0)) == pytest.approx(mu)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(0.3, 10.0), st.floats(0.0, 10.0))
def test_exponential_excess_matches_integral(g, t, c):
    fam = get_family("exponential")
    x0 = max(c * (t + 1.0) - g, 0.0)
    ref = integrate.quad(lambda x: ((g + x) / (t + 1.0) - c) * fam.predictive_pdf(g, t, x), x0, np.inf,
                         epsabs=1e-13, epsrel=1e-11)[0]
    assert float(fam.excess(g, t, c)) == pytest.approx(ref, rel=1e-7, abs=1e-11)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(0.2, 10.0), st.floats(-3.0, 3.0))
def test_normal_excess_matches_integral(g, t, c):
    fam = get_family("normal")
    x0 = c * (t + 1.0) - g
    ref = integrate.quad(lambda x: ((g + x) / (t + 1.0) - c) * fam.predictive_pdf(g, t, x), x0, np.inf,
                         epsabs=1e-13, epsrel=1e-11)[0]
    assert float(fam.excess(g, t, c)) == pytest.approx(ref, rel=1e-7, abs=1e-11)


def test_normal_excess_at_the_mean():
    fam = get_family("normal")
    s = 1.0 / math.sqrt(2.0 * 3.0)
    assert float(fam.excess(1.0, 2.0, 0.5)) == pytest.approx(s / math.sqrt(2 * math.pi))
