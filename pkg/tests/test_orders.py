import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from banditlab.errors import (
    BoundarySupport,
    DegenerateMean,
    GridMismatch,
    NonUniformGrid,
    OrderViolation,
    SchemaError,
    SupportMismatch,
    UnequalMeans,
)
from banditlab.orders import (
    GridDensity,
    beta_density,
    cx_gap,
    expit_reparam,
    leq_cx,
    leq_lc,
    leq_lr,
    leq_st,
    logit_reparam,
    midpoint_grid,
    mixture_pair,
    mixture_residuals,
    phi,
    point_mass,
    sigma,
    sign_changes,
    stop_loss,
    uniform_density,
)
from banditlab.verify.samplers import sample_lc_pair, sample_lr_pair

seeds = st.integers(0, 2**32 - 1)


def test_grid_density_validation():
    with pytest.raises(SchemaError):
        GridDensity([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(SchemaError):
        GridDensity([0.0, 1.0], [-1.0, 2.0])
    with pytest.raises(SchemaError):
        GridDensity([0.0, 1.0], [0.0, 0.0])
    f = GridDensity([0.0, 1.0], [1.0, 3.0])
    np.testing.assert_allclose(f.weights, [0.25, 0.75])
    assert f.mean == 0.75
    assert GridDensity.from_json(f.to_json()).mean == f.mean


def test_beta_discretization_moments():
    f = beta_density(2.0, 3.0, 1001)
    np.testing.assert_allclose(f.mean, 0.4, atol=1e-6)
    np.testing.assert_allclose(f.var, 0.04, atol=1e-6)


def test_with_mean_hits_the_target():
    f = beta_density(2.0, 5.0, 501)
    np.testing.assert_allclose(f.with_mean(0.6).mean, 0.6, atol=1e-13)


def test_stop_loss_and_cx_gap():
    np.testing.assert_allclose(stop_loss([0.0, 1.0], [0.5, 0.5], [-1.0, 0.0, 0.5, 1.0, 2.0]),
                               [1.5, 0.5, 0.25, 0.0, 0.0])
    # a point mass at 1/2 is below the fair coin in convex order
    assert cx_gap([0.5], [1.0], [0.0, 1.0], [0.5, 0.5]) <= 0.0
    assert cx_gap([0.0, 1.0], [0.5, 0.5], [0.5], [1.0]) > 0.0


def test_order_errors():
    f = uniform_density(11)
    with pytest.raises(GridMismatch):
        leq_st(f, uniform_density(12))
    with pytest.raises(SupportMismatch):
        leq_lr(f, point_mass(f.grid, f.grid[3]))
    with pytest.raises(UnequalMeans):
        leq_cx(f, beta_density(2.0, 5.0, 11))
    g = GridDensity([0.1, 0.2, 0.5], [1, 1, 1])
    with pytest.raises(NonUniformGrid):
        leq_lc(g, g)
    with pytest.raises(DegenerateMean):
        sigma(GridDensity([0.0], [1.0]))
    with pytest.raises(BoundarySupport):
        logit_reparam(GridDensity([0.0, 0.5], [1, 1]))


def test_sign_changes():
    assert sign_changes([0.0, -1.0, -2.0, 1e-20, 3.0, -1.0], tol=1e-12) == ("-", "+", "-")
    assert sign_changes([0.0, 0.0]) == ()


def test_posterior_operators():
    f = uniform_density(1001)
    np.testing.assert_allclose(sigma(f).mean, 2 / 3, atol=1e-6)
    np.testing.assert_allclose(phi(f).mean, 1 / 3, atol=1e-6)


def test_logit_round_trip():
    f = beta_density(2.0, 3.0, 101)
    back = expit_reparam(logit_reparam(f))
    np.testing.assert_allclose(back.grid, f.grid, atol=1e-15)
    np.testing.assert_allclose(back.weights, f.weights, rtol=1e-14)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_lr_implies_st(seed):
    f, g = sample_lr_pair(np.random.default_rng(seed), 101)
    assert leq_lr(f, g)
    assert leq_st(f, g)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_lc_with_equal_means_implies_cx(seed):
    f, g, _ = sample_lc_pair(np.random.default_rng(seed), 201)
    assert leq_lc(f, g)
    assert leq_cx(f, g)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_posterior_operators_preserve_lr(seed):
    f, g = sample_lr_pair(np.random.default_rng(seed), 101)
    assert leq_lr(sigma(f), sigma(g))
    assert leq_lr(phi(f), phi(g))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_posterior_operators_preserve_lc(seed):
    f, g, _ = sample_lc_pair(np.random.default_rng(seed), 201)
    assert leq_lc(sigma(f), sigma(g))
    assert leq_lc(phi(f), phi(g))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_mixture_identities(seed):
    f, g, _ = sample_lc_pair(np.random.default_rng(seed), 201)
    pair = mixture_pair(f, g)
    assert 0.0 <= pair.eps_star < 1.0 and 0.0 <= pair.eps_sub < 1.0
    assert max(mixture_residuals(f, pair).values()) <= 1e-9


def test_mixture_pair_rejects_reversed_order():
    f, g, _ = sample_lc_pair(np.random.default_rng(7), 201)
    if f.var < g.var:
        with pytest.raises(OrderViolation):
            mixture_pair(g, f)
