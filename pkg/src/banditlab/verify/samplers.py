"""Seeded random instances that satisfy the hypotheses of each check by construction."""

from __future__ import annotations

import numpy as np

from .. import discount as disc
from ..discount import DiscountSequence
from ..expfam import ConjugateArm
from ..orders import GridDensity, beta_density, from_logpdf, leq_lc, midpoint_grid

MARGIN = 0.05
# prior means for the families with an unbounded side
POSITIVE_MEANS = (0.25, 4.0)
NORMAL_MEANS = (-2.0, 2.0)


def case_rng(seed: int, case: int) -> np.random.Generator:
    """Independent stream per case, so cases can run in any order."""
    return np.random.default_rng([int(seed), int(case)])


def log_uniform(rng, lo: float, hi: float) -> float:
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def sample_tau(rng, cfg) -> float:
    return log_uniform(rng, cfg.tau_min, cfg.tau_max)


def mean_range(family: str) -> tuple[float, float]:
    if family == "bernoulli":
        return MARGIN, 1.0 - MARGIN
    if family == "normal":
        return NORMAL_MEANS
    return POSITIVE_MEANS


def sample_mean(rng, family: str) -> float:
    lo, hi = mean_range(family)
    if family in ("bernoulli", "normal"):
        return float(rng.uniform(lo, hi))
    return log_uniform(rng, lo, hi)


def sample_arm(rng, cfg) -> ConjugateArm:
    t = sample_tau(rng, cfg)
    return ConjugateArm(sample_mean(rng, cfg.family) * t, t)


def mean_grid(rng, family: str, points: int) -> np.ndarray:
    """Equally spaced prior means between two random interior means."""
    a, b = sorted((sample_mean(rng, family), sample_mean(rng, family)))
    if b - a < 1e-3:
        lo, hi = mean_range(family)
        a, b = lo, hi
    return np.linspace(a, b, points)


def sample_n(rng, cfg, cap: int | None = None, lo: int | None = None) -> int:
    hi = cfg.n_max if cap is None else min(cfg.n_max, cap)
    lo = max(cfg.n_min if lo is None else max(lo, cfg.n_min), 1)
    return int(rng.integers(min(lo, hi), hi + 1))


# -- discount sequences ------------------------------------------------------------

def sample_decreasing(rng, n: int) -> DiscountSequence:
    kind = rng.integers(3)
    if kind == 0:
        return disc.uniform(n)
    if kind == 1:
        return disc.geometric(float(rng.uniform(0.5, 0.99)), n)
    vals = np.sort(rng.uniform(0.0, 1.0, n))[::-1]
    vals[0] = max(vals[0], 0.1)
    if n > 1 and rng.random() < 0.2:
        vals[rng.integers(1, n):] = 0.0
    return disc.validate(vals)


def sample_nonnegative(rng, n: int) -> DiscountSequence:
    kind = rng.integers(4)
    if kind == 0:
        return disc.uniform(n)
    if kind == 1:
        return disc.geometric(float(rng.uniform(0.5, 0.99)), n)
    vals = rng.uniform(0.0, 1.0, n)
    if kind == 2:
        vals[rng.random(n) < 0.25] = 0.0
    else:
        vals = np.sort(vals)  # increasing weights
    if vals.sum() <= 0:
        vals[rng.integers(n)] = 1.0
    return disc.validate(vals)


def sample_regular(rng, n: int, positive: int = 1) -> DiscountSequence:
    """Regular A with a_1..a_positive > 0.

    Besides uniform and geometric weights, tail sums b_j = exp(l_j) with l
    concave (increasing decrements) give a regular sequence with all a_j > 0.
    """
    while True:
        kind = rng.integers(3)
        if kind == 0:
            A = disc.uniform(n)
        elif kind == 1:
            A = disc.geometric(float(rng.uniform(0.5, 0.99)), n)
        else:
            d = np.sort(rng.exponential(0.5, max(n - 1, 0)))
            b = np.exp(-np.concatenate([[0.0], np.cumsum(d)]))
            a = b - np.concatenate([b[1:], [0.0]])
            A = disc.validate(a)
        if disc.is_regular(A) and all(v > 0 for v in A.values[:positive]):
            return A


def discount_json(A: DiscountSequence) -> list[float]:
    return [float(v) for v in A.values]


# -- grid densities on [0, 1] ------------------------------------------------------

def sample_beta_pair(rng, size: int) -> tuple[GridDensity, GridDensity, dict]:
    """(f, f~) with f <=_lc f~ and equal means from Beta(c a, c b) versus Beta(a, b)."""
    a, b = log_uniform(rng, 0.5, 4.0), log_uniform(rng, 0.5, 4.0)
    c_big, c_small = [(2, 1), (4, 1), (4, 2)][rng.integers(3)]
    tilde = beta_density(c_small * a, c_small * b, size)
    f = beta_density(c_big * a, c_big * b, size).with_mean(tilde.mean)
    return f, tilde, {"kind": "beta", "a": a, "b": b, "c": [c_big, c_small]}


def _random_base(rng, size: int) -> tuple[GridDensity, dict]:
    """A smooth positive density, a two-component Beta mixture."""
    p = midpoint_grid(size)
    a1, b1, a2, b2 = (log_uniform(rng, 0.7, 6.0) for _ in range(4))
    w = float(rng.uniform(0.2, 0.8))

    def logpdf(p):
        return np.logaddexp(np.log(w) + (a1 - 1) * np.log(p) + (b1 - 1) * np.log1p(-p),
                            np.log1p(-w) + (a2 - 1) * np.log(p) + (b2 - 1) * np.log1p(-p))

    return from_logpdf(p, logpdf), {"w": w, "beta1": [a1, b1], "beta2": [a2, b2]}


def _concave_log_factor(rng, p: np.ndarray) -> tuple[np.ndarray, dict]:
    """log h with h log-concave on (0, 1)."""
    u, v = (float(z) for z in rng.uniform(0.0, 3.0, 2))
    kappa = float(rng.uniform(0.0, 20.0))
    m = float(rng.uniform(0.2, 0.8))
    return u * np.log(p) + v * np.log1p(-p) - kappa * (p - m) ** 2, {"u": u, "v": v, "kappa": kappa, "m": m}


def sample_lc_pair(rng, size: int) -> tuple[GridDensity, GridDensity, dict]:
    """(f, f~) with f <=_lc f~ and equal means, plus a description of the draw."""
    for _ in range(100):
        if rng.random() < 0.5:
            f, tilde, meta = sample_beta_pair(rng, size)
        else:
            tilde, base = _random_base(rng, size)
            logh, fac = _concave_log_factor(rng, tilde.grid)
            f = tilde.reweight(np.exp(logh - logh.max())).with_mean(tilde.mean)
            meta = {"kind": "mixture_times_lc", "base": base, "factor": fac}
        if leq_lc(f, tilde) and abs(f.mean - tilde.mean) <= 1e-12:
            return f, tilde, meta
    raise RuntimeError("could not draw an lc-ordered pair")


def sample_beta(rng, size: int) -> tuple[GridDensity, dict]:
    a, b = log_uniform(rng, 0.5, 6.0), log_uniform(rng, 0.5, 6.0)
    return beta_density(a, b, size), {"kind": "beta", "a": a, "b": b}


def sample_lr_pair(rng, size: int) -> tuple[GridDensity, GridDensity]:
    """(f, g) with f <=_lr g: g is f reweighted by a random increasing factor."""
    p = midpoint_grid(size)
    f = GridDensity(p, rng.dirichlet(np.full(size, float(rng.uniform(0.5, 5.0)))))
    steps = rng.exponential(1.0, size - 1) * float(rng.uniform(0.0, 10.0)) / size
    steps[rng.random(size - 1) < 0.3] = 0.0
    logr = np.concatenate([[0.0], np.cumsum(steps)])
    return f, f.reweight(np.exp(logr - logr.max()))
