"""Report-only sweeps for open conjectures.

Each explorer enumerates a fixed grid of instances, so ``cfg.cases`` and the
seed play no role beyond the herschkorn pair draws.  A row whose gap exceeds
the tolerance is a candidate counterexample; it never fails the run.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .. import discount as disc
from ..engine import two_armed, value
from ..errors import SupportMismatch
from ..expfam import ConjugateArm, get_family
from ..genprior import lambda_b
from ..indices import breakeven_observation, breakeven_value
from ..orders import GridDensity, leq_cx, leq_lc, midpoint_grid
from .report import Row
from .samplers import case_rng, discount_json

BERRY_MEANS = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)
BERRY_TAUS = (2, 3, 4, 5, 6, 7, 8)
CONTINUOUS_EXPLORER_N = 3
B_VS_LAMBDA_TOL = 1e-6
HERSCHKORN_GRID = 41


def _discount(cfg, n):
    if cfg.discount == "geometric":
        return disc.geometric(cfg.beta, n)
    return disc.uniform(n)


def _horizons(cfg, lo=2):
    hi = cfg.n_max
    if not get_family(cfg.family).discrete:
        hi = min(hi, CONTINUOUS_EXPLORER_N)
    return range(max(lo, cfg.n_min), hi + 1)


# -- equal means, the less informed arm is better --------------------------------------------

def berry_instances(cfg) -> list[tuple]:
    fam = get_family(cfg.family)
    if fam.name == "bernoulli":
        means = BERRY_MEANS
    elif fam.name == "normal":
        means = (-1.0, -0.5, 0.0, 0.5, 1.0)
    else:
        means = (0.5, 1.0, 2.0)
    out = []
    for n in _horizons(cfg):
        for mu in means:
            for t1 in BERRY_TAUS:
                # t2 = t1 is the symmetric sanity row, Delta = 0
                for t2 in range(1, t1 + 1):
                    out.append((n, mu, float(t1), float(t2)))
    return out


def berry(cfg, case):
    """Delta with gamma_1 / tau_1 = gamma_2 / tau_2 and tau_1 > tau_2; the claim is Delta <= 0."""
    n, mu, t1, t2 = berry_instances(cfg)[case]
    A = _discount(cfg, n)
    d = value(two_armed(cfg.family, mu * t1, t1, mu * t2, t2, A)).advantage
    check = "symmetric_delta_zero" if t1 == t2 else "better_informed_arm_not_better"
    inst = {"family": cfg.family, "mean": mu, "tau1": t1, "tau2": t2, "A": discount_json(A)}
    gap = abs(d) if t1 == t2 else d
    return [Row(case, check, inst, d, 0.0, gap, cfg.tolerance)]


# -- break-even observation against the break-even value --------------------------------------

def _b_vs_lambda_arms(cfg) -> list[tuple[float, float]]:
    fam = get_family(cfg.family)
    if fam.name == "bernoulli":
        if cfg.extended:
            taus = (0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0)
            fracs = (0.1, 0.25, 0.5, 0.75, 0.9)
            return [(f * t, t) for t in taus for f in fracs]
        return [(float(g), float(t)) for t in range(2, 9) for g in range(1, t)]
    if fam.name == "normal":
        return [(0.0, t) for t in (0.5, 1.0, 2.0, 4.0)]
    return [(t, t) for t in (0.5, 1.0, 2.0, 4.0)] + [(2.0 * t, t) for t in (1.0, 4.0)]


def b_vs_lambda_instances(cfg) -> list[tuple]:
    fam = get_family(cfg.family)
    hi = 5 if fam.discrete else 3
    ns = range(max(2, cfg.n_min), min(cfg.n_max, hi) + 1)
    kinds = [("uniform", None)]
    if cfg.extended:
        kinds += [("geometric", 0.9), ("geometric", 0.7)]
    elif cfg.discount == "geometric":
        kinds = [("geometric", cfg.beta)]
    return [(n, kind, beta, g, t) for (kind, beta) in kinds for n in ns for (g, t) in _b_vs_lambda_arms(cfg)]


def b_vs_lambda(cfg, case):
    """b(gamma, tau; A) - Lambda(gamma, tau; A); the conjecture is that it is nonnegative."""
    n, kind, beta, g, t = b_vs_lambda_instances(cfg)[case]
    A = disc.uniform(n) if kind == "uniform" else disc.geometric(beta, n)
    fam = get_family(cfg.family)
    arm = ConjugateArm(g, t)
    lam = breakeven_value(fam, arm, A).lam
    b = breakeven_observation(fam, arm, A)
    inst = {"family": fam.name, "arm": [g, t], "A": discount_json(A)}
    if fam.name == "bernoulli" and float(g).is_integer() and float(t).is_integer():
        inst["mean"] = str(Fraction(int(g), int(t)))
    return [Row(case, "b_at_least_lambda", inst, lam, b, lam - b, B_VS_LAMBDA_TOL)]


# -- convex order without the lc order ------------------------------------------------------

def _three_two_pair(rng, size):
    """Three-point f against the two outer points carrying the same mean."""
    grid = midpoint_grid(size)
    i, j, k = np.sort(rng.choice(size, 3, replace=False))
    wf = np.zeros(size)
    wf[[i, j, k]] = rng.dirichlet(np.ones(3))
    f = GridDensity(grid, wf)
    # move the middle mass to the ends, keeping its mean
    mj = wf[j]
    share_k = mj * (grid[j] - grid[i]) / (grid[k] - grid[i])
    wt = np.zeros(size)
    wt[i] = wf[i] + mj - share_k
    wt[k] = wf[k] + share_k
    return f, GridDensity(grid, wt), {"kind": "three_vs_two", "points": [int(i), int(j), int(k)]}


def _spread_pair(rng, size):
    """A positive f and the result of a few mean-preserving spreads."""
    grid = midpoint_grid(size)
    wf = rng.dirichlet(np.full(size, float(rng.uniform(0.5, 5.0))))
    wt = wf.copy()
    moves = int(rng.integers(1, 6))
    for _ in range(moves):
        i, j, k = np.sort(rng.choice(size, 3, replace=False))
        take = float(rng.uniform(0.2, 0.9)) * wt[j]
        share_k = take * (grid[j] - grid[i]) / (grid[k] - grid[i])
        wt[j] -= take
        wt[i] += take - share_k
        wt[k] += share_k
    return GridDensity(grid, wf), GridDensity(grid, wt), {"kind": "spreads", "moves": moves}


def _not_lc(f, g) -> bool:
    try:
        return not leq_lc(f, g)
    except SupportMismatch:
        return True


def herschkorn(cfg, case):
    """Lambda_B(f) - Lambda_B(f~) for f <=_cx f~ that are not lc-ordered; the conjecture is <= 0."""
    rng = case_rng(cfg.seed, case)
    size = HERSCHKORN_GRID
    n = int(rng.integers(max(2, cfg.n_min), max(2, cfg.n_max) + 1))
    A = _discount(cfg, n)
    if case == 0:
        f, meta = GridDensity(midpoint_grid(size), rng.dirichlet(np.ones(size))), {"kind": "identical"}
        ft = f
    else:
        for _ in range(100):
            f, ft, meta = (_three_two_pair if rng.random() < 0.3 else _spread_pair)(rng, size)
            if leq_cx(f, ft) and _not_lc(f, ft):
                break
        else:
            raise RuntimeError("could not draw a cx-but-not-lc pair")
    lf, lt = lambda_b(f, A), lambda_b(ft, A)
    inst = dict(meta, grid=size, A=discount_json(A), mean=f.mean)
    return [Row(case, "lambda_ordered_under_cx", inst, lf, lt, lf - lt, cfg.tolerance)]


def herschkorn_cases(cfg) -> int:
    return cfg.cases


__all__ = ["berry", "berry_instances", "b_vs_lambda", "b_vs_lambda_instances", "herschkorn",
           "herschkorn_cases"]
