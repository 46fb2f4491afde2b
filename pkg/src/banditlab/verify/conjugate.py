"""Suites for conjugate priors: monotonicity of the advantage and value, break-even values."""

from __future__ import annotations

import itertools

import numpy as np
from scipy import stats

from .. import discount as disc
from ..discount import DiscountSequence
from ..engine import brute_force_value, one_armed, two_armed, value
from ..expfam import ConjugateArm, get_family
from ..indices import breakeven_observation, breakeven_value
from .report import Row
from .samplers import (
    case_rng,
    discount_json,
    mean_grid,
    sample_arm,
    sample_decreasing,
    sample_n,
    sample_nonnegative,
    sample_regular,
    sample_tau,
)

# horizons for continuous families, where every value is a quadrature tree
TWO_ARMED_CONTINUOUS_N = 3
ONE_ARMED_CONTINUOUS_N = 4
# offsets around the break-even value in the threshold check, relative to max(1, |lam|)
LAMBDA_OFFSET = {True: 1e-6, False: 1e-4}
FIXED_POINT_TOL = 1e-6


def _continuous(cfg) -> bool:
    return not get_family(cfg.family).discrete


def _two_cap(cfg):
    return TWO_ARMED_CONTINUOUS_N if _continuous(cfg) else None


def _arm(g, t):
    return [float(g), float(t)]


def _adv(fam, g1, t1, g2, t2, A) -> float:
    return value(two_armed(fam, g1, t1, g2, t2, A)).advantage


def _v(fam, g1, t1, g2, t2, A) -> float:
    return value(two_armed(fam, g1, t1, g2, t2, A)).v


def _decreasing_with_tail(rng, n) -> DiscountSequence:
    """Decreasing A with a_2 > 0, so the tail A^1 carries mass."""
    while True:
        A = sample_decreasing(rng, n)
        if A.values[1] > 0:
            return A


# -- Delta increases in gamma_1 ------------------------------------------------------

def prop1(cfg, case):
    rng = case_rng(cfg.seed, case)
    n = sample_n(rng, cfg, _two_cap(cfg))
    A = sample_decreasing(rng, n)
    t1 = sample_tau(rng, cfg)
    arm2 = sample_arm(rng, cfg)
    g1 = mean_grid(rng, cfg.family, cfg.grid_points) * t1
    deltas = [_adv(cfg.family, g, t1, arm2.gamma, arm2.tau, A) for g in g1]
    rows = []
    for i in range(len(g1) - 1):
        inst = {"family": cfg.family, "arm1": [_arm(g1[i], t1), _arm(g1[i + 1], t1)],
                "arm2": _arm(arm2.gamma, arm2.tau), "A": discount_json(A)}
        rows.append(Row(case, "delta_increasing_in_gamma1", inst, deltas[i], deltas[i + 1],
                        deltas[i] - deltas[i + 1], cfg.tolerance))
    return rows


def _x_grid(cfg, arm: ConjugateArm) -> np.ndarray:
    """Sorted observations covering the bulk of the predictive of ``arm``."""
    g, t = arm.gamma, arm.tau
    mu = g / t
    if cfg.family == "bernoulli":
        return np.array([0.0, 1.0])
    if cfg.family == "poisson":
        top = int(stats.nbinom.ppf(0.999, g, t / (t + 1.0)))
        return np.arange(0, min(max(top, 2), 20) + 1, dtype=float)
    k = 2 * cfg.grid_points + 1
    if cfg.family == "normal":
        sd = np.sqrt((t + 1.0) / t)
        return mu + sd * np.linspace(-4.0, 4.0, k)
    return mu * np.concatenate([[0.0], np.geomspace(0.05, 20.0, k - 1)])


def prop1_threshold(cfg, case):
    """Delta(gamma_1 + x, tau_1 + 1; A^1) changes sign at most once, from - to +."""
    rng = case_rng(cfg.seed, case)
    n = sample_n(rng, cfg, _two_cap(cfg), lo=2)
    A = _decreasing_with_tail(rng, n)
    A1 = disc.tail(A)
    arm1, arm2 = sample_arm(rng, cfg), sample_arm(rng, cfg)
    xs = _x_grid(cfg, arm1)
    d = np.array([_adv(cfg.family, arm1.gamma + x, arm1.tau + 1, arm2.gamma, arm2.tau, A1) for x in xs])
    # worst pair i < j with arm 1 better at x_i and arm 2 better at x_j
    gap, lhs, rhs = -np.inf, d[0], d[-1]
    for i, j in itertools.combinations(range(len(xs)), 2):
        g = min(d[i], -d[j])
        if g > gap:
            gap, lhs, rhs = g, d[i], d[j]
    pattern = "".join("+" if v > cfg.tolerance else "-" if v < -cfg.tolerance else "0" for v in d)
    inst = {"family": cfg.family, "arm1": _arm(arm1.gamma, arm1.tau), "arm2": _arm(arm2.gamma, arm2.tau),
            "A": discount_json(A), "x": [float(x) for x in xs], "pattern": pattern}
    return [Row(case, "single_crossing_in_x", inst, float(lhs), float(rhs), float(gap), cfg.tolerance)]


# -- arm 1 stays optimal after a large observation --------------------------------------

def _large_observation(cfg, arm1: ConjugateArm, arm2: ConjugateArm) -> float:
    fam = get_family(cfg.family)
    upper = fam.support[1]
    if np.isfinite(upper):
        return float(upper)
    mu2 = arm2.gamma / arm2.tau
    target = mu2 + 5.0 * max(1.0, abs(mu2))
    x = (arm1.tau + 1.0) * target - arm1.gamma
    return float(np.ceil(x)) if fam.discrete else float(x)


def thm0(cfg, case):
    rng = case_rng(cfg.seed, case)
    fam = cfg.family
    n = sample_n(rng, cfg, _two_cap(cfg), lo=2)
    chosen = None
    if rng.random() < 0.5:
        # mu_1 <= mu_2 with arm 1 initially optimal; found by rejection
        A = _decreasing_with_tail(rng, n)
        for _ in range(50):
            a1, a2 = sample_arm(rng, cfg), sample_arm(rng, cfg)
            if a1.gamma / a1.tau > a2.gamma / a2.tau:
                a1, a2 = (ConjugateArm(a2.gamma / a2.tau * a1.tau, a1.tau),
                          ConjugateArm(a1.gamma / a1.tau * a2.tau, a2.tau))
            if _adv(fam, a1.gamma, a1.tau, a2.gamma, a2.tau, A) >= 0:
                chosen = ("mean_ordered", A, a1, a2)
                break
    if chosen is None:
        # a_1 = a_2; swapping the arms flips the sign of Delta
        vals = list(_decreasing_with_tail(rng, n).values)
        vals[1] = vals[0]
        A = disc.validate(vals)
        a1, a2 = sample_arm(rng, cfg), sample_arm(rng, cfg)
        if _adv(fam, a1.gamma, a1.tau, a2.gamma, a2.tau, A) < 0:
            a1, a2 = a2, a1
        chosen = ("equal_first_weights", A, a1, a2)
    branch, A, a1, a2 = chosen
    x = _large_observation(cfg, a1, a2)
    d = _adv(fam, a1.gamma + x, a1.tau + 1, a2.gamma, a2.tau, disc.tail(A))
    inst = {"family": fam, "arm1": _arm(a1.gamma, a1.tau), "arm2": _arm(a2.gamma, a2.tau),
            "A": discount_json(A), "x": x, "branch": branch}
    return [Row(case, "arm1_optimal_after_large_x", inst, 0.0, d, -d, cfg.tolerance)]


# -- the value is increasing and convex in each gamma; decreasing in the scale c ------------

def prop2(cfg, case):
    rng = case_rng(cfg.seed, case)
    fam = cfg.family
    n = sample_n(rng, cfg, _two_cap(cfg))
    A = sample_nonnegative(rng, n)
    arm1, arm2 = sample_arm(rng, cfg), sample_arm(rng, cfg)
    rows = []
    for which in (1, 2):
        moving, fixed = (arm1, arm2) if which == 1 else (arm2, arm1)
        gs = mean_grid(rng, fam, cfg.grid_points) * moving.tau

        def v_at(g):
            if which == 1:
                return _v(fam, g, moving.tau, fixed.gamma, fixed.tau, A)
            return _v(fam, fixed.gamma, fixed.tau, g, moving.tau, A)

        vs = np.array([v_at(g) for g in gs])
        inst = {"family": fam, "vary": f"gamma{which}", "gamma": [float(g) for g in gs],
                "tau": float(moving.tau), "other": _arm(fixed.gamma, fixed.tau), "A": discount_json(A)}
        for i in range(len(gs) - 1):
            rows.append(Row(case, f"value_increasing_in_gamma{which}", dict(inst, index=i),
                            vs[i], vs[i + 1], vs[i] - vs[i + 1], cfg.tolerance))
        for i in range(1, len(gs) - 1):
            rows.append(Row(case, f"value_midpoint_convex_in_gamma{which}", dict(inst, index=i),
                            2 * vs[i], vs[i - 1] + vs[i + 1], 2 * vs[i] - vs[i - 1] - vs[i + 1], cfg.tolerance))
    return rows


def c_grid(cfg) -> np.ndarray:
    if cfg.c_grid is not None:
        return np.asarray(cfg.c_grid, dtype=float)
    return np.geomspace(0.5, 4.0, cfg.grid_points)


def thm1(cfg, case):
    rng = case_rng(cfg.seed, case)
    fam = cfg.family
    n = sample_n(rng, cfg, _two_cap(cfg))
    A = sample_nonnegative(rng, n)
    arm1, arm2 = sample_arm(rng, cfg), sample_arm(rng, cfg)
    cs = c_grid(cfg)
    vs = [_v(fam, c * arm1.gamma, c * arm1.tau, arm2.gamma, arm2.tau, A) for c in cs]
    rows = []
    for i in range(len(cs) - 1):
        inst = {"family": fam, "arm1": _arm(arm1.gamma, arm1.tau), "arm2": _arm(arm2.gamma, arm2.tau),
                "A": discount_json(A), "c": [float(cs[i]), float(cs[i + 1])]}
        rows.append(Row(case, "value_decreasing_in_c", inst, vs[i + 1], vs[i], vs[i + 1] - vs[i], cfg.tolerance))
    return rows


# -- break-even values ---------------------------------------------------------------

def lemma_lam(cfg, case):
    """Arm 1 is optimal just below the break-even value and the known arm just above."""
    rng = case_rng(cfg.seed, case)
    fam = get_family(cfg.family)
    n = sample_n(rng, cfg, _one_cap(cfg))
    A = sample_regular(rng, n)
    arm = sample_arm(rng, cfg)
    lam = breakeven_value(fam, arm, A).lam
    delta = LAMBDA_OFFSET[fam.discrete] * max(1.0, abs(lam))
    lo, hi = lam - delta, lam + delta
    below = value(one_armed(fam, arm.gamma, arm.tau, lo, A))
    above = value(one_armed(fam, arm.gamma, arm.tau, hi, A))
    inst = {"family": fam.name, "arm": _arm(arm.gamma, arm.tau), "A": discount_json(A),
            "lambda": lam, "delta": delta}
    tol = cfg.tolerance
    b1 = A.total
    return [
        Row(case, "arm1_optimal_below", inst, 0.0, below.advantage, -below.advantage, tol),
        Row(case, "known_optimal_above", inst, above.advantage, 0.0, above.advantage, tol),
        Row(case, "value_exceeds_known_below", inst, lo * b1, below.v, lo * b1 - below.v, tol),
        Row(case, "value_equals_known_above", inst, above.v, hi * b1, above.v - hi * b1, tol),
    ]


def _one_cap(cfg):
    return ONE_ARMED_CONTINUOUS_N if _continuous(cfg) else None


def cor1(cfg, case):
    rng = case_rng(cfg.seed, case)
    fam = get_family(cfg.family)
    n = sample_n(rng, cfg, _one_cap(cfg))
    A = sample_regular(rng, n)
    arm = sample_arm(rng, cfg)
    tol = cfg.tolerance
    rows = []
    cs = c_grid(cfg)
    lams = [breakeven_value(fam, ConjugateArm(c * arm.gamma, c * arm.tau), A).lam for c in cs]
    for i in range(len(cs) - 1):
        inst = {"family": fam.name, "arm": _arm(arm.gamma, arm.tau), "A": discount_json(A),
                "c": [float(cs[i]), float(cs[i + 1])]}
        rows.append(Row(case, "lambda_decreasing_in_c", inst, lams[i + 1], lams[i], lams[i + 1] - lams[i], tol))
    gs = mean_grid(rng, fam.name, cfg.grid_points) * arm.tau
    lams = [breakeven_value(fam, ConjugateArm(g, arm.tau), A).lam for g in gs]
    for i in range(len(gs) - 1):
        inst = {"family": fam.name, "gamma": [float(gs[i]), float(gs[i + 1])], "tau": arm.tau,
                "A": discount_json(A), "margin": cfg.strict_margin}
        # strict increase: the step must be at least the margin
        rows.append(Row(case, "lambda_strictly_increasing_in_gamma", inst, lams[i], lams[i + 1],
                        lams[i] + cfg.strict_margin - lams[i + 1], 0.0))
    return rows


def prop3(cfg, case):
    rng = case_rng(cfg.seed, case)
    fam = get_family(cfg.family)
    n = sample_n(rng, cfg, _one_cap(cfg), lo=2)
    A = sample_regular(rng, n, positive=2)
    arm = sample_arm(rng, cfg)
    mu = arm.gamma / arm.tau
    lam = breakeven_value(fam, arm, A).lam
    b = breakeven_observation(fam, arm, A)
    inner = breakeven_value(fam, ConjugateArm(arm.gamma + b, arm.tau + 1.0), disc.tail(A)).lam
    inst = {"family": fam.name, "arm": _arm(arm.gamma, arm.tau), "A": discount_json(A), "b": b, "lambda": lam}
    tol = cfg.tolerance
    rows = [Row(case, "b_at_least_mean", inst, mu, b, mu - b, tol)]
    upper = fam.support[1]
    if np.isfinite(upper):
        rows.append(Row(case, "b_below_upper_end", inst, b, upper, b - upper, 0.0 if b < upper else -1.0))
    rows.append(Row(case, "fixed_point", inst, inner, lam, abs(inner - lam), FIXED_POINT_TOL))
    return rows


# -- engine against strategy enumeration -------------------------------------------------

ORACLE_TAUS = (1, 2, 3, 4, 5)
ORACLE_SEQUENCES = ((1.0, 1.0, 1.0), (3.0, 2.0, 1.0), (1.0, 1.0, 0.0))
ORACLE_KNOWN = (0.25, 0.5, 0.75)
ORACLE_TOL = 1e-12


def oracle_instances(n_max: int = 3) -> list[dict]:
    arms = [(g, t) for t in ORACLE_TAUS for g in range(1, t)]
    seqs = sorted({s[:n] for s in ORACLE_SEQUENCES for n in range(1, n_max + 1) if sum(s[:n]) > 0})
    out = []
    for A in seqs:
        for a1, a2 in itertools.product(arms, repeat=2):
            out.append({"arm1": a1, "arm2": a2, "A": A})
        for a1 in arms:
            for lam in ORACLE_KNOWN:
                out.append({"arm1": a1, "known": lam, "A": A})
    return out


def oracle(cfg, case):
    spec = oracle_instances(min(cfg.n_max, 3))[case]
    A = disc.validate(spec["A"])
    (g1, t1) = spec["arm1"]
    if "known" in spec:
        inst = one_armed("bernoulli", g1, t1, spec["known"], A)
    else:
        inst = two_armed("bernoulli", g1, t1, *spec["arm2"], A)
    lhs = value(inst).v
    rhs = brute_force_value(inst)
    js = {"family": "bernoulli", "arm1": list(spec["arm1"]), "A": list(A.values)}
    js.update({"known": spec["known"]} if "known" in spec else {"arm2": list(spec["arm2"])})
    return [Row(case, "engine_equals_enumeration", js, lhs, rhs, abs(lhs - rhs), ORACLE_TOL)]


def oracle_cases(cfg) -> int:
    return len(oracle_instances(min(cfg.n_max, 3)))


__all__ = ["prop1", "prop1_threshold", "thm0", "prop2", "thm1", "lemma_lam", "cor1", "prop3", "oracle",
           "oracle_cases", "oracle_instances", "c_grid"]
