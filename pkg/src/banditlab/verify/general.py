"""Suites for general priors: grid priors for Bernoulli and normal arms, the convex order."""

from __future__ import annotations

import math

import numpy as np

from .. import discount as disc
from ..errors import SupportMismatch
from ..expfam import get_family
from ..genprior import (
    NormalGridPrior,
    check_heat_identity,
    contraction_cx_gap,
    is_safe_observation,
    lambda_b,
    lambda_n,
    normal_grid,
    normal_posterior,
    normal_prior,
    vb_value,
    vn_value,
)
from ..orders import CX_SLACK, GridDensity, leq_lc, mixture_pair, mixture_residuals, phi, sigma, sign_changes
from .report import Row
from .samplers import (
    case_rng,
    discount_json,
    log_uniform,
    sample_beta,
    sample_lc_pair,
    sample_mean,
    sample_n,
    sample_nonnegative,
    sample_regular,
)

GRID_PAIR_TOL = 1e-9
MIXTURE_TOL = 1e-9
NORMAL_N = 3
HEAT_TOL = 1e-4
SLOPE_TOL = 1e-6
HEAT_STEP = 1e-4
SIGN_POINTS = 4001
SIGN_RTOL = 1e-12


# -- Bernoulli arms with grid priors ----------------------------------------------------

def _second_arm(rng, size):
    if rng.random() < 0.25:
        lam = float(rng.uniform(0.1, 0.9))
        return lam, {"known": lam}
    f2, meta = sample_beta(rng, size)
    return f2, meta


def thm2(cfg, case):
    rng = case_rng(cfg.seed, case)
    size = cfg.grid_size
    f1, ft, meta = sample_lc_pair(rng, size)
    f2, meta2 = _second_arm(rng, size)
    n = sample_n(rng, cfg, lo=2)
    A = sample_nonnegative(rng, n)
    tol = min(cfg.tolerance, GRID_PAIR_TOL)
    inst = {"pair": meta, "arm2": meta2, "A": discount_json(A), "grid": size}
    lhs, rhs = vb_value(f1, f2, A).v, vb_value(ft, f2, A).v
    rows = [Row(case, "value_ordered", inst, lhs, rhs, lhs - rhs, tol)]
    A1 = disc.tail(A)
    if n < 2 or A1.total <= 0:
        return rows
    # one step of the induction: the posteriors of f1 against mixtures of those of f~
    pair = mixture_pair(f1, ft)
    res = mixture_residuals(f1, pair)
    rows.append(Row(case, "mixture_identities", dict(inst, eps=[pair.eps_star, pair.eps_sub]),
                    max(res.values()), 0.0, max(res.values()), MIXTURE_TOL))

    def v(g):
        return vb_value(g, f2, A1).v

    vs, vp = v(sigma(ft)), v(phi(ft))
    v_star, v_sub = v(pair.g_star), v(pair.g_sub)
    mix_star = (1.0 - pair.eps_star) * vs + pair.eps_star * vp
    mix_sub = pair.eps_sub * vs + (1.0 - pair.eps_sub) * vp
    rows.append(Row(case, "value_convex_in_mixture_success", inst, v_star, mix_star, v_star - mix_star, tol))
    rows.append(Row(case, "value_convex_in_mixture_failure", inst, v_sub, mix_sub, v_sub - mix_sub, tol))
    s1, p1 = v(sigma(f1)), v(phi(f1))
    rows.append(Row(case, "posterior_below_mixture_success", inst, s1, v_star, s1 - v_star, tol))
    rows.append(Row(case, "posterior_below_mixture_failure", inst, p1, v_sub, p1 - v_sub, tol))
    return rows


def cor3(cfg, case):
    rng = case_rng(cfg.seed, case)
    size = cfg.grid_size
    f1, ft, meta = sample_lc_pair(rng, size)
    n = sample_n(rng, cfg, lo=2)
    A = sample_regular(rng, n)
    lhs, rhs = lambda_b(f1, A), lambda_b(ft, A)
    inst = {"pair": meta, "A": discount_json(A), "grid": size}
    return [Row(case, "lambda_ordered", inst, lhs, rhs, lhs - rhs, min(cfg.tolerance, GRID_PAIR_TOL))]


# -- normal arms with grid priors --------------------------------------------------------

def _as_prior(like: NormalGridPrior, g: GridDensity) -> NormalGridPrior:
    return NormalGridPrior(like.theta_min, like.theta_max, g.weights)


def sample_normal_pair(rng, size: int):
    """(f1, N(alpha, 1/tau)) with f1 on either side of the normal in the lc order.

    Returns (f1, f~, below, meta); ``below`` is True when f1 <=_lc f~.
    """
    alpha = float(rng.uniform(-1.0, 1.0))
    tau = log_uniform(rng, 0.5, 4.0)
    sd = 1.0 / math.sqrt(tau)
    bounds = normal_grid(alpha, 2.0 * sd)
    tilde = normal_prior(alpha, tau, size, bounds)
    th = tilde.grid
    below = bool(rng.random() < 0.5)
    m = alpha + float(rng.uniform(-1.0, 1.0)) * sd
    s = sd * float(rng.uniform(0.2, 1.0))
    shape = "quadratic" if rng.random() < 0.5 else "logcosh"
    if below:
        k = tau * float(rng.uniform(0.2, 3.0))
        logh = -0.5 * k * (th - m) ** 2 if shape == "quadratic" else -k * s * s * np.log(np.cosh((th - m) / s))
    else:
        k = tau * float(rng.uniform(0.1, 0.7))
        logh = 0.5 * k * (th - m) ** 2 if shape == "quadratic" else float(rng.uniform(0.5, 3.0)) * np.log(np.cosh((th - m) / s))
    f1 = _as_prior(tilde, tilde.reweight(np.exp(logh - logh.max())).with_mean(tilde.mean))
    meta = {"alpha": alpha, "tau": tau, "side": "below" if below else "above", "shape": shape,
            "center": m, "scale": s, "k": k, "grid": size}
    return f1, tilde, below, meta


def _normal_pair_ok(f1, ft, below) -> bool:
    try:
        ordered = leq_lc(f1, ft) if below else leq_lc(ft, f1)
    except SupportMismatch:
        # the reweighting underflowed at the grid ends
        return False
    return ordered and abs(f1.mean - ft.mean) <= 1e-12 * max(1.0, abs(ft.mean))


def _draw_normal_pair(rng, size):
    for _ in range(50):
        f1, ft, below, meta = sample_normal_pair(rng, size)
        if _normal_pair_ok(f1, ft, below):
            return f1, ft, below, meta
    raise RuntimeError("could not draw an lc-ordered normal pair")


def thm3(cfg, case):
    rng = case_rng(cfg.seed, case)
    size = cfg.grid_size
    f1, ft, below, meta = _draw_normal_pair(rng, size)
    n = sample_n(rng, cfg, NORMAL_N, lo=2)
    A = sample_nonnegative(rng, n)
    if rng.random() < 0.25:
        f2 = float(rng.uniform(-1.0, 1.0))
        meta2 = {"known": f2}
    else:
        beta, tau2 = float(rng.uniform(-1.0, 1.0)), log_uniform(rng, 0.5, 4.0)
        f2 = normal_prior(beta, tau2, size)
        meta2 = {"alpha": beta, "tau": tau2}
    v1 = vn_value(f1, f2, A, budget=cfg.budget).v
    vt = vn_value(ft, f2, A, budget=cfg.budget).v
    inst = {"pair": meta, "arm2": meta2, "A": discount_json(A)}
    lhs, rhs = (v1, vt) if below else (vt, v1)
    return [Row(case, "value_ordered", inst, lhs, rhs, lhs - rhs, cfg.tolerance)]


def cor4(cfg, case):
    rng = case_rng(cfg.seed, case)
    size = cfg.grid_size
    f1, ft, below, meta = _draw_normal_pair(rng, size)
    n = sample_n(rng, cfg, NORMAL_N, lo=2)
    A = sample_regular(rng, n)
    l1, lt = lambda_n(f1, A, budget=cfg.budget), lambda_n(ft, A, budget=cfg.budget)
    inst = {"pair": meta, "A": discount_json(A)}
    lhs, rhs = (l1, lt) if below else (lt, l1)
    return [Row(case, "lambda_ordered", inst, lhs, rhs, lhs - rhs, cfg.tolerance)]


# -- contractions and the convex order ----------------------------------------------------

def lemma3(cfg, case):
    rng = case_rng(cfg.seed, case)
    k = int(rng.integers(3, 60))
    grid = np.unique(np.round(rng.normal(0.0, float(rng.uniform(0.5, 3.0)), k), 12))
    while grid.size < 2:
        grid = np.unique(np.concatenate([grid, rng.normal(0.0, 1.0, 2)]))
    X = GridDensity(grid, rng.dirichlet(np.full(grid.size, float(rng.uniform(0.3, 3.0)))))
    direction = "contraction" if rng.random() < 0.5 else "expansion"
    kind = int(rng.integers(3))
    m = grid.size - 1
    if direction == "contraction":
        slopes = [np.full(m, float(rng.uniform(0.0, 1.0))), rng.uniform(0.0, 1.0, m),
                  rng.choice([0.0, 1.0], m)][kind]
    else:
        slopes = [np.full(m, float(rng.uniform(1.0, 3.0))), rng.uniform(1.0, 3.0, m),
                  rng.choice([1.0, 3.0], m)][kind]
    g = np.concatenate([[0.0], np.cumsum(slopes * np.diff(grid))])
    g += X.mean - float(np.dot(X.weights, g))
    direction, gap = contraction_cx_gap(g, X, direction)
    inst = {"direction": direction, "slopes": ["constant", "random", "two_valued"][kind], "points": int(grid.size)}
    return [Row(case, "stop_loss_ordered", inst, gap, 0.0, gap, CX_SLACK)]


# -- heat identity for the posterior mean ---------------------------------------------------

def _heat_prior(rng, size):
    """A normal grid prior and, when it is lc-below N(alpha, 1/tau), that tau."""
    kind = int(rng.integers(4))
    alpha = float(rng.uniform(-1.0, 1.0))
    tau = log_uniform(rng, 0.5, 4.0)
    sd = 1.0 / math.sqrt(tau)
    lo, hi = normal_grid(alpha, 2.0 * sd)
    th = np.linspace(lo, hi, size)
    if kind == 0:
        f = normal_prior(alpha, tau, size, (lo, hi))
        return f, tau, {"kind": "normal", "alpha": alpha, "tau": tau}
    if kind == 1:
        # a normal times a log-concave factor
        m = alpha + float(rng.uniform(-1.0, 1.0)) * sd
        s = sd * float(rng.uniform(0.2, 1.0))
        k = float(rng.uniform(0.5, 5.0))
        lw = -0.5 * tau * (th - alpha) ** 2 - k * np.log(np.cosh((th - m) / s))
        f = NormalGridPrior(lo, hi, np.exp(lw - lw.max()))
        return f, tau, {"kind": "normal_times_lc", "alpha": alpha, "tau": tau, "center": m, "scale": s, "k": k}
    if kind == 2:
        # two or three spikes on grid points
        count = int(rng.integers(2, 4))
        idx = np.sort(rng.choice(np.arange(size // 4, 3 * size // 4), count, replace=False))
        w = np.zeros(size)
        w[idx] = rng.dirichlet(np.ones(count))
        f = NormalGridPrior(lo, hi, w)
        return f, None, {"kind": "spikes", "theta": th[idx].tolist()}
    # flat box
    a, b = sorted(rng.uniform(alpha - 2 * sd, alpha + 2 * sd, 2))
    w = ((th >= a) & (th <= b)).astype(float)
    if w.sum() == 0:
        w[size // 2] = 1.0
    f = NormalGridPrior(lo, hi, w)
    return f, None, {"kind": "box", "lo": float(a), "hi": float(b)}


def _safe_x(rng, f: NormalGridPrior) -> float:
    sd = math.sqrt(1.0 + f.var)
    x = f.mean + float(rng.uniform(-2.0, 2.0)) * sd
    for _ in range(60):
        if all(is_safe_observation(f, x + d) for d in (-HEAT_STEP, 0.0, HEAT_STEP)):
            return x
        x = f.mean + 0.5 * (x - f.mean)
    return f.mean


def heat(cfg, case):
    rng = case_rng(cfg.seed, case)
    f, tau, meta = _heat_prior(rng, cfg.grid_size)
    x = _safe_x(rng, f)
    lhs, rhs, err = check_heat_identity(f, x, HEAT_STEP)
    inst = dict(meta, x=x, grid=cfg.grid_size)
    rows = [Row(case, "heat_identity", inst, lhs, rhs, err, HEAT_TOL)]
    if tau is not None:
        var = normal_posterior(f, x).var
        bound = 1.0 / (tau + 1.0)
        rows.append(Row(case, "slope_at_most_shrinkage", inst, var, bound, var - bound, SLOPE_TOL))
        rows.append(Row(case, "slope_nonnegative", inst, 0.0, var, -var, 0.0))
    return rows


# -- sign sequence of a predictive difference --------------------------------------------------

def _sign_grid(fam, t, g_lo, g_hi) -> np.ndarray:
    if fam.name == "bernoulli":
        return np.array([0.0, 1.0])
    if fam.name == "poisson":
        top = max(fam.truncation(g_hi, t), 5)
        return np.arange(0, top + 1, dtype=float)
    if fam.name == "normal":
        sd = math.sqrt(1.0 + 1.0 / t)
        return np.linspace(g_lo / t - 12.0 * sd, g_hi / t + 12.0 * sd, SIGN_POINTS)
    # Lomax tails: spread the points evenly in log(1 + x / g)
    u = np.linspace(0.0, 60.0 / (t + 1.0), SIGN_POINTS)
    return g_lo * np.expm1(u)


def signseq(cfg, case):
    """The predictive of the midpoint prior minus that of the half-half mixture is -, +, - in x."""
    rng = case_rng(cfg.seed, case)
    fam = get_family(cfg.family)
    t = log_uniform(rng, cfg.tau_min, cfg.tau_max)
    m1, m2 = sorted((sample_mean(rng, fam.name), sample_mean(rng, fam.name)))
    g1, g2 = m1 * t, m2 * t
    xs = _sign_grid(fam, t, g1, g2)
    mid = np.asarray(fam.predictive_pdf(0.5 * (g1 + g2), t, xs), dtype=float)
    mix = 0.5 * (np.asarray(fam.predictive_pdf(g1, t, xs)) + np.asarray(fam.predictive_pdf(g2, t, xs)))
    # differences at the rounding level of the densities carry no sign
    pattern = sign_changes(mid - mix, SIGN_RTOL * float(np.max(mid)))
    ok = pattern in ((), ("-", "+", "-"))
    inst = {"family": fam.name, "gamma": [g1, g2], "tau": t, "pattern": "".join(pattern), "points": int(xs.size)}
    return [Row(case, "sign_pattern", inst, float(len(pattern)), 3.0, 0.0 if ok else 1.0, 0.0)]
