"""Break-even values and break-even observations of one-armed bandits.

With a regular discount sequence the one-armed bandit is an optimal stopping
problem: once the known arm is chosen it is kept.  For a known payoff lam let
C_k(s) be the value of pulling the unknown arm at stage k (state s) and
playing optimally after, so the value-to-go is max(lam * b_k, C_k(s)).  The
break-even value is the root of

    D(lam) = C_0(gamma) - lam * b_1,

which is strictly decreasing (slope at most -a_1), so a bracketing root finder
applies directly.  Discrete families solve the stopping recursion exactly on a
lattice; normal and exponential arms use a spline over a grid of posterior
means with the kink at the stopping boundary integrated exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import stats
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from . import discount as disc
from .discount import DiscountSequence
from .engine import ArmLattice
from .errors import (
    BracketFailure,
    InsufficientHorizon,
    NotRegular,
    RootNotBracketed,
    ZeroFirstWeight,
)
from .expfam import ConjugateArm, FamilySpec, get_family, validate_arm
from .quad import composite_rule

MAX_DOUBLINGS = 60
MAX_ITER = 500
GRID_POINTS = 241


@dataclass(frozen=True)
class BreakEvenResult:
    lam: float
    bracket: tuple[float, float]
    iterations: int

    def to_json(self) -> dict:
        return {"lambda": self.lam, "bracket": list(self.bracket), "iterations": self.iterations}


def default_tol(family) -> float:
    return 1e-9 if get_family(family).discrete else 1e-6


def _require_regular(A: DiscountSequence) -> None:
    if not disc.is_regular(A):
        raise NotRegular(f"discount sequence {A.values} is not regular")
    if A.values[0] <= 0:
        raise ZeroFirstWeight("the first discount weight must be positive")


# -- bracketing root finder ---------------------------------------------------

def root_decreasing(fn, lo: float, hi: float, flo: float, fhi: float, tol: float,
                    max_iter: int = MAX_ITER) -> tuple[float, float, float, int]:
    """Root of a decreasing fn with fn(lo) > 0 > fn(hi).

    Illinois false position with a bisection step whenever one end has been
    kept twice in a row, so the bracket always shrinks geometrically.
    Returns (root, lo, hi, iterations).
    """
    side = 0
    for it in range(1, max_iter + 1):
        if hi - lo <= tol:
            return 0.5 * (lo + hi), lo, hi, it - 1
        if side in (-2, 2):
            x = 0.5 * (lo + hi)
        else:
            x = hi - fhi * (hi - lo) / (fhi - flo)
            if not lo < x < hi:
                x = 0.5 * (lo + hi)
        fx = fn(x)
        if fx == 0.0:
            return x, x, x, it
        if fx > 0:
            lo, flo = x, fx
            side = side - 1 if side < 0 else -1
            if side == -2:
                fhi *= 0.5
        else:
            hi, fhi = x, fx
            side = side + 1 if side > 0 else 1
            if side == 2:
                flo *= 0.5
    raise BracketFailure(f"root finder did not converge in {max_iter} iterations")


# -- stopping recursions -------------------------------------------------------

def _lattice_stopping(family: FamilySpec, arm: ConjugateArm, A: DiscountSequence):
    return lattice_stopping(ArmLattice.conjugate(family, arm, A.n), A)


def lattice_stopping(lat: ArmLattice, A: DiscountSequence):
    """lam -> C_0 - lam * b_1 for an arm given by a lattice of posterior means."""
    a = A.values
    b = A.tail_sums()

    def adv(lam: float) -> float:
        nxt = np.zeros(lat.size(A.n))
        for k in range(A.n - 1, -1, -1):
            cont = a[k] * lat.means[k] + lat.trans[k] @ nxt
            if k == 0:
                return float(cont[0] - lam * b[0])
            nxt = np.maximum(lam * b[k], cont)
        raise AssertionError("unreachable")

    return adv


class _NormalKernel:
    """Unit-variance normal observations; interpolation in the posterior mean."""

    XI_LO, XI_HI = -9.0, 9.0
    bounded_below = False

    @staticmethod
    def grid(lam, t, n_left, size):
        w = 12.0 / math.sqrt(t)
        return np.linspace(lam - w, lam + w, size)

    @staticmethod
    def coord(u):
        return u

    @staticmethod
    def dcoord(u):
        return np.ones_like(u)

    @staticmethod
    def to_xi(s, t, x):
        return (x - s / t) / math.sqrt(1.0 + 1.0 / t)

    @staticmethod
    def transform(s, t, xi):
        return s / t + math.sqrt(1.0 + 1.0 / t) * xi, np.exp(-0.5 * xi * xi) / math.sqrt(2 * math.pi)

    @staticmethod
    def cdf(xi):
        return stats.norm.cdf(xi)

    @staticmethod
    def tail_linear(s, t, c):
        """E[s + X; X > c]."""
        m = s / t
        sd = math.sqrt(1.0 + 1.0 / t)
        z = (c - m) / sd
        return (s + m) * stats.norm.sf(z) + sd * stats.norm.pdf(z)


class _ExponentialKernel:
    """Lomax predictive; interpolation in log posterior mean."""

    XI_LO, XI_HI = 0.0, 745.0
    bounded_below = True

    @staticmethod
    def grid(lam, t, n_left, size):
        # above lam * (t + n_left) / t every future mean exceeds lam: always continue
        hi = lam * (t + n_left) / t * (1 + 1e-9)
        # log-means move by about 1/sqrt(t) per draw; values far below the
        # stopping boundary are never used, so that range stays coarse
        z_dense = -min(4.0, 10.0 / math.sqrt(t))
        far = max(4, size // 8)
        return np.concatenate([np.geomspace(lam * 1e-7, lam * math.exp(z_dense), far)[:-1],
                               np.geomspace(lam * math.exp(z_dense), hi, size - far + 1)])

    @staticmethod
    def coord(u):
        return np.log(u)

    @staticmethod
    def dcoord(u):
        return 1.0 / u

    @staticmethod
    def to_xi(s, t, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x > 0, (t + 1.0) * np.log1p(np.maximum(x, 0.0) / s), 0.0)

    @staticmethod
    def transform(s, t, xi):
        return s * np.expm1(xi / (t + 1.0)), np.exp(-xi)

    @staticmethod
    def cdf(xi):
        return -np.expm1(-xi)

    @staticmethod
    def tail_linear(s, t, c):
        """E[s + X; X > c] for the Lomax law P(X > x) = (s / (s + x))^(t + 1)."""
        c = np.maximum(c, 0.0)
        with np.errstate(over="ignore", invalid="ignore"):
            surv = (s / (s + c)) ** (t + 1.0)
            out = surv * (s + c) * (t + 1.0) / t
        return np.where(np.isfinite(c), out, 0.0)


_KERNELS = {"normal": _NormalKernel(), "exponential": _ExponentialKernel()}


class _StageValue:
    """C_k as a function of the state s (sum of observations) at t = tau + k.

    Below the grid C_k is a_k u + lam b_{k+1} (continue once, then stop);
    above it C_k = b_k u (continue to the end).  The last stage is a_n u.
    With observations bounded below, C_k has a jump in its second derivative
    at the state from which every outcome continues; ``u_break`` splits the
    spline there.
    """

    def __init__(self, t, weight, tail_b, tail_b_next, lam, u=None, vals=None, kernel=None,
                 u_break=None):
        self.t = t
        self.a = weight
        self.b = tail_b
        self.b_next = tail_b_next
        self.lam = lam
        self.kernel = kernel
        self.u_break = u_break
        self.s_break = None if u_break is None else u_break * t
        if u is None:
            self.spline = None
            self.s_hi = -math.inf
            self.slope_hi = weight / t
            return
        self.u_lo, self.u_hi = u[0], u[-1]
        d = kernel.dcoord(np.array([u[0], u[-1]]))
        z = kernel.coord(u)
        if u_break is None:
            self.spline = CubicSpline(z, vals, bc_type=((1, weight / d[0]), (1, tail_b / d[1])))
        else:
            j = int(np.searchsorted(u, u_break))
            left = CubicSpline(z[: j + 1], vals[: j + 1], bc_type=((1, weight / d[0]), "not-a-knot"))
            right = CubicSpline(z[j:], vals[j:], bc_type=("not-a-knot", (1, tail_b / d[1])))
            zb = z[j]
            self.spline = lambda q: np.where(q <= zb, left(np.minimum(q, zb)), right(np.maximum(q, zb)))
        self.s_hi = self.u_hi * t
        self.slope_hi = tail_b / t

    def __call__(self, s):
        u = np.asarray(s, dtype=float) / self.t
        if self.spline is None:
            return self.a * u
        out = np.empty_like(u)
        lo = u < self.u_lo
        hi = u > self.u_hi
        mid = ~(lo | hi)
        out[lo] = self.a * u[lo] + self.lam * self.b_next
        out[hi] = self.b * u[hi]
        out[mid] = self.spline(self.kernel.coord(u[mid]))
        return out

    def threshold(self):
        """State where C_k crosses lam * b_k (C_k is increasing)."""
        target = self.lam * self.b
        if self.spline is None:
            return target / self.a * self.t if self.a > 0 else -math.inf
        lo_s, hi_s = self.u_lo * self.t, self.u_hi * self.t
        f = lambda s: float(self(np.array([s]))[0]) - target  # noqa: E731
        flo, fhi = f(lo_s), f(hi_s)
        if flo >= 0:
            return -math.inf
        if fhi <= 0:
            return math.inf
        return brentq(f, lo_s, hi_s, xtol=1e-14 * max(1.0, abs(hi_s)), rtol=1e-15)


def _expect_max(kernel, s, t, nxt: _StageValue, order=8, panels=12):
    """E[max(lam b_{k+1}, C_{k+1}(s + X))] for a vector of states s at weight t."""
    s_star = nxt.threshold()
    stop = nxt.lam * nxt.b
    if s_star == math.inf:
        return np.full_like(s, stop)
    x_star = s_star - s
    x_hi = np.maximum(nxt.s_hi - s, x_star)
    xi_star = np.clip(kernel.to_xi(s, t, x_star), kernel.XI_LO, kernel.XI_HI)
    xi_hi = np.clip(kernel.to_xi(s, t, x_hi), xi_star, kernel.XI_HI)
    out = stop * kernel.cdf(xi_star) + nxt.slope_hi * kernel.tail_linear(s, t, x_hi)
    cuts = [xi_star]
    if nxt.s_break is not None:
        cuts.append(np.clip(kernel.to_xi(s, t, nxt.s_break - s), xi_star, xi_hi))
    cuts.append(xi_hi)
    u, w = composite_rule(np.linspace(0.0, 1.0, panels + 1), order)
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        width = hi - lo
        if not np.any(width > 0):
            continue
        xi = lo[:, None] + width[:, None] * u[None, :]
        x, dens = kernel.transform(s[:, None], t, xi)
        vals = nxt((s[:, None] + x).ravel()).reshape(x.shape)
        out = out + (vals * dens * w[None, :]).sum(axis=1) * width
    return out


def _grid_stopping(family: FamilySpec, arm: ConjugateArm, A: DiscountSequence, size=GRID_POINTS):
    kernel = _KERNELS[family.name]
    a = A.values
    b = A.tail_sums()
    n = A.n

    def continuation(k, s, nxt, lam):
        t = arm.tau + k
        return a[k] * s / t + _expect_max(kernel, s, t, nxt)

    def adv(lam: float) -> float:
        if n == 1:
            return a[0] * arm.mean - lam * b[0]
        nxt = _StageValue(arm.tau + n - 1, a[n - 1], b[n - 1], 0.0, lam)
        for k in range(n - 2, 0, -1):
            t = arm.tau + k
            u = kernel.grid(lam, t, n - k, size)
            u_break = None
            if kernel.bounded_below:
                # from this state on, even the smallest observation continues
                ub = nxt.threshold() / t
                if u[0] < ub < u[-1]:
                    u_break = ub
                    j = int(np.argmin(np.abs(np.log(u / ub))))
                    if 0 < j < u.size - 1:
                        u = u.copy()
                        u[j] = ub
                    else:
                        u = np.sort(np.append(u, ub))
            vals = continuation(k, u * t, nxt, lam)
            nxt = _StageValue(t, a[k], b[k], b[k + 1], lam, u, vals, kernel, u_break)
        c0 = continuation(0, np.array([float(arm.gamma)]), nxt, lam)[0]
        return float(c0 - lam * b[0])

    return adv


def stopping_advantage(family, arm: ConjugateArm, A: DiscountSequence):
    """lam -> C_0(gamma) - lam * b_1 for a regular A."""
    fam = get_family(family)
    if fam.discrete:
        return _lattice_stopping(fam, arm, A)
    return _grid_stopping(fam, arm, A)


# -- break-even value -------------------------------------------------------------

def _solve(fam: FamilySpec, arm: ConjugateArm, A: DiscountSequence, tol: float) -> BreakEvenResult:
    mu = arm.mean
    if A.n == 1 or all(v == 0 for v in A.values[1:]):
        return BreakEvenResult(mu, (mu, mu), 0)
    adv = stopping_advantage(fam, arm, A)
    lo = max(fam.support[0], mu)
    f_lo = adv(lo)
    if f_lo <= 0:
        return BreakEvenResult(lo, (lo, lo), 1)
    U = fam.support[1]
    spread = max(1.0, abs(mu)) if not math.isfinite(U) else (U - mu)
    for _ in range(MAX_DOUBLINGS):
        hi = min(U, mu + spread)
        f_hi = adv(hi)
        if f_hi < 0:
            break
        if hi >= U:
            raise BracketFailure(f"no sign change of the advantage up to the support end {U}")
        spread *= 2.0
    else:
        raise BracketFailure("bracket expansion limit reached")
    lam, blo, bhi, it = root_decreasing(adv, lo, hi, f_lo, f_hi, tol)
    return BreakEvenResult(lam, (blo, bhi), it)


@lru_cache(maxsize=4096)
def _canonical(name: str, tau: float, values: tuple, tol: float) -> BreakEvenResult:
    fam = get_family(name)
    arm = ConjugateArm(0.0 if name == "normal" else 1.0, tau)
    return _solve(fam, arm, DiscountSequence(values), tol)


def breakeven_value(family, arm: ConjugateArm, A: DiscountSequence, tol: float | None = None,
                    use_invariance: bool = True) -> BreakEvenResult:
    """Lambda(gamma, tau; A): the known payoff at which both arms are equally good.

    Normal arms satisfy Lambda(gamma, tau) = gamma / tau + Lambda(0, tau) and
    exponential arms Lambda(gamma, tau) = gamma * Lambda(1, tau); with
    ``use_invariance`` the canonical value is computed once and reused.
    """
    fam = get_family(family)
    validate_arm(fam, arm)
    _require_regular(A)
    tol = default_tol(fam) if tol is None else tol
    if use_invariance and fam.name == "normal":
        r = _canonical("normal", float(arm.tau), A.values, tol)
        shift = arm.mean
        return BreakEvenResult(r.lam + shift, (r.bracket[0] + shift, r.bracket[1] + shift), r.iterations)
    if use_invariance and fam.name == "exponential":
        # scale the tolerance so the returned bracket still has width <= tol
        g = arm.gamma
        r = _canonical("exponential", float(arm.tau), A.values, tol / max(g, 1.0))
        return BreakEvenResult(g * r.lam, (g * r.bracket[0], g * r.bracket[1]), r.iterations)
    return _solve(fam, arm, A, tol)


# -- break-even observation ----------------------------------------------------

def breakeven_observation(family, arm: ConjugateArm, A: DiscountSequence, tol: float | None = None) -> float:
    """b(gamma, tau; A): the observation x with Lambda(gamma + x, tau + 1; A^1) = Lambda(gamma, tau; A)."""
    fam = get_family(family)
    validate_arm(fam, arm)
    _require_regular(A)
    if A.n < 2 or A.values[1] <= 0:
        raise InsufficientHorizon("the break-even observation needs n >= 2 and a_2 > 0")
    tol = default_tol(fam) if tol is None else tol
    inner_tol = tol * 1e-2
    target = breakeven_value(fam, arm, A, inner_tol).lam
    A1 = disc.tail(A)

    def g(x: float) -> float:
        # increasing in x
        return breakeven_value(fam, ConjugateArm(arm.gamma + x, arm.tau + 1.0), A1, inner_tol).lam - target

    mu = arm.mean
    lo = mu
    g_lo = g(lo)
    if g_lo >= 0:
        return lo
    U = fam.support[1]
    if math.isfinite(U):
        hi = U - tol
        g_hi = g(hi)
        if g_hi <= 0:
            raise RootNotBracketed(f"no break-even observation below {hi}")
    else:
        spread = max(1.0, abs(mu))
        for _ in range(MAX_DOUBLINGS):
            hi = mu + spread
            g_hi = g(hi)
            if g_hi > 0:
                break
            lo, g_lo = hi, g_hi
            spread *= 2.0
        else:
            raise RootNotBracketed("bracket expansion limit reached")
    # root_decreasing expects a decreasing function
    x, _, _, _ = root_decreasing(lambda x: -g(x), lo, hi, -g_lo, -g_hi, tol)
    return x
