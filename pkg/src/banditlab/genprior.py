"""Bandit values under general (nonconjugate) priors.

Bernoulli arms carry a :class:`~banditlab.orders.GridDensity` on [0, 1]; the
posterior after s successes and f failures has weights f(p) p^s (1 - p)^f, so
the success/failure tree collapses to a lattice and the value recursion is
exact on the grid.

Normal arms (unit observation variance) carry a :class:`NormalGridPrior` on a
uniform theta-grid.  Their predictive is a mixture of unit normals, the
posterior mean m(x; f) is increasing with derivative Var(theta | f^x), and
the value recursion reuses the continuous backward induction of
:mod:`banditlab.tree` with a grid-prior arm model.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr

from .discount import DiscountSequence
from .engine import ZERO, ArmLattice, LatticeDP, ValueResult
from .errors import (
    BracketFailure,
    HorizonTooLarge,
    MeanMismatch,
    ObservationOutsideSafeRange,
    SchemaError,
    SlopeBoundViolated,
)
from .indices import MAX_DOUBLINGS, _require_regular, lattice_stopping, root_decreasing
from .orders import GridDensity, _check_unit, cx_gap
from .quad import GL_ORDER, composite_rule
from .tree import DEFAULT_BUDGET, ContinuousTree

SAFE_BAND = 3.0
SAFE_MASS = 1e-8
THETA_GRID = 2001
GRID_HALFWIDTH_SD = 8.0
VN_PANELS = 12
VN_MAX_TWO_ARMED = 4
LAMBDA_B_TOL = 1e-12
LAMBDA_N_TOL = 1e-6
SLOPE_SLACK = 1e-12


# -- Bernoulli arms -------------------------------------------------------------------

def binary_means(f: GridDensity, depth: int) -> list[np.ndarray]:
    """Posterior means after k pulls, indexed by the number of successes s = 0..k."""
    _check_unit(f)
    p, w = f.grid, f.weights
    out = []
    for k in range(depth):
        s = np.arange(k + 1)[:, None]
        with np.errstate(under="ignore"):
            post = w * p**s * (1.0 - p) ** (k - s)
        m0 = post.sum(axis=1)
        m1 = post @ p
        # states of zero probability get an arbitrary mean; they are never weighted
        out.append(np.divide(m1, m0, out=np.zeros_like(m1), where=m0 > 0))
    return out


def _bernoulli_lattice(f: GridDensity, depth: int) -> ArmLattice:
    return ArmLattice.binary(binary_means(f, depth))


def vb_value(f1: GridDensity, f2, A: DiscountSequence) -> ValueResult:
    """Optimal value of a Bernoulli bandit with grid priors.

    ``f2`` is either a grid prior or a known payoff per pull.
    """
    if A.n == 0:
        return ZERO
    lat1 = _bernoulli_lattice(f1, A.n)
    if isinstance(f2, GridDensity):
        dp = LatticeDP(lat1, _bernoulli_lattice(f2, A.n), A.values)
    else:
        dp = LatticeDP(lat1, None, A.values, known=float(f2))
    return ValueResult.from_branches(*dp.root)


def lambda_b(f: GridDensity, A: DiscountSequence, tol: float = LAMBDA_B_TOL) -> float:
    """Break-even value of a one-armed Bernoulli bandit with a grid prior."""
    _require_regular(A)
    mu = f.mean
    if A.n == 1 or all(v == 0 for v in A.values[1:]):
        return mu
    hi = float(f.grid[f.support()[-1]])
    if hi <= mu:
        return mu
    adv = lattice_stopping(_bernoulli_lattice(f, A.n), A)
    f_lo = adv(mu)
    if f_lo <= 0:
        return mu
    lam, _, _, _ = root_decreasing(adv, mu, hi, f_lo, adv(hi), tol)
    return lam


# -- normal arms: priors, posteriors, predictive --------------------------------------

class NormalGridPrior(GridDensity):
    """A prior for the mean of unit-variance normal observations on a uniform grid."""

    def __init__(self, theta_min: float, theta_max: float, weights):
        weights = np.asarray(weights, dtype=float).ravel()
        if not theta_max - theta_min > 2 * SAFE_BAND:
            raise SchemaError(f"theta grid must be wider than {2 * SAFE_BAND}")
        super().__init__(np.linspace(theta_min, theta_max, weights.size), weights)
        self.theta_min = float(theta_min)
        self.theta_max = float(theta_max)

    def __repr__(self) -> str:
        return (f"NormalGridPrior([{self.theta_min!r}, {self.theta_max!r}], "
                f"size={self.grid.size}, mean={self.mean!r})")

    def band_mass(self) -> float:
        """Mass within SAFE_BAND of either end of the grid."""
        g = self.grid
        edge = (g < self.theta_min + SAFE_BAND) | (g > self.theta_max - SAFE_BAND)
        return float(self.weights[edge].sum())

    def to_json(self) -> dict:
        return {"theta_min": self.theta_min, "theta_max": self.theta_max,
                "weights": self.weights.tolist()}

    @classmethod
    def from_json(cls, obj) -> "NormalGridPrior":
        try:
            return cls(float(obj["theta_min"]), float(obj["theta_max"]), obj["weights"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"normal grid prior needs theta_min, theta_max, weights: {exc}") from None


def normal_grid(center: float, sd_max: float, size: int = THETA_GRID) -> tuple[float, float]:
    """Grid bounds wide enough for priors and posteriors with sd up to ``sd_max``."""
    half = SAFE_BAND + GRID_HALFWIDTH_SD * max(sd_max, 1e-3)
    return center - half, center + half


def prior_from_logpdf(logpdf, theta_min: float, theta_max: float, size: int = THETA_GRID) -> NormalGridPrior:
    theta = np.linspace(theta_min, theta_max, size)
    lw = np.asarray(logpdf(theta), dtype=float)
    top = np.max(lw[np.isfinite(lw)])
    with np.errstate(under="ignore"):
        w = np.where(np.isfinite(lw), np.exp(lw - top), 0.0)
    return NormalGridPrior(theta_min, theta_max, w)


def normal_prior(alpha: float, tau: float, size: int = THETA_GRID, bounds=None) -> NormalGridPrior:
    """N(alpha, 1/tau) discretised on a uniform grid."""
    sd = 1.0 / math.sqrt(tau)
    lo, hi = bounds if bounds is not None else normal_grid(alpha, sd, size)
    return prior_from_logpdf(lambda th: -0.5 * tau * (th - alpha) ** 2, lo, hi, size)


def spike_prior(theta0: float, size: int = THETA_GRID, halfwidth: float = 8.0) -> NormalGridPrior:
    """Unit mass at theta0, placed at the centre of a symmetric grid."""
    size = size if size % 2 else size + 1
    w = np.zeros(size)
    w[size // 2] = 1.0
    return NormalGridPrior(theta0 - halfwidth, theta0 + halfwidth, w)


def _posterior_weights(f: NormalGridPrior, x: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        lw = np.log(f.weights) - 0.5 * (x - f.grid) ** 2
    lw -= lw.max()
    with np.errstate(under="ignore"):
        w = np.exp(lw)
    return w


def normal_posterior(f: NormalGridPrior, x: float) -> NormalGridPrior:
    """Posterior f^x(theta) proportional to f(theta) exp(-(x - theta)^2 / 2)."""
    post = NormalGridPrior(f.theta_min, f.theta_max, _posterior_weights(f, float(x)))
    if post.band_mass() >= SAFE_MASS:
        raise ObservationOutsideSafeRange(
            f"observation {x!r} pushes {post.band_mass():.3g} of posterior mass to the grid edge"
        )
    return post


def is_safe_observation(f: NormalGridPrior, x: float) -> bool:
    try:
        normal_posterior(f, x)
    except ObservationOutsideSafeRange:
        return False
    return True


def posterior_mean_fn(f: NormalGridPrior, x: float) -> float:
    """m(x; f), the posterior mean of theta after observing x."""
    return normal_posterior(f, x).mean


def check_heat_identity(f: NormalGridPrior, x: float, h: float = 1e-4) -> tuple[float, float, float]:
    """Central difference of m(.; f) at x against the posterior variance at x."""
    lhs = (posterior_mean_fn(f, x + h) - posterior_mean_fn(f, x - h)) / (2.0 * h)
    rhs = normal_posterior(f, x).var
    return lhs, rhs, abs(lhs - rhs)


_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _std_pdf(z):
    return _INV_SQRT_2PI * np.exp(-0.5 * z * z)


class NormalMixture:
    """Predictive of the next observation: sum_k w_k N(theta_k, 1)."""

    def __init__(self, theta, weights):
        keep = np.asarray(weights) > 0
        self.theta = np.asarray(theta, dtype=float)[keep]
        self.weights = np.asarray(weights, dtype=float)[keep]
        self.mean = float(np.dot(self.weights, self.theta))
        self.var = 1.0 + float(np.dot(self.weights, (self.theta - self.mean) ** 2))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return _std_pdf(x[..., None] - self.theta) @ self.weights

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return ndtr(x[..., None] - self.theta) @ self.weights

    def edges(self, panels: int = VN_PANELS) -> np.ndarray:
        sd = math.sqrt(self.var)
        lo = min(self.mean - 9.0 * sd, self.theta[0] - 9.0)
        hi = max(self.mean + 9.0 * sd, self.theta[-1] + 9.0)
        return np.linspace(lo, hi, panels + 1)

    def rule(self, panels: int = VN_PANELS, order: int = GL_ORDER) -> tuple[np.ndarray, np.ndarray]:
        """Composite Gauss-Legendre nodes and probability weights."""
        x, w = composite_rule(self.edges(panels), order)
        return x, w * self.pdf(x)


def normal_predictive(f: NormalGridPrior) -> NormalMixture:
    """Phi f: the prior convolved with the standard normal."""
    return NormalMixture(f.grid, f.weights)


# -- normal arms: value recursion ----------------------------------------------------

class GridNormalModel:
    """Arm model for :class:`~banditlab.tree.ContinuousTree` with a grid prior.

    The state is (s, t): the sum and number of observations so far.  The
    posterior weights are w_k exp(theta_k s - t theta_k^2 / 2).
    """

    def __init__(self, prior: NormalGridPrior, panels: int = VN_PANELS):
        idx = prior.support()
        self.theta = prior.grid[idx[0]: idx[-1] + 1]
        with np.errstate(divide="ignore"):
            self.logw = np.log(prior.weights[idx[0]: idx[-1] + 1])
        self.lo, self.hi = float(self.theta[0]), float(self.theta[-1])
        self.panels = panels

    def _post(self, u, t) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        a = self.logw + np.outer(u, self.theta) - 0.5 * t * self.theta**2
        a -= a.max(axis=1, keepdims=True)
        with np.errstate(under="ignore"):
            e = np.exp(a)
        return e / e.sum(axis=1, keepdims=True)

    def _moments(self, u, t):
        p = self._post(u, t)
        m = p @ self.theta
        v = np.maximum(p @ self.theta**2 - m * m, 0.0)
        return m, v

    def mean(self, s, t):
        s = np.asarray(s, dtype=float)
        return (self._post(s.ravel(), t) @ self.theta).reshape(s.shape)

    def predictive(self, s: float, t: float) -> NormalMixture:
        return NormalMixture(self.theta, self._post(s, t)[0])

    def edges(self, s, t):
        p = self._post(float(s), t)[0]
        keep = p > 1e-16 * p.max()
        th = self.theta[keep]
        mix = NormalMixture(th, p[keep])
        return mix.edges(self.panels)

    def to_xi(self, s, t, x):
        return x

    def transform(self, s, t, xi):
        xi = np.asarray(xi, dtype=float)
        p = self._post(float(s), t)[0]
        return xi, _std_pdf(xi[:, None] - self.theta[None, :]) @ p

    def mean_floor(self, s, t):
        return None

    def solve_sum(self, t: float, c) -> np.ndarray:
        """u with posterior mean c at pull count t (u = observation sum); vectorised in c.

        The posterior mean is increasing in u with derivative Var(theta | u),
        so a safeguarded Newton iteration converges.  Targets outside the
        support range return -inf or +inf.
        """
        c = np.atleast_1d(np.asarray(c, dtype=float))
        uc, inv = np.unique(c, return_inverse=True)
        out = np.where(uc <= self.lo, -np.inf, np.inf)
        mid = np.nonzero((uc > self.lo) & (uc < self.hi))[0]
        if mid.size:
            out[mid] = self._newton(t, uc[mid])
        return out[inv].reshape(c.shape)

    def _newton(self, t: float, c: np.ndarray) -> np.ndarray:
        scale = max(1.0, t)
        u = t * c
        m, v = self._moments(u, t)
        a = np.where(m <= c, u, -np.inf)
        b = np.where(m >= c, u, np.inf)
        step = np.full_like(u, scale)
        # expand the bracket
        for _ in range(MAX_DOUBLINGS):
            need_a, need_b = ~np.isfinite(a), ~np.isfinite(b)
            if not (need_a.any() or need_b.any()):
                break
            probe = np.where(need_a, u - step, np.where(need_b, u + step, u))
            pm, _ = self._moments(probe, t)
            a = np.where(need_a & (pm <= c), probe, a)
            b = np.where(need_b & (pm >= c), probe, b)
            step *= 2.0
        else:
            raise BracketFailure("posterior mean could not be bracketed")
        u = np.clip(u, a, b)
        for _ in range(200):
            m, v = self._moments(u, t)
            f = m - c
            a = np.where(f <= 0, u, a)
            b = np.where(f >= 0, u, b)
            with np.errstate(divide="ignore", invalid="ignore"):
                nu = u - f / v
            bad = ~((nu > a) & (nu < b)) | ~np.isfinite(nu)
            nu = np.where(bad, 0.5 * (a + b), nu)
            done = (np.abs(f) <= 1e-15 * (1.0 + np.abs(c))) | (b - a <= 1e-14 * (1.0 + np.abs(u)))
            if done.all():
                return u
            u = np.where(done, u, nu)
        raise BracketFailure("posterior mean inversion did not converge")

    def x_for_mean(self, s, t, m):
        return float(self.solve_sum(t + 1.0, m)[0]) - s

    def excess(self, s, t, c):
        """E[(m(s + X, t + 1) - c)^+] = sum_k pi_k (theta_k - c) P(X > x* | theta_k)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        c = np.broadcast_to(np.asarray(c, dtype=float), s.shape)
        p = self._post(s, t)
        xstar = self.solve_sum(t + 1.0, c) - s
        q = ndtr(self.theta[None, :] - xstar[:, None])
        val = np.sum(p * (self.theta[None, :] - c[:, None]) * q, axis=1)
        return np.maximum(val, 0.0)


def vn_value(f1: NormalGridPrior, f2, A: DiscountSequence, budget: int = DEFAULT_BUDGET,
             n_max: int = VN_MAX_TWO_ARMED, panels: int = VN_PANELS) -> ValueResult:
    """Optimal value of a normal bandit with grid priors.

    ``f2`` is either a grid prior or a known payoff per pull.
    """
    if A.n == 0:
        return ZERO
    m1 = GridNormalModel(f1, panels)
    if isinstance(f2, NormalGridPrior):
        if A.n > n_max:
            raise HorizonTooLarge(f"two-armed grid-prior values are limited to n <= {n_max}")
        tree = ContinuousTree(m1, GridNormalModel(f2, panels), A.values, budget=budget)
    else:
        tree = ContinuousTree(m1, None, A.values, known=float(f2), budget=budget)
    need = tree.estimate(0.0, 0.0)
    if need > budget:
        raise HorizonTooLarge(f"horizon {A.n} needs about {need} evaluations, budget is {budget}")
    return ValueResult.from_branches(*tree.root(0.0, 0.0, 0.0, 0.0))


def lambda_n(f: NormalGridPrior, A: DiscountSequence, tol: float = LAMBDA_N_TOL,
             budget: int = DEFAULT_BUDGET) -> float:
    """Break-even value of a one-armed normal bandit with a grid prior.

    Root of lam -> V1(lam) - lam * b_1, which is strictly decreasing for a
    regular A with a_1 > 0 (the stopping form of the smallest-lam criterion).
    """
    _require_regular(A)
    mu = f.mean
    if A.n == 1 or all(v == 0 for v in A.values[1:]):
        return mu
    model = GridNormalModel(f)
    if model.hi <= mu:
        return mu
    b1 = A.total

    def g(lam: float) -> float:
        tree = ContinuousTree(model, None, A.values, known=lam, budget=budget)
        return tree.root(0.0, 0.0)[0] - lam * b1

    g_lo = g(mu)
    if g_lo <= 0:
        return mu
    spread = math.sqrt(max(f.var, 1e-12))
    for _ in range(MAX_DOUBLINGS):
        hi = min(model.hi, mu + spread)
        g_hi = g(hi)
        if g_hi < 0 or hi >= model.hi:
            break
        spread *= 2.0
    lam, _, _, _ = root_decreasing(g, mu, hi, g_lo, g_hi, tol)
    return lam


# -- contraction maps and the convex order ----------------------------------------------

def contraction_cx_gap(gvals, X: GridDensity, direction: str | None = None) -> tuple[str, float]:
    """Direction and worst stop-loss gap for the pair (g(X), X).

    ``direction`` is "contraction" (0 <= g' <= 1, claim g(X) <=_cx X) or
    "expansion" (g' >= 1, claim X <=_cx g(X)); by default it is read off the
    sampled slopes.  A gap <= 0 certifies the claim.
    """
    gvals = np.asarray(gvals, dtype=float)
    if gvals.shape != X.grid.shape:
        raise SchemaError("gfun must be sampled at every grid point of X")
    eg = float(np.dot(X.weights, gvals))
    if abs(eg - X.mean) > 1e-9 * max(1.0, abs(X.mean)):
        raise MeanMismatch(f"E g(X) = {eg!r} differs from E X = {X.mean!r}")
    slopes = np.diff(gvals) / np.diff(X.grid)
    contracting = bool(np.all((slopes >= -SLOPE_SLACK) & (slopes <= 1.0 + SLOPE_SLACK)))
    expanding = bool(np.all(slopes >= 1.0 - SLOPE_SLACK))
    if direction is None:
        direction = "contraction" if contracting else "expansion" if expanding else None
    if direction == "contraction" and contracting:
        return direction, cx_gap(gvals, X.weights, X.grid, X.weights)
    if direction == "expansion" and expanding:
        return direction, cx_gap(X.grid, X.weights, gvals, X.weights)
    raise SlopeBoundViolated("sampled slopes are neither within [0, 1] nor at least 1")


def contraction_cx_check(gvals, X: GridDensity, direction: str | None = None,
                         slack: float = 1e-10) -> bool:
    """Stop-loss verification of g(X) <=_cx X (contraction) or X <=_cx g(X) (expansion)."""
    _, gap = contraction_cx_gap(gvals, X, direction)
    return gap <= slack
