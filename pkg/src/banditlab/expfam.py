"""One-parameter exponential families with conjugate priors.

An arm carries a ``(gamma, tau)`` prior proportional to
``exp(theta * gamma - tau * psi(theta))``: gamma is the prior sum of
observations, tau the prior sample size, gamma / tau the prior mean.
Each family ships its predictive law in closed form; the dominating measure
only appears in :func:`predictive_density_numeric`, which integrates over the
natural parameter and exists to cross-check the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special, stats

from .errors import (
    ImproperPrior,
    NonPositiveScale,
    ObservationOutOfSupport,
    SchemaError,
    UnsupportedFamily,
)

INF = math.inf
POISSON_TAIL = 1e-10


@dataclass(frozen=True)
class ConjugateArm:
    gamma: float
    tau: float

    @property
    def mean(self) -> float:
        return self.gamma / self.tau

    def to_json(self) -> dict:
        return {"gamma": self.gamma, "tau": self.tau}


@dataclass(frozen=True)
class Predictive:
    """Marginal law of the next observation.

    Discrete predictives list their (truncated) support with probabilities;
    continuous ones carry a quadrature rule whose weights sum to one.
    """

    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    mean: float
    var: float

    def expect(self, fn) -> float:
        return float(np.dot(self.weights, fn(self.nodes)))


class FamilySpec:
    """Base class; concrete families override the closed forms."""

    name: str = ""
    theta_space: tuple[float, float] = (-INF, INF)
    support: tuple[float, float] = (-INF, INF)
    discrete: bool = False

    def psi(self, theta):
        raise NotImplementedError

    def log_base(self, x):
        """Log density (or mass) of the dominating measure at x."""
        raise NotImplementedError

    # closed forms, vectorized over gamma with scalar tau
    def mean(self, g, t):
        return np.asarray(g, dtype=float) / t

    def predictive_pdf(self, g: float, t: float, x):
        raise NotImplementedError

    def predictive(self, arm: ConjugateArm, order: int | None = None) -> Predictive:
        raise NotImplementedError

    # support checks
    # break points of the closed forms, used to place quadrature panel edges
    def mean_floor(self, g, t):
        """Smallest posterior mean reachable with one more draw, if finite."""
        lo = self.support[0]
        return None if lo == -INF else (g + lo) / (t + 1.0)

    def x_for_mean(self, g, t, m):
        """Observation x with (g + x) / (t + 1) = m."""
        return m * (t + 1.0) - g

    def in_support_closure(self, x: float) -> bool:
        lo, hi = self.support
        return lo <= x <= hi

    def in_support(self, x: float) -> bool:
        lo, hi = self.support
        return lo < x < hi

    def __repr__(self) -> str:
        return f"<family {self.name}>"


class BernoulliFamily(FamilySpec):
    name = "bernoulli"
    support = (0.0, 1.0)
    discrete = True

    def psi(self, theta):
        return np.logaddexp(0.0, theta)

    def log_base(self, x):
        return 0.0

    def predictive_pdf(self, g, t, x):
        p = g / t
        x = np.asarray(x, dtype=float)
        return np.where(x == 1, p, np.where(x == 0, 1 - p, 0.0))

    def predictive(self, arm, order=None):
        p = arm.mean
        return Predictive("discrete", np.array([0.0, 1.0]), np.array([1 - p, p]),
                          p, p * (1 - p))

    def pmf_rows(self, g: np.ndarray, t: float) -> tuple[int, np.ndarray]:
        p = np.asarray(g, dtype=float) / t
        return 1, np.stack([1 - p, p], axis=-1)


class PoissonFamily(FamilySpec):
    """Poisson counts; the rate carries a Gamma(gamma, tau) prior."""

    name = "poisson"
    support = (0.0, INF)
    discrete = True

    def psi(self, theta):
        with np.errstate(over="ignore"):
            return np.exp(theta)

    def log_base(self, x):
        return -special.gammaln(np.asarray(x, dtype=float) + 1)

    @staticmethod
    def _logpmf(k, g, t):
        """Negative binomial log mass, with success probability t / (t + 1)."""
        k = np.asarray(k, dtype=float)
        g = np.asarray(g, dtype=float)
        return (special.gammaln(k + g) - special.gammaln(g) - special.gammaln(k + 1)
                + g * np.log(t / (t + 1.0)) - k * np.log1p(t))

    def truncation(self, g: float, t: float) -> int:
        """Smallest m whose tail mass and tail mean are both below POISSON_TAIL."""
        p = t / (t + 1.0)
        # E[X; X > m] = (g / t) * P(X' >= m) with X' ~ NB(g + 1, same p)

        def ok(m):
            return (stats.nbinom.sf(m, g, p) < POISSON_TAIL
                    and (g / t) * stats.nbinom.sf(m - 1, g + 1.0, p) < POISSON_TAIL)

        m = int(max(0, stats.nbinom.isf(POISSON_TAIL, g, p),
                    stats.nbinom.isf(min(POISSON_TAIL * t / g, 1.0), g + 1.0, p) + 1))
        while not ok(m):
            m = max(m + 1, int(m * 1.05))
        while m > 0 and ok(m - 1):
            m -= 1
        return m

    def predictive_pdf(self, g, t, x):
        x = np.asarray(x, dtype=float)
        ok = (x >= 0) & (x == np.floor(x))
        return np.where(ok, np.exp(self._logpmf(np.where(ok, x, 0.0), g, t)), 0.0)

    def predictive(self, arm, order=None):
        m = self.truncation(arm.gamma, arm.tau)
        k = np.arange(m + 1, dtype=float)
        p = np.exp(self._logpmf(k, arm.gamma, arm.tau))
        p = p / p.sum()
        g, t = arm.gamma, arm.tau
        return Predictive("discrete", k, p, g / t, g * (t + 1) / t**2)

    def pmf_rows(self, g: np.ndarray, t: float) -> tuple[int, np.ndarray]:
        g = np.asarray(g, dtype=float)
        m = self.truncation(float(g.max()), t)
        k = np.arange(m + 1, dtype=float)
        rows = np.exp(self._logpmf(k[None, :], g[:, None], t))
        rows /= rows.sum(axis=1, keepdims=True)
        return m, rows


class NormalFamily(FamilySpec):
    """Unit-variance normal observations; the mean has a N(gamma/tau, 1/tau) prior."""

    name = "normal"
    support = (-INF, INF)
    XI_EDGES = np.linspace(-9.0, 9.0, 13)

    def psi(self, theta):
        return 0.5 * np.asarray(theta, dtype=float) ** 2

    def log_base(self, x):
        return -0.5 * np.asarray(x, dtype=float) ** 2 - 0.5 * math.log(2 * math.pi)

    def predictive_pdf(self, g, t, x):
        return stats.norm.pdf(x, loc=g / t, scale=math.sqrt(1 + 1 / t))

    def predictive(self, arm, order=None):
        order = order or 32
        z, w = _hermite(order)
        s = math.sqrt(1 + 1 / arm.tau)
        return Predictive("continuous", arm.mean + s * z, w.copy(), arm.mean, s * s)

    # continuous-arm interface used by the backward induction
    def edges(self, g, t):
        return self.XI_EDGES

    def to_xi(self, g, t, x):
        return (x - g / t) / math.sqrt(1 + 1 / t)

    def transform(self, g, t, xi):
        s = math.sqrt(1 + 1 / t)
        return g / t + s * xi, np.exp(-0.5 * xi * xi) / math.sqrt(2 * math.pi)

    def excess(self, g, t, c):
        """E[(posterior mean after one draw - c)^+] for each (g, c)."""
        g = np.asarray(g, dtype=float)
        mu = g / t
        s = 1.0 / math.sqrt(t * (t + 1.0))
        u = (mu - c) / s
        return s * stats.norm.pdf(u) + (mu - c) * stats.norm.cdf(u)


class ExponentialFamily(FamilySpec):
    """Exponential observations; the rate carries a Gamma(tau + 1, gamma) prior.

    The predictive is Lomax: P(X > x) = (gamma / (gamma + x))^(tau + 1), so
    (tau + 1) log(1 + X / gamma) is a standard exponential variable.  All
    quadrature runs on that variable.
    """

    name = "exponential"
    theta_space = (-INF, 0.0)
    support = (0.0, INF)

    def psi(self, theta):
        return -np.log(-np.asarray(theta, dtype=float))

    def log_base(self, x):
        return 0.0

    def predictive_pdf(self, g, t, x):
        x = np.asarray(x, dtype=float)
        xs = np.maximum(x, 0.0)
        pdf = (t + 1) * g ** (t + 1) / (g + xs) ** (t + 2)
        return np.where(x >= 0, pdf, 0.0)

    def predictive(self, arm, order=None):
        order = order or 64
        g, t = arm.gamma, arm.tau
        z, w = np.polynomial.laguerre.laggauss(order)
        logw = np.log(w) - z / t + math.log((t + 1) / t)
        keep = logw > -700
        z, logw = z[keep], logw[keep]
        nodes = g * np.expm1(z / t)
        wts = np.exp(logw)
        wts /= wts.sum()
        nodes *= (g / t) / np.dot(wts, nodes)
        var = g * g * (t + 1) / (t * t * (t - 1)) if t > 1 else INF
        return Predictive("continuous", nodes, wts, g / t, var)

    def _xi_max(self, t):
        return 40.0 * (t + 1.0) / t

    def edges(self, g, t):
        top = self._xi_max(t)
        # finer panels near zero where the Lomax density is steepest
        inner = np.array([0.0, 0.25, 0.75, 1.5, 3.0])
        outer = np.linspace(4.5, top, 12)
        return np.concatenate([inner[inner < 4.5], outer])

    def to_xi(self, g, t, x):
        return (t + 1.0) * math.log1p(x / g) if x > 0 else -INF

    def transform(self, g, t, xi):
        return g * np.expm1(xi / (t + 1.0)), np.exp(-xi)

    def excess(self, g, t, c):
        g = np.asarray(g, dtype=float)
        c = np.asarray(c, dtype=float)
        d = c * (t + 1.0) - g
        dpos = np.maximum(d, 0.0)
        tail = g * (g / (g + dpos)) ** t / t
        return np.where(d > 0, tail, g / t - d) / (t + 1.0)


@lru_cache(maxsize=None)
def _hermite(order: int):
    z, w = np.polynomial.hermite_e.hermegauss(order)
    return z, w / w.sum()


FAMILIES: dict[str, FamilySpec] = {
    f.name: f for f in (BernoulliFamily(), NormalFamily(), PoissonFamily(), ExponentialFamily())
}


def get_family(name: str | FamilySpec) -> FamilySpec:
    if isinstance(name, FamilySpec):
        return name
    try:
        return FAMILIES[str(name).lower()]
    except KeyError:
        raise UnsupportedFamily(f"unknown family {name!r}") from None


def validate_arm(family, arm: ConjugateArm) -> ConjugateArm:
    fam = get_family(family)
    if not (np.isfinite(arm.gamma) and np.isfinite(arm.tau)):
        raise ImproperPrior(f"non-finite prior {arm}")
    if arm.tau <= 0:
        raise ImproperPrior(f"prior weight must be positive, got tau={arm.tau}")
    if not fam.in_support(arm.gamma / arm.tau):
        raise ImproperPrior(
            f"prior mean {arm.gamma / arm.tau} outside the open support {fam.support} of {fam.name}"
        )
    return arm


def posterior_update(arm: ConjugateArm, x: float, family=None) -> ConjugateArm:
    if family is not None and not get_family(family).in_support_closure(x):
        raise ObservationOutOfSupport(f"observation {x} outside the support of {get_family(family).name}")
    return ConjugateArm(arm.gamma + x, arm.tau + 1.0)


def prior_mean(arm: ConjugateArm) -> float:
    return arm.gamma / arm.tau


def scale_arm(arm: ConjugateArm, c: float) -> ConjugateArm:
    if not c > 0:
        raise NonPositiveScale(f"scale must be positive, got {c}")
    return ConjugateArm(c * arm.gamma, c * arm.tau)


def predictive(family, arm: ConjugateArm, order: int | None = None) -> Predictive:
    fam = get_family(family)
    validate_arm(fam, arm)
    return fam.predictive(arm, order)


def arm_from_json(obj) -> ConjugateArm:
    try:
        return ConjugateArm(float(obj["gamma"]), float(obj["tau"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad arm object {obj!r}") from exc


# -- numerical fallback ------------------------------------------------------

def _log_normalizer(fam: FamilySpec, g: float, t: float) -> float:
    """log of the integral of exp(theta g - t psi(theta)) over the natural space."""
    lo, hi = fam.theta_space

    def expo(th):
        return th * g - t * float(fam.psi(th))

    # mode of the integrand, then integrate the rescaled bell around it
    if hi < INF:
        res = optimize.minimize_scalar(lambda u: -expo(hi - math.exp(u)), bounds=(-30, 30), method="bounded")
        mode = hi - math.exp(res.x)
    else:
        res = optimize.minimize_scalar(lambda th: -expo(th), bounds=(-50, 50), method="bounded")
        mode = res.x
    peak = expo(mode)

    def bell(th):
        return math.exp(expo(th) - peak)

    left, _ = integrate.quad(bell, lo, mode, limit=400, epsabs=0, epsrel=1e-12)
    right, _ = integrate.quad(bell, mode, hi, limit=400, epsabs=0, epsrel=1e-12)
    return peak + math.log(left + right)


def predictive_density_numeric(family, arm: ConjugateArm, x: float) -> float:
    """Predictive mass/density at x from the integral over the natural parameter.

    Returned relative to counting measure (discrete) or Lebesgue measure
    (continuous), so it is comparable with ``predictive_pdf``.
    """
    fam = get_family(family)
    logm = _log_normalizer(fam, arm.gamma + x, arm.tau + 1) - _log_normalizer(fam, arm.gamma, arm.tau)
    return math.exp(logm + float(fam.log_base(x)))
