"""Stochastic orders on grid densities and the Bernoulli posterior operators.

A :class:`GridDensity` is a finite set of point masses on a strictly increasing
grid.  Densities are compared only on identical grids, so every predicate
reduces to exact finite sums.  The likelihood ratio and relative
log-concavity orders look at ``log(f_k / g_k)`` on the common support; the
convex order is tested through stop-loss transforms E max{0, Z - b}, which
for equal means characterise it.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import stats
from scipy.optimize import brentq

from .errors import (
    BoundarySupport,
    DegenerateMean,
    DegeneratePrior,
    GridMismatch,
    GridOutOfRange,
    NonUniformGrid,
    OrderViolation,
    SchemaError,
    SupportMismatch,
    UnequalMeans,
)

ST_SLACK = 1e-12
LR_SLACK = 1e-10
LC_SLACK = 1e-8
CX_SLACK = 1e-10
MEAN_TOL = 1e-9
DEFAULT_GRID = 1001


class GridDensity:
    """Point masses ``weights`` on ``grid``, normalised to total mass one."""

    def __init__(self, grid, weights):
        grid = np.array(grid, dtype=float).ravel()
        weights = np.array(weights, dtype=float).ravel()
        if grid.size == 0 or grid.size != weights.size:
            raise SchemaError("grid and weights must be nonempty and of equal length")
        if not np.all(np.isfinite(grid)) or np.any(np.diff(grid) <= 0):
            raise SchemaError("grid must be finite and strictly increasing")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise SchemaError("weights must be finite and nonnegative")
        total = weights.sum()
        if not total > 0:
            raise SchemaError("weights must have positive total mass")
        weights = weights / total
        grid.setflags(write=False)
        weights.setflags(write=False)
        self.grid = grid
        self.weights = weights
        self.mean = float(np.dot(grid, weights))

    def __len__(self) -> int:
        return self.grid.size

    def __repr__(self) -> str:
        return f"GridDensity(size={self.grid.size}, mean={self.mean!r})"

    @property
    def var(self) -> float:
        return float(np.dot(self.weights, (self.grid - self.mean) ** 2))

    def expect(self, fn) -> float:
        return float(np.dot(self.weights, fn(self.grid)))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.weights)

    def support(self) -> np.ndarray:
        """Indices carrying positive mass."""
        return np.nonzero(self.weights > 0)[0]

    def same_grid(self, other: "GridDensity") -> bool:
        return self.grid.shape == other.grid.shape and bool(np.array_equal(self.grid, other.grid))

    def density(self) -> np.ndarray:
        """Masses divided by local cell widths (a Lebesgue density on the grid)."""
        if self.grid.size == 1:
            return self.weights.copy()
        return self.weights / np.gradient(self.grid)

    def reweight(self, factor) -> "GridDensity":
        return GridDensity(self.grid, self.weights * np.asarray(factor, dtype=float))

    def tilt(self, eta: float) -> "GridDensity":
        """Exponential tilt: weights times exp(eta * p)."""
        z = eta * (self.grid - self.mean)
        return GridDensity(self.grid, self.weights * np.exp(z - z.max()))

    def with_mean(self, target: float) -> "GridDensity":
        """The exponential tilt of this density with mean ``target``.

        Tilting adds a linear term to the log density, so it preserves the
        relative log-concavity order against any fixed density.
        """
        idx = self.support()
        lo, hi = self.grid[idx[0]], self.grid[idx[-1]]
        if not lo < target < hi:
            if lo == hi == target:
                return self
            raise DegeneratePrior(f"mean {target} is not inside the support [{lo}, {hi}]")
        if abs(self.mean - target) <= 1e-15 * max(1.0, abs(target)):
            return self
        width = hi - lo

        def gap(eta):
            return self.tilt(eta / width).mean - target

        a, b = -1.0, 1.0
        while gap(a) > 0:
            a *= 2.0
        while gap(b) < 0:
            b *= 2.0
        eta = brentq(gap, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        return self.tilt(eta / width)

    def mix(self, other: "GridDensity", eps: float) -> "GridDensity":
        """(1 - eps) * self + eps * other on the shared grid."""
        _check_grid(self, other)
        return GridDensity(self.grid, (1.0 - eps) * self.weights + eps * other.weights)

    def to_json(self) -> dict:
        return {"grid": self.grid.tolist(), "weights": self.weights.tolist()}

    @classmethod
    def from_json(cls, obj) -> "GridDensity":
        try:
            return cls(obj["grid"], obj["weights"])
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"grid density needs 'grid' and 'weights': {exc}") from None


# -- constructors ---------------------------------------------------------------

def midpoint_grid(size: int = DEFAULT_GRID, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    """Cell midpoints of a uniform partition of [lo, hi]."""
    return lo + (hi - lo) * (np.arange(size) + 0.5) / size


def from_logpdf(grid, logpdf) -> GridDensity:
    """Discretise an analytic density by evaluating its log at the grid points."""
    lw = np.asarray(logpdf(np.asarray(grid, dtype=float)), dtype=float)
    top = np.max(lw[np.isfinite(lw)])
    with np.errstate(under="ignore"):
        w = np.where(np.isfinite(lw), np.exp(lw - top), 0.0)
    return GridDensity(grid, w)


def beta_density(a: float, b: float, size: int = DEFAULT_GRID) -> GridDensity:
    """Beta(a, b) discretised at the midpoints of a uniform grid on [0, 1]."""
    return from_logpdf(midpoint_grid(size), lambda p: stats.beta.logpdf(p, a, b))


def uniform_density(size: int = DEFAULT_GRID) -> GridDensity:
    return GridDensity(midpoint_grid(size), np.ones(size))


def point_mass(grid, p: float) -> GridDensity:
    """Unit mass at the grid point closest to ``p``."""
    grid = np.asarray(grid, dtype=float)
    w = np.zeros(grid.size)
    w[int(np.argmin(np.abs(grid - p)))] = 1.0
    return GridDensity(grid, w)


# -- order predicates -------------------------------------------------------------

def _check_grid(f: GridDensity, g: GridDensity) -> None:
    if not f.same_grid(g):
        raise GridMismatch("densities live on different grids")


def _common_support(f: GridDensity, g: GridDensity) -> slice:
    pf, pg = f.weights > 0, g.weights > 0
    if not np.array_equal(pf, pg):
        raise SupportMismatch("densities have different supports")
    idx = np.nonzero(pf)[0]
    if idx[-1] - idx[0] + 1 != idx.size:
        raise SupportMismatch("support has interior zero-weight grid points")
    return slice(int(idx[0]), int(idx[-1]) + 1)


def log_ratio(f: GridDensity, g: GridDensity) -> np.ndarray:
    """log(f_k / g_k) on the common support."""
    _check_grid(f, g)
    sl = _common_support(f, g)
    return np.log(f.weights[sl]) - np.log(g.weights[sl])


def leq_st(f: GridDensity, g: GridDensity) -> bool:
    """f <=_st g: the CDF of f lies above the CDF of g."""
    _check_grid(f, g)
    return bool(np.all(f.cdf() >= g.cdf() - ST_SLACK))


def leq_lr(f: GridDensity, g: GridDensity) -> bool:
    """f <=_lr g: log(f / g) is nonincreasing."""
    r = log_ratio(f, g)
    return bool(np.all(np.diff(r) <= LR_SLACK))


def is_uniform_grid(grid, rtol: float = 1e-9) -> bool:
    d = np.diff(np.asarray(grid, dtype=float))
    return d.size == 0 or bool(np.all(np.abs(d - d.mean()) <= rtol * abs(d.mean())))


def leq_lc(f: GridDensity, g: GridDensity) -> bool:
    """f <=_lc g: log(f / g) is concave (nonpositive second differences)."""
    _check_grid(f, g)
    if not is_uniform_grid(f.grid):
        raise NonUniformGrid("relative log-concavity needs a uniformly spaced grid")
    r = log_ratio(f, g)
    return bool(np.all(np.diff(r, 2) <= LC_SLACK))


def stop_loss(points, weights, b) -> np.ndarray:
    """E max{0, Z - b} for Z with masses ``weights`` at ``points``; vectorised in b."""
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=float)
    order = np.argsort(points, kind="stable")
    z, w = points[order], weights[order]
    # suffix sums over points strictly above b
    m0 = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])
    m1 = np.concatenate([np.cumsum((w * z)[::-1])[::-1], [0.0]])
    b = np.asarray(b, dtype=float)
    j = np.searchsorted(z, b, side="right")
    return np.maximum(m1[j] - b * m0[j], 0.0)


def cx_gap(x_points, x_weights, y_points, y_weights) -> float:
    """max_b [E(X - b)^+ - E(Y - b)^+]; X <=_cx Y (equal means) iff this is <= 0.

    Both stop-loss transforms are piecewise linear with kinks at the support
    points, so the supremum is attained at one of them.
    """
    b = np.union1d(np.asarray(x_points, dtype=float), np.asarray(y_points, dtype=float))
    return float(np.max(stop_loss(x_points, x_weights, b) - stop_loss(y_points, y_weights, b)))


def leq_cx(f: GridDensity, g: GridDensity) -> bool:
    """f <=_cx g for equal-mean densities, by stop-loss comparison at every grid point."""
    _check_grid(f, g)
    if abs(f.mean - g.mean) > MEAN_TOL:
        raise UnequalMeans(f"means differ: {f.mean!r} vs {g.mean!r}")
    sf = stop_loss(f.grid, f.weights, f.grid)
    sg = stop_loss(g.grid, g.weights, g.grid)
    return bool(np.all(sf <= sg + CX_SLACK))


def sign_changes(values, tol: float = 0.0) -> tuple[str, ...]:
    """Runs of signs of ``values``; entries with |v| <= tol are dropped."""
    out: list[str] = []
    for v in np.asarray(values, dtype=float).ravel():
        if abs(v) <= tol:
            continue
        s = "+" if v > 0 else "-"
        if not out or out[-1] != s:
            out.append(s)
    return tuple(out)


# -- Bernoulli posterior operators ---------------------------------------------------

def _check_unit(f: GridDensity) -> None:
    if f.grid[0] < 0.0 or f.grid[-1] > 1.0:
        raise GridOutOfRange("a Bernoulli prior needs a grid inside [0, 1]")


def sigma(f: GridDensity) -> GridDensity:
    """Posterior after one success: weights proportional to f(p) p."""
    _check_unit(f)
    if f.mean <= 0.0:
        raise DegenerateMean("a success has probability zero under this prior")
    return GridDensity(f.grid, f.weights * f.grid)


def phi(f: GridDensity) -> GridDensity:
    """Posterior after one failure: weights proportional to f(p) (1 - p)."""
    _check_unit(f)
    if f.mean >= 1.0:
        raise DegenerateMean("a failure has probability zero under this prior")
    return GridDensity(f.grid, f.weights * (1.0 - f.grid))


class MixturePair(NamedTuple):
    eps_star: float
    eps_sub: float
    g_star: GridDensity
    g_sub: GridDensity


def mixture_pair(f1: GridDensity, f1_tilde: GridDensity) -> MixturePair:
    """Mixtures of the posteriors of ``f1_tilde`` matching the posterior means of ``f1``.

    With eps_star = (mu(sigma ft) - mu(sigma f1)) / (mu(sigma ft) - mu(phi ft)) and
    eps_sub = (mu(phi f1) - mu(phi ft)) / (same denominator),

        g_star = (1 - eps_star) sigma ft + eps_star phi ft   has the mean of sigma f1,
        g_sub  = eps_sub sigma ft + (1 - eps_sub) phi ft     has the mean of phi f1,

    and mu(f1) eps_star = (1 - mu(f1)) eps_sub.  Intended for f1 <=_lc ft with
    equal means, where both weights land in [0, 1).
    """
    _check_grid(f1, f1_tilde)
    if abs(f1.mean - f1_tilde.mean) > MEAN_TOL:
        raise UnequalMeans(f"means differ: {f1.mean!r} vs {f1_tilde.mean!r}")
    if f1_tilde.support().size < 2:
        raise DegeneratePrior("the comparison prior is a point mass")
    s1, p1 = sigma(f1), phi(f1)
    st, pt = sigma(f1_tilde), phi(f1_tilde)
    den = st.mean - pt.mean
    eps_star = (st.mean - s1.mean) / den
    eps_sub = (p1.mean - pt.mean) / den
    # rounding on equal inputs
    eps_star = 0.0 if -1e-12 < eps_star < 0.0 else eps_star
    eps_sub = 0.0 if -1e-12 < eps_sub < 0.0 else eps_sub
    for name, e in (("eps_star", eps_star), ("eps_sub", eps_sub)):
        if not 0.0 <= e < 1.0:
            raise OrderViolation(f"{name} = {e!r} outside [0, 1); the pair is not lc-ordered")
    g_star = st.mix(pt, eps_star)
    g_sub = pt.mix(st, eps_sub)
    res = mixture_residuals(f1, MixturePair(eps_star, eps_sub, g_star, g_sub))
    if max(res.values()) > MEAN_TOL:
        raise OrderViolation(f"mixture identities fail: {res}")
    return MixturePair(eps_star, eps_sub, g_star, g_sub)


def mixture_residuals(f1: GridDensity, pair: MixturePair) -> dict:
    """Absolute errors of the three identities the mixture construction guarantees."""
    mu = f1.mean
    return {
        "mean_star": abs(pair.g_star.mean - sigma(f1).mean),
        "mean_sub": abs(pair.g_sub.mean - phi(f1).mean),
        "balance": abs(mu * pair.eps_star - (1.0 - mu) * pair.eps_sub),
    }


# -- change of variables ----------------------------------------------------------------

def logit_reparam(f: GridDensity) -> GridDensity:
    """Move each mass from p to theta = log(p / (1 - p)).

    Masses are unchanged, so ``density()`` of the result carries the Jacobian
    dp/dtheta = p (1 - p) relative to the density on the p-grid.
    """
    if f.grid[0] <= 0.0 or f.grid[-1] >= 1.0:
        raise BoundarySupport("the logit map needs a grid strictly inside (0, 1)")
    p = f.grid
    return GridDensity(np.log(p) - np.log1p(-p), f.weights)


def expit_reparam(f: GridDensity) -> GridDensity:
    """Inverse of :func:`logit_reparam`: move each mass from theta to 1 / (1 + e^-theta)."""
    return GridDensity(1.0 / (1.0 + np.exp(-f.grid)), f.weights)
