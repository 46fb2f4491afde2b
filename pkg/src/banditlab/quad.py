"""Composite Gauss-Legendre rules and expectations of kinked integrands.

The value functions that appear in the backward induction are maxima of two
smooth branches, so a fixed Gauss rule over the predictive converges only at
first order.  ``kinked_expectation`` locates the switch points between the
branches and splits the affected panels there, after which every piece is
smooth and the composite rule converges geometrically.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import HorizonTooLarge

GL_ORDER = 8


@lru_cache(maxsize=None)
def gauss_legendre(k: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(k)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_rule(edges, order: int = GL_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite rule on the panels given by ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


class Budget:
    """Counts integrand evaluations and aborts once the cap is exceeded."""

    def __init__(self, cap: int | None):
        self.cap = cap
        self.used = 0

    def charge(self, k: int) -> None:
        self.used += int(k)
        if self.cap is not None and self.used > self.cap:
            raise HorizonTooLarge(
                f"node budget of {self.cap} evaluations exhausted"
            )


def kinked_expectation(
    transform: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
    edges,
    child: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
    combine: Callable[[np.ndarray, np.ndarray], np.ndarray],
    order: int = GL_ORDER,
    budget: Budget | None = None,
) -> float:
    """E[combine(v1(X), v2(X))] where X = x(xi) and xi carries density ``dens``.

    ``transform(xi) -> (x, dens)`` maps the standardized variable to an
    observation.  ``child(x) -> (v1, v2)`` are the two branch values at
    the updated state; ``combine`` is kinked only where ``v1 == v2``.
    """
    edges = np.asarray(edges, dtype=float)
    xi, w = composite_rule(edges, order)
    x, dens = transform(xi)
    v1, v2 = child(x)
    if budget is not None:
        budget.charge(xi.size)
    vals = combine(v1, v2) * dens * w

    d = v1 - v2
    flips = np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)[0]
    if flips.size == 0:
        return float(vals.sum())

    def diff(t: float) -> float:
        xx, _ = transform(np.array([t]))
        a, b = child(xx)
        if budget is not None:
            budget.charge(1)
        return float(a[0] - b[0])

    roots = []
    for i in flips:
        lo, hi = xi[i], xi[i + 1]
        flo, fhi = diff(lo), diff(hi)
        if flo * fhi >= 0:
            # rounding moved the sign change onto a node; nothing to split
            continue
        roots.append(brentq(diff, lo, hi, xtol=1e-13 * max(1.0, abs(lo)), rtol=1e-15))
    if not roots:
        return float(vals.sum())

    npan = edges.size - 1
    split: dict[int, list[float]] = {}
    for r in roots:
        p = int(np.clip(np.searchsorted(edges, r, side="right") - 1, 0, npan - 1))
        if edges[p] < r < edges[p + 1]:
            split.setdefault(p, []).append(r)
    if not split:
        return float(vals.sum())

    per = vals.reshape(npan, order)
    total = sum(float(per[p].sum()) for p in range(npan) if p not in split)
    for p, rs in split.items():
        sub_edges = np.concatenate([[edges[p]], np.sort(rs), [edges[p + 1]]])
        sxi, sw = composite_rule(sub_edges, order)
        sx, sdens = transform(sxi)
        a, b = child(sx)
        if budget is not None:
            budget.charge(sxi.size)
        total += float((combine(a, b) * sdens * sw).sum())
    return total


def smooth_expectation(transform, edges, fn, order: int = GL_ORDER) -> float:
    """E[fn(X)] for an fn without kinks."""
    xi, w = composite_rule(edges, order)
    x, dens = transform(xi)
    return float((fn(x) * dens * w).sum())
