"""Backward induction for arms with continuous observations.

An arm model describes one arm as a state ``s`` (sum of observations, on top of
the prior) with a scalar pull count ``t``.  It must provide

* ``mean(s, t)``            posterior mean, vectorized over ``s``;
* ``edges(s, t)``           panel edges of the standardized variable;
* ``transform(s, t, xi)``   observation and density at standardized nodes;
* ``excess(s, t, c)``       E[(mean after one more draw - c)^+], vectorized;
* ``mean_floor(s, t)``      lower end of the mean after one draw (or None),
                            below which ``excess`` is linear;
* ``x_for_mean(s, t, m)``   observation moving the mean to m;
* ``to_xi(s, t, x)``        inverse of ``transform`` in the observation.

The last two stages are evaluated in closed form through ``excess``; every
earlier stage integrates over the predictive with the switch point between the
two arms located explicitly (see :func:`banditlab.quad.kinked_expectation`).
Where the closed forms themselves break (``max`` with a known arm, the linear
piece of ``excess``) the break points become extra panel edges.
"""

from __future__ import annotations

import numpy as np

from .quad import GL_ORDER, Budget, kinked_expectation

DEFAULT_BUDGET = 2_000_000


def _vmax(a, b):
    return np.maximum(a, b)


class ContinuousTree:
    def __init__(self, model1, model2, weights, known=None, budget=DEFAULT_BUDGET, order=GL_ORDER):
        self.m1 = model1
        self.m2 = model2
        self.known = known
        self.w = tuple(float(a) for a in weights)
        self.n = len(self.w)
        self.order = order
        self.budget = Budget(budget)

    @staticmethod
    def _pair(s1, s2):
        s1 = np.atleast_1d(np.asarray(s1, dtype=float))
        s2 = np.atleast_1d(np.asarray(0.0 if s2 is None else s2, dtype=float))
        s1, s2 = np.broadcast_arrays(s1, s2)
        return np.array(s1), np.array(s2)

    # -- vectorized closed form for at most two remaining stages ----------------
    def _leaf(self, d, s1, t1, s2, t2):
        s1, s2 = self._pair(s1, s2)
        left = self.n - d
        if left <= 0:
            z = np.zeros_like(s1)
            return z, z.copy()
        a = self.w[d]
        mu1 = self.m1.mean(s1, t1)
        if self.known is None:
            mu2 = self.m2.mean(s2, t2)
        else:
            mu2 = np.full_like(mu1, self.known)
        if left == 1:
            return a * mu1, a * mu2
        b = self.w[d + 1]
        if self.known is None:
            v1 = a * mu1 + b * (mu2 + self.m1.excess(s1, t1, mu2))
            v2 = a * mu2 + b * (mu1 + self.m2.excess(s2, t2, mu1))
        else:
            lam = self.known
            v1 = a * mu1 + b * (lam + self.m1.excess(s1, t1, lam))
            v2 = a * lam + b * np.maximum(mu1, lam)
        return v1, v2

    # -- values at depth d, vectorized over the state of one arm ----------------
    def values(self, d, s1, t1, s2, t2):
        if self.n - d <= 2:
            return self._leaf(d, s1, t1, s2, t2)
        s1, s2 = self._pair(s1, s2)
        out1 = np.empty_like(s1)
        out2 = np.empty_like(s1)
        for i in range(s1.size):
            out1[i], out2[i] = self._node(d, float(s1[i]), t1, float(s2[i]), t2)
        return out1, out2

    def _leaf_breaks(self, d, arm, s1, t1, s2, t2):
        """Observations of ``arm`` at depth d where the depth d+1 leaf is not smooth."""
        if self.n - d - 1 != 2:
            return []
        m1, m2 = self.m1, self.m2
        out = []
        if self.known is not None:
            lam = self.known
            out.append(m1.x_for_mean(s1, t1, lam))
            if m1.mean_floor(s1, t1 + 1) is not None:
                # the child's floor (s1 + x) / (t1 + 2) reaches lam
                out.append(lam * (t1 + 2.0) - s1)
            return out
        if arm == 1:
            mu2 = float(m2.mean(s2, t2))
            if m1.mean_floor(s1, t1 + 1) is not None:
                out.append(mu2 * (t1 + 2.0) - s1)
            f2 = m2.mean_floor(s2, t2)
            if f2 is not None:
                out.append(m1.x_for_mean(s1, t1, float(f2)))
        else:
            mu1 = float(m1.mean(s1, t1))
            if m2.mean_floor(s2, t2 + 1) is not None:
                out.append(mu1 * (t2 + 2.0) - s2)
            f1 = m1.mean_floor(s1, t1)
            if f1 is not None:
                out.append(m2.x_for_mean(s2, t2, float(f1)))
        return out

    def edges_for(self, d, arm, s1, t1, s2, t2):
        model, s, t = (self.m1, s1, t1) if arm == 1 else (self.m2, s2, t2)
        edges = np.asarray(model.edges(s, t), dtype=float)
        extra = [model.to_xi(s, t, x) for x in self._leaf_breaks(d, arm, s1, t1, s2, t2)]
        extra = [e for e in extra if edges[0] < e < edges[-1]]
        if not extra:
            return edges
        return np.unique(np.concatenate([edges, extra]))

    def _node(self, d, s1, t1, s2, t2):
        a = self.w[d]
        m1, m2 = self.m1, self.m2
        mu1 = float(m1.mean(s1, t1))

        def pull1(x):
            return self.values(d + 1, s1 + x, t1 + 1, s2, t2)

        ev1 = kinked_expectation(lambda xi: m1.transform(s1, t1, xi), self.edges_for(d, 1, s1, t1, s2, t2),
                                 pull1, _vmax, self.order, self.budget)
        v1 = a * mu1 + ev1
        if self.known is None:
            mu2 = float(m2.mean(s2, t2))

            def pull2(y):
                return self.values(d + 1, s1, t1, s2 + y, t2 + 1)

            ev2 = kinked_expectation(lambda xi: m2.transform(s2, t2, xi), self.edges_for(d, 2, s1, t1, s2, t2),
                                     pull2, _vmax, self.order, self.budget)
            v2 = a * mu2 + ev2
        else:
            c1, c2 = self.values(d + 1, s1, t1, s2, t2)
            self.budget.charge(1)
            v2 = a * self.known + float(max(c1[0], c2[0]))
        return v1, v2

    def root(self, s1, t1, s2=None, t2=None):
        v1, v2 = self.values(0, s1, t1, s2, t2)
        return float(v1[0]), float(v2[0])

    def estimate(self, s1=0.0, t1=1.0) -> int:
        """Rough count of integrand evaluations, used to fail fast."""
        levels = max(0, self.n - 2)
        per = (len(self.m1.edges(s1, t1)) - 1) * self.order
        fan = 2 * per if self.known is None else per + 1
        return int(sum(fan**j for j in range(1, levels + 1)))
