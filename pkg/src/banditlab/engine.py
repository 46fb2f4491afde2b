"""Optimal values of finite-horizon two-armed (and one-armed) Bayesian bandits.

V = max(V1, V2), where V1 = a_1 mu_1 + E[V(gamma_1 + X, tau_1 + 1; ...; A^1)]
and V2 is the mirror image; in the one-armed case V2 = a_1 lam + V(...; A^1)
with the arm state unchanged.

Discrete families run an exact backward induction on the lattice of
(pull count, observation sum) states.  Continuous families run a recursion
over quadrature nodes (module :mod:`banditlab.tree`), capped by a budget.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import discount as disc
from .discount import DiscountSequence
from .errors import (
    HistoryLongerThanHorizon,
    HorizonTooLarge,
    ObservationOutOfSupport,
    OneArmedUnsupported,
    SchemaError,
    UnsupportedFamily,
)
from .expfam import ConjugateArm, FamilySpec, get_family, posterior_update, validate_arm
from .quad import GL_ORDER, kinked_expectation
from .tree import DEFAULT_BUDGET, ContinuousTree


@dataclass(frozen=True)
class BanditInstance:
    family: FamilySpec
    arm1: ConjugateArm
    discount: DiscountSequence
    arm2: ConjugateArm | None = None
    known: float | None = None
    order: int = GL_ORDER
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "family", get_family(self.family))
        if (self.arm2 is None) == (self.known is None):
            raise SchemaError("an instance needs exactly one of arm2 or a known value")
        validate_arm(self.family, self.arm1)
        if self.arm2 is not None:
            validate_arm(self.family, self.arm2)
        elif not math.isfinite(self.known):
            raise SchemaError("known arm value must be finite")

    @property
    def one_armed(self) -> bool:
        return self.arm2 is None

    @property
    def n(self) -> int:
        return self.discount.n

    def with_discount(self, A: DiscountSequence) -> "BanditInstance":
        return BanditInstance(self.family, self.arm1, A, self.arm2, self.known, self.order, self.budget)

    def with_arms(self, arm1: ConjugateArm, arm2: ConjugateArm | None = None) -> "BanditInstance":
        return BanditInstance(self.family, arm1, self.discount,
                              arm2 if not self.one_armed else None, self.known, self.order, self.budget)

    def swapped(self) -> "BanditInstance":
        if self.one_armed:
            raise OneArmedUnsupported("cannot swap a one-armed instance")
        return BanditInstance(self.family, self.arm2, self.discount, self.arm1, None, self.order, self.budget)

    def to_json(self) -> dict:
        out = {"family": self.family.name, "arms": [self.arm1.to_json()],
               "discount": {"kind": "explicit", "values": list(self.discount.values)}}
        if self.one_armed:
            out["known"] = self.known
        else:
            out["arms"].append(self.arm2.to_json())
        return out


def two_armed(family, g1, t1, g2, t2, A) -> BanditInstance:
    A = A if isinstance(A, DiscountSequence) else disc.validate(A)
    return BanditInstance(get_family(family), ConjugateArm(g1, t1), A, arm2=ConjugateArm(g2, t2))


def one_armed(family, g, t, lam, A) -> BanditInstance:
    A = A if isinstance(A, DiscountSequence) else disc.validate(A)
    return BanditInstance(get_family(family), ConjugateArm(g, t), A, known=float(lam))


@dataclass(frozen=True)
class ValueResult:
    v: float
    v1: float
    v2: float
    advantage: float = field(init=False)
    optimal_arm: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "advantage", self.v1 - self.v2)
        object.__setattr__(self, "optimal_arm", 1 if self.v1 >= self.v2 else 2)

    @classmethod
    def from_branches(cls, v1: float, v2: float) -> "ValueResult":
        return cls(max(v1, v2), float(v1), float(v2))

    def to_json(self) -> dict:
        return {"v": self.v, "v1": self.v1, "v2": self.v2,
                "advantage": self.advantage, "optimal_arm": self.optimal_arm}


ZERO = ValueResult(0.0, 0.0, 0.0)


# -- exact lattice backward induction ----------------------------------------

class ArmLattice:
    """Reachable states of one arm with discrete observations.

    Level k holds the states after k pulls, indexed by the observation sum
    s = 0..size[k]-1 relative to the root.  ``means[k]`` are posterior means and
    ``trans[k]`` maps level k to level k + 1 (rows sum to one).
    """

    def __init__(self, means, trans):
        self.means = means
        self.trans = trans

    @classmethod
    def conjugate(cls, family: FamilySpec, arm: ConjugateArm, depth: int) -> "ArmLattice":
        means, trans = [], []
        size = 1
        for k in range(depth):
            g = arm.gamma + np.arange(size, dtype=float)
            t = arm.tau + k
            means.append(g / t)
            m, rows = family.pmf_rows(g, t)
            T = np.zeros((size, size + m))
            T[np.arange(size)[:, None], np.arange(size)[:, None] + np.arange(m + 1)[None, :]] = rows
            trans.append(T)
            size += m
        return cls(means, trans)

    @classmethod
    def binary(cls, means) -> "ArmLattice":
        """Success/failure lattice from posterior means given per level."""
        trans = []
        for p in means:
            p = np.asarray(p, dtype=float)
            size = p.size
            T = np.zeros((size, size + 1))
            i = np.arange(size)
            T[i, i] = 1.0 - p
            T[i, i + 1] = p
            trans.append(T)
        return cls([np.asarray(p, dtype=float) for p in means], trans)

    def size(self, k: int) -> int:
        if k < len(self.means):
            return self.means[k].size
        return self.trans[k - 1].shape[1]


class LatticeDP:
    """Backward induction over pull counts.

    ``root`` holds (V1, V2) at the initial state; for two arms ``delta1[k1]``
    is the advantage array after one pull (k1 = 1: arm 1 was pulled).
    """

    def __init__(self, lat1: ArmLattice, lat2: ArmLattice | None, weights, known=None):
        self.w = tuple(float(a) for a in weights)
        self.n = len(self.w)
        self.lat1, self.lat2, self.known = lat1, lat2, known
        self.root = (0.0, 0.0)
        self.delta1 = {}
        if lat2 is None:
            self._run_one()
        else:
            self._run_two()

    def _run_two(self):
        n, L1, L2 = self.n, self.lat1, self.lat2
        nxt = {k1: np.zeros((L1.size(k1), L2.size(n - k1))) for k1 in range(n + 1)}
        for d in range(n - 1, -1, -1):
            a = self.w[d]
            cur = {}
            for k1 in range(d + 1):
                k2 = d - k1
                V1 = a * L1.means[k1][:, None] + L1.trans[k1] @ nxt[k1 + 1]
                V2 = a * L2.means[k2][None, :] + nxt[k1] @ L2.trans[k2].T
                cur[k1] = np.maximum(V1, V2)
                if d == 1:
                    self.delta1[k1] = V1 - V2
                if d == 0:
                    self.root = (float(V1[0, 0]), float(V2[0, 0]))
            nxt = cur

    def _run_one(self):
        n, L, lam = self.n, self.lat1, self.known
        nxt = {k: np.zeros(L.size(k)) for k in range(n + 1)}
        for d in range(n - 1, -1, -1):
            a = self.w[d]
            cur = {}
            for k in range(d + 1):
                V1 = a * L.means[k] + L.trans[k] @ nxt[k + 1]
                V2 = a * lam + nxt[k]
                cur[k] = np.maximum(V1, V2)
                if d == 0:
                    self.root = (float(V1[0]), float(V2[0]))
            nxt = cur


# -- public operations -------------------------------------------------------

def _tree(inst: BanditInstance) -> ContinuousTree:
    fam = inst.family
    tree = ContinuousTree(fam, None if inst.one_armed else fam, inst.discount.values,
                          known=inst.known, budget=inst.budget, order=inst.order)
    need = tree.estimate(inst.arm1.gamma, inst.arm1.tau)
    if need > inst.budget:
        raise HorizonTooLarge(
            f"horizon {inst.n} needs about {need} evaluations, budget is {inst.budget}"
        )
    return tree


def _lattice(inst: BanditInstance) -> LatticeDP:
    fam, n = inst.family, inst.n
    lat1 = ArmLattice.conjugate(fam, inst.arm1, n)
    lat2 = None if inst.one_armed else ArmLattice.conjugate(fam, inst.arm2, n)
    return LatticeDP(lat1, lat2, inst.discount.values, known=inst.known)


def value(inst: BanditInstance) -> ValueResult:
    """V, V1, V2 and the advantage at the initial state."""
    if inst.n == 0:
        return ZERO
    if inst.family.discrete:
        v1, v2 = _lattice(inst).root
    else:
        a2 = inst.arm2
        v1, v2 = _tree(inst).root(inst.arm1.gamma, inst.arm1.tau,
                                  None if a2 is None else a2.gamma, None if a2 is None else a2.tau)
    return ValueResult.from_branches(v1, v2)


def advantage_decomposition(inst: BanditInstance) -> tuple[float, float, float]:
    """(a_1 - a_2)(mu_1 - mu_2), E[Delta^+ after arm 1], E[Delta^- after arm 2].

    The three terms sum to the advantage returned by :func:`value`.
    """
    if inst.one_armed:
        raise OneArmedUnsupported("the decomposition needs two unknown arms")
    if inst.n < 2:
        raise HistoryLongerThanHorizon("the decomposition needs a horizon of at least 2")
    a = inst.discount.values
    arm1, arm2 = inst.arm1, inst.arm2
    myopic = (a[0] - a[1]) * (arm1.mean - arm2.mean)
    if inst.family.discrete:
        dp = _lattice(inst)
        p1 = dp.lat1.trans[0][0]
        p2 = dp.lat2.trans[0][0]
        plus = float(p1 @ np.maximum(dp.delta1[1][:, 0], 0.0))
        minus = float(p2 @ np.minimum(dp.delta1[0][0, :], 0.0))
        return myopic, plus, minus
    fam = inst.family
    tree = _tree(inst)
    g1, t1, g2, t2 = arm1.gamma, arm1.tau, arm2.gamma, arm2.tau
    plus = kinked_expectation(
        lambda xi: fam.transform(g1, t1, xi), tree.edges_for(0, 1, g1, t1, g2, t2),
        lambda x: tree.values(1, g1 + x, t1 + 1, g2, t2),
        lambda u, v: np.maximum(u - v, 0.0), inst.order,
    )
    minus = kinked_expectation(
        lambda xi: fam.transform(g2, t2, xi), tree.edges_for(0, 2, g1, t1, g2, t2),
        lambda y: tree.values(1, g1, t1, g2 + y, t2 + 1),
        lambda u, v: np.minimum(u - v, 0.0), inst.order,
    )
    return myopic, plus, minus


def optimal_policy_trace(inst: BanditInstance, history) -> tuple[int, ValueResult]:
    """Replay (arm, observation) pairs and return the decision at the end state.

    In a one-armed instance the observation attached to an arm-2 pull is
    ignored: the known arm carries no information.
    """
    history = list(history)
    if len(history) > inst.n:
        raise HistoryLongerThanHorizon(f"{len(history)} steps exceed horizon {inst.n}")
    arm1, arm2 = inst.arm1, inst.arm2
    for arm, x in history:
        if arm == 1:
            arm1 = posterior_update(arm1, float(x), inst.family)
        elif arm == 2:
            if not inst.one_armed:
                arm2 = posterior_update(arm2, float(x), inst.family)
        else:
            raise SchemaError(f"arm index must be 1 or 2, got {arm!r}")
    rest = DiscountSequence(inst.discount.values[len(history):])
    if rest.n == 0:
        return 1, ZERO
    state = BanditInstance(inst.family, arm1, rest, arm2, inst.known, inst.order, inst.budget)
    res = value(state)
    return res.optimal_arm, res


# -- brute-force oracle --------------------------------------------------------

BRUTE_FORCE_MAX_N = 4


def brute_force_value(inst: BanditInstance) -> float:
    """Best expected payoff over all deterministic strategies (bernoulli only).

    A strategy assigns an arm to every history of binary outcomes; each one is
    scored by summing over outcome paths.  Nothing here is shared with
    :func:`value`.
    """
    if inst.family.name != "bernoulli":
        raise UnsupportedFamily("strategy enumeration is implemented for bernoulli arms only")
    n = inst.n
    if n > BRUTE_FORCE_MAX_N:
        raise HorizonTooLarge(f"strategy enumeration is limited to n <= {BRUTE_FORCE_MAX_N}")
    if n == 0:
        return 0.0
    w = inst.discount.values
    prior = [(inst.arm1.gamma, inst.arm1.tau)]
    if not inst.one_armed:
        prior.append((inst.arm2.gamma, inst.arm2.tau))
    lam = inst.known

    histories = [h for k in range(n) for h in itertools.product((0, 1), repeat=k)]

    def payoff(strategy):
        def walk(h, succ, pulls):
            t = len(h)
            if t == n:
                return 0.0
            arm = strategy[h]
            if arm == 1 and lam is not None:
                # known arm: deterministic reward, the history records a 0
                return w[t] * lam + walk(h + (0,), succ, pulls)
            i = 0 if arm == 0 else 1
            g, tau = prior[i]
            p = (g + succ[i]) / (tau + pulls[i])
            s1 = succ[:i] + (succ[i] + 1,) + succ[i + 1:]
            n1 = pulls[:i] + (pulls[i] + 1,) + pulls[i + 1:]
            win = walk(h + (1,), s1, n1)
            lose = walk(h + (0,), succ, n1)
            return p * (w[t] + win) + (1 - p) * lose

        zero = (0,) * len(prior)
        return walk((), zero, zero)

    best = -math.inf
    for choice in itertools.product((0, 1), repeat=len(histories)):
        best = max(best, payoff(dict(zip(histories, choice))))
    return best
