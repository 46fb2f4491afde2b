"""Discount sequences A_n = (a_1, ..., a_n) and their structural predicates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import NegativeWeight, SchemaError, ZeroMass

REGULARITY_SLACK = 1e-12


@dataclass(frozen=True)
class DiscountSequence:
    """Nonnegative payoff weights.

    The empty sequence is allowed only as the terminal object produced by
    :func:`tail`; :func:`validate` never returns it.
    """

    values: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def total(self) -> float:
        return float(sum(self.values))

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def tail_sums(self) -> np.ndarray:
        """b_1..b_n followed by two trailing zeros (b_{n+1} = b_{n+2} = 0)."""
        a = np.asarray(self.values, dtype=float)
        b = np.cumsum(a[::-1])[::-1]
        return np.concatenate([b, [0.0, 0.0]])

    def scaled(self, k: float) -> "DiscountSequence":
        return DiscountSequence(tuple(float(k) * a for a in self.values))

    def to_json(self) -> dict:
        return {"kind": "explicit", "values": list(self.values)}


def validate(values: Iterable[float]) -> DiscountSequence:
    vals = tuple(float(v) for v in values)
    if not vals:
        raise ZeroMass("discount sequence is empty")
    if any(not np.isfinite(v) for v in vals):
        raise SchemaError("discount weights must be finite")
    if any(v < 0 for v in vals):
        raise NegativeWeight(f"negative discount weight in {vals}")
    if sum(vals) <= 0:
        raise ZeroMass("discount weights sum to zero")
    return DiscountSequence(vals)


def uniform(n: int) -> DiscountSequence:
    return validate([1.0] * int(n))


def geometric(beta: float, n: int) -> DiscountSequence:
    if not 0 < beta <= 1:
        raise SchemaError(f"geometric ratio must lie in (0, 1], got {beta}")
    return validate([beta**i for i in range(int(n))])


def tail(A: DiscountSequence) -> DiscountSequence:
    """Drop the first weight; (a_1) -> () which carries zero mass."""
    return DiscountSequence(A.values[1:])


def is_decreasing(A: DiscountSequence) -> bool:
    v = A.values
    return all(v[i] >= v[i + 1] for i in range(len(v) - 1))


def is_regular(A: DiscountSequence) -> bool:
    """b_{j+1}^2 >= b_j b_{j+2} for j = 1..n.

    The slack is absolute for sequences of unit scale and grows with b_1^2 so
    the predicate does not depend on the overall scale of A.
    """
    b = A.tail_sums()
    slack = REGULARITY_SLACK * max(1.0, b[0] ** 2)
    for j in range(A.n):
        if b[j + 1] ** 2 - b[j] * b[j + 2] < -slack:
            return False
    return True


def from_json(obj: dict | Sequence[float]) -> DiscountSequence:
    if isinstance(obj, (list, tuple)):
        return validate(obj)
    if not isinstance(obj, dict):
        raise SchemaError("discount must be an object or a list")
    kind = obj.get("kind", "explicit")
    try:
        if kind == "explicit":
            return validate(obj["values"])
        if kind == "uniform":
            return uniform(int(obj["n"]))
        if kind == "geometric":
            return geometric(float(obj["beta"]), int(obj["n"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad discount object {obj!r}: {exc}") from exc
    raise SchemaError(f"unknown discount kind {kind!r}")
