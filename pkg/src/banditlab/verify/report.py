"""Suite configuration, checked rows, reports and their serialization."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field, replace

from ..errors import SchemaError
from ..tree import DEFAULT_BUDGET

DISCRETE_TOL = 1e-8
CONTINUOUS_TOL = 1e-5
CSV_COLUMNS = ("suite", "seed", "case", "check", "instance", "lhs", "rhs", "gap", "verdict")


@dataclass(frozen=True)
class SuiteConfig:
    """Everything a suite run depends on; two equal configs give equal reports.

    ``n_max`` is clipped per suite where the cost of a value calls for it,
    ``tol = None`` picks 1e-8 for discrete and 1e-5 for continuous families.
    """

    suite: str
    seed: int = 0
    cases: int = 200
    family: str = "bernoulli"
    n_min: int = 1
    n_max: int = 6
    tau_min: float = 0.5
    tau_max: float = 8.0
    c_grid: tuple[float, ...] | None = None
    grid_points: int = 6
    tol: float | None = None
    strict_margin: float = 1e-10
    budget: int = DEFAULT_BUDGET
    grid_size: int = 1001
    discount: str = "uniform"
    beta: float = 0.9
    extended: bool = False

    def __post_init__(self):
        if self.cases < 1:
            raise SchemaError("cases must be at least 1")
        if self.tol is not None and not self.tol > 0:
            raise SchemaError("tolerance must be positive")
        if not 1 <= self.n_min <= self.n_max:
            raise SchemaError(f"bad horizon range [{self.n_min}, {self.n_max}]")
        if not 0 < self.tau_min <= self.tau_max:
            raise SchemaError(f"bad tau range [{self.tau_min}, {self.tau_max}]")
        if self.grid_points < 2:
            raise SchemaError("grids need at least two points")
        if self.c_grid is not None:
            c = tuple(float(v) for v in self.c_grid)
            if any(not v > 0 for v in c):
                raise SchemaError("c-grid values must be positive")
            object.__setattr__(self, "c_grid", tuple(sorted(c)))

    @property
    def tolerance(self) -> float:
        if self.tol is not None:
            return self.tol
        return DISCRETE_TOL if self.family in ("bernoulli", "poisson") else CONTINUOUS_TOL

    def with_(self, **kw) -> "SuiteConfig":
        return replace(self, **kw)

    def to_json(self) -> dict:
        out = asdict(self)
        out["c_grid"] = None if self.c_grid is None else list(self.c_grid)
        out["tolerance"] = self.tolerance
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SuiteConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known - {"tolerance"}
        if unknown:
            raise SchemaError(f"unknown config keys {sorted(unknown)}")
        kw = {k: v for k, v in obj.items() if k in known}
        if kw.get("c_grid") is not None:
            kw["c_grid"] = tuple(kw["c_grid"])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise SchemaError(str(exc)) from exc


@dataclass(frozen=True)
class Row:
    """One checked comparison.  The claim holds when ``gap <= tol``."""

    case: int
    check: str
    instance: dict
    lhs: float
    rhs: float
    gap: float
    tol: float

    @property
    def violated(self) -> bool:
        return not self.gap <= self.tol

    def key(self):
        return (self.case, self.check, json.dumps(self.instance, sort_keys=True))


@dataclass
class VerificationReport:
    suite: str
    config: SuiteConfig
    cases_run: int
    rows: list[Row]
    report_only: bool = False
    statistics: dict = field(default_factory=dict)

    @property
    def violations(self) -> list[Row]:
        return [r for r in self.rows if r.violated]

    @property
    def worst_gap(self) -> float:
        gaps = [r.gap for r in self.rows if not math.isnan(r.gap)]
        return max(gaps) if gaps else -math.inf

    @property
    def status(self) -> str:
        if self.report_only:
            return "report-only"
        return "pass" if not self.violations else "fail"

    def verdict(self, row: Row) -> str:
        if not row.violated:
            return "ok"
        return "candidate" if self.report_only else "violation"

    # -- serialization ------------------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([self.suite, self.config.seed, r.case, r.check,
                        json.dumps(r.instance, sort_keys=True, separators=(",", ":")),
                        fmt(r.lhs), fmt(r.rhs), fmt(r.gap), self.verdict(r)])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "suite": self.suite,
            "config": self.config.to_json(),
            "cases_run": self.cases_run,
            "checks": len(self.rows),
            "worst_gap": self.worst_gap,
            "status": self.status,
            "statistics": self.statistics,
            "violations": [
                {"case": r.case, "check": r.check, "instance": r.instance,
                 "lhs": r.lhs, "rhs": r.rhs, "gap": r.gap}
                for r in self.violations
            ],
        }

    def summary_json(self) -> str:
        return json.dumps(_finite(self.summary()), sort_keys=True, indent=2) + "\n"

    def write(self, csv_path: str, json_path: str) -> None:
        atomic_write(csv_path, self.to_csv())
        atomic_write(json_path, self.summary_json())


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _finite(obj):
    """Replace non-finite floats by strings so the summary is strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return fmt(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def atomic_write(path: str, text: str) -> None:
    """Write to a temporary file in the same directory, then rename over ``path``."""
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.splitext(path)[1])
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
