"""Seeded verification suites for the structural results and report-only conjecture explorers.

Every suite is a function ``(cfg, case) -> list[Row]`` that draws its instance
from a random stream keyed by (seed, case); :func:`run_suite` evaluates the
cases (in parallel when BANDITLAB_THREADS > 1) and assembles the report in
case order, so the output does not depend on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

from ..errors import BudgetExceeded, HorizonTooLarge, UnknownSuite
from . import conjugate, explorers, general
from .report import CSV_COLUMNS, Row, SuiteConfig, VerificationReport, atomic_write


@dataclass(frozen=True)
class Suite:
    name: str
    run_case: Callable
    count: Callable = lambda cfg: cfg.cases
    report_only: bool = False


SUITES: dict[str, Suite] = {
    s.name: s
    for s in (
        Suite("prop1", conjugate.prop1),
        Suite("prop1_threshold", conjugate.prop1_threshold),
        Suite("thm0", conjugate.thm0),
        Suite("prop2", conjugate.prop2),
        Suite("thm1", conjugate.thm1),
        Suite("lemma_lam", conjugate.lemma_lam),
        Suite("cor1", conjugate.cor1),
        Suite("prop3", conjugate.prop3),
        Suite("thm2", general.thm2),
        Suite("cor3", general.cor3),
        Suite("thm3", general.thm3),
        Suite("cor4", general.cor4),
        Suite("lemma3", general.lemma3),
        Suite("heat", general.heat),
        Suite("signseq", general.signseq),
        Suite("oracle", conjugate.oracle, conjugate.oracle_cases),
    )
}

EXPLORERS: dict[str, Suite] = {
    s.name: s
    for s in (
        Suite("berry", explorers.berry, lambda cfg: len(explorers.berry_instances(cfg)), True),
        Suite("b_vs_lambda", explorers.b_vs_lambda, lambda cfg: len(explorers.b_vs_lambda_instances(cfg)), True),
        Suite("herschkorn", explorers.herschkorn, explorers.herschkorn_cases, True),
    )
}


def threads() -> int:
    try:
        return max(1, int(os.environ.get("BANDITLAB_THREADS", "1")))
    except ValueError:
        return 1


def lookup(name: str) -> Suite:
    key = name.replace("-", "_")
    if key in SUITES:
        return SUITES[key]
    if key in EXPLORERS:
        return EXPLORERS[key]
    raise UnknownSuite(f"unknown suite {name!r}; known: {sorted(SUITES) + sorted(EXPLORERS)}")


def _run(suite: Suite, cfg: SuiteConfig) -> VerificationReport:
    count = suite.count(cfg)

    def one(case: int) -> list[Row]:
        try:
            return suite.run_case(cfg, case)
        except HorizonTooLarge as exc:
            raise BudgetExceeded(f"{suite.name} case {case}: {exc}") from exc

    workers = threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(one, range(count)))
    else:
        chunks = [one(case) for case in range(count)]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=Row.key)
    report = VerificationReport(suite.name, cfg, count, rows, suite.report_only)
    if suite.report_only:
        report.statistics = _explorer_statistics(suite.name, rows)
    return report


def _explorer_statistics(name: str, rows: list[Row]) -> dict:
    gaps = [r.gap for r in rows if r.check != "symmetric_delta_zero"]
    stats = {"candidates": sum(r.violated for r in rows)}
    if name == "berry":
        stats["max_delta"] = max(gaps) if gaps else 0.0
        stats["max_abs_symmetric_delta"] = max((r.gap for r in rows if r.check == "symmetric_delta_zero"), default=0.0)
    elif name == "b_vs_lambda":
        stats["min_b_minus_lambda"] = -max(gaps) if gaps else 0.0
    else:
        stats["max_lambda_gap"] = max(gaps) if gaps else 0.0
    return stats


def run_suite(cfg: SuiteConfig) -> VerificationReport:
    suite = SUITES.get(cfg.suite.replace("-", "_"))
    if suite is None:
        raise UnknownSuite(f"unknown suite {cfg.suite!r}; known: {sorted(SUITES)}")
    return _run(suite, cfg)


def explore(cfg: SuiteConfig) -> VerificationReport:
    suite = EXPLORERS.get(cfg.suite.replace("-", "_"))
    if suite is None:
        raise UnknownSuite(f"unknown explorer {cfg.suite!r}; known: {sorted(EXPLORERS)}")
    return _run(suite, cfg)


def explore_berry(cfg: SuiteConfig) -> VerificationReport:
    return explore(cfg.with_(suite="berry"))


def explore_b_vs_lambda(cfg: SuiteConfig) -> VerificationReport:
    return explore(cfg.with_(suite="b_vs_lambda"))


def explore_herschkorn(cfg: SuiteConfig) -> VerificationReport:
    return explore(cfg.with_(suite="herschkorn"))


__all__ = [
    "CSV_COLUMNS", "EXPLORERS", "SUITES", "Row", "SuiteConfig", "VerificationReport", "atomic_write",
    "explore", "explore_b_vs_lambda", "explore_berry", "explore_herschkorn", "lookup", "run_suite",
]
