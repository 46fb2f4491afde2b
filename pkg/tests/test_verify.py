import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from banditlab import discount as disc
from banditlab.errors import SchemaError, UnknownSuite
from banditlab.verify import EXPLORERS, SUITES, Row, SuiteConfig, explore, lookup, run_suite
from banditlab.verify.conjugate import oracle_cases
from banditlab.verify.report import CSV_COLUMNS, VerificationReport
from banditlab.verify.samplers import (
    case_rng,
    sample_decreasing,
    sample_nonnegative,
    sample_regular,
)

seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=100, deadline=None)
@given(seeds, st.integers(1, 8))
def test_discount_samplers_respect_their_classes(seed, n):
    rng = np.random.default_rng(seed)
    A = sample_decreasing(rng, n)
    assert disc.is_decreasing(A) and A.values[0] > 0
    assert min(sample_nonnegative(rng, n).values) >= 0
    R = sample_regular(rng, n, positive=min(2, n))
    assert disc.is_regular(R)
    assert all(v > 0 for v in R.values[:min(2, n)])


def test_case_streams_are_independent_of_order():
    a = case_rng(3, 7).random(4)
    case_rng(3, 6).random(100)
    np.testing.assert_array_equal(a, case_rng(3, 7).random(4))
    assert not np.array_equal(a, case_rng(3, 8).random(4))


def test_config_validation_and_round_trip():
    cfg = SuiteConfig("prop1", seed=4, cases=3, family="poisson", c_grid=(2.0, 0.5))
    assert cfg.c_grid == (0.5, 2.0)
    assert cfg.tolerance == 1e-8
    assert SuiteConfig.from_json(json.loads(json.dumps(cfg.to_json()))) == cfg
    assert SuiteConfig("prop1", family="normal").tolerance == 1e-5
    for bad in ({"cases": 0}, {"n_min": 3, "n_max": 2}, {"tau_min": 0.0}, {"tol": -1.0}):
        with pytest.raises(SchemaError):
            SuiteConfig("prop1", **bad)
    with pytest.raises(SchemaError):
        SuiteConfig.from_json({"suite": "prop1", "sedd": 1})


def test_rows_and_verdicts():
    ok = Row(0, "c", {}, 0.0, 0.0, -1.0, 0.0)
    bad = Row(1, "c", {}, 0.0, 0.0, 1e-3, 1e-8)
    nan = Row(2, "c", {}, 0.0, 0.0, float("nan"), 1e-8)
    assert not ok.violated and bad.violated and nan.violated
    rep = VerificationReport("x", SuiteConfig("x"), 3, [ok, bad, nan])
    assert rep.status == "fail" and len(rep.violations) == 2
    assert VerificationReport("x", SuiteConfig("x"), 3, [ok, bad], report_only=True).status == "report-only"
    lines = rep.to_csv().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[2].endswith("violation")


def test_unknown_suites():
    with pytest.raises(UnknownSuite):
        run_suite(SuiteConfig("prop9"))
    with pytest.raises(UnknownSuite):
        explore(SuiteConfig("prop1"))
    assert lookup("b-vs-lambda") is EXPLORERS["b_vs_lambda"]


@pytest.mark.parametrize("name", sorted(set(SUITES) - {"oracle"}))
def test_every_suite_runs_a_few_cases(name):
    rep = run_suite(SuiteConfig(name, cases=3, n_max=3))
    assert rep.rows and rep.status == "pass", [r for r in rep.violations]


@pytest.mark.parametrize("family", ["poisson", "normal", "exponential"])
def test_conjugate_suites_on_other_families(family):
    for name in ("prop1", "thm0", "prop2", "cor1", "prop3"):
        rep = run_suite(SuiteConfig(name, cases=2, n_max=3, family=family))
        assert rep.status == "pass", (name, rep.violations)


def test_oracle_instance_count():
    assert oracle_cases(SuiteConfig("oracle", n_max=3)) > 800


def test_reports_are_reproducible(tmp_path):
    cfg = SuiteConfig("thm0", seed=11, cases=5, n_max=4)
    a, b = run_suite(cfg), run_suite(cfg)
    assert a.to_csv() == b.to_csv()
    assert a.summary_json() == b.summary_json()
    a.write(str(tmp_path / "r.csv"), str(tmp_path / "r.json"))
    assert (tmp_path / "r.csv").read_text() == b.to_csv()
    assert json.loads((tmp_path / "r.json").read_text())["status"] == "pass"


def test_threads_do_not_change_reports(monkeypatch):
    cfg = SuiteConfig("prop2", seed=2, cases=6, n_max=4)
    serial = run_suite(cfg).to_csv()
    monkeypatch.setenv("BANDITLAB_THREADS", "3")
    assert run_suite(cfg).to_csv() == serial


def test_explorers_are_report_only():
    rep = explore(SuiteConfig("berry", n_max=2))
    assert rep.status == "report-only"
    assert rep.statistics["max_abs_symmetric_delta"] <= 1e-12
    rep = explore(SuiteConfig("herschkorn", cases=3, n_max=3, grid_size=41))
    assert rep.statistics["candidates"] == 0
