"""Acceptance checks 1-9 at their stated tolerances, sizes and runtimes.

Each test records one pass/fail line (printed at the end of the session by
conftest.py) before asserting.
"""

import time

import numpy as np
import pytest

from banditlab import discount as disc
from banditlab.engine import two_armed, value
from banditlab.expfam import ConjugateArm
from banditlab.genprior import vb_value
from banditlab.indices import breakeven_observation, breakeven_value
from banditlab.orders import leq_cx, leq_lc, leq_lr, leq_st, phi, sigma, uniform_density
from banditlab.verify import SuiteConfig, explore, run_suite
from banditlab.verify.samplers import case_rng, sample_lc_pair, sample_lr_pair, sample_tau

from conftest import CRITERIA

FAMILIES = ("bernoulli", "poisson", "normal", "exponential")
DISCRETE = ("bernoulli", "poisson")
CONJUGATE_SUITES = ("prop1", "prop1_threshold", "thm0", "prop2", "thm1", "lemma_lam", "cor1", "prop3")


def record(k: int, ok: bool, detail: str) -> None:
    CRITERIA[k] = (bool(ok), detail)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


def test_criterion_1_one_stage_closed_form():
    t0 = time.perf_counter()
    worst = {}
    for fam in FAMILIES:
        rng = np.random.default_rng([1, FAMILIES.index(fam)])
        err = 0.0
        for _ in range(50):
            means = rng.uniform(0.05, 0.95, 2) if fam == "bernoulli" else (
                rng.uniform(-2.0, 2.0, 2) if fam == "normal" else rng.uniform(0.25, 4.0, 2))
            taus = rng.uniform(0.5, 8.0, 2)
            a1 = float(rng.uniform(0.1, 3.0))
            r = value(two_armed(fam, means[0] * taus[0], taus[0], means[1] * taus[1], taus[1], [a1]))
            exact = a1 * max(means[0] * taus[0] / taus[0], means[1] * taus[1] / taus[1])
            err = max(err, abs(r.v - exact))
        worst[fam] = err
    elapsed = time.perf_counter() - t0
    ok = all(worst[f] <= (1e-12 if f in DISCRETE else 1e-8) for f in FAMILIES) and elapsed < 1.0
    record(1, ok, f"max errors {', '.join(f'{f} {e:.1e}' for f, e in worst.items())}; {elapsed:.2f}s")
    assert ok


def test_criterion_2_hand_derived_bernoulli_values():
    t0 = time.perf_counter()
    A = disc.uniform(2)
    errs = {
        "V(1,2;1,2)": (abs(value(two_armed("bernoulli", 1, 2, 1, 2, A)).v - 13 / 12), 1e-12),
        "L(1,2)": (abs(breakeven_value("bernoulli", ConjugateArm(1, 2), A).lam - 5 / 9), 1e-9),
        "L(2,4)": (abs(breakeven_value("bernoulli", ConjugateArm(2, 4), A).lam - 8 / 15), 1e-9),
        "b(1,2)": (abs(breakeven_observation("bernoulli", ConjugateArm(1, 2), A) - 2 / 3), 1e-8),
    }
    elapsed = time.perf_counter() - t0
    ok = all(e <= tol for e, tol in errs.values()) and elapsed < 1.0
    record(2, ok, f"errors {', '.join(f'{k} {e:.1e}' for k, (e, _) in errs.items())}; {elapsed:.2f}s")
    assert ok


def test_criterion_3_oracle_equivalence():
    t0 = time.perf_counter()
    rep = run_suite(SuiteConfig("oracle", n_max=3))
    elapsed = time.perf_counter() - t0
    ok = rep.status == "pass" and rep.worst_gap <= 1e-12 and elapsed < 30.0
    record(3, ok, f"{rep.cases_run} instances, worst |engine - enumeration| {rep.worst_gap:.1e}; {elapsed:.1f}s")
    assert ok


@pytest.mark.slow
def test_criterion_4_conjugate_suites():
    t0 = time.perf_counter()
    failures, checks = [], 0
    for fam in FAMILIES:
        for name in CONJUGATE_SUITES:
            rep = run_suite(SuiteConfig(name, seed=2024, cases=200, family=fam))
            checks += len(rep.rows)
            if rep.status != "pass" or rep.cases_run < 200:
                failures.append(f"{name}/{fam}: {len(rep.violations)} violations")
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 600.0
    detail = f"{len(CONJUGATE_SUITES)} suites x {len(FAMILIES)} families x 200 cases, {checks} checks"
    record(4, ok, f"{detail}, {'; '.join(failures) or '0 violations'}; {elapsed:.0f}s")
    assert ok


@pytest.mark.slow
def test_criterion_5_general_prior_suites():
    t0 = time.perf_counter()
    runs = [("thm2", "bernoulli", 50), ("cor3", "bernoulli", 50), ("thm3", "normal", 20),
            ("cor4", "normal", 20), ("lemma3", "bernoulli", 50), ("heat", "normal", 100)]
    runs += [("signseq", fam, 200) for fam in FAMILIES]
    failures, heat_err, beta_c = [], 0.0, set()
    for name, fam, cases in runs:
        rep = run_suite(SuiteConfig(name, seed=2024, cases=cases, family=fam))
        if rep.status != "pass" or rep.cases_run < cases:
            failures.append(f"{name}/{fam}: {len(rep.violations)} violations")
        if name == "heat":
            heat_err = max(abs(r.lhs - r.rhs) for r in rep.rows if r.check == "heat_identity")
        if name in ("thm2", "cor3"):
            beta_c |= {c for r in rep.rows if r.instance["pair"]["kind"] == "beta" for c in r.instance["pair"]["c"]}
    elapsed = time.perf_counter() - t0
    ok = not failures and heat_err <= 1e-4 and {1, 2, 4} <= beta_c and elapsed < 600.0
    detail = f"max heat error {heat_err:.1e}, Beta scale factors {sorted(beta_c)}"
    record(5, ok, f"{'; '.join(failures) or '0 violations'}, {detail}; {elapsed:.0f}s")
    assert ok


def test_criterion_6_order_implications():
    t0 = time.perf_counter()
    lr_st = lc_cx = preserved = exceptions = 0
    for case in range(200):
        rng = case_rng(6, case)
        f, g = sample_lr_pair(rng, 101)
        if leq_lr(f, g):
            lr_st += 1
            exceptions += not leq_st(f, g)
            if case < 100:
                preserved += 1
                exceptions += not (leq_lr(sigma(f), sigma(g)) and leq_lr(phi(f), phi(g)))
        f, g, _ = sample_lc_pair(rng, 201)
        if leq_lc(f, g) and abs(f.mean - g.mean) <= 1e-12:
            lc_cx += 1
            exceptions += not leq_cx(f, g)
            if case < 100:
                preserved += 1
                exceptions += not (leq_lc(sigma(f), sigma(g)) and leq_lc(phi(f), phi(g)))
    elapsed = time.perf_counter() - t0
    ok = exceptions == 0 and lr_st >= 200 and lc_cx >= 200 and preserved >= 200 and elapsed < 60.0
    record(6, ok, f"lr=>st on {lr_st} pairs, lc=>cx on {lc_cx} pairs, sigma/phi on {preserved} pairs, "
                  f"{exceptions} exceptions; {elapsed:.1f}s")
    assert ok


def test_criterion_7_grid_convergence():
    t0 = time.perf_counter()
    A = disc.uniform(2)
    err = {k: abs(vb_value(uniform_density(k), uniform_density(k), A).v - 13 / 12) for k in (1001, 4001)}
    elapsed = time.perf_counter() - t0
    ok = err[1001] <= 5e-4 and err[4001] < err[1001] and elapsed < 60.0
    record(7, ok, f"error {err[1001]:.2e} at 1001 points, {err[4001]:.2e} at 4001 points; {elapsed:.1f}s")
    assert ok


def test_criterion_8_conjecture_explorers():
    t0 = time.perf_counter()
    berry = explore(SuiteConfig("berry", n_max=6))
    bvl = explore(SuiteConfig("b_vs_lambda"))
    elapsed = time.perf_counter() - t0
    max_delta = berry.statistics["max_delta"]
    min_gap = bvl.statistics["min_b_minus_lambda"]
    ok = berry.status == bvl.status == "report-only" and max_delta <= 1e-8 and min_gap >= -1e-6 and elapsed < 600.0
    record(8, ok, f"berry max Delta {max_delta:.3g} over {berry.cases_run} instances, "
                  f"min(b - Lambda) {min_gap:.3g} over {bvl.cases_run} instances; {elapsed:.1f}s")
    assert ok


def test_criterion_9_determinism(tmp_path, monkeypatch):
    runs = [("prop2", "poisson"), ("cor1", "normal"), ("thm2", "bernoulli"), ("heat", "normal")]
    identical = []
    for name, fam in runs:
        cfg = SuiteConfig(name, seed=99, cases=8, family=fam, n_max=3)
        blobs = []
        for threads in ("1", "2", "1"):
            monkeypatch.setenv("BANDITLAB_THREADS", threads)
            path = tmp_path / f"{name}_{fam}_{threads}_{len(blobs)}.csv"
            run_suite(cfg).write(str(path), str(path.with_suffix(".json")))
            blobs.append(path.read_bytes())
        identical.append(len(set(blobs)) == 1)
    ok = all(identical)
    record(9, ok, f"{sum(identical)}/{len(runs)} suites byte-identical over 3 runs each")
    assert ok
