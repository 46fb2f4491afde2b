import json

import pytest

from banditlab.cli import dumps, main


def write(tmp_path, obj, name="inst.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


TWO_ARMED = {"family": "bernoulli", "arms": [{"gamma": 1, "tau": 2}, {"gamma": 1, "tau": 2}],
             "discount": [1, 1]}
ONE_ARMED = {"family": "bernoulli", "arms": [{"gamma": 1, "tau": 2}], "known": 0.5,
             "discount": {"kind": "uniform", "n": 2}}


def test_dumps_keeps_full_precision():
    assert dumps({"a": 1.0, "b": 13 / 12, "c": [2, float("inf")]}) == \
        '{"a": 1.0, "b": 1.0833333333333333, "c": [2, "inf"]}'


def test_value(tmp_path, capsys):
    assert main(["value", write(tmp_path, TWO_ARMED)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["v"] == pytest.approx(13 / 12, abs=1e-15)


def test_breakeven(tmp_path, capsys):
    path = write(tmp_path, ONE_ARMED)
    assert main(["breakeven", path]) == 0
    assert json.loads(capsys.readouterr().out)["lambda"] == pytest.approx(5 / 9, abs=1e-9)
    assert main(["breakeven", path, "--observation"]) == 0
    assert json.loads(capsys.readouterr().out)["b"] == pytest.approx(2 / 3, abs=1e-8)


def test_exit_codes(tmp_path, capsys):
    irregular = dict(ONE_ARMED, discount=[1, 0, 1])
    assert main(["breakeven", write(tmp_path, irregular)]) == 4
    assert main(["value", write(tmp_path, "{not json")]) == 2
    assert main(["value", write(tmp_path, {"family": "bernoulli", "arms": []})]) == 2
    assert main(["verify", "--suite", "nope", "--out", str(tmp_path)]) == 2
    assert main(["frobnicate"]) == 2
    capsys.readouterr()


def test_verify_writes_reports(tmp_path, capsys):
    argv = ["verify", "--suite", "thm0", "--cases", "4", "--seed", "5", "--n-max", "3", "--out", str(tmp_path)]
    assert main(argv) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["status"] == "pass" and summary["checks"] == 4
    first = (tmp_path / "thm0_bernoulli_seed5.csv").read_bytes()
    assert main(argv) == 0
    assert (tmp_path / "thm0_bernoulli_seed5.csv").read_bytes() == first
    saved = json.loads((tmp_path / "thm0_bernoulli_seed5.json").read_text())
    assert saved["config"]["seed"] == 5


def test_verify_reads_a_config_file(tmp_path, capsys):
    cfg = write(tmp_path, {"cases": 2, "n_max": 2, "family": "poisson"}, "cfg.json")
    assert main(["verify", "--suite", "prop1", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert json.loads(capsys.readouterr().out)["cases_run"] == 2
    bad = write(tmp_path, {"casez": 2}, "bad.json")
    assert main(["verify", "--suite", "prop1", "--config", bad, "--out", str(tmp_path)]) == 2


def test_explore_always_succeeds(tmp_path, capsys):
    assert main(["explore", "--conjecture", "berry", "--n", "2", "--out", str(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["status"] == "report-only" and "max_delta" in out
    stats = (tmp_path / "berry_bernoulli_seed0_stats.csv").read_text().splitlines()
    assert stats[0] == "statistic,value"
