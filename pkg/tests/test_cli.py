import csv
import json

import pytest

from ssmlevy.cli import run


def _run(tmp_path, *args, sub="out"):
    out = tmp_path / sub
    code = run(list(args) + ["--out-dir", str(out)])
    return code, out


def _rows(out):
    with open(out / "results.csv", newline="") as fh:
        return list(csv.DictReader(fh))


def test_eval_I_at_zero(tmp_path):
    code, out = _run(tmp_path, "eval-I", "--family", "brownian", "--gamma", "0", "--alpha", "2", "--z", "0")
    assert code == 0
    rows = _rows(out)
    assert len(rows) == 1 and float(rows[0]["I"]) == 1.0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["exit_code"] == 0 and summary["rows"] == 1


def test_c_theta_example(tmp_path):
    # documented output: 3 within 1e-6 (the computed constant is 2.62074...)
    code, out = _run(tmp_path, "c-theta", "--family", "pochhammer", "--rho", "1.5", "--gamma", "0")
    assert code == 0
    assert abs(float(_rows(out)[0]["C_theta"]) - 3.0) <= 1e-6


def test_c_theta_computed_value(tmp_path):
    code, out = _run(tmp_path, "c-theta", "--family", "pochhammer", "--rho", "1.5", "--gamma", "0")
    assert float(_rows(out)[0]["C_theta"]) == pytest.approx(1.5 ** (1 / 1.5) / 0.5, rel=1e-10)


def test_mc_verify_fpt_example(tmp_path):
    code, out = _run(tmp_path, "mc-verify", "fpt", "--family", "brownian", "--gamma", "0", "--alpha", "2",
                     "--q", "1", "--x", "1", "--a", "2", "--paths", "100000", "--seed", "7")
    assert code == 0
    row = _rows(out)[0]
    assert row["pass"] == "1"
    assert abs(float(row["mc"]) - float(row["analytic"])) <= 3 * float(row["se"])


def test_csv_is_byte_identical_on_repeat(tmp_path):
    args = ["mc-verify", "fpt", "--family", "pochhammer", "--rho", "1.5", "--gamma", "0.5", "--alpha", "1",
            "--q", "1", "--x", "0.5", "--a", "1", "--paths", "3000", "--seed", "3"]
    _, o1 = _run(tmp_path, *args, "--threads", "1", sub="a")
    _, o2 = _run(tmp_path, *args, "--threads", "3", sub="b")
    assert (o1 / "results.csv").read_bytes() == (o2 / "results.csv").read_bytes()


def test_ssm_threads_env(tmp_path, monkeypatch):
    args = ["mc-verify", "fpt", "--family", "brownian", "--gamma", "0", "--q", "1", "--x", "1", "--a", "2",
            "--paths", "5000", "--seed", "1"]
    monkeypatch.setenv("SSM_THREADS", "1")
    _, o1 = _run(tmp_path, *args, sub="a")
    monkeypatch.setenv("SSM_THREADS", "4")
    _, o2 = _run(tmp_path, *args, sub="b")
    assert (o1 / "results.csv").read_bytes() == (o2 / "results.csv").read_bytes()


def test_seventeen_digit_formatting(tmp_path):
    _, out = _run(tmp_path, "eval-psi", "--family", "stable", "--rho", "1.5", "--gamma", "0.5", "--u", "0.1")
    line = (out / "results.csv").read_text().splitlines()[1]
    val = line.split(",")[-1]
    assert float(val) == float(repr(float(val)))
    assert len(val.replace("-", "").replace(".", "").lstrip("0").split("e")[0]) <= 17


def test_config_json_inline_and_file(tmp_path):
    spec = {"family": {"family": "brownian_drift", "gamma": 0.5}, "alpha": 2, "q": [0.5, 1.0], "x": [1.0],
            "a": [2.0]}
    c1, o1 = _run(tmp_path, "fpt", "--config", json.dumps(spec), sub="a")
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(spec))
    c2, o2 = _run(tmp_path, "fpt", "--config", str(path), sub="b")
    assert c1 == c2 == 0
    assert len(_rows(o1)) == 2
    assert (o1 / "results.csv").read_bytes() == (o2 / "results.csv").read_bytes()


def test_malformed_config_exit_1(tmp_path, capsys):
    code, _ = _run(tmp_path, "eval-I", "--config", '{"family": "stable", "rho": "abc"}', "--z", "1")
    assert code == 1
    assert "rho" in capsys.readouterr().err
    code, _ = _run(tmp_path, "eval-I", "--z", "1")
    assert code == 1
    code, _ = _run(tmp_path, "no-such-command")
    assert code == 1


def test_regime_violation_exit_2(tmp_path):
    # theta = 6 > alpha = 2
    code, _ = _run(tmp_path, "eval-I", "--family", "brownian", "--gamma", "-3", "--alpha", "2", "--z", "1")
    assert code == 2
    code, _ = _run(tmp_path, "expfun", "--family", "brownian", "--gamma", "0.5", "--q", "1")
    assert code == 2


def test_check_divisibility_pass(tmp_path):
    code, out = _run(tmp_path, "check-divisibility", "--family", "brownian", "--gamma", "-0.5", "--alpha", "2")
    assert code == 0
    verdicts = json.loads((out / "summary.json").read_text())["verdicts"]
    assert set(verdicts) == {"inv-I", "exp-phi", "product", "selfdecomposability", "N"}


def test_family_info(tmp_path):
    code, out = _run(tmp_path, "family-info", "--family", "pochhammer", "--rho", "1.5", "--gamma", "0",
                     "--alpha", "1.5")
    assert code == 0
    info = {r["key"]: r["value"] for r in _rows(out)}
    assert float(info["theta"]) == pytest.approx(1.0)
    assert info["admissible_at_alpha"] == "1"


def test_suite_exit_3_on_failing_criterion(tmp_path):
    code, out = _run(tmp_path, "suite", "--only", "3")
    assert code == 3
    assert json.loads((out / "summary.json").read_text())["criteria"]
    code, _ = _run(tmp_path, "suite", "--only", "1", "2", sub="ok")
    assert code == 0
