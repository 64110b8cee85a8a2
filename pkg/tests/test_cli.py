import json

import pytest

from ncriemann import cli
from oracles import direct_theta


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = cli.main([*argv, "--out", str(out)])
    return code, out


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def load(path):
    return json.loads(path.read_text())


def test_ids_writes_table_and_head(tmp_path):
    spec = write(tmp_path, "m.json", {"d": 1, "N": 4})
    code, out = run(tmp_path, "ids", spec)
    assert code == 0
    rows = (out / "ids.csv").read_text().splitlines()
    assert rows[0] == "lambda,N" and len(rows) == 5
    head = load(out / "head.json")
    assert head["evidence"] == "empirical" and head["result"]["atom_at_zero"] == 0.25
    assert len(head["config_hash"]) == 16 and "numpy" in head["versions"]


def test_ns_on_symbolic_head(tmp_path):
    head = write(tmp_path, "h.json", {"c": 1.0, "a": "1/2"})
    code, out = run(tmp_path, "ns", head)
    rep = load(out / "ns_report.json")
    assert code == 0 and rep["evidence"] == "symbolic"
    assert rep["result"]["alpha"] == {"exact": "1", "value": 1.0}


def test_ns_on_model(tmp_path):
    spec = write(tmp_path, "m.json", {"d": 1, "N": 128})
    code, out = run(tmp_path, "ns", spec)
    res = load(out / "ns_report.json")["result"]
    assert code == 0 and abs(res["alpha_richardson"] - 1) < 0.1


def test_ecc_verdicts(tmp_path):
    code, out = run(tmp_path, "ecc", write(tmp_path, "h.json", {"c": 1.0, "a": -1}))
    assert code == 0 and load(out / "ecc_report.json")["result"]["eccentric"] is True
    code, out = run(tmp_path, "ecc", write(tmp_path, "p.json", {"c": 1.0, "a": -0.5}), name="p")
    assert code == 0 and load(out / "ecc_report.json")["result"]["eccentric"] is False


def test_ecc_inconclusive_on_short_table(tmp_path):
    p = tmp_path / "mu.csv"
    p.write_text("t,mu\n" + "".join(f"{t!r},{1 / t!r}\n" for t in (1e-3, 2e-3, 5e-3, 1e-2, 2e-2)))
    code, _ = run(tmp_path, "ecc", str(p))
    assert code == 1


def test_sing_trace(tmp_path):
    t = write(tmp_path, "t.json", {"c": 1.0, "a": -1})
    a = write(tmp_path, "a.json", {"c": 3.0, "a": -1, "s0": 0.25})
    code, out = run(tmp_path, "sing-trace", t, a)
    assert code == 0 and load(out / "sing_trace.json")["result"]["value"] == pytest.approx(3.0)


def test_sing_trace_refuses_non_eccentric(tmp_path):
    t = write(tmp_path, "t.json", {"c": 1.0, "a": -0.5})
    code, out = run(tmp_path, "sing-trace", t, t)
    assert code == 1 and "error" in load(out / "sing_trace.json")["result"]


def test_cut_verify(tmp_path):
    spec = write(tmp_path, "c.json", {"knots": [0, 0.5, 1], "levels": [1, 0], "eps": [0.1, 0.01]})
    code, out = run(tmp_path, "cut-verify", spec)
    res = load(out / "cut_report.json")["result"]
    assert code == 0 and res["measurable"] and all(r["certified"] for r in res["cuts"])


def test_counterexample(tmp_path):
    code, out = run(tmp_path, "counterexample")
    res = load(out / "notalg_report.json")["result"]
    assert code == 0
    assert [r["gap"] for r in res["gaps"]] == ["201/1000", "801/8000", "20001/1000000"]
    assert res["verdicts"]["f"]["in_AU"] and not res["verdicts"]["f"]["in_AR"]
    assert not res["verdicts"]["f_squared"]["in_AU"]


def test_theta_against_direct_sum(tmp_path):
    spec = write(tmp_path, "m.json", {"d": 2, "N": 16})
    code, out = run(tmp_path, "theta", spec, "--t", "0.5", "2")
    rows = load(out / "theta.json")["result"]["theta"]
    assert code == 0
    for r in rows:
        assert r["theta"] == pytest.approx(direct_theta(2, 16, r["t"]), rel=1e-9)


@pytest.mark.parametrize("argv", [
    ["counterexample", "--eps", "1.5"],
    ["counterexample", "--eps", "abc"],
    ["theta", "MISSING.json"],
])
def test_usage_errors(tmp_path, argv):
    code, _ = run(tmp_path, *argv)
    assert code == 2


def test_malformed_spec(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(tmp_path, "ids", str(bad))[0] == 2
    assert run(tmp_path, "ids", write(tmp_path, "m.json", {"N": 3}), name="o2")[0] == 2


def test_outputs_are_byte_identical(tmp_path):
    spec = write(tmp_path, "m.json", {"d": 1, "N": 32})
    _, a = run(tmp_path, "ids", spec, name="a")
    _, b = run(tmp_path, "ids", spec, name="b")
    for f in ("ids.csv", "head.json"):
        assert (a / f).read_bytes() == (b / f).read_bytes()

def test_golden_mismatch_flagged(tmp_path, monkeypatch):
    spec = write(tmp_path, "m.json", {"d": 1, "N": 8})
    _, ref = run(tmp_path, "ids", spec, name="ref")
    monkeypatch.setenv("NCR_GOLDEN_DIR", str(ref))
    assert run(tmp_path, "ids", spec, name="same")[0] == 0
    (ref / "ids.csv").write_text("lambda,N\n")
    assert run(tmp_path, "ids", spec, name="diff")[0] == 1
