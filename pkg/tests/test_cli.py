import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import BINOM
from minmarkov import io
from minmarkov.cli import main

INAR1 = {"N": 5, "order": 1, "H": {"type": "inar1", "alpha": -1}, "marginal": {"type": "binomial", "N": 5, "nu": 0.4}, "seed": 1}
INAR2 = {"N": 5, "order": 2, "H": {"type": "inar2", "alpha": [0.6, -0.3]}, "marginal": {"type": "binomial", "N": 5, "nu": 0.4}}


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def inar1_file(tmp_path_factory):
    d = tmp_path_factory.mktemp("inar1")
    assert main(["construct", "--spec", write(d / "spec.json", INAR1), "--out", str(d / "r.json")]) == 0
    return d / "r.json"


def test_construct_binomial_marginal(inar1_file):
    doc = json.loads(inar1_file.read_text())
    np.testing.assert_allclose(doc["stationary_1"], BINOM, atol=1e-8)
    for key in ("kernel", "kappa", "delta", "theta", "psi", "stationary_d", "optimizer", "version"):
        assert key in doc
    assert doc["optimizer"]["grad_norm"] <= 1e-9


def test_construct_independence_table(tmp_path, capsys):
    r = [0.1, 0.2, 0.3, 0.4]
    spec = {"states": ["a", "b", "c", "d"], "H": {"type": "table", "values": np.zeros((4, 4)).tolist()},
            "marginal": {"type": "table", "values": r}}
    code, out, _ = run(capsys, "construct", "--spec", write(tmp_path / "s.json", spec))
    assert code == 0
    doc = json.loads(out)
    assert doc["states"] == ["a", "b", "c", "d"]
    np.testing.assert_allclose(doc["kernel"], np.tile(r, (4, 1)), atol=1e-9)


def test_result_round_trip_is_lossless(inar1_file):
    text = inar1_file.read_text()
    res, _ = io.read_result(inar1_file)
    assert io.dumps(io.result_to_dict(res, {"seed": 1})) + "\n" == text


def test_seventeen_digit_floats():
    assert io.dumps([0.1, 1.0, -0.0, 3]) == "[0.10000000000000001, 1.0, 0.0, 3]"
    with pytest.raises(Exception):
        io.dumps([float("nan")])


@pytest.mark.parametrize(
    "doc, field",
    [
        ({**INAR1, "H": {"type": "inar1", "alpha": "x"}}, "H.alpha"),
        ({**INAR1, "marginal": {"type": "binomial", "N": 5, "nu": 1.4}}, "marginal.nu"),
        ({**INAR1, "H": {"type": "quadratic"}}, "H.type"),
        ({k: v for k, v in INAR1.items() if k != "marginal"}, "marginal"),
        ({**INAR1, "order": 0}, "order"),
        ({**INAR1, "H": {"type": "table", "values": [[0, 0], [0, 0]]}}, "H.values"),
        ({**INAR1, "marginal": {"type": "table", "values": [0.5, 0.5, 0, 0, 0, 0]}}, "marginal.values"),
        ({**INAR1, "marginal": {"type": "binomial", "N": 4, "nu": 0.4}}, "marginal.N"),
        ({**INAR1, "order": 2}, "H.type"),
        ({**INAR1, "extra": 1}, "<root>"),
    ],
)
def test_invalid_spec_names_field(tmp_path, capsys, doc, field):
    code, _, err = run(capsys, "construct", "--spec", write(tmp_path / "s.json", doc))
    assert code == 2
    payload = json.loads(err)
    assert payload["exit_code"] == 2
    assert payload["field"] == field
    assert field in payload["message"]


def test_malformed_json(tmp_path, capsys):
    p = tmp_path / "s.json"
    p.write_text('{"N": 5,')
    code, _, err = run(capsys, "construct", "--spec", str(p))
    assert code == 2
    assert "line" in json.loads(err)["message"]


def test_missing_file(tmp_path, capsys):
    code, _, err = run(capsys, "construct", "--spec", str(tmp_path / "nope.json"))
    assert code == 2 and json.loads(err)["error"] == "InputError"


def test_resource_cap(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("MINMARKOV_STATE_CAP", "30")
    code, _, err = run(capsys, "construct", "--spec", write(tmp_path / "s.json", INAR2))
    assert code == 3 and json.loads(err)["error"] == "ResourceError"


def test_non_convergence_exit_code(tmp_path, capsys):
    code, _, err = run(capsys, "construct", "--spec", write(tmp_path / "s.json", INAR1), "--max-iter", "2")
    assert code == 4
    assert json.loads(err)["iterations"] == 2


def test_unknown_verb(capsys):
    code, _, err = run(capsys, "bogus")
    assert code == 2 and "invalid choice" in json.loads(err)["message"]


def test_sample_determinism_and_header(inar1_file, tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["sample", "--result", str(inar1_file), "--n", "365", "--seed", "1", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "t,x" and len(lines) == 366
    assert lines[1].startswith("1,")


def test_sample_zero_length(inar1_file, tmp_path):
    p = tmp_path / "e.csv"
    assert main(["sample", "--result", str(inar1_file), "--n", "0", "--out", str(p)]) == 0
    assert p.read_text() == "t,x\n"


def test_sample_needs_n(inar1_file, capsys):
    code, _, _ = run(capsys, "sample", "--result", str(inar1_file))
    assert code == 2


def test_sample_unreadable_result(tmp_path, capsys):
    p = tmp_path / "r.json"
    p.write_text('{"format": "something-else"}')
    code, _, _ = run(capsys, "sample", "--result", str(p), "--n", "3")
    assert code == 2


def test_stats_exact_independence(tmp_path, capsys):
    spec = {"N": 2, "H": {"type": "table", "values": np.zeros((3, 3)).tolist()},
            "marginal": {"type": "table", "values": [0.2, 0.3, 0.5]}}
    rp = tmp_path / "r.json"
    main(["construct", "--spec", write(tmp_path / "s.json", spec), "--out", str(rp)])
    code, out, _ = run(capsys, "stats", "--result", str(rp), "--max-lag", "4")
    doc = json.loads(out)
    assert code == 0 and doc["mode"] == "exact"
    np.testing.assert_allclose(doc["acf"][1:], 0, atol=1e-9)


def test_stats_exact_inar2_pacf(tmp_path, capsys):
    rp = tmp_path / "r.json"
    main(["construct", "--spec", write(tmp_path / "s.json", INAR2), "--out", str(rp)])
    code, out, _ = run(capsys, "stats", "--result", str(rp), "--max-lag", "3")
    doc = json.loads(out)
    assert doc["pacf"][2] < 0 < doc["pacf"][1]


def test_stats_sample_mode_reproducible(inar1_file, tmp_path, capsys):
    outs = []
    for k in range(2):
        csv = tmp_path / f"s{k}.csv"
        main(["sample", "--result", str(inar1_file), "--n", "365", "--seed", "1", "--out", str(csv)])
        code, out, _ = run(capsys, "stats", "--series", str(csv), "--max-lag", "5")
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["mode"] == "sample" and doc["n"] == 365 and len(doc["acf"]) == 6


def test_stats_constant_series(tmp_path, capsys):
    p = tmp_path / "c.csv"
    p.write_text("t,x\n1,2\n2,2\n3,2\n")
    code, _, err = run(capsys, "stats", "--series", str(p), "--max-lag", "1")
    assert code == 2 and json.loads(err)["error"] == "DomainError"


def test_fit_round_trip(inar1_file, tmp_path, capsys):
    csv = tmp_path / "s.csv"
    main(["sample", "--result", str(inar1_file), "--n", "10000", "--seed", "4", "--out", str(csv)])
    model = {"N": 5, "basis": [{"type": "inar1", "alpha": 1}]}
    out = tmp_path / "f.json"
    code, stdout, _ = run(capsys, "fit", "--spec", write(tmp_path / "m.json", model), "--series", str(csv), "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert abs(doc["fit"]["theta_hat"][0] + 1) <= 0.15
    assert json.loads(stdout)["theta_hat"] == doc["fit"]["theta_hat"]
    assert main(["verify", "--result", str(out), "--out", str(tmp_path / "v.json")]) == 0


def test_fit_marginal_only(tmp_path, capsys):
    csv = tmp_path / "s.csv"
    x = [0, 1, 2, 2, 1, 0, 2, 2, 1]
    csv.write_text("t,x\n" + "".join(f"{t},{v}\n" for t, v in enumerate(x, 1)))
    code, out, _ = run(capsys, "fit", "--spec", write(tmp_path / "m.json", {"N": 2, "basis": []}), "--series", str(csv))
    doc = json.loads(out)
    freq = np.bincount(x[1:], minlength=3) / 8
    np.testing.assert_allclose(doc["stationary_1"], freq, atol=1e-8)


def test_fit_missing_state(tmp_path, capsys):
    csv = tmp_path / "s.csv"
    csv.write_text("t,x\n1,0\n2,1\n3,2\n4,1\n5,0\n")
    model = {"N": 5, "basis": [{"type": "inar1", "alpha": 1}]}
    code, _, err = run(capsys, "fit", "--spec", write(tmp_path / "m.json", model), "--series", str(csv))
    payload = json.loads(err)
    assert code == 5
    assert payload["missing"] == ["3", "4", "5"]


def test_fit_bad_series_header(tmp_path, capsys):
    csv = tmp_path / "s.csv"
    csv.write_text("time,value\n1,0\n")
    code, _, _ = run(capsys, "fit", "--spec", write(tmp_path / "m.json", {"N": 2, "basis": []}), "--series", str(csv))
    assert code == 2


def test_verify_fresh_result(inar1_file, capsys):
    code, out, _ = run(capsys, "verify", "--result", str(inar1_file))
    report = json.loads(out)
    assert code == 0 and report["passed"]
    checks = {c["check"]: c for c in report["checks"]}
    assert checks["ipf"]["value"] <= 1e-8
    assert {"row_sums", "decomposition", "stationarity", "marginal", "linear_solve", "pythagorean"} <= set(checks)


def test_verify_second_order(tmp_path, capsys):
    rp = tmp_path / "r.json"
    main(["construct", "--spec", write(tmp_path / "s.json", INAR2), "--out", str(rp)])
    code, out, _ = run(capsys, "verify", "--result", str(rp))
    assert code == 0
    assert "ipf" not in {c["check"] for c in json.loads(out)["checks"]}


def test_verify_corrupted_kernel(inar1_file, tmp_path, capsys):
    doc = json.loads(inar1_file.read_text())
    doc["kernel"][2][3] *= 1.01
    p = write(tmp_path / "bad.json", doc)
    code, out, err = run(capsys, "verify", "--result", p)
    assert code == 6
    checks = {c["check"]: c for c in json.loads(out)["checks"]}
    assert not checks["decomposition"]["passed"]
    assert json.loads(err)["error"] == "VerificationError"


def test_module_entry_point(inar1_file):
    proc = subprocess.run(
        [sys.executable, "-m", "minmarkov", "stats", "--result", str(inar1_file), "--max-lag", "1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["acf"][1] < 0
