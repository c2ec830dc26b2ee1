import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from hill import load_potential
from hill.cli import SCHEMA, RunConfig, parse_args, run
from hill.spectrum import BandStructure

POT = Path(__file__).resolve().parent.parent / "data" / "potentials"
PI2 = math.pi**2


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_bands_free_json():
    code, out, _ = call("bands", "--potential", POT / "free.json", "--n-bands", 3, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == SCHEMA["schema_version"]
    bands = [(b["alpha"], b["beta"]) for b in doc["result"]["bands"]]
    expected = [(0, PI2), (PI2, 4 * PI2), (4 * PI2, 9 * PI2)]
    for (a, b), (ea, eb) in zip(bands, expected):
        assert a == pytest.approx(ea, abs=1e-9)
        assert b == pytest.approx(eb, rel=1e-9)
    assert all(g["closed"] for g in doc["result"]["gaps"])


def test_bands_json_round_trip_validates():
    _, out, _ = call("bands", "--potential", POT / "kp.json", "--n-bands", 3)
    bs = BandStructure.from_dict(json.loads(out)["result"])
    bs.validate(load_potential(POT / "kp.json"))
    assert len(bs.bands) == 3


def test_bands_csv_has_two_tables():
    code, out, _ = call("bands", "--potential", POT / "kp.json", "--n-bands", 2, "--format", "csv")
    assert code == 0
    first, second = out.split("\n\n")
    assert first.splitlines()[0].split(",") == SCHEMA["commands"]["bands"]["csv_tables"]["bands"]
    assert second.splitlines()[0].split(",") == SCHEMA["commands"]["bands"]["csv_tables"]["dirichlet"]
    assert len(first.splitlines()) == 3


def test_discriminant_free_csv_closed_form():
    code, out, _ = call("discriminant", "--potential", POT / "free.json", "--lambda-min", -5,
                        "--lambda-max", 100, "--grid", 500, "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 500
    for r in rows:
        lam = float(r["lambda"])
        exact = 2 * math.cos(math.sqrt(lam)) if lam >= 0 else 2 * math.cosh(math.sqrt(-lam))
        assert abs(float(r["delta"]) - exact) <= 1e-9


def test_oracle_compare_kp():
    code, out, _ = call("oracle-compare", "--potential", POT / "kp.json", "--n-bands", 2)
    assert code == 0
    worst = json.loads(out)["result"]["max_defect"]
    assert worst["bloch"] <= 1e-6
    assert worst["fd"] <= 1e-2


def test_oracle_compare_single_method_csv():
    code, out, _ = call("oracle-compare", "--potential", POT / "mathieu.json", "--n-bands", 1,
                        "--method", "bloch", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["method"] for r in rows} == {"bloch"}
    assert len(rows) == 2


def test_dirichlet_free():
    code, out, _ = call("dirichlet", "--potential", POT / "free.json", "--n", 3)
    assert code == 0
    rows = json.loads(out)["result"]["rows"]
    assert [r["mu"] for r in rows] == pytest.approx([PI2, 4 * PI2, 9 * PI2], rel=1e-9)
    assert [r["closure_type"] for r in rows] == ["antiperiodic", "periodic", "antiperiodic"]


def test_period_two_reports_original_units():
    # period 2 halves the rescaled length: energies divide by 4
    code, out, _ = call("dirichlet", "--potential", POT / "kp_period2.json", "--n", 1)
    assert code == 0
    doc = json.loads(out)
    assert doc["energy_scale"] == 4
    Q = load_potential(POT / "kp_period2.json")
    assert Q.energy_scale == 4
    from hill import dirichlet_eigenvalues
    assert doc["result"]["rows"][0]["mu"] == pytest.approx(dirichlet_eigenvalues(Q, 1)[0].mu / 4)


def test_weyl_free_closed_form():
    z = complex(3, 1)
    code, out, _ = call("weyl", "--potential", POT / "free.json", "--z", "3+1j")
    assert code == 0
    row = json.loads(out)["result"]["rows"][0]
    k = np.sqrt(z)
    m12 = row[4] + 1j * row[5]
    assert m12 == pytest.approx(k / np.sin(k), rel=1e-9)


def test_verify_free_reports_groups():
    code, out, _ = call("verify", "--potential", POT / "free.json", "--lambda-max", 50)
    assert code == 0
    passed = json.loads(out)["result"]["passed"]
    assert passed["herglotz"]
    assert passed["lemma2_weyl"]
    assert passed["residues"]
    # the (-D, -s) sign convention fails the sign item; reported, not fatal
    assert passed["lemma2_negated"] is False


def test_output_file(tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = call("bands", "--potential", POT / "free.json", "--n-bands", 1,
                        "--output", target)
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["command"] == "bands"


def test_determinism_and_jobs():
    args = ("discriminant", "--potential", POT / "mathieu.json", "--lambda-min", -3,
            "--lambda-max", 60, "--grid", 97, "--format", "csv")
    a = call(*args)[1]
    b = call(*args)[1]
    c = call(*args, "--jobs", 3)[1]
    assert a == b == c


@pytest.mark.parametrize("argv", [
    [],
    ["bands"],
    ["bands", "--potential", "x.json", "--n-bands", "0"],
    ["discriminant", "--potential", "x.json", "--lambda-min", "5", "--lambda-max", "1"],
    ["discriminant", "--potential", "x.json", "--lambda-min", "0", "--lambda-max", "1", "--grid", "1"],
    ["bands", "--potential", "x.json", "--jobs", "0"],
    ["bands", "--potential", "x.json", "--format", "xml"],
    ["oracle-compare", "--potential", "x.json", "--method", "magic"],
    ["nonsense"],
])
def test_usage_errors_exit_2(argv):
    code, _, err = call(*argv)
    assert code == 2
    assert "usage" in err.lower() or err == ""


def test_missing_file_exits_1():
    code, _, err = call("bands", "--potential", "/nonexistent/q.json")
    assert code == 1
    assert set(json.loads(err)) >= {"error", "message", "diagnostics"}


def test_invalid_potential_exits_1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "piecewise-constant", "breakpoints": [0, 1], "values": [1, 2]}))
    code, _, err = call("bands", "--potential", bad)
    assert code == 1
    assert json.loads(err)["error"]


def test_computation_error_exits_1():
    code, _, err = call("weyl", "--potential", POT / "free.json", "--z", str(PI2))
    assert code == 1
    assert "diagnostics" in json.loads(err)


def test_env_tolerances(monkeypatch):
    monkeypatch.setenv("HILL_RTOL", "1e-9")
    monkeypatch.setenv("HILL_ATOL", "1e-11")
    opts = parse_args(["bands", "--potential", "q.json"]).options()
    assert (opts.rel_tol, opts.abs_tol) == (1e-9, 1e-11)
    opts = parse_args(["bands", "--potential", "q.json", "--rtol", "1e-8"]).options()
    assert opts.rel_tol == 1e-8


def test_bad_env_tolerance_exits_1(monkeypatch):
    monkeypatch.setenv("HILL_RTOL", "fast")
    code, _, _ = call("bands", "--potential", POT / "free.json")
    assert code == 1


def test_run_config_defaults():
    cfg = RunConfig(command="bands", potential="q.json")
    assert cfg.fmt == "json" and cfg.jobs == 1


def test_schema_file_lists_every_command():
    assert set(SCHEMA["commands"]) == {"bands", "dirichlet", "discriminant", "verify", "weyl",
                                       "oracle-compare"}
    assert SCHEMA["errors"]["exit_codes"] == {"0": "success", "1": "computation error",
                                              "2": "usage error"}


@pytest.mark.parametrize("command,extra", [
    ("dirichlet", ["--n", "2"]),
    ("discriminant", ["--lambda-min", "0", "--lambda-max", "10", "--grid", "3"]),
    ("weyl", ["--z", "1+1j"]),
])
def test_csv_headers_follow_schema(command, extra):
    code, out, _ = call(command, "--potential", POT / "kp.json", *extra, "--format", "csv")
    assert code == 0
    assert out.splitlines()[0].split(",") == SCHEMA["commands"][command]["csv_columns"]
