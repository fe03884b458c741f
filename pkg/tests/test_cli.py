from __future__ import annotations

import csv
import io
import json

import pytest

from porositykit import report_schema_version
from porositykit.cli import main
from porositykit.reports import Report


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_schema_version():
    assert report_schema_version() == "1.0.0"
    assert Report("x").as_dict()["schema_version"] == report_schema_version()


def test_bound_table(capsys):
    code, out, _ = run(capsys, "bound", "--d", "1", "--alpha-grid", "0.49:0.4999:10")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 10
    assert list(rows[0])[:7] == ["alpha", "l", "k", "C", "N", "D0", "bound"]
    assert rows[-1]["k"] == "10" and float(rows[-1]["bound"]) == pytest.approx(0.617, abs=1e-3)


def test_certify_lebesgue_refuted(capsys):
    code, out, _ = run(capsys, "certify", "--measure", "lebesgue", "--D", "0.9", "--depth", "30")
    assert code == 0
    rep = json.loads(out)
    assert rep["schema_version"] == report_schema_version()
    assert rep["results"][0]["verdict"] == "refuted-at-depth"


def test_counterexample_verify(capsys, tmp_path):
    path = tmp_path / "cx.json"
    code, _, _ = run(capsys, "counterexample", "verify", "--depth", "24", "--out", str(path))
    assert code == 0
    rep = json.loads(path.read_text())
    osa2 = [r for r in rep["results"] if r["name"].startswith("osa2")]
    assert len(osa2) == 8 and all(r["pass"] for r in osa2)
    assert {"name", "paper_ref", "value", "bound", "pass"} <= set(rep["results"][0])


def test_check_failure_exits_3(capsys):
    code, out, _ = run(capsys, "certify", "--measure", "lebesgue", "--D", "0.9",
                       "--depth", "30", "--expect", "certified")
    assert code == 3 and json.loads(out)["results"][0]["pass"] is False


def test_validation_errors_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.spec"
    bad.write_text("kind = bernoulli\nq = lots\n")
    code, _, err = run(capsys, "certify", "--measure", str(bad), "--D", "1.0")
    assert code == 2 and "'q'" in err
    code, _, err = run(capsys, "certify", "--measure", "wavelet", "--D", "1.0")
    assert code == 2 and "'kind'" in err
    code, _, err = run(capsys, "construct", "--measure", "lebesgue", "--depth", "3")
    assert code == 2 and "'out'" in err
    with pytest.raises(SystemExit) as exc:
        main(["bound", "--d", "one"])
    assert exc.value.code == 2


def test_spec_file_input(capsys, tmp_path):
    spec = tmp_path / "m.spec"
    spec.write_text("kind = bernoulli\nq = 0.25\nmax_depth = 40\n")
    code, out, _ = run(capsys, "certify", "--measure", str(spec), "--D", "1.0", "--depth", "30")
    assert code == 0 and json.loads(out)["results"][0]["verdict"] == "certified"


def test_construct_csv(capsys, tmp_path):
    path = tmp_path / "m.csv"
    assert main(["construct", "--measure", "counterexample", "--depth", "3", "--out", str(path)]) == 0
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 8 and rows[0]["cube_id"] == "1:3:0.0.0"
    path = tmp_path / "s.csv"
    assert main(["construct", "--set", "even-digits-zero", "--param", "build_depth=8",
                 "--depth", "6", "--out", str(path)]) == 0
    assert len(list(csv.DictReader(path.open()))) == 8


def test_porosity_profile_csv(tmp_path):
    path = tmp_path / "p.csv"
    assert main(["porosity", "--measure", "counterexample", "--eps", "0.1", "--samples", "3",
                 "--i-max", "8", "--out", str(path)]) == 0
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 24
    assert set(rows[0]) == {"point_id", "offset_t", "scale_j", "radius_log2",
                            "porosity_value", "flag_at_alpha", "slack"}


def test_reports_are_deterministic(capsys, tmp_path):
    outs = []
    for _ in range(2):
        code, out, _ = run(capsys, "mean-porosity", "--measure", "counterexample",
                           "--samples", "20", "--depth", "12", "--checkpoints", "6,12",
                           "--eps", "0.2", "--alpha", "0.2", "--min-median", "0")
        rep = json.loads(out)
        rep.pop("generated_at")
        outs.append(json.dumps(rep, sort_keys=True))
    assert outs[0] == outs[1]


def test_dimension_reports(capsys):
    code, out, _ = run(capsys, "dimension", "--measure", "lebesgue", "--samples", "100",
                       "--depth", "50")
    assert code == 0 and json.loads(out)["results"][0]["value"] == 1.0
    code, out, _ = run(capsys, "dimension", "--set", "comb", "--param", "arity_log=2",
                       "--param", "keep=0,3", "--param", "build_depth=10")
    assert code == 0 and json.loads(out)["results"][0]["value"] == pytest.approx(0.5)
