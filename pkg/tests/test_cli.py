import io
import json
import os

import pytest

from utils.constants import APP_NAME, EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE
from views.cli import run


@pytest.fixture
def cli(tmp_path):
    config = str(tmp_path / "config.json")

    def invoke(*argv):
        out, err = io.StringIO(), io.StringIO()
        args = list(argv)
        if args and not args[0].startswith("-"):
            args += ["--config", config]
        code = run(args, stdout=out, stderr=err)
        return code, out.getvalue(), err.getvalue()
    return invoke


def test_eval_prints_the_value(cli):
    code, out, _ = cli("eval", "A(3)", "--at", "4")
    assert code == EXIT_OK
    assert out == "12\n"


def test_eval_json_report(cli):
    code, out, _ = cli("eval", "B(1,1)", "--at", "4", "--at", "9", "--format", "json")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["subcommand"] == "eval"
    assert data["pass"] is True
    assert [p["value"] for p in data["result"]["points"]] == [6.0, 12.0]


def test_eval_below_the_germ_domain(cli):
    code, out, err = cli("eval", "B(1,-1)", "--at", "0.1")
    assert code == EXIT_CHECK_FAILED
    assert out == ""
    assert "DomainViolation" in err
    code, out, _ = cli("eval", "B(1,-1)", "--at", "0.1", "--loose")
    assert code == EXIT_OK
    assert float(out) == pytest.approx(0.1 - 0.1 ** 0.5)


@pytest.mark.parametrize("argv", [
    ("eval", "A(", "--at", "1"),
    ("eval", "A(2)"),
    ("eval", "A(2)", "--at", "one"),
    ("classify", "A(2)", "--grid", "0.5,2,40"),
    ("classify", "A(2)", "--format", "xml"),
    ("frobnicate",),
    (),
])
def test_usage_errors(cli, argv):
    code, _, _ = cli(*argv)
    assert code == EXIT_USAGE


def test_version(cli, capsys):
    assert cli("--version")[0] == EXIT_OK
    assert capsys.readouterr().out.strip() == f"{APP_NAME} 1.0.0"


def test_classify_log_shift(cli):
    code, out, _ = cli("classify", "logshift(1)")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["result"]["drift"] == "Sublinear"
    assert data["config"]["grid"] == [1.0, 2.0, 40]


def test_classify_csv_lists_the_ratios(cli):
    code, out, _ = cli("classify", "A(2)", "--format", "csv", "--grid", "1,2,12")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "x,ratio"
    assert len(lines) == 13
    assert lines[1] == "1,1"


def test_reports_are_deterministic(cli):
    first = cli("independence", "B(1,1) * B(2,1)")
    assert first == cli("independence", "B(1,1) * B(2,1)")
    assert json.loads(first[1])["result"]["verdict"] == "NontrivialExponent"


def test_precision_from_the_environment_wins(cli, monkeypatch):
    monkeypatch.setenv("QILINE_PRECISION_BITS", "128")
    code, out, _ = cli("classify", "id", "--bits", "64")
    assert code == EXIT_OK
    assert json.loads(out)["config"]["precisionBits"] == 128


def test_equiv_and_order(cli):
    code, out, _ = cli("equiv", "B(1,1) * B(1,2)", "B(1,3)")
    assert code == EXIT_OK
    assert json.loads(out)["result"]["verdict"] == "BoundedEvidence"
    code, out, _ = cli("order", "id", "logshift(1)")
    assert code == EXIT_OK
    assert json.loads(out)["result"]["verdict"] == "Less"


def test_relations_with_parameters(cli):
    code, out, _ = cli("relations", "--relation", "multA", "--param", "t1=2", "--param", "t2=3")
    assert code == EXIT_OK
    reports = json.loads(out)["result"]
    assert len(reports) == 1
    assert reports[0]["params"] == {"t1": 2.0, "t2": 3.0}
    assert reports[0]["pass"] is True


def test_relations_need_every_parameter(cli):
    code, _, err = cli("relations", "--relation", "multA", "--param", "t1=2")
    assert code == EXIT_USAGE
    assert "t2" in err
    assert cli("relations", "--relation", "addB", "--param", "i")[0] == EXIT_USAGE


def test_qi_constants_bundle(cli, tmp_path):
    out_dir = tmp_path / "reports"
    code, out, _ = cli("qi-constants", "A(3)", "--format", "csv", "--grid", "1,2,10",
                       "--out", str(out_dir))
    assert code == EXIT_OK
    assert out.splitlines()[0] == "x,displacement"
    assert out.splitlines()[2] == "2,4"
    names = sorted(os.listdir(out_dir))
    assert len(names) == 3
    assert [name.rsplit("-", 1)[0] for name in names] == ["profile", "profile", "qi-constants"]
    with open(out_dir / [n for n in names if n.startswith("qi-")][0], encoding="utf-8") as file:
        assert json.load(file)["result"]["K"] == pytest.approx(3.0)


def test_orderability(cli):
    code, out, _ = cli("orderability", "A(2)", "A(1/2)", "--max-len", "2")
    assert code == EXIT_OK
    result = json.loads(out)["result"]
    assert result["assignment"]["epsilons"] == [1, -1]
    assert result["semigroupCheck"]["wordsChecked"] == 6


def test_orderability_without_a_witness(cli):
    code, _, err = cli("orderability", "logshift(1)")
    assert code == EXIT_CHECK_FAILED
    assert "NoWitnessError" in err


def test_holder_pair(cli):
    code, out, _ = cli("holder", "affine(1,1)", "affine(1,2)", "--n", "100", "--orbit-steps", "3",
                       "--format", "csv")
    assert code == EXIT_OK
    assert out.splitlines() == ["step,x", "0,0", "1,1", "2,2", "3,3"]
    code, out, _ = cli("holder", "affine(1,1)", "affine(1,2)", "--n", "100")
    result = json.loads(out)["result"]
    assert result["tau"] == {"g": 1.0, "h": 2.0, "gh": 3.0}
    assert result["additive"] is True


def test_holder_rejects_non_commuting_maps(cli):
    code, _, err = cli("holder", "A(2)", "affine(1,1)", "--n", "10")
    assert code == EXIT_CHECK_FAILED
    assert "NonCommutingError" in err


def test_obstruction_subcommand(cli):
    code, out, _ = cli("obstruction", "--ainv", "affine(1,-3)")
    assert code == EXIT_OK
    assert json.loads(out)["result"][0]["conclusion"] == "functional equation fails"
    code, out, _ = cli("obstruction", "--family", "scaling", "--params", "1,2,1")
    assert code == EXIT_OK
    result = json.loads(out)["result"]
    assert result["family"] == "scaling"
    assert result["conclusion"] == "no candidate satisfies all constraints below 0.01"


@pytest.mark.parametrize("family", ["translation", "scaling"])
def test_obstruction_scans_the_default_parameter_grid(cli, family):
    code, out, _ = cli("obstruction", "--family", family)
    assert code == EXIT_OK
    result = json.loads(out)["result"]
    reports = result["reports"]
    assert len(reports) == 8
    assert {(r["parameters"]["c1"], r["parameters"]["c2"], r["parameters"]["kappa"])
            for r in reports} == {(c1, c2, k) for c1 in (1, 2) for c2 in (0.5, -1) for k in (1, 3)}
    assert all(r["conclusion"] == "violation" for r in reports)
    assert all(r["maxViolation"] >= 0.01 for r in reports)
    assert result["conclusion"] == "no candidate satisfies all constraints below 0.01"


def test_diffz_subcommand(cli):
    code, out, _ = cli("diffz", "lift[0:1/4;1:5/4;slopes(1,1)]")
    assert code == EXIT_OK
    result = json.loads(out)["result"]
    assert result["escaped"] is True
    assert result["hTrivial"] is True
    assert cli("diffz", "A(2)")[0] == EXIT_USAGE


def test_save_config_writes_the_overrides(tmp_path):
    config = tmp_path / "config.json"
    out, err = io.StringIO(), io.StringIO()
    code = run(["classify", "A(2)", "--grid", "1,2,12", "--config", str(config), "--save-config"],
               stdout=out, stderr=err)
    assert code == EXIT_OK
    assert json.loads(config.read_text())["grid_count"] == 12
    out = io.StringIO()
    assert run(["classify", "A(2)", "--config", str(config)], stdout=out, stderr=err) == EXIT_OK
    assert json.loads(out.getvalue())["config"]["grid"] == [1.0, 2.0, 12]
