import json
import os

import mpmath
import pytest

from controllers.report_controller import RunResult
from utils.config_manager import RunConfig
from utils.errors import PreconditionError, ReportWriteError


@pytest.fixture
def run():
    return RunConfig()


def test_config_hash_is_stable_and_short(reports, run):
    digest = reports.config_hash(run)
    assert len(digest) == 12
    assert all(c in "0123456789abcdef" for c in digest)
    assert reports.config_hash(RunConfig()) == digest
    assert reports.config_hash(RunConfig(seed=7)) != digest


def test_envelope_records_the_run(reports, run):
    result = RunResult("order", {"order": "LESS"}, passed=False)
    data = json.loads(reports.render(result, run, "json"))
    assert data["subcommand"] == "order"
    assert data["pass"] is False
    assert data["config"]["seed"] == 0
    assert data["config"]["grid"] == [1.0, 2.0, 40]
    assert data["result"] == {"order": "LESS"}


def test_csv_cells_carry_seventeen_digits(reports):
    text = reports.render_csv(("x", "value", "ok"), [(0.1, 2.5, True), (2, None, "a")])
    assert text.splitlines() == [
        "x,value,ok",
        "0.10000000000000001,2.5,True",
        "2,,a",
    ]


def test_json_floats_carry_seventeen_digits(reports):
    data = {"x": 0.1, "values": [2.5, True, None, 3], "name": "bé", "huge": "1.0e+400"}
    text = reports.render_json(data)
    assert '"x": 0.10000000000000001,' in text
    assert "    2.5,\n    true,\n    null,\n    3\n" in text
    assert json.loads(text) == data
    assert reports.render_plain({"grid": [0.1, 2]}) == "grid: [0.10000000000000001, 2]\n"


def test_csv_writes_values_beyond_the_float_range(reports):
    row = (mpmath.mpf(10) ** 400,)
    line = reports.render_csv(("x",), [row]).splitlines()[1]
    assert line.startswith("1.0e+400") or line.startswith("1e+400")


def test_plain_rendering(reports, run):
    assert reports.render_plain({"K": 2.0, "C": 0.0}) == "K: 2\nC: 0\n"
    assert reports.render_plain([{"a": 1}, {"a": 2}]) == "a: 1\n\na: 2\n\n"
    assert reports.render_plain({"grid": [1, 2]}) == "grid: [1, 2]\n"
    result = RunResult("eval", {}, plain_text="12\n")
    assert reports.render(result, run, "plain") == "12\n"


def test_csv_falls_back_to_json_without_rows(reports, run):
    result = RunResult("equiv", {"verdict": "ExactEqual"})
    assert json.loads(reports.render(result, run, "csv"))["result"]["verdict"] == "ExactEqual"


def test_report_bundle_names_files_by_subcommand_and_hash(reports, run, tmp_path):
    results = [
        RunResult("eval", {"points": []}, csv_header=("x", "value"), csv_rows=((1.0, 2.0),)),
        RunResult("order", {"order": "LESS"}),
    ]
    out_dir = tmp_path / "bundle"
    paths = reports.report_bundle(results, str(out_dir), run)
    digest = reports.config_hash(run)
    assert [os.path.basename(p) for p in paths] == [
        f"eval-{digest}.json", f"eval-{digest}.csv", f"order-{digest}.json",
    ]
    with open(out_dir / f"eval-{digest}.csv", encoding="utf-8") as file:
        assert file.read() == "x,value\n1,2\n"
    with open(out_dir / f"order-{digest}.json", encoding="utf-8") as file:
        assert json.load(file)["result"] == {"order": "LESS"}


def test_report_bundle_needs_results(reports, run, tmp_path):
    with pytest.raises(PreconditionError):
        reports.report_bundle([], str(tmp_path), run)


def test_report_bundle_reports_unwritable_targets(reports, run, tmp_path):
    blocker = tmp_path / "not-a-directory"
    blocker.write_text("x")
    with pytest.raises(ReportWriteError):
        reports.report_bundle([RunResult("eval", {})], str(blocker), run)
