import json

import pytest

from adapters.file_adapter import load_windowed_set
from core import __version__
from core.database import ReportArchive
from core.density_sets import delta1
from core.windowed import WindowedSet
from standalone.cli import EXIT_ERROR, EXIT_INDETERMINATE, EXIT_OK, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_no_arguments_prints_usage(capsys):
    code, out, err = run(capsys)
    assert code == EXIT_ERROR
    assert out == ""
    assert "usage" in err


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert "ergoprobe" in capsys.readouterr().out


def test_weyl_report(capsys):
    code, out, _ = run(capsys, "weyl", "--seq", "pow:3/2", "--N", "100")
    assert code == EXIT_OK
    envelope = json.loads(out)
    assert envelope["tool"] == "ergoprobe"
    assert envelope["config"]["command"] == "weyl"
    assert envelope["config"]["N"] == 100
    assert envelope["config"]["options"]["seq"] == "pow:3/2"
    assert envelope["report"]["lambda"] == "sqrt2-1"
    assert 0 <= envelope["report"]["magnitude"] <= 1


@pytest.mark.parametrize("argv", [
    ["weyl", "--seq", "fib", "--N", "10"],
    ["weyl", "--seq", "pow:3/2"],
    ["weyl", "--seq", "pow:3/2", "--N", "10", "--theta", "0"],
    ["frobnicate"],
    ["weyl", "--N", "10"],
    ["heis-count", "--n", "2", "--p", "n"],
    ["tempered", "--family", "multbox:paper", "--n", "2", "--output", "csv"],
])
def test_bad_input_exits_with_one(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == EXIT_ERROR
    assert out == ""
    assert "[ERROR]" in err or "usage" in err


def test_gap_search_exhausted_is_indeterminate(capsys):
    code, out, err = run(capsys, "example-3-14", "--run-length", "12", "--bound", "10")
    assert code == EXIT_INDETERMINATE
    assert out == ""
    assert "[ERROR]" in err


def test_residues_csv(capsys):
    code, out, _ = run(capsys, "residues", "--seq", "pow:1", "--N", "10", "--m", "2",
                       "--output", "csv")
    assert code == EXIT_OK
    assert out == "residue,count\n0,5\n1,5\n"


def test_cover_is_deterministic(capsys):
    argv = ["cover", "--set", "mult:4", "--horizon", "200", "--radius", "100"]
    code, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert code == EXIT_OK
    assert first == second
    report = json.loads(first)["report"]
    assert report["translates"] == [0, 1, 2, 3]
    assert report["ell"] == 4


def test_delta_counts(capsys):
    code, out, _ = run(capsys, "delta", "--set", "mult:3", "--horizon", "30", "--kind", "3",
                       "--shift", "3")
    assert code == EXIT_OK
    assert json.loads(out)["report"] == {"kind": 3, "n": 3, "count": 9}


def test_example_3_13(capsys):
    code, out, _ = run(capsys, "example-3-13", "--horizon", "1000")
    assert code == EXIT_OK
    assert json.loads(out)["report"]["violations"] == 0


def test_heis_count(capsys):
    code, out, _ = run(capsys, "heis-count", "--n", "2")
    assert code == EXIT_OK
    report = json.loads(out)["report"]
    assert report["cardinality"] == 225
    assert report["count"] == report["closed_form_count"]
    assert report["count"] <= report["bound_count"]


def test_defect(capsys):
    code, out, _ = run(capsys, "defect", "--family", "interval", "--element", "int:3", "--n", "10")
    assert code == EXIT_OK
    report = json.loads(out)["report"]
    assert report["defect"] == "7/10"
    assert report["element"] == "int:3"


def test_recurrence_on_cyclic_rotation(capsys):
    code, out, _ = run(capsys, "recurrence", "--system", "cyclic:m=4", "--obs", "residues:0",
                       "--seq", "poly:4,0", "--N", "20")
    assert code == EXIT_OK
    assert json.loads(out)["report"]["average"] == pytest.approx(0.25)


def test_archive_records_the_run(tmp_path, capsys):
    db = str(tmp_path / "archive.db")
    code, out, _ = run(capsys, "gaps", "--set", "members:2,3,4,8,10", "--horizon", "10",
                       "--archive", db)
    assert code == EXIT_OK
    archive = ReportArchive(db)
    try:
        runs = archive.list_runs("gaps")
    finally:
        archive.close()
    assert len(runs) == 1
    assert runs[0]["report"] == out
    assert runs[0]["config"]["horizon"] == 10
    assert runs[0]["tool_version"] == __version__


@pytest.mark.parametrize("argv", [
    ["recurrence", "--system", "circle:alpha=sqrt2-1", "--obs", "arc:0,1/2|arc:0,1/4",
     "--seq", "pow:3/2", "--N", "10"],
    ["recurrence", "--system", "circle:alpha=sqrt2-1", "--obs", "residues:0",
     "--seq", "pow:3/2", "--N", "10"],
    ["recurrence", "--system", "circle:alpha=sqrt2-1|cyclic:m=4", "--obs", "arc:0,1/2",
     "--seq", "pow:3/2", "--N", "10"],
    ["ergodic-avg", "--system", "cyclic:m=2|cyclic:m=4", "--obs", "residues:0",
     "--seq", "pow:3/2", "--N", "10", "--x0", "0|0"],
    ["tempered", "--family", "heisbox", "--n", "6", "--method", "enumeration", "--cap", "1000"],
])
def test_mismatched_input_is_reported_not_raised(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == EXIT_ERROR
    assert out == ""
    assert "[ERROR]" in err
    assert "Traceback" not in err


def test_delta_set_is_saved(tmp_path, capsys):
    path = str(tmp_path / "sets" / "delta1.json")
    code, out, _ = run(capsys, "delta", "--set", "mult:3", "--horizon", "30", "--kind", "1",
                       "--save-set", path)
    assert code == EXIT_OK
    assert "save_set" not in json.loads(out)["config"]["options"]
    assert load_windowed_set(path) == delta1(WindowedSet.multiples(3, 30))


def test_density_along_bounded_family(capsys):
    code, out, _ = run(capsys, "density", "--set", "mult:4", "--horizon", "100",
                       "--family", "interval:a=1,b=8")
    assert code == EXIT_OK
    assert json.loads(out)["report"]["running_max_tail"] == "1/4"
