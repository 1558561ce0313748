import io
import json
import shutil

import pytest

from conftest import MP_SOURCE, SB_SOURCE
from wmlab.cli import BUNDLED_SUITE, main


@pytest.fixture
def files(tmp_path):
    (tmp_path / "sb.litmus").write_text(SB_SOURCE)
    (tmp_path / "mp.litmus").write_text(MP_SOURCE)
    (tmp_path / "empty.litmus").write_text("name E\ninit x=4\n")
    (tmp_path / "bad.litmus").write_text("name B\nthread T0:\n  read z -> r\n")
    return tmp_path


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


def test_run_tso_passes(files):
    code, text = run("run", files / "sb.litmus", "--model", "TSO")
    assert code == 0
    assert "4 outcomes" in text
    assert "Pass     exists T0:r1=0 /\\ T1:r2=0" in text


def test_run_sc_fails(files):
    code, text = run("run", files / "sb.litmus", "--model", "SC")
    assert code == 1
    assert "3 outcomes" in text and "Fail" in text


def test_run_missing_file(files, capsys):
    code, _ = run("run", files / "missing.litmus")
    assert code == 2
    assert "cannot read" in capsys.readouterr().err


def test_run_parse_error(files, capsys):
    code, _ = run("run", files / "bad.litmus")
    assert code == 2
    assert "location z not initialized" in capsys.readouterr().err


def test_run_features(files):
    code, text = run("run", files / "mp.litmus", "--features", "WR,WW,ReadEarly")
    assert code == 1  # the forbidden MP outcome shows up once writes reorder
    assert "custom(WW,WR,ReadEarly)" in text
    assert run("run", files / "mp.litmus", "--features", "WR")[0] == 0


@pytest.mark.parametrize(
    "extra",
    [
        ["--model", "XYZ"],
        ["--features", "WR,Bogus"],
        ["--model", "SC", "--features", "WR"],
        ["--random", "nope"],
        ["--random", "1:-2"],
        ["--max-states", "0"],
        ["--format", "xml"],
    ],
)
def test_run_usage_errors(files, extra):
    assert run("run", files / "sb.litmus", *extra)[0] == 2


def test_run_limit_is_inconclusive(files):
    code, text = run("run", files / "sb.litmus", "--model", "SC", "--max-states", "2")
    assert code == 3
    assert "Unknown" in text and "state limit reached" in text


def test_run_random_mode(files):
    code, text = run("run", files / "sb.litmus", "--model", "PSO", "--random", "5:200")
    assert code == 0
    assert "random walk" in text
    # a forbidden assertion cannot be confirmed by sampling
    code, _ = run("run", files / "mp.litmus", "--model", "TSO", "--random", "5:50")
    assert code == 3


def test_run_json_schema(files):
    code, text = run("run", files / "sb.litmus", "--model", "TSO", "--format", "json")
    doc = json.loads(text)
    assert code == 0
    assert list(doc) == ["test", "model", "outcomes", "assertions", "stats"]
    assert doc["test"] == "SB" and doc["model"] == "TSO"
    assert doc["outcomes"][0] == {"registers": {"T0:r1": 0, "T1:r2": 0}, "memory": {"v": 1, "w": 1}}
    assert doc["assertions"] == [{"clause": "exists T0:r1=0 /\\ T1:r2=0", "verdict": "Pass"}]
    assert doc["stats"]["limitExhausted"] is False
    assert doc["stats"]["invariantViolations"] == []


def test_compare_all_products(files):
    code, text = run("compare", files / "sb.litmus", "--models", "SC,IBM370,TSO,PSO")
    assert code == 0
    rows = [line.split() for line in text.splitlines() if line.split()[0] in ("SC", "IBM370", "TSO", "PSO")]
    assert [(r[0], int(r[1])) for r in rows] == [("SC", 3), ("IBM370", 4), ("TSO", 4), ("PSO", 4)]
    assert [r[-1] for r in rows] == ["no", "yes", "yes", "yes"]


def test_compare_single_matches_run(files):
    _, compare_text = run("compare", files / "sb.litmus", "--models", "SC", "--format", "json")
    _, run_text = run("run", files / "sb.litmus", "--model", "SC", "--format", "json")
    (row,) = json.loads(compare_text)["rows"]
    single = json.loads(run_text)
    assert row["outcomes"] == single["outcomes"]
    assert row["statesVisited"] == single["stats"]["statesVisited"]


def test_compare_unknown_product(files, capsys):
    code, _ = run("compare", files / "sb.litmus", "--models", "XYZ")
    assert code == 2
    err = capsys.readouterr().err
    assert "unknown product XYZ" in err and "IBM370" in err


def test_suite_bundled():
    code, text = run("suite")
    assert code == 0
    assert "0 fail, 0 unknown, 0 error" in text


def test_suite_reports_failing_file(tmp_path):
    for path in BUNDLED_SUITE.iterdir():
        shutil.copy(path, tmp_path)
    (tmp_path / "broken.litmus").write_text(SB_SOURCE.replace("exists", "forbidden").replace("name SB", "name Broken"))
    (tmp_path / "broken.models").write_text("TSO\n")
    code, text = run("suite", tmp_path)
    assert code == 1
    assert "not passing: broken.litmus[TSO]" in text


def test_suite_custom_feature_selector(tmp_path):
    (tmp_path / "mp.litmus").write_text(MP_SOURCE)
    (tmp_path / "mp.models").write_text("# no write reordering\nfeatures=WR,RW\nSC TSO\n")
    code, text = run("suite", tmp_path)
    assert code == 0
    assert "[custom(RW,WR)]" in text


def test_suite_empty_directory(tmp_path):
    assert run("suite", tmp_path)[0] == 2
    assert run("suite", tmp_path / "nope")[0] == 2


def test_suite_with_bad_file(files):
    code, text = run("suite", files)
    assert code == 2
    assert "ERROR    bad.litmus" in text


def test_oracle(files):
    code, text = run("oracle", files / "sb.litmus")
    assert code == 0 and "3 sequentially consistent outcomes" in text
    code, text = run("oracle", files / "empty.litmus", "--format", "json")
    assert code == 0
    assert json.loads(text)["outcomes"] == [{"registers": {}, "memory": {"x": 4}}]
    assert run("oracle", files / "bad.litmus")[0] == 2


def test_no_command():
    assert run()[0] == 2
