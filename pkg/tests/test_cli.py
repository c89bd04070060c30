import io
import json

import jsonschema
import pytest

from chrconf.cli import main
from chrconf.report import load_schema

from conftest import MSET

GUARDED = ["--invariant", "functor_count mset/1 max 1", "--equiv", "list_perm mset/1 arg 1",
           "--assume-terminating", "--trials", "150"]


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in {"mset": MSET, "simple": "p <=> q.\n", "loop": "p <=> q.\nq <=> p.\n",
                       "bad": "p <=> .\n", "branch": "p <=> q.\np <=> r.\n"}.items():
        path = tmp_path / f"{name}.chr"
        path.write_text(text)
        paths[name] = str(path)
    return paths


def run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


def test_check_exit_codes(files):
    assert run(["check", files["simple"], "--assume-terminating", "--trials", "100"])[0] == 0
    assert run(["check", files["branch"], "--trials", "100"])[0] == 1
    assert run(["check", files["simple"], "--trials", "100"])[0] == 2
    assert run(["check", files["bad"]])[0] == 3


def test_usage_errors_exit_three(files, capsys):
    assert run(["check"])[0] == 3
    assert run(["frobnicate"])[0] == 3
    assert run(["check", files["mset"], "--bound", "0"])[0] == 3
    assert run(["check", files["mset"], "--equiv", "nonsense"])[0] == 3
    assert run(["check", files["mset"] + ".missing"])[0] == 3
    assert run(["run", files["mset"], "item(a"])[0] == 3
    err = capsys.readouterr().err
    assert "bad.chr" not in err and "error" in err


def test_parse_error_location(files, capsys):
    run(["check", files["bad"]])
    assert capsys.readouterr().err.startswith(files["bad"] + ":1:")


def test_obligation_modes(files, capsys):
    code, text = run(["check", files["mset"], *GUARDED])
    assert code == 2 and "confluent with obligations" in text
    code, _ = run(["check", files["mset"], *GUARDED, "--obligations", "warn"])
    assert code == 0
    assert "warning" in capsys.readouterr().err


def test_check_text_names_witness(files):
    code, text = run(["check", files["mset"], "--trials", "100"])
    assert code == 1
    assert text.startswith("verdict: not_confluent")
    assert "witness (non-joinable):" in text and "item(A)=item(A')" in text


def test_run_lists_finals(files):
    code, text = run(["run", files["mset"], "item(a), item(b), mset([])"])
    assert code == 0
    assert "mset([a,b]) ; true ; []" in text and "mset([b,a]) ; true ; []" in text
    assert "final states: 2" in text


def test_run_reports_exhaustion(files):
    code, text = run(["run", files["loop"], "p", "--bound", "20"])
    assert code == 2 and "notice:" in text


def test_compat_outcomes():
    code, text = run(["compat", "--equiv", "list_perm mset/1 arg 1", "--trials", "200"])
    assert code == 0 and "split: pass" in text
    code, text = run(["compat", "--equiv", "pair_collapse c d", "--trials", "100"])
    assert code == 1 and "split: fail" in text and "y: d ; true ; []" in text
    code, text = run(["compat", "--equiv", "count_partition c/0 threshold 3", "--trials", "100"])
    assert code == 1 and "congruence: fail" in text


def test_json_documents_validate(files):
    schema = load_schema()
    for argv in (["check", files["mset"], "--trials", "100"],
                 ["check", files["mset"], *GUARDED],
                 ["run", files["mset"], "item(a), mset([])"],
                 ["run", files["loop"], "p", "--bound", "5"],
                 ["compat", "--equiv", "pair_collapse c d", "--equiv", "identity", "--trials", "50"],
                 ["check", files["simple"], "--trials", "50", "--timings"]):
        _, text = run(argv + ["--json", "-"])
        doc = json.loads(text)
        jsonschema.validate(doc, schema)
        assert doc["command"] == argv[0]
        assert ("timings" in doc) == ("--timings" in argv)


def test_json_is_byte_identical_across_runs(files):
    argv = ["check", files["mset"], *GUARDED, "--json", "-"]
    assert run(argv)[1] == run(argv)[1]


def test_json_file_and_text_agree(files, tmp_path):
    target = tmp_path / "report.json"
    code, text = run(["check", files["mset"], "--trials", "100", "--json", str(target)])
    doc = json.loads(target.read_text())
    assert text.splitlines()[0] == f"verdict: {doc['verdict']}"
    assert code == 1 and doc["witness"]["status"] == "not_joinable"
    assert doc["program_digest"].startswith("sha256:")


def test_config_file(files, tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("invariant functor_count mset/1 max 1\n"
                   "equiv list_perm mset/1 arg 1  % comment\n")
    code, text = run(["check", files["mset"], "--config", str(cfg), "--assume-terminating",
                      "--trials", "150"])
    assert code == 2 and "confluent with obligations" in text


def test_config_error_names_config_file(files, tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("bound 10\nfrobnicate\n")
    assert run(["check", files["mset"], "--config", str(cfg)])[0] == 3
    assert capsys.readouterr().err.startswith(f"{cfg}:2:")
