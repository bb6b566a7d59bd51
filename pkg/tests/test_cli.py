import json

import pytest

from bcp import __version__
from bcp.cli import main
from bcp.textfmt import load_protocol


@pytest.fixture(autouse=True)
def elsewhere(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def records(text):
    return [json.loads(line) for line in text.splitlines()]


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_verify_power2(capsys):
    code, out, _ = run(capsys, "verify", "corpus/power2.bcp", "--mode", "computes", "--builtin", "power2",
                       "--inputs", "2..9")
    assert code == 0
    recs = records(out)
    assert [r["expected"] for r in recs] == [1, 0, 1, 0, 0, 0, 1, 0]
    assert list(recs[0]) == ["input", "expected", "mode", "verdict", "nodes", "witness", "note"]


def test_verify_wrong_oracle(capsys):
    code, out, _ = run(capsys, "verify", "corpus/power2.bcp", "--builtin", "majority", "--inputs", "2..4")
    assert code == 1
    assert records(out)[0]["verdict"] == "fail" and records(out)[0]["witness"]


def test_compile_and_verify(capsys, tmp_path):
    code, out, _ = run(capsys, "compile", "corpus/cm-geq.cm", "--neg", "corpus/cm-lt.cm", "-o", "geq.bcp",
                       "--verify", "--builtin", "geq", "--inputs", "(0,0)..(3,3)")
    assert code == 0
    assert {r["verdict"] for r in records(out)} == {"pass", "skip"}
    assert load_protocol(tmp_path / "geq.bcp").name == "geq-silent"


def test_compile_single_machine_is_semi(capsys):
    code, out, _ = run(capsys, "compile", "cm-geq", "--verify", "--builtin", "geq", "--inputs", "(0,1)..(2,2)")
    assert code == 0 and {r["mode"] for r in records(out)} == {"semi"}


def test_budget_exit(capsys):
    code, _, _ = run(capsys, "--budget", "10", "verify", "corpus/power2.bcp", "--builtin", "power2",
                     "--inputs", "30")
    assert code == 3
    code, _, _ = run(capsys, "verify", "corpus/power2.bcp", "--builtin", "power2", "--inputs", "30",
                     "--budget", "10")
    assert code == 3


def test_usage_errors(capsys):
    assert run(capsys, "verify", "corpus/missing.bcp", "--builtin", "power2", "--inputs", "3")[0] == 2
    assert run(capsys, "verify", "corpus/power2.bcp", "--builtin", "nope", "--inputs", "3")[0] == 2
    assert run(capsys, "verify", "corpus/power2.bcp", "--builtin", "power2", "--inputs", "(1,2)")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["verify"])
    assert exc.value.code == 2


def test_parse_error_exit(capsys, tmp_path):
    (tmp_path / "bad.bcp").write_text("protocol p\nnonsense\n")
    code, _, err = run(capsys, "validate", "bad.bcp")
    assert code == 2 and "error" in err


def test_validate(capsys):
    assert run(capsys, "validate", "corpus/power2.bcp")[0] == 0
    assert run(capsys, "validate", "corpus/cm-even.cm")[0] == 0


def test_simulate_and_trace(capsys, tmp_path):
    code, out, _ = run(capsys, "simulate", "corpus/majority.bcp", "--inputs", "(2,3)", "--seeds", "0..2")
    assert code == 0 and len(records(out)) == 3
    code, _, _ = run(capsys, "simulate", "corpus/power2.bcp", "--inputs", "4", "--seed", "1",
                     "--trace", "t.txt")
    lines = (tmp_path / "t.txt").read_text().splitlines()
    assert lines[0] == "0 init x:4"


def test_cm_commands(capsys):
    code, out, _ = run(capsys, "cm", "run", "corpus/cm-geq.cm", "--inputs", "(1,2)")
    assert records(out) == [{"input": [1, 2], "accepts": False, "rejects": True, "nodes": 7}]
    assert run(capsys, "cm", "check", "cm-even", "--builtin", "even", "--inputs", "0..6")[0] == 0
    assert run(capsys, "cm", "check", "cm-even", "--builtin", "odd", "--inputs", "0..6")[0] == 1
    assert run(capsys, "cm", "bound", "cm-even-poly", "--inputs", "0..4")[0] == 0
    assert run(capsys, "cm", "bound", "cm-even-poly", "--bound", "n", "--inputs", "0..4")[0] == 1


def test_bound_commands(capsys):
    assert run(capsys, "bound", "weaken", "cm-geq", "-o", "w.cm")[0] == 0
    assert run(capsys, "bound", "tighten", "w.cm", "-o", "t.cm")[0] == 0
    assert run(capsys, "cm", "check", "t.cm", "--builtin", "geq", "--inputs", "(0,0)..(2,2)")[0] == 0
    assert run(capsys, "cm", "bound", "t.cm", "--inputs", "(0,0)..(2,2)")[0] == 0


def test_transform_commands(capsys):
    assert run(capsys, "transform", "power2", "--single-signal", "--inputs", "2..5", "-o", "ss.bcp")[0] == 0
    assert run(capsys, "verify", "ss.bcp", "--builtin", "power2", "--inputs", "2..4")[0] == 0
    assert run(capsys, "transform", "power2", "--single-broadcaster", "-o", "sb.bcp")[0] == 0
    run(capsys, "compile", "cm-geq", "--neg", "cm-lt", "-o", "geq.bcp")
    assert run(capsys, "transform", "geq.bcp", "--leaderless", "-o", "ll.bcp")[0] == 0
    code, _, _ = run(capsys, "transform", "geq.bcp", "--single-signal", "--prune-idle",
                     "--inputs", "(0,2)..(2,2)", "-o", "gs.bcp")
    assert code == 0
    assert load_protocol("gs.bcp").metadata["pruned-broadcasts"]


def test_check_reset(capsys):
    code, out, _ = run(capsys, "check-reset", "corpus/power2.bcp", "--inputs", "4")
    assert code == 1 and records(out)[0]["witness"]
    assert run(capsys, "check-reset", "majority", "--inputs", "(1,1)")[0] == 0


def test_reports_are_deterministic(capsys, tmp_path):
    for i in (1, 2):
        run(capsys, "verify", "power2", "--builtin", "majority", "--inputs", "2..6", "-o", f"v{i}.jsonl",
            "--jobs", str(i))
    assert (tmp_path / "v1.jsonl").read_bytes() == (tmp_path / "v2.jsonl").read_bytes()
