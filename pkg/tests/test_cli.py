import json
import subprocess
import sys

import pytest

from conftest import CORPUS
from demonic_ol.cli import main

SWITCH = str(CORPUS / "monty_switch.dol")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_exit_codes(capsys, tmp_path):
    code, out, _ = run(capsys, "check", SWITCH, str(CORPUS / "monty_switch.proof.yaml"))
    assert code == 0 and out.startswith("ACCEPTED, 0 open obligations")
    code, out, _ = run(capsys, "check", str(CORPUS / "coin_flip_first.dol"), str(CORPUS / "coin_misuse.proof.yaml"))
    assert code == 1 and "REJECTED at root/0 (Nondet)" in out
    prog = tmp_path / "inc.dol"
    prog.write_text("var x = 0\nx := x + 1\n")
    script = tmp_path / "inc.proof.yaml"
    script.write_text('proof:\n  rule: Consequence\n  pre: "[x = 0]"\n  post: "[x >= 1]"\n'
                      '  premises: [{rule: Assign, pre: "[x + 1 >= 1]"}]\n')
    assert run(capsys, "check", str(prog), str(script))[0] == 2
    assert run(capsys, "--strict", "check", str(prog), str(script))[0] == 1
    assert run(capsys, "check", str(prog), str(script), "--strict")[0] == 1


def test_denote_text_and_event(capsys):
    code, out, _ = run(capsys, "denote", SWITCH, "--event", "pick = car")
    assert code == 0
    assert "residual 0\texact true" in out
    assert out.rstrip().endswith("event pick = car\t2/3 2/3")


def test_json_output_is_byte_identical(capsys):
    argv = ("--format", "json", "denote", SWITCH, "--event", "pick = car")
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second
    data = json.loads(first)
    assert data["exact"] is True and data["event"]["masses"] == ["2/3", "2/3"]
    sim = ("simulate", SWITCH, "--samples", "2000", "--seed", "4", "--scheduler", "worst", "--format", "json")
    a, b = run(capsys, *sim)[1], run(capsys, *sim)[1]
    assert a == b and json.loads(a)["samples"] == 2000


def test_simulate_and_minterm(capsys):
    code, out, _ = run(capsys, "simulate", SWITCH, "--samples", "600", "--event", "pick = car", "--seed", "2")
    assert code == 0 and "prng\tPCG64" in out and "event pick = car\t" in out
    walk = str(CORPUS / "resetting_walk.dol")
    code, out, _ = run(capsys, "minterm", walk, "--iterations", "5", "--at", "x=5")
    assert code == 0 and out.splitlines()[-1].endswith("\t1/32")


def test_errors_exit_3(capsys, tmp_path):
    code, _, err = run(capsys, "denote", str(tmp_path / "missing.dol"))
    assert code == 3 and err.startswith("error:")
    bad = tmp_path / "bad.dol"
    bad.write_text("var x in {0..3} = 0\nx := \n")
    assert run(capsys, "denote", str(bad))[0] == 3
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_corpus_verb_and_env_override(capsys, tmp_path, monkeypatch):
    code, out, _ = run(capsys, "corpus", "monty-hall-s*")
    assert code == 0 and out.rstrip().endswith("2/2 entries passed")
    (tmp_path / "one.dol").write_text("var x in {0, 1} = 0\nx := 1 (+ 1/4) x := 0\n")
    (tmp_path / "manifest.yaml").write_text(
        "entries:\n  - name: quarter\n    program: one.dol\n"
        "    checks:\n      - denote: {event: \"x = 1\", mass: 1/4}\n")
    monkeypatch.setenv("DEMONIC_OL_CORPUS", str(tmp_path))
    code, out, _ = run(capsys, "corpus")
    assert code == 0 and "PASS\tquarter" in out
    (tmp_path / "manifest.yaml").write_text(
        "entries:\n  - name: quarter\n    program: one.dol\n"
        "    checks:\n      - denote: {event: \"x = 1\", mass: 1/3}\n")
    code, out, _ = run(capsys, "corpus")
    assert code == 1 and "MISMATCH" in out
    assert run(capsys, "corpus", "nothing-*")[0] == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "demonic_ol", "denote", SWITCH], capture_output=True, text=True,
                       timeout=60)
    assert r.returncode == 0 and "exact true" in r.stdout
