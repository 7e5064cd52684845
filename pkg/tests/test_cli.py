import json

import pytest

from odealgebra import circuit as C
from odealgebra import fixtures
from odealgebra.cli import main
from odealgebra.syntax import format_program
from odealgebra.stdlib import build_cmod2


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    (tmp_path / "cmod2.prog").write_text(format_program(build_cmod2()))
    (tmp_path / "id.prog").write_text("program-format 1\n(def id (x) (basic proj 1))\n(entry id)\n")
    (tmp_path / "bad.prog").write_text(
        "program-format 1\n(def g (y) (basic proj 1) :range (0 2))\n(def one2 (x y) (basic one))\n"
        "(def s (x y) (schema l-2ode :g g :k one2))\n")
    (tmp_path / "b0.prog").write_text(
        "program-format 1\n(def z () (basic zero))\n(def o (x) (basic one))\n"
        "(def s (x) (schema l-b0ode :K (sub 1 f) :g z :h (o)))\n")
    (tmp_path / "parity.circ").write_text(C.format_circuit(fixtures.parity_of(4)))
    cb = C.CircuitBuilder(2)
    (tmp_path / "skip.circ").write_text(C.format_circuit(cb.build([cb.gate(C.AND, [cb.inp(0)], level=2)])))
    return tmp_path


def test_eval(files, capsys):
    assert run(capsys, "eval", files / "cmod2.prog", "cmod2", 11)[:2] == (0, "1\n")
    assert run(capsys, "eval", files / "id.prog", "id", 42)[:2] == (0, "42\n")
    assert run(capsys, "eval", files / "id.prog", "", 42)[:2] == (0, "42\n")


def test_eval_trace(files, capsys):
    code, out, _ = run(capsys, "eval", files / "cmod2.prog", "toggle_parity", 7, 7, "--trace")
    assert code == 0
    assert out.splitlines() == ["u=-1 at=0 f=0", "u=0 at=0 f=1", "u=1 at=1 f=0", "u=2 at=3 f=1", "1"]


def test_eval_invalid_program(files, capsys):
    code, _, err = run(capsys, "eval", files / "bad.prog", "s", 3, 1)
    assert code == 1 and "g out of range" in err


def test_eval_domain_failure(files, capsys):
    (files / "kk.prog").write_text("program-format 1\n(def z () (basic zero))\n(def o (x) (basic one))\n"
                                  "(def k (x) (compose add o o))\n(def s (x) (schema l-2ode :g z :k k))\n")
    code, _, err = run(capsys, "eval", files / "kk.prog", "s", 3)
    assert code == 1 and "k out of range" in err


def test_check(files, capsys):
    code, _, _ = run(capsys, "gen", "cmodn", "--n", 3, "-o", files / "c3.prog")
    assert code == 0
    assert run(capsys, "check", files / "c3.prog")[:2] == (0, "ok\n")
    assert run(capsys, "check", files / "b0.prog")[0] == 1
    assert run(capsys, "check", files / "parity.circ")[0] == 0
    code, out, _ = run(capsys, "check", files / "skip.circ")
    assert code == 1 and "edge" in out


def test_gen(files, capsys):
    code, out, _ = run(capsys, "gen", "cmodn", "--n", 3)
    assert code == 0 and out.startswith("program-format 1")
    (files / "g.prog").write_text(out)
    assert run(capsys, "eval", files / "g.prog", "cmod3", 7)[1] == "0\n"
    for fam in ("cmod2", "bcount"):
        assert run(capsys, "gen", fam)[0] == 0
    assert run(capsys, "gen", "cmodn")[0] == 2
    assert run(capsys, "gen", "nosuch")[0] == 2


def test_compile_to_circuit(files, capsys):
    run(capsys, "gen", "cmodn", "--n", 2, "-o", files / "c2.prog")
    code, _, err = run(capsys, "compile", "to-circuit", files / "c2.prog", "--width", 3,
                       "-o", files / "c2.circ", "--verify")
    assert code == 0 and "agrees on 8/8" in err
    assert (files / "c2.circ.prov").read_text().startswith("gate ")
    c = C.parse_circuit((files / "c2.circ").read_text())
    assert [C.eval_int(c, x) for x in range(8)] == [bin(x).count("1") % 2 for x in range(8)]
    assert run(capsys, "compile", "to-circuit", files / "c2.prog")[0] == 2


def test_compile_to_algebra(files, capsys):
    code, _, err = run(capsys, "compile", "to-algebra", files / "parity.circ", "-o", files / "p.prog", "--verify")
    assert code == 0 and "agrees on 16/16" in err
    assert "main:" in (files / "p.prog.prov").read_text()
    assert run(capsys, "eval", files / "p.prog", "main", 0b0110)[1] == "1\n"


def test_diff(files, capsys):
    run(capsys, "gen", "cmodn", "--n", 2, "-o", files / "c2.prog")
    code, out, _ = run(capsys, "diff", files / "c2.prog", "popcount-mod:2", "--max", 65536,
                       "--record", files / "rec.json")
    assert code == 0 and "no counterexample" in out
    assert json.loads((files / "rec.json").read_text())["pairs"] == 65536
    code, out, _ = run(capsys, "diff", files / "c2.prog", "popcount-mod:3", "--max", 16)
    assert code == 1 and "counterexample at x=" in out
    code, out, _ = run(capsys, "diff", files / "parity.circ", files / "parity.circ", "--max", 16,
                       "--samples", 5, "--seed", 3)
    assert code == 0 and "seed 3" in out
    assert run(capsys, "diff", "nosuchfile", "popcount")[0] == 2


def test_roundtrip(files, capsys):
    code, out, _ = run(capsys, "roundtrip", files / "parity.circ")
    assert code == 0 and "16/16" in out


def test_usage_errors(files, capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "eval", files / "missing.prog")[0] == 2
    assert run(capsys, "check", files / "id.prog", "--bogus")[0] == 2
    (files / "junk.txt").write_text("hello\n")
    assert run(capsys, "check", files / "junk.txt")[0] == 2
    assert run(capsys, "--help")[0] == 0


def test_module_entry_point():
    import subprocess
    import sys

    r = subprocess.run([sys.executable, "-m", "odealgebra", "gen", "cmod2"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("program-format 1")
