import io
import json
import subprocess
import sys

import pytest

from mimply.cli import main


def run(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def fib6(tmp_path, capsys):
    path = tmp_path / "f6.json"
    assert main(["gen-fib", "-n", "6", "-o", str(path)]) == 0
    capsys.readouterr()
    return path


def test_parse(capsys):
    assert run(capsys, "parse", "-f", "(A ⊃ B) ⊃ (C ⊃ D)")[:2] == (0, "(A -> B) -> C -> D\n")


def test_parse_error_is_usage(capsys):
    code, _, err = run(capsys, "parse", "-f", "A ->")
    assert code == 64 and "token 2" in err


def test_usage_errors(capsys, tmp_path):
    assert run(capsys)[0] == 64
    assert run(capsys, "frobnicate")[0] == 64
    assert run(capsys, "check-nd", str(tmp_path / "missing.json"))[0] == 64
    assert run(capsys, "gen-fib", "-n", "1")[0] == 64
    assert run(capsys, "prove", "-f", "A -> A", "--max-depth", "0")[0] == 64


def test_prove_and_check(capsys, tmp_path):
    out = tmp_path / "p.json"
    assert run(capsys, "prove", "-f", "A -> B -> A", "-o", str(out))[0] == 0
    code, text, _ = run(capsys, "check-nd", str(out))
    assert code == 0
    assert text == ("valid\nconclusion: A -> B -> A\nopen assumptions: []\n"
                    "normal: yes\nexpanded: yes\n")


def test_prove_failure(capsys):
    code, out, err = run(capsys, "prove", "-f", "((A -> B) -> A) -> A")
    assert code == 1 and out == "" and "no proof" in err


def test_check_nd_invalid(capsys, tmp_path, fib6):
    data = json.loads(fib6.read_text())
    data["nodes"][0]["dep"] = "0" * len(data["order"])
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, out, _ = run(capsys, "check-nd", str(bad))
    assert code == 1 and out.startswith("invalid:")


def test_compress_verify_pipeline(capsys, tmp_path, fib6):
    dag = tmp_path / "f6.dag"
    code, out, _ = run(capsys, "compress", str(fib6), "-o", str(dag))
    assert code == 0
    assert out == "tree size: 39\ndag size: 16\nratio: 0.4103\n"
    code, out, _ = run(capsys, "verify", str(dag), "--steps")
    assert code == 1
    first, second = out.splitlines()
    assert first.endswith("CorrectDerivation {p1, p1 -> p2, p1 -> p2 -> p3, p2 -> p3 -> p4, "
                          "p3 -> p4 -> p5, p4 -> p5 -> p6} |- p6")
    assert second.endswith("steps 33 bound 960 (h=6, n_v=16, n_A=10)")


def test_tautology_via_stdin(capsys, monkeypatch):
    code, proof, _ = run(capsys, "prove", "-f", "A -> A")
    code, dag, err = run(capsys, "compress", stdin=proof, monkeypatch=monkeypatch)
    assert code == 0 and "dag size: 2" in err
    code, out, _ = run(capsys, "verify", stdin=dag, monkeypatch=monkeypatch)
    assert code == 0 and out == "-: CorrectTautology {} |- A -> A\n"


def test_flipped_bit_exit_2(capsys, tmp_path):
    code, proof, _ = run(capsys, "prove", "-f", "A -> A")
    p = tmp_path / "p.json"
    p.write_text(proof)
    run(capsys, "compress", str(p), "-o", str(tmp_path / "p.dag"))
    data = json.loads((tmp_path / "p.dag").read_text())
    bits = data["d_edges"][0]["bits"]
    assert bits[0] == "1"
    data["d_edges"][0]["bits"] = "0" + bits[1:]
    bad = tmp_path / "bad.dag"
    bad.write_text(json.dumps(data))
    code, out, _ = run(capsys, "verify", str(bad))
    assert code == 2 and "Incorrect (entailment) LabelMismatch" in out


def test_verify_worst_code_wins(capsys, tmp_path, fib6):
    dag = tmp_path / "f6.dag"
    run(capsys, "compress", str(fib6), "-o", str(dag))
    junk = tmp_path / "junk.dag"
    junk.write_text("{")
    assert run(capsys, "verify", str(dag), str(junk))[0] == 64


def test_stats(capsys, fib6):
    code, out, _ = run(capsys, "stats", str(fib6))
    assert code == 0
    assert "nodes per level: 1 2 4 6 10 16" in out
    assert "level 2: 2 instances of size 13 (p4)" in out


def test_rewrite_is_byte_identical(capsys, tmp_path, fib6):
    dag = tmp_path / "a.dag"
    run(capsys, "compress", str(fib6), "-o", str(dag))
    from mimply.rdag import dumps_rdag, loads_rdag
    from mimply.nd import dumps_derivation, loads_derivation
    assert dumps_rdag(loads_rdag(dag.read_text())) == dag.read_text()
    assert dumps_derivation(loads_derivation(fib6.read_text())) == fib6.read_text()


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "mimply", "parse", "-f", "A->B"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == "A -> B\n"
