import json
import subprocess
import sys

import pytest

import cise
from cise.cli import RunConfig, main

from conftest import needs_smt


def corpus(name):
    return cise.corpus_path(name)


def test_bank_v1_exit_1(capsys):
    assert main([corpus("bank_v1"), "--backend", "finite"]) == 1
    out = capsys.readouterr().out
    assert "safety(deposit): FAIL" in out and "amount = -" in out


def test_bank_v2_tokens_exit_0(capsys):
    assert main([corpus("bank_v2"), "--backend", "finite", "--tokens"]) == 0
    out = capsys.readouterr().out
    assert "withdraw: requires token tok_withdraw(accountId)" in out
    assert out.splitlines()[-1] == "RESULT: VERIFIED"


def test_bank_v2_without_tokens_exit_1():
    assert main([corpus("bank_v2"), "--backend", "finite"]) == 1


def test_no_solution_exit_1(capsys):
    assert main([corpus("bounded_counter"), "--backend", "finite", "--tokens"]) == 1
    assert "no solution" in capsys.readouterr().out


def test_missing_file_exit_2(capsys):
    assert main(["missing.spec"]) == 2
    assert "missing.spec" in capsys.readouterr().err


def test_parse_error_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.spec"
    p.write_text("@invariant\nx >;\n@operations\n")
    assert main([str(p)]) == 2
    err = capsys.readouterr().err
    assert err.startswith(f"{p}:2:")


def test_backend_error_exit_3(capsys):
    assert main([corpus("bank_v2"), "--backend", "smt", "--solver", "/nonexistent/z3"]) == 3
    assert "backend error" in capsys.readouterr().err


def test_fallback_to_finite_is_announced(capsys):
    assert main([corpus("bank_v1"), "--solver", "/nonexistent/z3"]) == 1
    captured = capsys.readouterr()
    assert "using the finite backend" in captured.err
    assert "backend: finite" in captured.out


def test_unknown_exit_4(capsys):
    code = main([corpus("bank_v2"), "--backend", "finite", "--domain", "Client=3",
                 "--int-range=-40..40", "--timeout", "0.02"])
    assert code == 4
    assert capsys.readouterr().out.splitlines()[-1] == "RESULT: UNKNOWN"


def test_stage_limit(capsys):
    assert main([corpus("bank_v2"), "--backend", "finite", "--stage", "1"]) == 0
    assert "skipped (stage limit 1)" in capsys.readouterr().out


def test_tokens_imply_stage_2():
    assert RunConfig("x", tokens=True, stage=1).stage == 2


def test_json_output(tmp_path):
    out = tmp_path / "r.json"
    assert main([corpus("bank_v2"), "--backend", "finite", "--tokens", "--json", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["summary"] == "verified"
    assert data["tokens"]["conflicts"] == [["tok_withdraw", "tok_withdraw"]]


def test_bounds_flags(capsys):
    assert main([corpus("bank_v1"), "--backend", "finite", "--int-range=-2..2",
                 "--domain", "Client=1"]) == 1
    out = capsys.readouterr().out
    assert "int -2..2, Client=1" in out
    assert "amount = -2" in out


@pytest.mark.parametrize("bad", ["--int-range=3..1", "--int-range=a..b", "--domain=Client=0",
                                 "--domain=Client"])
def test_bad_flags(bad):
    with pytest.raises(SystemExit) as exc:
        main([corpus("bank_v1"), bad])
    assert exc.value.code == 2


def test_byte_identical_reports():
    cmd = [sys.executable, "-m", "cise.cli", corpus("bank_v2"), "--backend", "finite",
           "--tokens"]
    a = subprocess.run(cmd, capture_output=True)
    b = subprocess.run(cmd, capture_output=True)
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout


@needs_smt
def test_smt_backend_run(capsys):
    assert main([corpus("bank_v1"), "--backend", "smt"]) == 1
    out = capsys.readouterr().out
    assert "backend: smt" in out and "safety(deposit): FAIL" in out


def test_console_script_entry():
    res = subprocess.run(["cise-verify", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "--tokens" in res.stdout
