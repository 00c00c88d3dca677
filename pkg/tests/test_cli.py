import io
import re
import subprocess
import sys
from pathlib import Path

import pytest

from g2erp.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, InputError, main, parse_mutation

DATA = Path(__file__).parent / "data"


def run(*argv) -> tuple[int, str]:
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


KEY = re.compile(r"^((?:[^=\[]|\[[^\]]*\])+)=(.*)$")


def lines(text: str) -> dict[str, str]:
    """key=value report lines; keys may contain bracketed '=' such as flow[t=1]."""
    return dict(m.groups() for m in map(KEY.match, text.splitlines()) if m)


def test_verify_catalog_entry():
    code, text = run("verify", "catalog:M1")
    assert code == EXIT_OK
    kv = lines(text)
    assert kv["result"] == "pass"
    assert kv["check.erp"] == "pass" and kv["check.bryant.equality"] == "pass"
    assert text.rstrip().splitlines()[-1].startswith("# ")
    assert "checks passed" in text


def test_verify_float_backend():
    code, text = run("verify", "catalog:M3", "--backend", "float")
    assert code == EXIT_OK, text


@pytest.mark.parametrize("spec", ["A(3,3)=0", "A:3,3=0", "3,3=0"])
def test_mutation_syntaxes_all_break_j(spec):
    code, text = run("verify", "catalog:J", "--mutate", spec, "--backend", "float")
    assert code == EXIT_FAIL
    assert lines(text)["result"] == "fail"


def test_parse_mutation():
    assert parse_mutation("B(1,2)=1/3")[:2] == ("B", (1, 2))
    assert parse_mutation("1,2,3=2")[:2] == (None, (1, 2, 3))
    for bad in ("A(1)=0", "Z(1,1)=0", "1,2=", "A(1,2)=sqrt(7)", "1,2,3,4=0"):
        with pytest.raises(InputError):
            parse_mutation(bad)


def test_non_erp_bracket_file():
    code, text = run("verify", str(DATA / "closed_non_erp.bracket"))
    assert code == EXIT_FAIL
    kv = lines(text)
    assert kv["check.closed"] == "pass"
    assert kv["check.erp"] == "fail"
    assert kv["check.bryant.equality"] == "fail"


def test_bracket_mutation():
    code, _ = run("verify", str(DATA / "closed_non_erp.bracket"), "--mutate", "1,2,3=0")
    assert code == EXIT_FAIL


def test_input_errors(tmp_path):
    assert run("verify", str(tmp_path / "missing.quad"))[0] == EXIT_INPUT
    bad = tmp_path / "bad.quad"
    bad.write_text("[A1]\n0 0\n0 zz\n")
    assert run("verify", str(bad))[0] == EXIT_INPUT
    assert run("verify", "catalog:nope")[0] == EXIT_INPUT
    assert run("verify", "catalog:J", "--mutate", "1,2,3=0")[0] == EXIT_INPUT
    assert run("frobnicate")[0] == EXIT_INPUT
    assert run("search", "--restarts", "0")[0] == EXIT_INPUT
    assert run("catalog", "show")[0] == EXIT_INPUT


def test_deform_summary():
    code, text = run("deform", "catalog:B")
    assert code == EXIT_OK
    assert text.rstrip().splitlines()[-1] == "T=2, u.mu=0, d=2, rigid=yes, equivariantly_rigid=no"
    kv = lines(text)
    assert kv["symmetry_group"] == "h_tau"


def test_deform_rejects_non_erp():
    code, text = run("deform", "catalog:M2", "--mutate", "B(1,1)=5")
    assert code == EXIT_FAIL and "error=" in text


def test_flow():
    code, text = run("flow", "catalog:M2", "--t=-3,-1,0,1,3")
    assert code == EXIT_OK
    kv = lines(text)
    for t in ("-3", "-1", "0", "1", "3"):
        assert kv[f"check.flow[t={t}].erp"] == "pass"
        assert abs(float(kv[f"flow[t={t}].tau_norm_sq"]) - 2) < 1e-8
    assert run("flow", "catalog:J", "--t", "a,b")[0] == EXIT_INPUT


def test_catalog_show_round_trip(tmp_path):
    code, listing = run("catalog", "list")
    assert code == EXIT_OK
    names = [line.split("\t")[0] for line in listing.splitlines()]
    assert names == ["J", "M2", "M3", "B", "M1"]
    code, text = run("catalog", "show", "M2")
    path = tmp_path / "m2.quad"
    path.write_text(text)
    assert run("verify", str(path))[0] == EXIT_OK


def test_search_writes_verifiable_hits(tmp_path):
    code, text = run("search", "--near", "catalog:M2", "--restarts", "2", "--workers", "1",
                     "--out", str(tmp_path))
    assert code == EXIT_OK
    kv = lines(text)
    assert int(kv["classes"]) >= 1
    files = sorted(tmp_path.glob("hit_*.quad"))
    assert files
    assert run("verify", str(files[0]), "--eq-tol", "1e-8")[0] == EXIT_OK


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "g2erp.cli", "catalog", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("J")
