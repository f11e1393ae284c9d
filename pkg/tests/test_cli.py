import io
import json
import re
import subprocess
import sys

import pytest

from domineering import cli
from domineering.board import parse_position


def run(*argv, env_db=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def dbarg(db_path):
    return ["--db", str(db_path)]


def test_eval():
    code, out, _ = run("eval", "--pos", "o./oo")
    assert (code, out) == (0, "*\n")
    assert run("eval", "--pos", "oo/oo")[1] == "{1|-1}\n"


def test_eval_with_bridges():
    assert run("eval", "--pos", "o/o/o/o", "--bridges")[1] == "2\n"


def test_stats_text(dbarg):
    code, out, _ = run("stats", *dbarg)
    assert code == 0
    row12 = [line for line in out.splitlines() if line.split()[0] == "12"][0]
    assert row12.split()[-1] == "127112"
    assert "differs" not in out


def test_stats_csv_and_jsonl(dbarg):
    _, out, _ = run("stats", *dbarg, "--csv")
    lines = out.splitlines()
    assert lines[0] == "size,zero,num_nonzero,num_total,updown,tiny,nimber,inf_total,comb,total"
    assert lines[-1].endswith(",127112")
    _, out, _ = run("stats", *dbarg, "--jsonl")
    rows = [json.loads(x) for x in out.splitlines()]
    assert rows[5] == {
        "size": 6, "zero": 10, "num_nonzero": 16, "num_total": 26, "updown": 2,
        "tiny": 0, "nimber": 0, "inf_total": 12, "comb": 38, "total": 68,
    }


def test_default_database_from_environment(db_path, monkeypatch):
    monkeypatch.setenv(cli.DB_ENV, str(db_path))
    assert run("query", "--pos", "o./oo")[1] == "*\n"


def test_query_and_find(dbarg):
    assert run("query", *dbarg, "--pos", "oo/o./o.")[1] == "1/2\n"
    code, out, _ = run("find", *dbarg, "--value", "*2", "--size", "11")
    assert code == 0 and out.splitlines()[-1] == "found 1"
    p = parse_position(out.split()[1])
    assert p.size == 11
    _, out, _ = run("find", *dbarg, "--value", "^", "--size", "6", "--jsonl")
    (rec,) = [json.loads(x) for x in out.splitlines()]
    assert rec["value"] == "^" and rec["size"] == 6


def test_options(dbarg):
    code, out, _ = run("options", *dbarg, "--size", "3")
    assert code == 0
    assert out.splitlines()[:2] == ["1 2", "2 1"]
    assert "max 2: 1 positions" in out


def test_construct():
    code, out, _ = run("construct", "up", "2")
    lines = out.splitlines()
    assert code == 0 and lines[-1] == "^2" and lines[-2] == "size 11"
    assert parse_position(lines[0]).size == 11
    code, out, _ = run("construct", "star", "2")
    assert out.splitlines()[-1] == "*2"
    code, out, _ = run("construct", "number", "--", "-3/4")
    assert out.splitlines()[-1] == "-3/4"


def test_thermo_lines():
    code, out, _ = run("thermo", "--value", "{2|-2}")
    assert code == 0
    assert "temperature 2" in out.splitlines()
    pts = [x for x in out.splitlines() if " t=" in x]
    assert pts and all(re.fullmatch(r"(left|right) t=-?\d+(/\d+)? v=-?\d+(/\d+)?", x) for x in pts)
    out = run("thermo", "--pos", "oo/oo")[1]
    assert "temperature 1" in out.splitlines()


def test_reach():
    code, out, _ = run("reach", "--pos", "o./oo", "--max-board", "4")
    assert code == 0 and out.startswith("reachable on")
    out = run("reach", "--pos", "ooo/o.o/ooo", "--max-board", "5")[1]
    assert out.startswith("not reachable")


def test_build(tmp_path):
    path = tmp_path / "d5.dcgt"
    code, out, _ = run("build", "--max-size", "5", "--db", str(path), "--threads", "1")
    assert code == 0 and out.splitlines()[-1] == "total 36"
    assert run("stats", "--db", str(path), "--csv")[1].splitlines()[-1] == "5,5,4,9,0,0,1,6,16,21"


@pytest.mark.parametrize("suite, extra", [("algebra", ["--up-to", "8"]), ("symmetry", ["--up-to", "6"]),
                                          ("bridge", ["--samples", "100"]), ("table1", ["--up-to", "12"])])
def test_verify_suites(dbarg, suite, extra):
    code, out, _ = run("verify", "--suite", suite, *extra, *dbarg)
    assert code == 0 and out.splitlines()[-1] == f"{suite}: ok"


def test_verify_mismatch_exit_code(dbarg, monkeypatch):
    from domineering import database as D

    bad = dict(D.REFERENCE_CENSUS)
    bad[6] = (10, 16, 26, 2, 0, 0, 12, 38, 69)
    monkeypatch.setattr(D, "REFERENCE_CENSUS", bad)
    monkeypatch.setattr(D.compare_census, "__defaults__", (bad,))
    code, out, err = run("verify", "--suite", "table1", "--up-to", "12", *dbarg)
    assert code == 1 and err.startswith("mismatch:")
    assert json.loads(out.splitlines()[0])["column"] == "total"


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["eval", "--pos", "ox"],
        ["thermo", "--value", "{1|"],
        ["construct", "number", "1/3"],
        ["build", "--max-size", "16", "--db", "x"],
        ["reach", "--pos", "o", "--max-board", "11"],
        ["frobnicate"],
    ],
)
def test_usage_errors(argv, monkeypatch):
    monkeypatch.delenv(cli.DB_ENV, raising=False)
    code, out, err = run(*argv)
    assert code == 2 and err.startswith("usage error:") and err.count("\n") == 1


def test_query_needs_a_database(monkeypatch):
    monkeypatch.delenv(cli.DB_ENV, raising=False)
    code, _, err = run("query", "--pos", "o")
    assert code == 2 and "DOMINEERING_DB" in err


def test_resource_errors(tmp_path):
    code, _, err = run("stats", "--db", str(tmp_path / "none.dcgt"))
    assert code == 3 and err.startswith("resource error:")
    junk = tmp_path / "junk.dcgt"
    junk.write_bytes(b"not a database")
    assert run("stats", "--db", str(junk))[0] == 3


def test_output_is_deterministic(dbarg):
    for argv in (["stats", *dbarg], ["construct", "number", "5/16", *dbarg], ["options", *dbarg]):
        assert run(*argv)[1] == run(*argv)[1]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "domineering", "eval", "--pos", "o./oo"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == "*\n"
