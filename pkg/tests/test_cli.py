import csv
import json
import subprocess
import sys

from dufsim.cli import main
from dufsim.harness import CSV_COLUMNS


def test_decode_with_trace_and_dump(tmp_path, capsys):
    trace, dump = tmp_path / "t.csv", tmp_path / "g.json"
    assert main(["decode", "--d", "5", "--p", "0.02", "--trial", "3",
                 "--trace", str(trace), "--dump-graph", str(dump)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["cycles"] > 4 and out["growth_iterations"] >= 1
    rows = list(csv.reader(trace.open()))
    assert rows[0] == ["cycle", "vertex_id", "field", "old", "new"]
    assert rows[-1][2:] == ["global_stage", "merging", "terminate"]
    assert int(rows[-1][0]) == out["cycles"]
    assert len(json.loads(dump.read_text())["vertices"]) > 60


def test_decode_explicit_defects(capsys):
    assert main(["decode", "--d", "3", "--rounds", "1", "--defects", "1", "2",
                 "--mode", "verify"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["clusters"] == [[1, 2]] and out["growth_iterations"] == 1


def test_bench_csv(tmp_path, capsys):
    out = tmp_path / "b.csv"
    assert main(["bench", "--d", "3", "5", "--p", "0.001", "0.01", "--trials", "30",
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 5


def test_bench_weighted_json(capsys):
    assert main(["bench", "--d", "5", "--weighted", "--wmax", "2", "8", "--trials", "20",
                 "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [r["w_max"] for r in doc] == [2, 8]


def test_verify_log_and_replay(tmp_path, capsys):
    log = tmp_path / "v.jsonl"
    assert main(["verify", "--d", "3", "--p", "0.02", "--trials", "50", "--log", str(log)]) == 0
    assert "mismatches" in capsys.readouterr().out
    assert main(["replay", str(log), "--mode", "staged"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 50 and all(json.loads(x)["annihilated"] for x in lines)


def test_replay_malformed_exits_nonzero(tmp_path, capsys):
    f = tmp_path / "bad.jsonl"
    f.write_text("[1, 2]\n")
    assert main(["replay", str(f)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_invalid_distance_exits_nonzero(capsys):
    assert main(["bench", "--d", "4", "--trials", "5"]) == 2
    assert "error" in capsys.readouterr().err


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "dufsim.cli", "decode", "--d", "3", "--p", "0"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["cycles"] == 4
