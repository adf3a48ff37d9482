import csv
import io
import json
import shutil
import subprocess
import sys

import pytest

from becbound import write_alist
from becbound.cli import EXIT_INVALID, EXIT_OK, EXIT_UNKNOWN, WORKERS_ENV, main, parse_config


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_bound_fig1(tmp_path, capsys):
    code, _, err = run(["bound", "--code", "builtin:fig1", "--bits", "all", "--budget", "512",
                        "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    doc = json.loads((tmp_path / "report.json").read_text())
    assert len(doc["reports"]) == 6
    bit1 = doc["reports"][1]
    assert bit1["order"] == 3 and bit1["verdict"] == "order-tight-confirmed"
    assert bit1["x_min_ss"] == [[0, 1, 5], [1, 2, 3]]
    rows = list(csv.DictReader(io.StringIO((tmp_path / "curves.csv").read_text())))
    assert list(rows[0]) == ["bit", "epsilon", "ub", "lb", "exact"]
    assert len(rows) == 600
    for r in rows:
        assert float(r["ub"]) >= float(r["exact"]) - 1e-12 >= float(r["lb"]) - 2e-12
    assert "bit 1: order 3" in err
    assert "workers" not in doc["config"] and "out" not in doc["config"]


def test_bound_to_stdout(capsys):
    code, out, _ = run(["bound", "--code", "builtin:fig1", "--bits", "1", "--budget", "64"], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["command"] == "bound"


def test_bound_with_composite_and_mc(tmp_path, capsys):
    code, _, _ = run(["bound", "--code", "builtin:hamming74", "--bits", "0,4", "--budget", "600",
                      "--composite", "nonuniform:2", "--trials", "2000", "--grid", "0.1:0.9:5",
                      "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    head = (tmp_path / "curves.csv").read_text().splitlines()[0]
    assert head == "bit,epsilon,ub,cub,lb,exact"
    assert (tmp_path / "mc.csv").exists()
    doc = json.loads((tmp_path / "report.json").read_text())
    assert [c["kind"] for c in doc["composite"]] == ["cub", "cub"]
    assert doc["mc"][0]["trials"] == 2000


@pytest.mark.parametrize("argv", [
    ["bound", "--code", "builtin:fig1", "--bits", ""],
    ["bound", "--code", "builtin:fig1", "--bits", "9"],
    ["fer", "--code", "builtin:fig1", "--grid", "0:1:5"],
    ["bound", "--code", "builtin:nothing"],
    ["bound", "--code", "builtin:fig1", "--composite", "diagonal:2"],
    ["bound", "--code", "builtin:fig1", "--budget", "0"],
    ["stopping-distance", "--code", "builtin:fig1", "--t", "0"],
    ["exact", "--code", "regular:50,3,6,4"],
    ["stats", "--code", "builtin:fig1", "--weight-cap", "0"],
    ["bound", "--code", "builtin:fig1", "--workers", "0"],
])
def test_validation_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == EXIT_INVALID
    assert err.startswith("error:")


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["bound"])
    assert info.value.code == 2


def test_bad_alist_file(tmp_path, capsys):
    p = tmp_path / "bad.alist"
    p.write_text("3 2\n1 2\n")
    code, _, err = run(["exact", "--code", str(p)], capsys)
    assert code == EXIT_INVALID and "line" in err


def test_stopping_distance_exit_codes(capsys):
    code, out, _ = run(["stopping-distance", "--code", "builtin:fig1", "--t", "3"], capsys)
    assert code == EXIT_OK and json.loads(out)["result"]["answer"] == "yes"
    code, out, _ = run(["stopping-distance", "--code", "builtin:fig1", "--t", "2"], capsys)
    assert code == EXIT_OK and json.loads(out)["result"]["answer"] == "no"
    code, out, _ = run(["stopping-distance", "--code", "regular:50,3,6,4", "--t", "5", "--budget", "1"],
                       capsys)
    assert code == EXIT_UNKNOWN and json.loads(out)["result"]["answer"] == "unknown"


def test_unknown_verdict_exit_3(capsys):
    code, _, _ = run(["bound", "--code", "builtin:golay23", "--bits", "0", "--budget", "400",
                      "--set-cap", "1", "--exact", "no"], capsys)
    assert code == EXIT_UNKNOWN


def test_fer_command(tmp_path, capsys):
    code, _, err = run(["fer", "--code", "builtin:fig1", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["report"]["order"] == 3 and doc["report"]["kind"] == "fer"


def test_stats_hamming(tmp_path, capsys):
    code, _, err = run(["stats", "--code", "builtin:hamming74", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO((tmp_path / "stats.csv").read_text())))
    assert list(rows[0]) == ["order", "num_bits", "order_star", "multi_star"]
    assert sum(int(r["num_bits"]) for r in rows) == 7
    assert "Num. bits" in err


def test_exact_simulate_convert(tmp_path, capsys):
    code, out, _ = run(["exact", "--code", "builtin:fig1", "--bits", "1"], capsys)
    doc = json.loads(out)
    assert doc["bits"][0]["counts"] == [0, 0, 0, 2, 8, 5, 1]
    assert doc["frame"]["counts"] == [0, 0, 0, 4, 15, 6, 1]
    code, out, _ = run(["simulate", "--code", "builtin:fig1", "--trials", "500", "--eps", "0.5"], capsys)
    assert code == EXIT_OK and len(out.splitlines()) == 7
    code, out, _ = run(["convert", "--code", "builtin:fig1"], capsys)
    from becbound import builtin_code
    assert out == write_alist(builtin_code("fig1"))
    p = tmp_path / "fig1.json"
    code, out, _ = run(["convert", "--code", "builtin:fig1", "--to", "json"], capsys)
    p.write_text(out)
    code, out, _ = run(["exact", "--code", str(p), "--bits", "1"], capsys)
    assert json.loads(out)["bits"][0]["order"] == 3


def test_output_independent_of_worker_count(tmp_path, capsys, monkeypatch):
    argv = ["bound", "--code", "builtin:hamming74", "--budget", "256", "--trials", "70000"]
    run(argv + ["--out", str(tmp_path / "a")], capsys)
    monkeypatch.setenv(WORKERS_ENV, "3")
    run(argv + ["--out", str(tmp_path / "b")], capsys)
    for name in ("report.json", "curves.csv", "mc.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_workers_env(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "4")
    assert parse_config(["exact", "--code", "builtin:fig1"]).workers == 4
    assert parse_config(["exact", "--code", "builtin:fig1", "--workers", "2"]).workers == 2


@pytest.mark.skipif(shutil.which("becbound") is None, reason="console script not installed")
def test_console_script_exit_code():
    proc = subprocess.run(["becbound", "fer", "--code", "builtin:fig1", "--grid", "0:1:3"],
                          capture_output=True, text=True)
    assert proc.returncode == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "becbound.cli", "stopping-distance", "--code",
                           "builtin:fig1", "--t", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
