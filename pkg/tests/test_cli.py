import io
import json
import os
import subprocess
import sys

import pytest

from dpanova import exact_anova
from dpanova.cli import REPORT_KEYS, main, parse_csv, report_release
from dpanova.errors import MalformedHeader, MalformedRow, TooFewGroups, ValueOutOfRange

SMALL_CSV = "group,value\nA,0.2\nA,0.4\nB,0.6\nB,0.8\n"


@pytest.fixture
def small_csv(tmp_path):
    path = tmp_path / "small.csv"
    path.write_text(SMALL_CSV)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_csv_ok():
    d = parse_csv(io.BytesIO(SMALL_CSV.encode()))
    assert (d.k, d.n) == (2, 4)
    d = parse_csv(io.StringIO("group,value\r\nA,0.2\r\nA,0.4\r\nB,0.6\r\n"))
    assert d.sizes == [2, 1]
    d = parse_csv(io.BytesIO(b"\xef\xbb\xbfgroup,value\nA,0.1\nB,0.2\nB,0.3"))
    assert d.labels == ("A", "B")


@pytest.mark.parametrize("text, exc", [
    ("value,group\nA,0.2\n", MalformedHeader),
    ("", MalformedHeader),
    ("group,value\nA,abc\n", MalformedRow),
    ("group,value\nA,0.2,3\n", MalformedRow),
    ("group,value\n,0.2\n", MalformedRow),
    ("group,value\nA,1.2\nB,0.3\n", ValueOutOfRange),
    ("group,value\nA,0.2\nA,0.3\n", TooFewGroups),
])
def test_parse_csv_errors(text, exc):
    with pytest.raises(exc):
        parse_csv(io.StringIO(text))


def test_malformed_row_reports_line():
    with pytest.raises(MalformedRow) as info:
        parse_csv(io.StringIO("group,value\nA,abc\n"))
    assert info.value.line == 2
    assert "line 2" in str(info.value)


def test_analyze_infinite_epsilon(capsys, small_csv):
    code, out, _ = run(capsys, "analyze", "--input", small_csv, "--epsilon", "inf",
                       "--seed", "1", "--null-sims", "2000")
    assert code == 0
    report = json.loads(out)
    assert tuple(report) == REPORT_KEYS
    assert report["f_hat"] == pytest.approx(8.0, rel=1e-14)
    assert report["epsilon"] == "inf"
    assert (report["n"], report["k"], report["null_sims"], report["seed"]) == (4, 2, 2000, 1)
    assert 0.0 <= report["p_value"] <= 1.0


def test_analyze_is_byte_deterministic(capsys, small_csv):
    argv = ("analyze", "--input", small_csv, "--epsilon", "1", "--seed", "7", "--null-sims", "5000")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv, "--workers", "3")
    assert a == b and a


def test_analyze_echoes_entropy_seed(capsys, small_csv):
    _, out, _ = run(capsys, "analyze", "--input", small_csv, "--epsilon", "1", "--null-sims", "100")
    seed = json.loads(out)["seed"]
    _, again, _ = run(capsys, "analyze", "--input", small_csv, "--epsilon", "1",
                      "--null-sims", "100", "--seed", str(seed))
    assert again == out


def test_report_round_trip_reproduces_f_hat(capsys, small_csv):
    _, out, _ = run(capsys, "analyze", "--input", small_csv, "--epsilon", "0.7",
                    "--seed", "3", "--null-sims", "100")
    report = json.loads(out)
    assert report_release(report).f_hat == report["f_hat"]


@pytest.mark.parametrize("argv, message", [
    (["--epsilon", "0"], "epsilon must be positive"),
    (["--epsilon", "-2"], "epsilon must be positive"),
    (["--epsilon", "big"], "epsilon"),
    (["--epsilon", "1", "--expected-k", "3"], "expected 3"),
    (["--epsilon", "1", "--null-sims", "0"], "null-sims"),
])
def test_analyze_user_errors(capsys, small_csv, argv, message):
    code, out, err = run(capsys, "analyze", "--input", small_csv, *argv)
    assert code == 2
    assert message in err
    assert out == ""


def test_analyze_bad_file(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("group,value\nA,abc\n")
    code, _, err = run(capsys, "analyze", "--input", str(bad), "--epsilon", "1")
    assert code == 2 and "line 2" in err
    code, _, _ = run(capsys, "analyze", "--input", str(tmp_path / "missing.csv"), "--epsilon", "1")
    assert code == 2


def test_analyze_reads_stdin(small_csv):
    proc = subprocess.run(
        [sys.executable, "-m", "dpanova", "analyze", "--epsilon", "inf", "--seed", "2",
         "--null-sims", "100"],
        input=SMALL_CSV.encode(), capture_output=True, check=True,
    )
    assert json.loads(proc.stdout)["f_hat"] == pytest.approx(8.0)


def test_missing_subcommand_exits_2(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "analyze")[0] == 2


def test_power_command(capsys, tmp_path):
    out = tmp_path / "power.csv"
    meta = tmp_path / "meta.json"
    argv = ["power", "--preset", "paper-3group", "--n-grid", "99", "--epsilons", "inf",
            "--reps", "200", "--null-sims", "1000", "--seed", "3", "--out", str(out),
            "--meta", str(meta)]
    assert run(capsys, *argv)[0] == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,epsilon,reps,power"
    n, eps, reps, power = lines[1].split(",")
    assert (n, eps, reps) == ("99", "inf", "200")
    assert float(power) >= 0.95
    assert json.loads(meta.read_text())["truncation"] == "clamp"


def test_power_known_variance_and_custom_effect(capsys):
    code, out, _ = run(capsys, "power", "--means", "0.3,0.7", "--sd", "0.1", "--n-grid", "20,40",
                       "--epsilons", "inf,1", "--reps", "5", "--null-sims", "200",
                       "--variance-mode", "known:0.0225")
    assert code == 0
    rows = out.splitlines()
    assert rows[0] == "n,epsilon,reps,power" and len(rows) == 5
    assert [r.split(",")[:2] for r in rows[1:]] == [["20", "inf"], ["20", "1.0"],
                                                    ["40", "inf"], ["40", "1.0"]]


@pytest.mark.parametrize("extra", [
    ["--preset", "paper-3group", "--n-grid", ""],
    ["--preset", "paper-3group", "--n-grid", "3"],
    ["--preset", "paper-3group", "--n-grid", "99", "--epsilons", "0"],
    ["--preset", "paper-3group", "--means", "0.1,0.2", "--n-grid", "99"],
    ["--means", "0.1,0.2", "--n-grid", "99"],
    ["--preset", "paper-9group", "--n-grid", "99"],
    ["--preset", "paper-3group", "--n-grid", "99", "--variance-mode", "known:x"],
])
def test_power_user_errors(capsys, extra):
    assert run(capsys, "power", "--reps", "1", "--null-sims", "10", *extra)[0] == 2


def test_nulldist_command(capsys, tmp_path):
    out = tmp_path / "null.csv"
    code, _, err = run(capsys, "nulldist", "--n", "10000", "--k", "10", "--sigma2", "0.0225",
                       "--epsilons", "inf,1", "--sims", "20000", "--seed", "1",
                       "--threshold", "1.8808", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "epsilon,f_hat" and len(lines) == 40_001
    assert {ln.split(",")[0] for ln in lines[1:]} == {"inf", "1.0"}
    summary = dict(
        (parts["epsilon"], float(parts["fraction"]))
        for parts in (dict(kv.split("=") for kv in ln.split()[1:])
                      for ln in err.splitlines() if ln.startswith("summary"))
    )
    assert summary["inf"] == pytest.approx(0.05, abs=0.005)
    assert summary["1.0"] > 0.4


@pytest.mark.parametrize("extra", [["--sims", "0"], ["--k", "1"], ["--sigma2", "-1"]])
def test_nulldist_user_errors(capsys, extra):
    argv = ["nulldist", "--n", "50", "--k", "3", "--sigma2", "0.1", "--epsilons", "1", "--sims", "10"]
    assert run(capsys, *argv, *extra)[0] == 2


def test_synth_command(capsys, tmp_path):
    code, out, _ = run(capsys, "synth", "--preset", "paper-3group", "--n", "9", "--seed", "1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "group,value" and len(lines) == 10
    d = parse_csv(io.StringIO(out))
    assert d.sizes == [3, 3, 3]
    assert all(0.0 <= v <= 1.0 for _, v in d.rows())


def test_synth_round_trip_is_lossless(capsys, tmp_path):
    from dpanova import rng
    from dpanova.sim import PRESETS, generate_dataset

    path = tmp_path / "synth.csv"
    assert run(capsys, "synth", "--preset", "paper-6group", "--n", "600", "--seed", "9",
               "--out", str(path))[0] == 0
    with open(path, "rb") as fh:
        parsed = parse_csv(fh)
    direct = generate_dataset(PRESETS["paper-6group"], 600,
                              rng.substream(rng.stream_key(9, 2), 0))
    assert parsed == direct
    code, out, _ = run(capsys, "analyze", "--input", str(path), "--epsilon", "inf",
                       "--seed", "0", "--null-sims", "10")
    report = json.loads(out)
    exact = exact_anova(direct)
    assert (report["ssa_hat"], report["sse_hat"], report["f_hat"]) == (exact.ssa, exact.sse, exact.f)


def test_synth_user_errors(capsys):
    assert run(capsys, "synth", "--preset", "paper-3group", "--n", "2")[0] == 2
    assert run(capsys, "synth", "--means", "0.5", "--sd", "0.1", "--n", "20")[0] == 2


def test_internal_error_exits_1(capsys, monkeypatch, small_csv):
    import dpanova.cli as cli

    def broken(*a, **k):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "private_anova", broken)
    code, _, err = run(capsys, "analyze", "--input", small_csv, "--epsilon", "1", "--seed", "1")
    assert code == 1 and "boom" in err


def test_pure_python_backend_gives_identical_report(small_csv):
    argv = [sys.executable, "-m", "dpanova", "analyze", "--input", small_csv,
            "--epsilon", "0.5", "--seed", "11", "--null-sims", "3000"]
    compiled = subprocess.run(argv, capture_output=True, check=True).stdout
    env = dict(os.environ, DPANOVA_PURE_PYTHON="1")
    fallback = subprocess.run(argv, capture_output=True, check=True, env=env).stdout
    assert compiled == fallback
