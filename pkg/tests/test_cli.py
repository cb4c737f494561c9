import contextlib
import csv
import io
import json
import math
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from jain_ops.cli import COLUMNS, RunConfig, main, parse_args


def run_cli(args):
    """Run main() in-process; returns (code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(args)
    return code, out.getvalue(), err.getvalue()


def rows_of(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestParse:
    def test_moments_example(self):
        cfg = parse_args(["moments", "--beta", "0.2", "--a", "2.718281828", "--n", "10", "--x", "1", "--order", "2"])
        assert cfg.subcommand == "moments"
        assert cfg.betas == (0.2,) and cfg.n_values == (10,) and cfg.orders == (2,)
        assert cfg.fmt == "csv"

    def test_apply_example_with_e_literal(self):
        cfg = parse_args(["apply", "--f", "poly:0,0,1", "--beta", "0", "--a", "e", "--n", "10", "--x", "1"])
        assert cfg.a_values == (math.e,) and cfg.f == "poly:0,0,1"

    def test_octave_ladder(self):
        assert parse_args(["converge", "--f", "poly:0,0,1", "--n-ladder", "oct:2..5"]).n_values == (4, 8, 16, 32)

    @pytest.mark.parametrize(
        "argv, flag",
        [
            (["moments", "--beta", "1.5"], "--beta"),
            (["moments", "--a", "3"], "--a"),
            (["apply", "--beta", "0"], "--f"),
            (["moments", "--order", "5"], "--order"),
            (["statconv", "--horizons", "10,5"], "--horizons"),
            (["converge", "--f", "poly:0,1", "--ladder", "fast"], "--ladder"),
            (["moments", "--n", "4", "--n-ladder", "8"], "--n-ladder"),
            (["moments", "--bet", "0.1"], "--bet"),
        ],
    )
    def test_usage_errors_name_flag(self, argv, flag, capsys):
        with pytest.raises(SystemExit) as exc:
            parse_args(argv)
        assert exc.value.code == 2
        assert flag in capsys.readouterr().err


class TestRoundTrip:
    @given(
        betas=st.none() | st.lists(st.floats(0, 0.99), min_size=1, max_size=3).map(tuple),
        ns=st.none() | st.lists(st.integers(1, 5000), min_size=1, max_size=4).map(tuple),
        f=st.none() | st.sampled_from(["poly:0,0,1", "exp:-1", "abs:1"]),
        interval=st.none() | st.tuples(st.floats(0, 1), st.floats(2, 3)),
        reading=st.sampled_from(["printed", "derived", "corrected"]),
        fmt=st.sampled_from(["csv", "json"]),
        sub=st.sampled_from(["moments", "bounds", "converge", "statconv"]),
    )
    def test_json_round_trip(self, betas, ns, f, interval, reading, fmt, sub):
        cfg = RunConfig(sub, betas=betas, n_values=ns, f=f, interval=interval, reading=reading, fmt=fmt)
        assert RunConfig.from_json(cfg.to_json()) == cfg

    def test_unknown_field_rejected(self):
        with pytest.raises(ValueError):
            RunConfig.from_json('{"subcommand": "moments", "colour": 1}')


class TestRuns:
    def test_moments_value_and_columns(self, tmp_path):
        out = tmp_path / "m.csv"
        code, stdout, _ = run_cli(["moments", "--beta", "0.2", "--a", "e", "--n", "10", "--x", "1",
                                   "--order", "2", "--out", str(out)])
        assert code == 0 and stdout.startswith("moments: ok")
        rows = rows_of(out)
        assert list(rows[0]) == list(COLUMNS["moments"])
        raw = next(r for r in rows if r["kind"] == "raw")
        assert float(raw["numeric"]) == pytest.approx(1.7578125, rel=1e-12)
        assert float(raw["closed"]) == pytest.approx(1.7578125, rel=1e-12)

    def test_determinism(self, tmp_path):
        args = ["sseries", "--beta", "0.3,0.6", "--a", "2,e", "--format", "csv"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli(args + ["--out", str(a)])
        run_cli(args + ["--out", str(b)])
        assert a.read_bytes() == b.read_bytes()
        assert b"\r" not in a.read_bytes()

    def test_json_mirrors_csv(self, tmp_path):
        base = ["apply", "--f", "exp:-1", "--beta", "0.1", "--a", "2", "--n", "5", "--x", "0.5,1"]
        c, j = tmp_path / "o.csv", tmp_path / "o.json"
        run_cli(base + ["--out", str(c)])
        run_cli(base + ["--out", str(j), "--format", "json"])
        rc, rj = rows_of(c), json.loads(j.read_text())
        assert [list(r) for r in rj] == [list(COLUMNS["apply"])] * 2
        assert [float(r["value"]) for r in rc] == [r["value"] for r in rj]

    def test_report_writes_crossover(self, tmp_path):
        out = tmp_path / "rep.csv"
        code, _, _ = run_cli(["report", "--beta", "0,0.5", "--a", "2,e", "--n", "10", "--x", "1",
                              "--out", str(out)])
        assert code == 0
        rows = rows_of(out)
        assert any(r["source"] == "s_series" and r["a"] == "2" for r in rows)
        assert not any(float(r["a"]) == math.e and r["source"] == "s_series" for r in rows)
        cross = rows_of(tmp_path / "rep_lemma5.csv")
        szasz = next(r for r in cross if float(r["beta"]) == 0 and float(r["a"]) == math.e)
        assert szasz["crossover_n"] == "55"

    def test_statconv_trace(self, tmp_path):
        out, tr = tmp_path / "s.csv", tmp_path / "t.csv"
        code, _, _ = run_cli(["statconv", "--horizons", "50,100,200", "--out", str(out), "--trace-out", str(tr)])
        assert code == 0
        dens = [float(r["bad_density"]) for r in rows_of(out)]
        assert dens == sorted(dens, reverse=True)
        assert len(rows_of(tr)) == 200

    def test_stdout_mode(self):
        code, stdout, stderr = run_cli(["weights", "--beta", "0.5", "--a", "e", "--alpha", "1"])
        assert code == 0
        assert stdout.splitlines()[0] == ",".join(COLUMNS["weights"])
        assert stderr.startswith("weights: ok")


class TestExitCodes:
    def test_exit_1_on_violation_output_kept(self, tmp_path):
        out = tmp_path / "b.csv"
        code, stdout, _ = run_cli(["bounds", "--f", "poly:0,1", "--beta-prime", "0.5", "--theorem", "T3",
                                   "--n", "100", "--out", str(out)])
        assert code == 1 and "FAIL" in stdout
        assert rows_of(out)[0]["satisfied"] == "false"

    def test_exit_2_usage(self):
        assert run_cli(["moments", "--beta", "1.5"])[0] == 2

    def test_exit_2_condition(self, tmp_path):
        out = tmp_path / "c.csv"
        code, _, err = run_cli(["bounds", "--f", "poly:0,1", "--beta", "0.3", "--beta-prime", "0.5",
                                "--n", "10", "--out", str(out)])
        assert code == 2 and "beta'/n >= beta" in err
        assert not out.exists()

    def test_exit_3_truncation(self, tmp_path, monkeypatch):
        monkeypatch.setenv("JAIN_OPS_KMAX", "5")
        out = tmp_path / "t.csv"
        code, _, err = run_cli(["moments", "--beta", "0.5", "--a", "e", "--n", "100", "--x", "5",
                                "--out", str(out)])
        assert code == 3 and "truncation" in err
        assert not out.exists()
        assert list(tmp_path.iterdir()) == []

    def test_console_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "jain_ops", "moments", "--beta", "2"],
                              capture_output=True, text=True)
        assert proc.returncode == 2 and "--beta" in proc.stderr
