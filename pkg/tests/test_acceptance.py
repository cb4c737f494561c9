"""Acceptance criteria 1-11, each at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line (shown in the terminal summary) before
asserting, so a failing criterion still reports its measurements.
"""

import contextlib
import io
import math
import subprocess
import sys
import time
from itertools import product

import numpy as np
import pytest

from jain_ops.asymptotics import Constant, Decay, uniform_convergence_trace, voronovskaya_trace
from jain_ops.bounds import check_lemma5, check_theorem2, check_theorem3, lemma5_crossover
from jain_ops.cli import main
from jain_ops.funcspec import parse_function
from jain_ops.kernel import (
    JainParams,
    generating_identity_residual,
    s_series_closed,
    s_series_recursion,
    s_series_sum,
    weight_sum,
)
from jain_ops.operator import OperatorInstance, central_moment, raw_moment
from jain_ops.statconv import StatSequence, square_exception_sequences, theorem7_experiment

from conftest import ACCEPTANCE_LINES, E

MOMENT_GRID = list(product((0.0, 0.2, 0.5, 0.8), (1.5, 2.0, E), (1, 10, 100), (0.1, 1.0, 5.0)))
X, X2, ABS1 = (parse_function(s) for s in ("poly:0,1", "poly:0,0,1", "abs:1"))
FNAMES = {X: "x", X2: "x^2", ABS1: "|x-1|"}


@contextlib.contextmanager
def criterion(k, title, budget):
    """Time the block; the body sets box['ok'] and box['detail']."""
    box = {"ok": False, "detail": ""}
    t0 = time.perf_counter()
    try:
        yield box
    finally:
        dt = time.perf_counter() - t0
        box["time_ok"] = dt < budget
        ok = box["ok"] and box["time_ok"]
        line = f"CRITERION {k:>2} {'PASS' if ok else 'FAIL'}  {title}: {box['detail']} [{dt:.2f} s / {budget} s]"
        ACCEPTANCE_LINES[k] = line
        print(line)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def test_c01_partition_of_unity():
    with criterion(1, "partition of unity", 5) as box:
        grid = product(np.round(np.arange(10) * 0.1, 1), (1.1, 1.5, 2.0, E), (0.1, 1.0, 10.0, 100.0))
        errs = [abs(weight_sum(JainParams(b, a), al).partial_sum - 1.0) for b, a, al in grid]
        worst = max(errs)
        box["ok"] = worst < 1e-8
        box["detail"] = f"{len(errs)} points, max |sum - 1| = {worst:.2e}"
    assert box["ok"] and box["time_ok"]


def test_c02_generating_identity():
    with criterion(2, "generating identity", 2) as box:
        pts = list(product((0.5, 2.0, 8.0), (-0.5, 0.3, 0.9), (0.0, 0.2, 0.4)))
        res = [generating_identity_residual(JainParams(b, E), al, z) for al, z, b in pts]
        worst = max(res)
        box["ok"] = worst < 1e-8
        box["detail"] = f"{len(res)} (alpha, z, beta) points at a = e, max residual = {worst:.2e}"
    assert box["ok"] and box["time_ok"]


def test_c03_s_series_paths(tmp_path):
    with criterion(3, "S-series three paths", 10) as box:
        worst12, worst34, discrepancies = 0.0, 0.0, []
        for b, a, al in product((0.0, 0.2, 0.5, 0.8), (1.5, 2.0, E), (0.5, 1.0, 5.0)):
            p = JainParams(b, a)
            for r in (1, 2, 3, 4):
                s, rec, cl = s_series_sum(r, al, p), s_series_recursion(r, al, p), s_series_closed(r, al, p)
                if r <= 2:
                    worst12 = max(worst12, rel(rec, s), rel(cl, s), rel(cl, rec))
                else:
                    worst34 = max(worst34, rel(rec, s))
                    if rel(cl, s) > 1e-6:
                        discrepancies.append((b, a, al, r))
        out = tmp_path / "report.csv"
        with contextlib.redirect_stdout(io.StringIO()):
            code = main(["report", "--out", str(out)])
        text = out.read_text().splitlines()
        emitted = {
            (float(f[2]), float(f[3]), float(f[5]), int(f[1]))
            for f in (line.split(",") for line in text[1:])
            if f[0] == "s_series"
        }
        listed = all(d in emitted for d in discrepancies)
        box["ok"] = worst12 < 1e-7 and worst34 < 1e-6 and code == 0 and listed
        box["detail"] = (
            f"r=1,2 pairwise max rel {worst12:.1e}; r=3,4 sum/recursion max rel {worst34:.1e}; "
            f"{len(discrepancies)} printed S(3)/S(4) discrepancies (all off a = e), all in the report: {listed}"
        )
    assert box["ok"] and box["time_ok"]


def test_c04_moments():
    with criterion(4, "moments", 30) as box:
        low, high = 0.0, 0.0
        for b, a, n, x in MOMENT_GRID:
            op = OperatorInstance(JainParams(b, a), n)
            for o in (1, 2):
                low = max(low, raw_moment(op, o, x).rel_err_numeric_vs_closed,
                          central_moment(op, o, x).rel_err_numeric_vs_closed)
            for o in (3, 4):
                high = max(high, raw_moment(op, o, x).rel_err_numeric_vs_recursion,
                           central_moment(op, o, x).rel_err_numeric_vs_recursion)
        szasz = 0.0
        for n, x in product((1, 10, 100, 1000), (0.1, 1.0, 5.0)):
            op = OperatorInstance(JainParams(0.0, E), n)
            pairs = [
                (raw_moment(op, 1, x).numeric, x),
                (raw_moment(op, 2, x).numeric, x * x + x / n),
                (central_moment(op, 2, x).numeric, x / n),
                (central_moment(op, 4, x).numeric, 3 * x * x / n**2 + x / n**3),
            ]
            szasz = max(szasz, max(rel(v, t) for v, t in pairs))
        box["ok"] = low < 1e-7 and high < 1e-6 and szasz < 1e-9
        box["detail"] = (
            f"orders 1-2 vs printed max rel {low:.1e}; orders 3-4 numeric vs recursion max rel {high:.1e}; "
            f"classical collapse max rel {szasz:.1e}"
        )
    assert box["ok"] and box["time_ok"]


def _domination_protocol(check, fs, **kw):
    rows = []
    for f, lam, bp, n in product(fs, (1.0, 2.0), (0.0, 0.5), (25, 100, 400)):
        chk = check(OperatorInstance(JainParams(bp / n, E), n), f, lam, bp, **kw)
        rows.append((FNAMES[f], lam, bp, n, chk))
    return rows


def test_c05_theorem2_domination():
    with criterion(5, "modulus bound domination", 20) as box:
        rows = _domination_protocol(check_theorem2, (X, ABS1, X2))
        bad = [r for r in rows if not r[-1].satisfied]
        box["ok"] = not bad
        box["detail"] = f"{len(rows)} checks, {len(bad)} violations, min margin {min(r[-1].margin for r in rows):.3g}"
    assert box["ok"] and box["time_ok"]


@pytest.mark.xfail(
    strict=True,
    reason="the derivative-modulus bound as stated omits the drift f'(x) P_n(t - x, x); it fails whenever beta > 0",
)
def test_c06_theorem3_domination():
    with criterion(6, "derivative-modulus bound domination (as stated)", 20) as box:
        rows = _domination_protocol(check_theorem3, (X, X2))
        bad = [r for r in rows if not r[-1].satisfied]
        corrected = _domination_protocol(check_theorem3, (X, X2), reading="corrected")
        bad_corr = sum(not r[-1].satisfied for r in corrected)
        box["ok"] = not bad
        listing = "; ".join(
            f"f={f} lam={lam:g} beta'={bp:g} n={n} err {c.actual:.4g} > bound {c.bound:.4g}"
            for f, lam, bp, n, c in bad
        )
        box["detail"] = (
            f"{len(rows)} checks, {len(bad)} violations, {sum(r[2] > 0 for r in bad)} of them with beta' > 0 "
            f"[{listing}]; "
            f"drift-corrected reading: {bad_corr} violations"
        )
    assert box["ok"] and box["time_ok"]


def test_c07_lemma5():
    with criterion(7, "fourth-moment bound", 10) as box:
        checks = [check_lemma5(OperatorInstance(JainParams(b, a), n), x) for b, a, n, x in MOMENT_GRID]
        bad = sum(not c.satisfied for c in checks)
        table = {(b, a, x): lemma5_crossover(JainParams(b, a), x)
                 for b, a, x in product((0.0, 0.2, 0.5, 0.8), (1.5, 2.0, E), (0.1, 1.0, 5.0))}
        found = [v for v in table.values() if v is not None]
        box["ok"] = bad == 0 and len(table) == 36
        box["detail"] = (
            f"intermediate bound: {len(checks)} checks, {bad} violations; consolidated bound crossover table "
            f"(reported, not asserted): fails at {len(found)}/36 points, n in [{min(found)}, {max(found)}], "
            f"classical x=1 at n={table[(0.0, E, 1.0)]}"
        )
    assert box["ok"] and box["time_ok"]


def test_c08_voronovskaya():
    with criterion(8, "Voronovskaya limit", 60) as box:
        # scaling by n amplifies rounding, so "exactly" is judged at rel 1e-8
        sq = max(
            rel(v, x)
            for x in (0.5, 1.0, 2.0)
            for v in voronovskaya_trace(Constant(0.0, E), X2, x, [2**k for k in range(4, 13)]).scaled_residuals
        )
        cube = max(
            rel(voronovskaya_trace(Constant(0.0, E), parse_function("poly:0,0,0,1"), x, [4096]).scaled_residuals[-1],
                3 * x * x)
            for x in (0.5, 1.0, 2.0)
        )
        tr = voronovskaya_trace(Decay(1.0, 1.0), parse_function("exp:-1"), 1.0, [2**k for k in range(6, 15)])
        target = math.exp(-1) / 2
        dec_err = abs(tr.extrapolated_limit - target) / target
        neg = voronovskaya_trace(Constant(0.5, E), parse_function("exp:-1"), 1.0, [2**k for k in range(4, 12)])
        v = np.abs(neg.scaled_residuals)
        ratios = v[-3:] / v[-4:-1]
        box["ok"] = sq < 1e-8 and cube < 1e-3 and dec_err <= 0.05 and tr.drift_vanishing and ratios.min() >= 1.5
        box["detail"] = (
            f"t^2 residual vs x max rel {sq:.1e}; t^3 rel err at n=4096 {cube:.1e}; decay ladder limit "
            f"{tr.extrapolated_limit:.8f} vs {target:.8f} (rel {dec_err:.1e}), drift at n={tr.n_values[-1]} "
            f"{tr.drifts[-1]:.2e}; constant beta=0.5 growth per octave min {ratios.min():.3f}"
        )
    assert box["ok"] and box["time_ok"]


def test_c09_uniform_convergence():
    with criterion(9, "uniform convergence", 30) as box:
        tr = uniform_convergence_trace(Decay(), X2, (0.0, 2.0), [2**k for k in range(2, 11)])
        errs = [e for _, e in tr]
        tail = errs[-6:]
        decreasing = all(b < a for a, b in zip(tail, tail[1:]))
        neg = [e for _, e in uniform_convergence_trace(Constant(0.5, E), X, (0.0, 1.0), [2**k for k in range(6, 13)])]
        plateau = neg[-1] > 0.5 and max(neg[-3:]) - min(neg[-3:]) < 1e-9
        box["ok"] = decreasing and errs[-1] < 1e-2 and plateau
        box["detail"] = (
            f"decay ladder sup errors {', '.join(f'{e:.3g}' for e in tail)} (strict decrease: {decreasing}); "
            f"constant beta=0.5 plateau {neg[-1]:.10g}"
        )
    assert box["ok"] and box["time_ok"]


def test_c10_statistical_convergence():
    with criterion(10, "statistical convergence", 120) as box:
        b, a = square_exception_sequences(10_000)
        pos = theorem7_experiment(b, a, X2, (0.0, 1.0), 0.05, [1000, 3000, 10_000]).bad_densities
        # constant beta = 1/2 at every n; horizons kept short for the budget (see README)
        neg = theorem7_experiment(StatSequence(0.5), StatSequence(E), X, (0.0, 1.0), 0.1, [100, 300, 1000]).bad_densities
        nonincr = all(q <= p for p, q in zip(pos, pos[1:]))
        box["ok"] = nonincr and pos[-1] <= 0.05 and min(neg) >= 0.9
        box["detail"] = (
            f"square-exception bad densities {pos} at 1e3, 3e3, 1e4; constant-beta control {neg} at 100, 300, 1000"
        )
    assert box["ok"] and box["time_ok"]


def _quiet_main(argv):
    with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(io.StringIO()):
        return main(argv)


def test_c11_cli(tmp_path, monkeypatch):
    with criterion(11, "CLI determinism and exit codes", 10) as box:
        outs = []
        for i in range(2):
            path = tmp_path / f"run{i}.csv"
            subprocess.run([sys.executable, "-m", "jain_ops", "moments", "--out", str(path)], check=True,
                           capture_output=True)
            outs.append(path.read_bytes())
        same = outs[0] == outs[1]
        codes = {
            0: _quiet_main(["weights", "--out", str(tmp_path / "w.csv")]),
            1: _quiet_main(["bounds", "--f", "poly:0,1", "--beta-prime", "0.5", "--theorem", "T3",
                            "--out", str(tmp_path / "b.csv")]),
            2: _quiet_main(["moments", "--beta", "1.5"]),
        }
        monkeypatch.setenv("JAIN_OPS_KMAX", "5")
        codes[3] = _quiet_main(["moments", "--beta", "0.5", "--n", "100", "--x", "5", "--out", str(tmp_path / "t.csv")])
        contract = all(k == v for k, v in codes.items())
        box["ok"] = same and contract and not (tmp_path / "t.csv").exists()
        box["detail"] = f"byte-identical repeat: {same}; exit codes expected->got {codes}"
    assert box["ok"] and box["time_ok"]
