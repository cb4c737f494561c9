"""Compare the three readings of the derivative-modulus bound over a wider sweep.

For each (f, lambda, beta', n) with beta = beta'/n and a = e, prints the
measured sup error and the printed, derived and drift-corrected bounds, then
counts violations per reading.

    python3 scripts/derivative_bound_sweep.py
    python3 scripts/derivative_bound_sweep.py --csv sweep.csv
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from itertools import product

from jain_ops.bounds import sup_error, theorem3_bound
from jain_ops.funcspec import parse_function
from jain_ops.kernel import JainParams
from jain_ops.operator import OperatorInstance

READINGS = ("printed", "derived", "corrected")


@dataclass(frozen=True)
class SweepConfig:
    functions: tuple[str, ...] = ("poly:0,1", "poly:0,0,1", "exp:-1", "sin:2", "poly:1,-1,0,0.3")
    lambdas: tuple[float, ...] = (0.5, 1.0, 2.0, 4.0)
    beta_primes: tuple[float, ...] = (0.0, 0.1, 0.5, 0.9)
    ns: tuple[int, ...] = (10, 25, 100, 400, 1600)


def sweep(cfg: SweepConfig):
    for spec, lam, bp, n in product(cfg.functions, cfg.lambdas, cfg.beta_primes, cfg.ns):
        f = parse_function(spec)
        params = JainParams(bp / n, math.e)
        _, actual = sup_error(OperatorInstance(params, n), f, lam)
        bounds = {r: theorem3_bound(params, n, lam, bp, f, reading=r) for r in READINGS}
        yield dict(f=spec, lam=lam, beta_prime=bp, n=n, actual=actual, **bounds)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--csv", help="also write every row here")
    args = ap.parse_args()
    rows = list(sweep(SweepConfig()))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    for r in READINGS:
        bad = [row for row in rows if row["actual"] > row[r] + 1e-10]
        worst = max(bad, key=lambda row: row["actual"] / max(row[r], 1e-300), default=None)
        line = f"{r:>9}: {len(bad):4d}/{len(rows)} violations"
        if worst:
            line += (f"; worst f={worst['f']} lam={worst['lam']} beta'={worst['beta_prime']} n={worst['n']}"
                     f" error {worst['actual']:.4g} vs bound {worst[r]:.4g}")
        print(line)
    sys.exit(0)
