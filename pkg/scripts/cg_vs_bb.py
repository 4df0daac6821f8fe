"""Matrix-vector products of CG and BB against the requested tolerance.

Logspace diagonal with N = 1000 and condition number 1e3, right-hand side of ones.
"""
import csv
from pathlib import Path

import numpy as np

from _common import parser
from gradhss.inner import bb_solve, cg_solve
from gradhss.problems import SpectrumSpec, diag_matrix

if __name__ == "__main__":
    args = parser(__doc__, "cg_vs_bb").parse_args()
    n = 200 if args.quick else 1000
    op = diag_matrix(SpectrumSpec(kind="logspace", lo=1e-3, hi=1.0, n=n))
    b = np.ones(n)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "matvecs.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps", "cg_matvecs", "bb_matvecs", "cg_iters", "bb_iters"])
        for k in range(1, 9):
            eps = 10.0 ** -k
            _, cg = cg_solve(op, b, tol=eps)
            _, bb = bb_solve(op, b, tol=eps)
            w.writerow([eps, cg.counters.matvecs, bb.counters.matvecs, cg.iterations, bb.iterations])
            print(f"eps={eps:.0e}  CG {cg.counters.matvecs:5d}  BB {bb.counters.matvecs:5d}")
            cg.history_csv(out / f"cg_eps{k}.csv")
            bb.history_csv(out / f"bb_eps{k}.csv")
