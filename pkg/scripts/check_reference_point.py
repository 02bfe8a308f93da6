#!/usr/bin/env python3
"""Solve the two-point reference case and check it against pinned values.

The case (classical model, fourth-moment constraint, K=1, alpha=0.05,
kappa=10) has a certified two-point optimum whose numbers are frozen in the
test suite; this script re-derives them from scratch and prints a
got-vs-expected table.  Exit 0 when everything is inside its box, 1 otherwise.
Useful as a quick end-to-end sanity check after an install.
"""

import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from rician_capacity.constraints import Moment4
from rician_capacity.kernels import ChannelSpec
from rician_capacity.optimize import SolverConfig, solve_capacity
from rician_capacity.quadrature import QuadratureConfig

EXPECTED = (
    ("location[0]", 0.0, 0.005),
    ("location[1]", 1.0 / np.sqrt(2.0), 0.005),
    ("probability[0]", 0.9, 0.005),
    ("probability[1]", 0.1, 0.005),
    ("capacity [nats]", 0.0531, 5e-4),
    ("lambda1", 0.891, 0.02),
    ("lambda2", 0.151, 0.02),
)


def main():
    t0 = time.perf_counter()
    sol = solve_capacity(ChannelSpec("rician", rician_k=1.0),
                         Moment4(alpha=0.05, kappa=10.0),
                         SolverConfig(), QuadratureConfig())
    elapsed = time.perf_counter() - t0
    F, rep = sol.distribution, sol.report

    got = (F.locations[0], F.locations[1], F.probabilities[0],
           F.probabilities[1], sol.capacity_nats, rep.lambda1, rep.lambda2)
    ok = sol.converged and F.n_points == 2
    print(f"solved in {elapsed:.1f}s  certified={sol.converged}  "
          f"n_points={F.n_points}  kt grid min={rep.grid_min:.3e}")
    print(f"{'quantity':18s} {'got':>14s} {'expected':>12s} {'tol':>8s}")
    for (name, want, tol), val in zip(EXPECTED, got):
        inside = abs(val - want) <= tol
        ok = ok and inside
        flag = "" if inside else "  <-- OUT OF BOX"
        print(f"{name:18s} {val:14.8f} {want:12.6f} {tol:8.1e}{flag}")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
