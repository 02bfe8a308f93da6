#!/usr/bin/env python3
"""Regenerate the shipped reference sweeps under data/.

Every artifact goes through the command-line interface, so each file is
exactly what the documented command would produce:

  sweep_moment4_K1_kappa{2,4,5,10,50,100}.csv   fourth-moment family at K=1
  sweep_pn_K{0,1,2}.csv                         phase-noise flash sweeps
  sweep_peak_K0.csv                             peak-power sweep
  kt_reference.json                             certified two-point reference
                                                case with its Kuhn-Tucker scan
  reference_distribution.txt                    the distribution that scan
                                                certifies

Uncertified rows are kept (flagged converged=false in the CSV); the figure
renderer draws them dashed.  Use --quick for a cut-down smoke run.
"""

import argparse
import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from rician_capacity.cli import main as cli_main
from rician_capacity.records import read_sweep_csv

KAPPAS = (2.0, 4.0, 5.0, 10.0, 50.0, 100.0)
PN_KS = (0.0, 1.0, 2.0)


def _grid_str(lo, hi, n):
    return ",".join(f"{a:.12g}" for a in np.geomspace(lo, hi, n))


def _run(argv):
    print("$ rician-capacity " + " ".join(argv))
    rc = cli_main(argv)
    if rc not in (0, 3):
        raise SystemExit(f"command failed with exit code {rc}: {argv}")
    return rc


def _report(path):
    rows = read_sweep_csv(path)
    good = sum(r.converged for r in rows)
    print(f"  {path}: {len(rows)} rows, {good} certified")
    return len(rows), good


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="data")
    ap.add_argument("--quick", action="store_true",
                    help="3-point grids and two kappa values only")
    args = ap.parse_args(argv)
    os.makedirs(args.out_dir, exist_ok=True)

    n_grid = 3 if args.quick else 10
    kappas = KAPPAS[:2] if args.quick else KAPPAS
    grid = _grid_str(1e-3, 1e-1, n_grid)
    written = []

    for kappa in kappas:
        path = os.path.join(args.out_dir, f"sweep_moment4_K1_kappa{kappa:g}.csv")
        _run(["sweep", "--model", "rician", "--constraint", "moment4",
              "--K", "1", "--kappa", f"{kappa:g}", "--snr-grid", grid,
              "--out", path])
        written.append(path)

    pn_grid = _grid_str(1e-3, 1e-1, 3 if args.quick else 8)
    for K in PN_KS:
        path = os.path.join(args.out_dir, f"sweep_pn_K{K:g}.csv")
        _run(["sweep", "--model", "rician-pn", "--constraint", "avg-power",
              "--K", f"{K:g}", "--snr-grid", pn_grid, "--out", path])
        written.append(path)

    peak_path = os.path.join(args.out_dir, "sweep_peak_K0.csv")
    _run(["sweep", "--model", "rician", "--constraint", "peak", "--K", "0",
          "--snr-grid", "0.01,0.02,0.05,0.1,0.2", "--out", peak_path])
    written.append(peak_path)

    # Reference case: solve it, write the distribution file, certify with the
    # scan curve embedded so the kt-curve figure has something to draw.
    sol_path = os.path.join(args.out_dir, "reference_solution.json")
    _run(["solve", "--model", "rician", "--constraint", "moment4", "--K", "1",
          "--snr", "0.05", "--kappa", "10", "--out", sol_path])
    with open(sol_path) as fh:
        sol = json.load(fh)
    dist = sol["distribution"]
    dist_path = os.path.join(args.out_dir, "reference_distribution.txt")
    with open(dist_path, "w") as fh:
        for loc, p in zip(dist["locations"], dist["probabilities"]):
            fh.write(f"{loc!r} {p!r}\n")
    kt_path = os.path.join(args.out_dir, "kt_reference.json")
    _run(["kt-check", "--model", "rician", "--constraint", "moment4",
          "--K", "1", "--snr", "0.05", "--kappa", "10", "--curve",
          "--out", kt_path, dist_path])

    print("\nwritten:")
    total = cert = 0
    for path in written:
        n, good = _report(path)
        total += n
        cert += good
    print(f"  {sol_path}")
    print(f"  {dist_path}")
    print(f"  {kt_path}")
    print(f"\n{cert}/{total} sweep rows certified")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
