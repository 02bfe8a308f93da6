"""Command-line front end.

Subcommands: solve (one operating point, JSON + summary), sweep (CSV over an
SNR grid with sequential warm starts), kt-check (certify a distribution file),
mc-check (Monte Carlo vs. quadrature consistency).  All SNRs are the
normalized alpha; capacities are stored in nats, and --bits rescales the
printed summary only.  Exit codes: 0 success/certified, 2 invalid input,
3 numerical non-convergence.
"""

import argparse
import io
import json
import sys
from dataclasses import dataclass

import numpy as np

from .constraints import (AveragePower, InfeasibleError, Moment4, Peak,
                          constraint_name)
from .density import mutual_information
from .distributions import AmplitudeDistribution
from .kernels import ChannelModel, ChannelSpec
from .kt import verify
from .mc import mc_mutual_information
from .optimize import SolverConfig, solve_capacity
from .quadrature import QuadratureConfig, QuadratureError
from .records import SCHEMA_ID, SweepRecord, dump_sweep_csv, write_sweep_csv

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NO_CONVERGENCE = 3

LN2 = float(np.log(2.0))


class CliError(Exception):
    """Invalid input; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """Validated bundle of everything the flags can set."""

    command: str
    model: str = "rician"
    constraint: str = "avg-power"
    rician_k: float = 0.0
    snr: float | None = None
    snr_grid: tuple = ()
    kappa: float | None = None
    seed: int = 0
    out: str | None = None
    format: str = "csv"
    kt_tol: float = 1e-3
    warm_start: bool = True
    bits: bool = False
    distribution: str | None = None
    samples: int = 200_000
    restarts: int = 16
    max_points: int = 8
    quad_tail_tol: float = 1e-16
    curve: bool = False

    _KNOWN = None  # populated below

    @classmethod
    def from_namespace(cls, ns):
        data = dict(vars(ns))
        unknown = set(data) - cls._KNOWN
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")
        if data.get("snr_grid") is not None:
            data["snr_grid"] = tuple(data["snr_grid"])
        data = {k: v for k, v in data.items() if v is not None or k in ("snr", "kappa", "out", "distribution")}
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self):
        if self.model not in ("rician", "rician-pn"):
            raise CliError(f"unknown model {self.model!r}")
        if self.constraint not in ("moment4", "peak", "avg-power"):
            raise CliError(f"unknown constraint {self.constraint!r}")
        if not (np.isfinite(self.rician_k) and self.rician_k >= 0):
            raise CliError("--K must be finite and >= 0")
        if self.snr is not None and not (np.isfinite(self.snr) and self.snr > 0):
            raise CliError("--snr must be positive")
        if self.snr_grid:
            grid = np.asarray(self.snr_grid, dtype=float)
            if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
                raise CliError("--snr-grid must be positive and strictly increasing")
        if self.constraint == "moment4":
            if self.kappa is None:
                raise CliError("--kappa is required for the moment4 constraint")
            if not (np.isfinite(self.kappa) and self.kappa > 1):
                raise CliError("--kappa must be > 1")
        if self.model == "rician-pn" and self.constraint != "avg-power":
            raise CliError("model rician-pn supports only --constraint avg-power")
        if self.format not in ("csv", "json"):
            raise CliError(f"unknown format {self.format!r}")
        if self.kt_tol <= 0:
            raise CliError("--kt-tol must be positive")
        if self.samples < 10_000 or self.samples % 100 != 0:
            raise CliError("--samples must be >= 10000 and a multiple of 100")
        if self.restarts < 1 or self.max_points < 1:
            raise CliError("--restarts and --max-points must be >= 1")
        if not (0 < self.quad_tail_tol < 1e-3):
            raise CliError("--quad-tail-tol must be in (0, 1e-3)")

    def channel(self):
        return ChannelSpec(model=ChannelModel(self.model), rician_k=self.rician_k)

    def constraints_for(self, alpha):
        if self.constraint == "moment4":
            return Moment4(alpha=alpha, kappa=self.kappa)
        if self.constraint == "peak":
            return Peak(alpha=alpha)
        return AveragePower(alpha=alpha)

    def quadrature(self):
        return QuadratureConfig(r_tail_mass_tol=self.quad_tail_tol)

    def solver(self):
        return SolverConfig(max_points=self.max_points, restarts=self.restarts,
                            seed=self.seed)


RunConfig._KNOWN = {
    "command", "model", "constraint", "rician_k", "snr", "snr_grid", "kappa",
    "seed", "out", "format", "kt_tol", "warm_start", "bits", "distribution",
    "samples", "restarts", "max_points", "quad_tail_tol", "curve",
}


def _json_dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(cfg, payload, summary_lines):
    """Summary to stdout; JSON to --out, or to stdout when no file is given
    (summary moves to stderr so stdout stays machine-readable)."""
    text = _json_dump(payload)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
        for line in summary_lines:
            print(line)
    else:
        for line in summary_lines:
            print(line, file=sys.stderr)
        sys.stdout.write(text)


def _nats_str(cfg, nats):
    if cfg.bits:
        return f"{nats / LN2:.6f} bits"
    return f"{nats:.6f} nats"


def _load_distribution(path):
    try:
        return AmplitudeDistribution.from_text(path)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot load distribution: {exc}") from exc


def _solution_summary(cfg, sol):
    F = sol.distribution
    lines = [
        f"model={cfg.model} constraint={cfg.constraint} K={cfg.rician_k} alpha={cfg.snr}",
        f"capacity: {_nats_str(cfg, sol.capacity_nats)}",
        f"mass points ({F.n_points}):",
    ]
    for r, p in F.points:
        lines.append(f"  r={r:.10g}  p={p:.10g}")
    lines.append(f"kt grid min: {sol.report.grid_min:.3e}  certified: {sol.converged}")
    return lines


def cmd_solve(cfg):
    channel = cfg.channel()
    constraints = cfg.constraints_for(cfg.snr)
    sol = solve_capacity(channel, constraints, cfg.solver(), cfg.quadrature(),
                         kt_tol=cfg.kt_tol)
    payload = sol.to_dict()
    payload["schema"] = "rician-capacity-solution-v1"
    _emit(cfg, payload, _solution_summary(cfg, sol))
    return EXIT_OK if sol.converged else EXIT_NO_CONVERGENCE


def _record_from(cfg, alpha, channel, constraints, sol):
    report = sol.report
    lam1 = report.lambda1
    lam2 = report.lambda2
    if cfg.constraint == "peak":
        lam1 = lam2 = None
    elif cfg.constraint == "avg-power":
        lam2 = None
    F = sol.distribution
    return SweepRecord(
        snr_alpha=alpha,
        model=cfg.model,
        constraint=constraint_name(constraints),
        rician_k=cfg.rician_k,
        kappa=cfg.kappa if cfg.constraint == "moment4" else None,
        capacity_nats=sol.capacity_nats,
        n_points=F.n_points,
        locations=tuple(float(v) for v in F.locations),
        probabilities=tuple(float(v) for v in F.probabilities),
        lambda1=lam1,
        lambda2=lam2,
        kt_grid_min=report.grid_min,
        converged=sol.converged,
    )


def cmd_sweep(cfg):
    if not cfg.snr_grid:
        raise CliError("--snr-grid is required for sweep")
    channel = cfg.channel()
    q = cfg.quadrature()
    records = []
    warm = None
    failure = None
    for alpha in cfg.snr_grid:
        constraints = cfg.constraints_for(alpha)
        try:
            sol = solve_capacity(channel, constraints, cfg.solver(), q,
                                 kt_tol=cfg.kt_tol, warm_start=warm)
        except (InfeasibleError, QuadratureError, FloatingPointError) as exc:
            failure = f"alpha={alpha}: {exc}"
            break
        records.append(_record_from(cfg, alpha, channel, constraints, sol))
        if cfg.warm_start:
            warm = sol.distribution
    if cfg.out:
        if cfg.format == "json":
            with open(cfg.out, "w") as fh:
                fh.write(_json_dump({"schema": SCHEMA_ID,
                                     "records": [r.to_dict() for r in records]}))
        else:
            write_sweep_csv(cfg.out, records)
        print(f"wrote {len(records)} of {len(cfg.snr_grid)} rows to {cfg.out}")
    else:
        if cfg.format == "json":
            sys.stdout.write(_json_dump({"schema": SCHEMA_ID,
                                         "records": [r.to_dict() for r in records]}))
        else:
            buf = io.StringIO()
            dump_sweep_csv(buf, records)
            sys.stdout.write(buf.getvalue())
    if failure is not None:
        print(f"sweep aborted: {failure}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_kt_check(cfg):
    if not cfg.distribution:
        raise CliError("kt-check requires a distribution file argument")
    F = _load_distribution(cfg.distribution)
    channel = cfg.channel()
    constraints = cfg.constraints_for(cfg.snr)
    q = cfg.quadrature()
    capacity = mutual_information(F, channel, q)
    curve = None
    if cfg.curve:
        report, curve = verify(F, channel, constraints, capacity, q,
                               kt_tol=cfg.kt_tol, return_curve=True)
    else:
        report = verify(F, channel, constraints, capacity, q, kt_tol=cfg.kt_tol)
    payload = report.to_dict()
    payload["schema"] = "rician-capacity-ktreport-v1"
    payload["locations"] = [float(v) for v in F.locations]
    payload["probabilities"] = [float(v) for v in F.probabilities]
    if curve is not None:
        payload["curve_r"] = [float(v) for v in curve[0]]
        payload["curve_lhs"] = [float(v) for v in curve[1]]
    summary = [
        f"mutual information: {_nats_str(cfg, capacity)}",
        f"kt grid min: {report.grid_min:.6e} at r={report.argmin_r:.6g}",
        f"mass point residual max: {max((abs(v) for v in report.mass_point_residuals), default=0.0):.3e}",
        f"certified: {report.passed}",
    ]
    _emit(cfg, payload, summary)
    return EXIT_OK if report.passed else EXIT_NO_CONVERGENCE


def cmd_mc_check(cfg):
    if not cfg.distribution:
        raise CliError("mc-check requires a distribution file argument")
    F = _load_distribution(cfg.distribution)
    channel = cfg.channel()
    q = cfg.quadrature()
    quad = mutual_information(F, channel, q)
    est = mc_mutual_information(F, channel, cfg.samples, cfg.seed, q)
    delta = abs(quad - est.value)
    ok = delta <= 3.0 * est.std_err or delta <= 1e-12
    payload = {
        "schema": "rician-capacity-mccheck-v1",
        "quadrature_nats": quad,
        "mc": est.to_dict(),
        "abs_difference": delta,
        "threshold": 3.0 * est.std_err,
        "pass": ok,
    }
    summary = [
        f"quadrature: {_nats_str(cfg, quad)}",
        f"monte carlo: {_nats_str(cfg, est.value)} (std err {est.std_err:.3e}, n={est.n_samples})",
        f"|difference| = {delta:.3e} vs 3*std_err = {3.0 * est.std_err:.3e}: "
        + ("OK" if ok else "MISMATCH"),
    ]
    _emit(cfg, payload, summary)
    return EXIT_OK if ok else EXIT_NO_CONVERGENCE


def _add_common(p, need_snr=True):
    p.add_argument("--model", default="rician", choices=["rician", "rician-pn"])
    p.add_argument("--constraint", default="avg-power",
                   choices=["moment4", "peak", "avg-power"])
    p.add_argument("--K", dest="rician_k", type=float, default=0.0,
                   help="Rician factor |m|^2/gamma^2")
    if need_snr:
        p.add_argument("--snr", type=float, default=None,
                       help="normalized SNR alpha")
    p.add_argument("--kappa", type=float, default=None,
                   help="fourth-moment ratio bound (moment4 only)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--kt-tol", dest="kt_tol", type=float, default=1e-3)
    p.add_argument("--bits", action="store_true",
                   help="print capacities in bits (files stay in nats)")
    p.add_argument("--quad-tail-tol", dest="quad_tail_tol", type=float,
                   default=1e-16, help="quadrature truncation tail mass")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rician-capacity",
        description="Capacity and optimal discrete amplitude distributions of "
                    "noncoherent Rician fading channels.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one operating point")
    _add_common(p)
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--max-points", dest="max_points", type=int, default=8)

    p = sub.add_parser("sweep", help="solve a grid of SNRs into a CSV")
    _add_common(p, need_snr=False)
    p.add_argument("--snr-grid", dest="snr_grid", type=_parse_grid, default=None,
                   help="comma-separated increasing alphas")
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.add_argument("--no-warm-start", dest="warm_start", action="store_false",
                   help="solve rows independently instead of warm-starting")
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--max-points", dest="max_points", type=int, default=8)

    p = sub.add_parser("kt-check", help="certify a distribution file")
    p.add_argument("distribution", help="text file of 'location probability' lines")
    p.add_argument("--curve", action="store_true",
                   help="embed the scanned kt curve in the JSON payload")
    _add_common(p)

    p = sub.add_parser("mc-check", help="Monte Carlo vs quadrature consistency")
    p.add_argument("distribution", help="text file of 'location probability' lines")
    _add_common(p)
    p.add_argument("--samples", type=int, default=200_000,
                   help="Monte Carlo samples (multiple of 100)")

    return parser


def _parse_grid(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid: {exc}")


_COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep,
             "kt-check": cmd_kt_check, "mc-check": cmd_mc_check}

_NEEDS_SNR = {"solve", "kt-check", "mc-check"}


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_namespace(ns)
        if cfg.command in _NEEDS_SNR and cfg.snr is None:
            raise CliError("--snr is required")
        return _COMMANDS[cfg.command](cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (InfeasibleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except QuadratureError as exc:
        print(f"quadrature failure: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
