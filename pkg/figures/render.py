#!/usr/bin/env python3
"""Render figures from capacity-sweep CSVs and kt-check JSON reports.

This is a standalone consumer of the solver's file formats; it does not
import the solver package.  Accepted inputs are sweep CSVs carrying the
schema line ``# schema: rician-capacity-sweep-v1`` and kt-check JSON
payloads with ``"schema": "rician-capacity-ktreport-v1"`` (produced with
--curve so the scan is embedded).

Figure types:
  capacity-vs-snr    capacity against normalized SNR, one series per
                     (K, kappa, constraint) group
  mass-location      largest mass-point location against SNR, remaining
                     locations as faint dots
  mass-probability   probability of the largest mass point against SNR
  kt-curve           the Kuhn-Tucker scan, with the support marked on the
                     zero line

Rows flagged converged=false are drawn dashed.  Series order, colors, and
styling are fixed: groups are sorted by (constraint, kappa, K) and colored
from a fixed cycle, so rerendering the same inputs gives the same figure.
"""

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

SWEEP_SCHEMA = "rician-capacity-sweep-v1"
KT_SCHEMA = "rician-capacity-ktreport-v1"

SWEEP_COLUMNS = (
    "snr_alpha", "model", "constraint", "rician_k", "kappa", "capacity_nats",
    "n_points", "locations", "probabilities", "lambda1", "lambda2",
    "kt_grid_min", "converged",
)

FIGURE_IDS = ("kt-curve", "mass-location", "mass-probability", "capacity-vs-snr")

DEFAULT_SCALES = {
    "capacity-vs-snr": ("log", "log"),
    "mass-location": ("log", "linear"),
    "mass-probability": ("log", "log"),
    "kt-curve": ("linear", "linear"),
}

COLORS = plt.get_cmap("tab10").colors

AXIS_LABELS = {
    "capacity-vs-snr": ("normalized SNR", "capacity [nats]"),
    "mass-location": ("normalized SNR", "mass-point location"),
    "mass-probability": ("normalized SNR", "mass-point probability"),
    "kt-curve": ("input amplitude r", "kt functional"),
}


class InputError(Exception):
    """Bad input file or spec; maps to exit code 2."""


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    inputs: tuple
    out: str
    x_scale: str = ""
    y_scale: str = ""

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise InputError(f"unknown figure_id {self.figure_id!r}; "
                             f"expected one of {', '.join(FIGURE_IDS)}")
        if not self.inputs:
            raise InputError("at least one input file is required")
        if not self.out:
            raise InputError("output image path is required")
        for scale in (self.x_scale, self.y_scale):
            if scale not in ("", "log", "linear"):
                raise InputError(f"axis scale must be 'log' or 'linear', got {scale!r}")

    def scales(self):
        dx, dy = DEFAULT_SCALES[self.figure_id]
        return self.x_scale or dx, self.y_scale or dy


@dataclass
class Series:
    """One plotted line: group label, points, and per-row certification."""

    label: str
    x: list
    y: list
    converged: list
    extra_x: list = field(default_factory=list)
    extra_y: list = field(default_factory=list)

    def segment_styles(self):
        """'solid' or 'dashed' per consecutive point pair; a segment is
        dashed unless both of its endpoints are certified."""
        return ["solid" if a and b else "dashed"
                for a, b in zip(self.converged, self.converged[1:])]


@dataclass(frozen=True)
class RenderResult:
    series: tuple
    x_scale: str
    y_scale: str
    xlim: tuple
    ylim: tuple
    out: str


def _parse_bool(text, path):
    if text not in ("true", "false"):
        raise InputError(f"{path}: bad boolean {text!r} in column converged")
    return text == "true"


def read_sweep(path):
    """Parse one sweep CSV into a list of row dicts; reject foreign files."""
    with open(path, "r", newline="") as fh:
        first = fh.readline()
        if not first.startswith("# schema:"):
            raise InputError(f"{path}: missing schema line")
        schema = first.split(":", 1)[1].strip()
        if schema != SWEEP_SCHEMA:
            raise InputError(f"{path}: unsupported schema {schema!r}")
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != SWEEP_COLUMNS:
            raise InputError(f"{path}: unexpected header {list(header)}")
        rows = []
        for raw in reader:
            if len(raw) != len(SWEEP_COLUMNS):
                raise InputError(f"{path}: row has {len(raw)} cells, "
                                 f"expected {len(SWEEP_COLUMNS)}")
            cell = dict(zip(SWEEP_COLUMNS, raw))
            rows.append({
                "snr_alpha": float(cell["snr_alpha"]),
                "constraint": cell["constraint"],
                "rician_k": float(cell["rician_k"]),
                "kappa": float(cell["kappa"]) if cell["kappa"] else None,
                "capacity_nats": float(cell["capacity_nats"]),
                "locations": [float(v) for v in cell["locations"].split(";")],
                "probabilities": [float(v) for v in cell["probabilities"].split(";")],
                "converged": _parse_bool(cell["converged"], path),
            })
    if not rows:
        raise InputError(f"{path}: no data rows")
    return rows


def read_ktreport(path):
    """Parse one kt-check JSON payload; the scan curve must be embedded."""
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: not valid JSON ({exc})") from exc
    if payload.get("schema") != KT_SCHEMA:
        raise InputError(f"{path}: unsupported schema {payload.get('schema')!r}")
    if not payload.get("curve_r") or not payload.get("curve_lhs"):
        raise InputError(f"{path}: no scan curve embedded; "
                         "rerun kt-check with --curve")
    return payload


def _group_key(row):
    kappa = row["kappa"] if row["kappa"] is not None else -1.0
    return (row["constraint"], kappa, row["rician_k"])


def _group_label(key):
    constraint, kappa, K = key
    label = f"{constraint}, K={K:g}"
    if kappa >= 0:
        label += f", kappa={kappa:g}"
    return label


def _sweep_series(spec):
    rows = []
    for path in spec.inputs:
        rows.extend(read_sweep(path))
    groups = {}
    for row in rows:
        groups.setdefault(_group_key(row), []).append(row)
    out = []
    for key in sorted(groups):
        rws = sorted(groups[key], key=lambda r: r["snr_alpha"])
        x = [r["snr_alpha"] for r in rws]
        conv = [r["converged"] for r in rws]
        extra_x, extra_y = [], []
        if spec.figure_id == "capacity-vs-snr":
            y = [r["capacity_nats"] for r in rws]
        else:
            idx = [max(range(len(r["locations"])), key=r["locations"].__getitem__)
                   for r in rws]
            pick = "locations" if spec.figure_id == "mass-location" else "probabilities"
            y = [r[pick][i] for r, i in zip(rws, idx)]
            for r, i in zip(rws, idx):
                for j in range(len(r["locations"])):
                    if j != i:
                        extra_x.append(r["snr_alpha"])
                        extra_y.append(r[pick][j])
        out.append(Series(_group_label(key), x, y, conv, extra_x, extra_y))
    return out


def _kt_series(spec):
    out = []
    for path in spec.inputs:
        payload = read_ktreport(path)
        label = os.path.splitext(os.path.basename(path))[0]
        s = Series(label, [float(v) for v in payload["curve_r"]],
                   [float(v) for v in payload["curve_lhs"]],
                   [bool(payload["pass"])] * len(payload["curve_r"]))
        s.extra_x = [float(v) for v in payload.get("locations", [])]
        s.extra_y = [0.0] * len(s.extra_x)
        out.append(s)
    return out


def build_series(spec):
    """Pure data half of render(): inputs -> list of Series."""
    if spec.figure_id == "kt-curve":
        return _kt_series(spec)
    return _sweep_series(spec)


def render(spec):
    """Draw the figure and write it to spec.out.

    All input parsing happens before the output file is touched, so a bad
    or empty input never leaves a partial image behind.
    """
    series = build_series(spec)
    x_scale, y_scale = spec.scales()

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for i, s in enumerate(series):
        color = COLORS[i % len(COLORS)]
        styles = s.segment_styles()
        labeled = False
        for j, style in enumerate(styles):
            ax.plot(s.x[j:j + 2], s.y[j:j + 2], color=color,
                    linestyle="-" if style == "solid" else "--", linewidth=1.6,
                    label=s.label if not labeled else None)
            labeled = True
        if not styles:
            ax.plot(s.x, s.y, color=color, marker="o", linestyle="none",
                    label=s.label)
        if s.extra_x:
            marker = "o" if spec.figure_id == "kt-curve" else "."
            ax.plot(s.extra_x, s.extra_y, color=color, marker=marker,
                    linestyle="none", markersize=5 if marker == "o" else 3,
                    alpha=0.6)
    if spec.figure_id == "kt-curve":
        ax.axhline(0.0, color="0.5", linewidth=0.8)
    ax.set_xscale(x_scale)
    ax.set_yscale(y_scale)
    xlabel, ylabel = AXIS_LABELS[spec.figure_id]
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    if len(series) > 1 or spec.figure_id != "kt-curve":
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.out, dpi=150)
    result = RenderResult(tuple(series), ax.get_xscale(), ax.get_yscale(),
                          ax.get_xlim(), ax.get_ylim(), spec.out)
    plt.close(fig)
    return result


def spec_from_args(args):
    if args.spec:
        if args.figure_id or args.inputs or args.out:
            raise InputError("--spec cannot be combined with other flags")
        with open(args.spec) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InputError(f"{args.spec}: not valid JSON ({exc})") from exc
        unknown = set(raw) - {"figure_id", "inputs", "out", "x_scale", "y_scale"}
        if unknown:
            raise InputError(f"{args.spec}: unknown spec keys {sorted(unknown)}")
        try:
            return FigureSpec(figure_id=raw.get("figure_id", ""),
                              inputs=tuple(raw.get("inputs", ())),
                              out=raw.get("out", ""),
                              x_scale=raw.get("x_scale", ""),
                              y_scale=raw.get("y_scale", ""))
        except TypeError as exc:
            raise InputError(f"{args.spec}: bad spec ({exc})") from exc
    if not (args.figure_id and args.inputs and args.out):
        raise InputError("--figure-id, --input, and --out are required "
                         "(or pass --spec)")
    return FigureSpec(figure_id=args.figure_id, inputs=tuple(args.inputs),
                      out=args.out, x_scale=args.x_scale or "",
                      y_scale=args.y_scale or "")


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="render", description="render figures from sweep CSV / kt JSON")
    ap.add_argument("--spec", help="JSON file with figure_id/inputs/out/scales")
    ap.add_argument("--figure-id", choices=FIGURE_IDS, dest="figure_id")
    ap.add_argument("--input", action="append", dest="inputs", default=[],
                    metavar="FILE", help="input file; repeatable")
    ap.add_argument("--x-scale", choices=("log", "linear"), dest="x_scale")
    ap.add_argument("--y-scale", choices=("log", "linear"), dest="y_scale")
    ap.add_argument("--out", help="output image path (.png/.pdf/.svg)")
    args = ap.parse_args(argv)
    try:
        spec = spec_from_args(args)
        result = render(spec)
    except (InputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result.out}: {len(result.series)} series, "
          f"x={result.x_scale}, y={result.y_scale}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
