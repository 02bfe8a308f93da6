"""Flat-file records of capacity sweeps.

One CSV row per solved operating point.  Floats are written with repr so
scalars round-trip bit-exactly; list-valued fields (locations and
probabilities) are semicolon-joined after quantization to 12 significant
digits, and the quantization is applied at record construction so the
in-memory record and its file image agree exactly.
"""

import csv
import io
from dataclasses import dataclass, fields

SCHEMA_ID = "rician-capacity-sweep-v1"

_COLUMNS = (
    "snr_alpha", "model", "constraint", "rician_k", "kappa", "capacity_nats",
    "n_points", "locations", "probabilities", "lambda1", "lambda2",
    "kt_grid_min", "converged",
)
_FLOAT_FIELDS = {"snr_alpha", "rician_k", "capacity_nats", "kt_grid_min"}
_OPT_FLOAT_FIELDS = {"kappa", "lambda1", "lambda2"}
_LIST_FIELDS = {"locations", "probabilities"}


def quantize(x):
    """Round to 12 significant digits; idempotent by construction."""
    return float(f"{float(x):.12g}")


@dataclass(frozen=True)
class SweepRecord:
    """One operating point of a capacity sweep."""

    snr_alpha: float
    model: str
    constraint: str
    rician_k: float
    kappa: float | None
    capacity_nats: float
    n_points: int
    locations: tuple
    probabilities: tuple
    lambda1: float | None
    lambda2: float | None
    kt_grid_min: float
    converged: bool

    def __post_init__(self):
        object.__setattr__(self, "locations",
                           tuple(quantize(v) for v in self.locations))
        object.__setattr__(self, "probabilities",
                           tuple(quantize(v) for v in self.probabilities))
        if len(self.locations) != self.n_points or len(self.probabilities) != self.n_points:
            raise ValueError("locations/probabilities length must equal n_points")
        if self.model not in ("rician", "rician-pn"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.constraint not in ("moment4", "peak", "avg-power"):
            raise ValueError(f"unknown constraint {self.constraint!r}")

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _format_cell(name, value):
    if value is None:
        return ""
    if name in _LIST_FIELDS:
        return ";".join(repr(v) for v in value)
    if name == "converged":
        return "true" if value else "false"
    if name == "n_points" or name == "model" or name == "constraint":
        return str(value)
    return repr(float(value))


def _parse_cell(name, text):
    if name in _OPT_FLOAT_FIELDS and text == "":
        return None
    if name in _LIST_FIELDS:
        return tuple(float(v) for v in text.split(";")) if text else ()
    if name == "converged":
        if text not in ("true", "false"):
            raise ValueError(f"bad boolean {text!r} in column converged")
        return text == "true"
    if name == "n_points":
        return int(text)
    if name in ("model", "constraint"):
        return text
    return float(text)


def dump_sweep_csv(fh, records):
    """Write records to an open text stream under a schema comment line."""
    fh.write(f"# schema: {SCHEMA_ID}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(_COLUMNS)
    for rec in records:
        writer.writerow(_format_cell(c, getattr(rec, c)) for c in _COLUMNS)


def write_sweep_csv(path, records):
    """Write records under a schema-identifying comment line."""
    with open(path, "w", newline="") as fh:
        dump_sweep_csv(fh, records)


def read_sweep_csv(path):
    """Read records back; rejects files with a missing or foreign schema."""
    with open(path, "r", newline="") as fh:
        first = fh.readline()
        if not first.startswith("# schema:"):
            raise ValueError(f"{path}: missing schema line")
        schema = first.split(":", 1)[1].strip()
        if schema != SCHEMA_ID:
            raise ValueError(f"{path}: unsupported schema {schema!r}")
        reader = csv.reader(io.StringIO(fh.read()))
        header = next(reader)
        if tuple(header) != _COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        out = []
        for row in reader:
            kwargs = {c: _parse_cell(c, cell) for c, cell in zip(_COLUMNS, row)}
            out.append(SweepRecord(**kwargs))
    return out
