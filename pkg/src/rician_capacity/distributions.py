"""Finite discrete amplitude distributions and their plain-text file format."""

from dataclasses import dataclass

import numpy as np

PROB_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class AmplitudeDistribution:
    """Finitely many amplitude mass points (r_i, p_i).

    Locations are nonnegative and strictly increasing, probabilities are
    strictly positive and sum to one within 1e-12.  Instances are immutable;
    the arrays are stored read-only.
    """

    locations: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        r = np.array(self.locations, dtype=float)
        p = np.array(self.probabilities, dtype=float)
        if r.ndim != 1 or p.ndim != 1 or r.size != p.size or r.size == 0:
            raise ValueError("locations and probabilities must be equal-length 1d sequences")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(p))):
            raise ValueError("locations and probabilities must be finite")
        if np.any(r < 0):
            raise ValueError("locations must be nonnegative")
        if np.any(np.diff(r) <= 0):
            raise ValueError("locations must be strictly increasing")
        if np.any(p <= 0):
            raise ValueError("probabilities must be strictly positive")
        if abs(p.sum() - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, expected 1 within {PROB_SUM_TOL}")
        r.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "locations", r)
        object.__setattr__(self, "probabilities", p)

    @property
    def n_points(self):
        return int(self.locations.size)

    @property
    def points(self):
        return list(zip(self.locations.tolist(), self.probabilities.tolist()))

    def second_moment(self):
        return float(self.probabilities @ self.locations**2)

    def fourth_moment(self):
        return float(self.probabilities @ self.locations**4)

    def max_location(self):
        return float(self.locations[-1])

    def to_dict(self):
        return {
            "locations": self.locations.tolist(),
            "probabilities": self.probabilities.tolist(),
        }

    @classmethod
    def from_pairs(cls, pairs):
        pairs = sorted(pairs)
        return cls(np.array([r for r, _ in pairs]), np.array([p for _, p in pairs]))

    def to_text(self, path):
        """Write as one 'location probability' pair per line."""
        with open(path, "w") as fh:
            fh.write("# amplitude distribution: location probability\n")
            for r, p in zip(self.locations, self.probabilities):
                fh.write(f"{float(r)!r} {float(p)!r}\n")

    @classmethod
    def from_text(cls, path):
        """Parse the plain-text format; '#' starts a comment, blank lines ignored."""
        pairs = []
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                fields = line.split()
                if len(fields) != 2:
                    raise ValueError(f"{path}:{lineno}: expected 'location probability', got {raw!r}")
                try:
                    pairs.append((float(fields[0]), float(fields[1])))
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from exc
        if not pairs:
            raise ValueError(f"{path}: no mass points found")
        return cls.from_pairs(pairs)
