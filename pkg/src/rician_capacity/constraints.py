"""Input power constraint sets in normalized SNR units.

alpha is the normalized SNR gamma^2 P_av / N0; all constraints act on the
normalized amplitude r.  Moment4 bounds the second and fourth moments
(E r^2 <= alpha, E r^4 <= kappa alpha^2, a kurtosis-style peakedness limit
with 1 < kappa < inf), Peak bounds the amplitude itself (r <= sqrt(alpha)),
AveragePower bounds the second moment alone.
"""

from dataclasses import dataclass

import numpy as np


class InfeasibleError(ValueError):
    """A candidate distribution or location set violates its constraint set."""

    def __init__(self, message, constraint=None):
        super().__init__(message)
        self.constraint = constraint


def _check_alpha(alpha):
    a = float(alpha)
    if not np.isfinite(a) or a <= 0:
        raise ValueError(f"alpha must be finite and > 0, got {alpha}")
    return a


@dataclass(frozen=True)
class Moment4:
    alpha: float
    kappa: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", _check_alpha(self.alpha))
        k = float(self.kappa)
        if not np.isfinite(k) or k <= 1:
            raise ValueError(f"kappa must be finite and > 1, got {self.kappa}")
        object.__setattr__(self, "kappa", k)


@dataclass(frozen=True)
class Peak:
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", _check_alpha(self.alpha))


@dataclass(frozen=True)
class AveragePower:
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", _check_alpha(self.alpha))


def constraint_name(constraints):
    if isinstance(constraints, Moment4):
        return "moment4"
    if isinstance(constraints, Peak):
        return "peak"
    if isinstance(constraints, AveragePower):
        return "avg-power"
    raise TypeError(f"unknown constraint set {constraints!r}")


def feasibility_slacks(constraints, dist):
    """Slack of each scalar constraint at dist; nonnegative means satisfied.

    Slacks are reported relative to the constraint scale so a single
    tolerance applies across regimes.
    """
    if isinstance(constraints, Moment4):
        a, k = constraints.alpha, constraints.kappa
        return {
            "power": (a - dist.second_moment()) / a,
            "fourth_moment": (k * a * a - dist.fourth_moment()) / (k * a * a),
        }
    if isinstance(constraints, Peak):
        root = np.sqrt(constraints.alpha)
        return {"peak": (root - dist.max_location()) / root}
    if isinstance(constraints, AveragePower):
        a = constraints.alpha
        return {"power": (a - dist.second_moment()) / a}
    raise TypeError(f"unknown constraint set {constraints!r}")


def is_feasible(constraints, dist, tol=1e-10):
    return all(slack >= -tol for slack in feasibility_slacks(constraints, dist).values())


def check_feasible(constraints, dist, tol=1e-10):
    for name, slack in feasibility_slacks(constraints, dist).items():
        if slack < -tol:
            raise InfeasibleError(
                f"distribution violates the {name} constraint (relative slack {slack:.3e})",
                constraint=name,
            )


def scan_r_hi(constraints, dist):
    """Upper end of the amplitude grid a Kuhn-Tucker scan must cover.

    For the unbounded regimes the scan must reach well past both the
    candidate support and the flash-signaling region where a profitable
    extra mass point could hide at low SNR, not just past the candidate's
    own largest location.
    """
    if isinstance(constraints, Peak):
        return float(np.sqrt(constraints.alpha))
    return max(3.0 * dist.max_location(), 3.0 * float(np.sqrt(constraints.alpha)), 8.0)


def location_upper_bound(constraints):
    """Hard upper bound on mass locations, or None when unbounded."""
    if isinstance(constraints, Peak):
        return float(np.sqrt(constraints.alpha))
    return None
