"""Adaptive Gauss-Legendre panel quadrature for semi-infinite densities.

Integrals over the output power R live on [0, inf) but every integrand here
decays at least exponentially, so they are truncated at a radius carrying
less than a prescribed tail mass and then integrated with recursively
bisected 15-point Gauss-Legendre panels.  Integrands may be vector valued;
a panel is accepted only when every component passes, which lets one grid
serve a whole family of kernels simultaneously.
"""

from dataclasses import dataclass

import numpy as np

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)


@dataclass(frozen=True)
class QuadratureConfig:
    """Tail truncation and panel refinement tolerances."""

    r_tail_mass_tol: float = 1e-16
    panel_rel_tol: float = 1e-10
    max_panels: int = 4096

    def __post_init__(self):
        if not (self.r_tail_mass_tol > 0 and self.panel_rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_panels < 16:
            raise ValueError("max_panels must be at least 16")


class QuadratureError(RuntimeError):
    """Raised when panel refinement cannot reach the requested tolerance."""

    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


def truncation_radius(r_max, K, tail_tol):
    """Upper limit R_max beyond which every kernel with r <= r_max holds
    less than tail_tol mass.

    With T = -ln(tail_tol), the widest kernel (scale 1 + r_max^2,
    noncentrality K r_max^2) is dominated by

        R_max = (1 + r_max^2) (T + K r_max^2 / (1 + r_max^2) + 2 sqrt(K T)).
    """
    if tail_tol <= 0 or tail_tol >= 1:
        raise ValueError("tail_tol must be in (0, 1)")
    s = float(r_max) ** 2
    T = -np.log(tail_tol)
    return (1.0 + s) * (T + K * s / (1.0 + s) + 2.0 * np.sqrt(K * T))


def _panel_eval(f, a, b):
    x = 0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)
    w = 0.5 * (b - a) * _GL_WEIGHTS
    vals = np.atleast_2d(np.asarray(f(x), dtype=float))
    return x, w, vals @ w


def _adaptive(f, breakpoints, cfg, abs_tol, collect_nodes):
    """Shared bisection engine.

    Returns (integral_vector, nodes, weights); nodes/weights are None unless
    collect_nodes.  abs_tol is the total error budget, distributed over
    panels in proportion to width.
    """
    pts = np.asarray(breakpoints, dtype=float)
    if pts.ndim != 1 or pts.size < 2 or np.any(np.diff(pts) <= 0):
        raise ValueError("breakpoints must be strictly increasing with >= 2 entries")
    total_width = pts[-1] - pts[0]
    stack = [(pts[i], pts[i + 1]) for i in range(pts.size - 1)][::-1]
    total = None
    panels = 0
    nodes, weights = [], []
    worst = 0.0
    while stack:
        a, b = stack.pop()
        panels += 1
        if panels > cfg.max_panels:
            raise QuadratureError(
                f"exceeded max_panels={cfg.max_panels} before reaching tolerance",
                error_estimate=worst,
            )
        if b - a <= 4.0 * np.finfo(float).eps * max(abs(a), abs(b), 1.0):
            # Panel narrower than a few ulp: its nodes would collapse onto
            # one double and its integral is below every tolerance in use.
            continue
        xc, wc, coarse = _panel_eval(f, a, b)
        m = 0.5 * (a + b)
        if not (a < m < b):
            # Sliver narrower than one bisection step: keep the single rule.
            worst = max(worst, 0.0)
            total = coarse if total is None else total + coarse
            if collect_nodes:
                nodes.append(xc)
                weights.append(wc)
            continue
        xl, wl, left = _panel_eval(f, a, m)
        xr, wr, right = _panel_eval(f, m, b)
        fine = left + right
        err = float(np.max(np.abs(fine - coarse)))
        budget = abs_tol * (b - a) / total_width
        if err <= budget or (b - a) <= 1e-14 * total_width:
            worst = max(worst, err)
            total = fine if total is None else total + fine
            if collect_nodes:
                nodes.append(xl)
                nodes.append(xr)
                weights.append(wl)
                weights.append(wr)
        else:
            stack.append((m, b))
            stack.append((a, m))
    if total is None:
        raise ValueError("every panel is narrower than roundoff; widen the breakpoints")
    if collect_nodes:
        x = np.concatenate(nodes)
        w = np.concatenate(weights)
        order = np.argsort(x)
        return total, x[order], w[order]
    return total, None, None


def integrate_adaptive(f, breakpoints, cfg, abs_tol=None):
    """Integrate a (possibly vector valued) integrand over the breakpoint span.

    f maps an array of abscissae to values of shape (n,) or (m, n).  Returns
    a float for scalar integrands, else an array of component integrals.
    """
    tol = cfg.panel_rel_tol if abs_tol is None else abs_tol
    total, _, _ = _adaptive(f, breakpoints, cfg, tol, collect_nodes=False)
    probe = np.atleast_1d(np.asarray(f(np.asarray([breakpoints[0]], dtype=float))))
    return total if probe.ndim > 1 else float(total[0])


def adaptive_nodes(f, breakpoints, cfg, abs_tol=None):
    """Build a reusable node/weight grid refined until every component of f
    integrates to panel tolerance.

    The returned nodes are the union of accepted half-panel Gauss-Legendre
    points, sorted ascending; any integrand as smooth as the components of f
    on the same scales integrates accurately on this grid.
    """
    tol = cfg.panel_rel_tol if abs_tol is None else abs_tol
    _, x, w = _adaptive(f, breakpoints, cfg, tol, collect_nodes=True)
    return x, w
