"""Kuhn-Tucker optimality functional, multiplier recovery, and certification.

A discrete amplitude distribution F with mutual information C is capacity
achieving if and only if the regime's Kuhn-Tucker functional is nonnegative
for every amplitude and zero at every mass point of F.  The functionals:

  moment4:    T(r) = J(r) + ln(1+r^2) + lambda1 (r^2 - alpha)
                     + lambda2 (r^4 - kappa alpha^2) + C + 1
  avg-power:  same with lambda2 = 0
  peak:       T(r) = J(r) + ln(1+r^2) + C + 1 on r in [0, sqrt(alpha)] only
  phase noise: T(r) = -D(g(., r) || f_R) + lambda (r^2 - alpha) + C

with J(r) = int g(R, r) ln f_R(R; F) dR and lambda1, lambda2, lambda >= 0.

Multipliers are recovered by least squares from the equality conditions.
At a two-point optimum with both moment constraints tight the equality rows
become collinear, so stationarity rows are appended: an interior mass point
is a local minimum of T, hence dT/ds = 0 there with s = r^2.  A grid scan
over [0, r_hi] plus residuals at the mass points then certify optimality.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .constraints import (AveragePower, Moment4, Peak, constraint_name,
                          feasibility_slacks, is_feasible, scan_r_hi)
from .density import check_grid, log_output_density, master_grid
from .kernels import ChannelModel, dlog_kernel_g_ds, log_kernel_g
from .quadrature import QuadratureError

SLACK_TOL = 1e-8
_CHUNK = 512


@dataclass
class KTReport:
    """Certification verdict for a candidate distribution.

    lambda1/lambda2 hold the recovered multipliers with unused entries 0
    (the single average-power or phase-noise multiplier sits in lambda1).
    mass_point_residuals are the functional's values at the candidate's mass
    points, which an optimum drives to zero.  The field is named `passed`
    because `pass` is reserved; serialized dictionaries expose it as "pass".
    """

    lambda1: float
    lambda2: float
    capacity_nats: float
    grid_min: float
    argmin_r: float
    mass_point_residuals: list
    passed: bool
    grid_spec: str

    def to_dict(self):
        return {
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "capacity_nats": self.capacity_nats,
            "grid_min": self.grid_min,
            "argmin_r": self.argmin_r,
            "mass_point_residuals": list(self.mass_point_residuals),
            "pass": self.passed,
            "grid_spec": self.grid_spec,
        }


class _KTContext:
    """Shared quadrature context: one node grid, ln f_R cached on it.

    J, dJ/ds, D, dD/ds are then chunked matrix products over probe
    amplitudes, each chunk re-verified against the kernel normalization and
    mean identities.
    """

    def __init__(self, F, K, q, probe_max):
        self.F = F
        self.K = K
        self.q = q
        scales = np.concatenate([F.locations, [probe_max]])
        self.x, self.w = master_grid(scales, K, q)
        self.lnf = log_output_density(self.x, F, K)
        self.wlnf = self.w * self.lnf

    def _rows(self, r_chunk):
        logG = log_kernel_g(self.x[None, :], r_chunk[:, None], self.K)
        G = np.exp(logG)
        check_grid(self.x, self.w, r_chunk, self.K)
        return logG, G

    def J(self, r_values, deriv=False):
        """J(r) = int g ln f; optionally also dJ/ds via the analytic kernel
        derivative."""
        r_values = np.atleast_1d(np.asarray(r_values, dtype=float))
        J = np.empty(r_values.size)
        dJ = np.empty(r_values.size) if deriv else None
        for lo in range(0, r_values.size, _CHUNK):
            rr = r_values[lo:lo + _CHUNK]
            _, G = self._rows(rr)
            J[lo:lo + _CHUNK] = G @ self.wlnf
            if deriv:
                Gd = G * dlog_kernel_g_ds(self.x[None, :], rr[:, None], self.K)
                dJ[lo:lo + _CHUNK] = Gd @ self.wlnf
        return (J, dJ) if deriv else J

    def D(self, r_values, deriv=False):
        """D(r) = int g (ln g - ln f); optionally dD/ds (the d/ds of the
        normalization vanishes, so only the integrand derivative remains)."""
        r_values = np.atleast_1d(np.asarray(r_values, dtype=float))
        D = np.empty(r_values.size)
        dD = np.empty(r_values.size) if deriv else None
        for lo in range(0, r_values.size, _CHUNK):
            rr = r_values[lo:lo + _CHUNK]
            logG, G = self._rows(rr)
            delta = logG - self.lnf[None, :]
            D[lo:lo + _CHUNK] = (G * delta) @ self.w
            if deriv:
                Gd = G * dlog_kernel_g_ds(self.x[None, :], rr[:, None], self.K)
                dD[lo:lo + _CHUNK] = (Gd * delta) @ self.w
        return (D, dD) if deriv else D


def _as_probe_array(r):
    arr = np.atleast_1d(np.asarray(r, dtype=float))
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError("amplitudes must be finite and nonnegative")
    return arr


def kt_lhs_moment4(r, F, K, alpha, kappa, lambda1, lambda2, C, q):
    """Moment-constrained Kuhn-Tucker functional at amplitude(s) r."""
    if lambda1 < 0 or lambda2 < 0:
        raise ValueError("multipliers must be nonnegative")
    rr = _as_probe_array(r)
    ctx = _KTContext(F, K, q, probe_max=max(rr.max(), F.max_location()))
    s = rr * rr
    out = (ctx.J(rr) + np.log1p(s) + lambda1 * (s - alpha)
           + lambda2 * (s * s - kappa * alpha * alpha) + C + 1.0)
    return out if np.ndim(r) else float(out[0])


def kt_lhs_peak(r, F, K, C, q, alpha=None):
    """Peak-constrained functional; defined on [0, sqrt(alpha)] only.

    Passing alpha enforces the domain; omit it only when the caller has
    already restricted r.
    """
    rr = _as_probe_array(r)
    if alpha is not None and np.any(rr * rr > alpha * (1.0 + 1e-12)):
        raise ValueError(f"peak functional is only defined for r <= sqrt(alpha)={np.sqrt(alpha)}")
    ctx = _KTContext(F, K, q, probe_max=max(rr.max(), F.max_location()))
    out = ctx.J(rr) + np.log1p(rr * rr) + C + 1.0
    return out if np.ndim(r) else float(out[0])


def kt_lhs_pn(r, F, K, alpha, lam, C, q):
    """Phase-noise functional -D(g(., r)||f_R) + lambda (r^2 - alpha) + C."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    rr = _as_probe_array(r)
    ctx = _KTContext(F, K, q, probe_max=max(rr.max(), F.max_location()))
    out = -ctx.D(rr) + lam * (rr * rr - alpha) + C
    return out if np.ndim(r) else float(out[0])


def _bounded_lstsq(A, b, ineq_A=None, ineq_b=None):
    """Least squares min ||A x - b|| with x >= 0 and optional ineq_A x >= ineq_b.

    The unknown count here is at most 2, so candidate active sets are
    enumerated exactly: each subset of unknowns is pinned to zero, the rest
    solved by least squares, and infeasible candidates discarded.  Among the
    feasible candidates the smallest residual wins (ties: fewer free
    unknowns, then enumeration order), which realizes clamped-to-zero
    complementary slackness deterministically.
    """
    n = A.shape[1]
    best = None
    for free_count in range(n, -1, -1):
        for free in itertools.combinations(range(n), free_count):
            x = np.zeros(n)
            if free:
                sol, *_ = np.linalg.lstsq(A[:, list(free)], b, rcond=None)
                x[list(free)] = sol
            if np.any(x < -1e-12):
                continue
            x = np.maximum(x, 0.0)
            if ineq_A is not None and ineq_A.size:
                if np.any(ineq_A @ x < ineq_b - 1e-9):
                    continue
            resid = float(np.linalg.norm(A @ x - b))
            if best is None or resid < best[0] - 1e-15:
                best = (resid, x)
    if best is None:
        # No candidate satisfies the probe inequalities; fall back to the
        # nonnegative fit alone so the verdict surfaces through residuals.
        return _bounded_lstsq(A, b)
    return best[1]


def estimate_multipliers(F, channel, constraints, C, q):
    """Recover the regime's Lagrange multipliers from the equality conditions.

    Returns (lambda1, lambda2) for Moment4, a single float for AveragePower
    and the phase-noise channel, and None for Peak where no multipliers
    appear.  Slack constraints get multiplier zero (complementary
    slackness); mass points with r > 0 contribute stationarity rows in
    addition to their equality rows, which keeps the system well posed when
    the equality rows are collinear.
    """
    if isinstance(constraints, Peak):
        return None
    K = channel.rician_k
    alpha = constraints.alpha
    s = F.locations**2
    interior = F.locations > 0
    slacks = feasibility_slacks(constraints, F)

    if channel.model is ChannelModel.PHASE_NOISE:
        if not isinstance(constraints, AveragePower):
            raise ValueError("the phase-noise channel supports only the average-power constraint")
        ctx = _KTContext(F, K, q, probe_max=2.0 * F.max_location() if F.max_location() > 0 else 1.0)
        D, dD = ctx.D(F.locations, deriv=True)
        rows = [((s - alpha)[:, None], D - C)]
        if interior.any():
            rows.append((np.ones(interior.sum())[:, None], dD[interior]))
        A = np.vstack([r[0] for r in rows])
        b = np.concatenate([r[1] for r in rows])
        if slacks["power"] > SLACK_TOL:
            return 0.0
        return float(_bounded_lstsq(A, b)[0])

    probe_max = 2.0 * F.max_location() if F.max_location() > 0 else 2.0 * np.sqrt(alpha)
    ctx = _KTContext(F, K, q, probe_max=probe_max)
    J, dJ = ctx.J(F.locations, deriv=True)
    # Equality rows: T(r_i) = 0.  Stationarity rows: dT/ds = 0 at interior
    # mass points.
    eq_rhs = -(J + np.log1p(s) + C + 1.0)
    st_rhs = -(dJ[interior] + 1.0 / (1.0 + s[interior]))

    if isinstance(constraints, AveragePower):
        if slacks["power"] > SLACK_TOL:
            return 0.0
        A = np.concatenate([s - alpha, np.ones(interior.sum())])[:, None]
        b = np.concatenate([eq_rhs, st_rhs])
        return float(_bounded_lstsq(A, b)[0])

    # Moment4: columns (lambda1, lambda2), masked by complementary slackness.
    kappa = constraints.kappa
    eq_A = np.column_stack([s - alpha, s * s - kappa * alpha * alpha])
    st_A = np.column_stack([np.ones(interior.sum()), 2.0 * s[interior]])
    A = np.vstack([eq_A, st_A])
    b = np.concatenate([eq_rhs, st_rhs])
    active = np.array([slacks["power"] <= SLACK_TOL, slacks["fourth_moment"] <= SLACK_TOL])
    lam = np.zeros(2)
    if active.any():
        Aact = A[:, active]
        if A.shape[0] < int(active.sum()):
            # Underdetermined: append probe amplitudes as one-sided checks.
            probes = np.array([p for p in (0.0, probe_max) if p not in F.locations])
            Jp = ctx.J(probes)
            sp = probes**2
            probe_A = np.column_stack([sp - alpha, sp * sp - kappa * alpha * alpha])[:, active]
            probe_b = -(Jp + np.log1p(sp) + C + 1.0)
            lam[active] = _bounded_lstsq(Aact, b, ineq_A=probe_A, ineq_b=probe_b)
        else:
            lam[active] = _bounded_lstsq(Aact, b)
    return float(lam[0]), float(lam[1])


def _scan_grid(constraints, F, explicit):
    if explicit is not None:
        grid = np.unique(np.concatenate([np.asarray(explicit, dtype=float), F.locations]))
        return grid, f"caller grid, {grid.size} points on [0, {grid.max():.6g}]"
    r_hi = scan_r_hi(constraints, F)
    lin = np.linspace(0.0, r_hi, 1000)
    log = np.geomspace(max(r_hi * 1e-4, 1e-9), r_hi, 1000)
    grid = np.unique(np.concatenate([[0.0], lin, log, F.locations]))
    spec = f"{grid.size} log+linear points on [0, {r_hi:.6g}], refined x2 near minimum"
    return grid, spec


def verify(F, channel, constraints, C, q, grid=None, kt_tol=1e-3, return_curve=False):
    """Scan the Kuhn-Tucker functional and assemble the certificate.

    The verdict requires feasibility, grid minimum >= -kt_tol, mass-point
    residuals within kt_tol, and nonnegative multipliers.  The scan grid is
    refined around its minimum by inserting midpoints twice, guarding
    against dips between nodes.
    """
    K = channel.rician_k
    feasible = is_feasible(constraints, F)
    mult = estimate_multipliers(F, channel, constraints, C, q)
    lam1, lam2 = 0.0, 0.0
    if isinstance(constraints, Moment4):
        lam1, lam2 = mult
    elif mult is not None:
        lam1 = float(mult)

    rgrid, spec = _scan_grid(constraints, F, grid)
    alpha = constraints.alpha
    bounded = grid is not None or isinstance(constraints, Peak)

    def lhs_of(ctx, rr, ss):
        if channel.model is ChannelModel.PHASE_NOISE:
            return -ctx.D(rr) + lam1 * (ss - alpha) + C
        base = ctx.J(rr) + np.log1p(ss) + C + 1.0
        if isinstance(constraints, Moment4):
            return base + lam1 * (ss - alpha) + lam2 * (ss * ss - constraints.kappa * alpha * alpha)
        if isinstance(constraints, AveragePower):
            return base + lam1 * (ss - alpha)
        return base

    # In the unbounded regimes a seemingly clean curve whose minimum rides
    # the right edge may just be heading toward a violation further out, so
    # the scan doubles its range until the minimum detaches from the edge.
    extensions = 0
    while True:
        ctx = _KTContext(F, K, q, probe_max=rgrid.max())
        lhs = lhs_of(ctx, rgrid, rgrid * rgrid)
        for _ in range(2):
            i = int(np.argmin(lhs))
            lo, hi = max(i - 3, 0), min(i + 3, rgrid.size - 1)
            mids = 0.5 * (rgrid[lo:hi] + rgrid[lo + 1:hi + 1])
            extra = lhs_of(ctx, mids, mids * mids)
            rgrid = np.concatenate([rgrid, mids])
            lhs = np.concatenate([lhs, extra])
            order = np.argsort(rgrid)
            rgrid, lhs = rgrid[order], lhs[order]
        grid_min = float(lhs.min())
        argmin_r = float(rgrid[int(np.argmin(lhs))])
        edge_pinned = not bounded and argmin_r >= 0.9 * float(rgrid.max())
        if bounded or grid_min < -kt_tol or not edge_pinned or extensions >= 5:
            break
        extensions += 1
        r_hi = 2.0 * float(rgrid.max())
        lin = np.linspace(0.0, r_hi, 1000)
        logp = np.geomspace(max(r_hi * 1e-4, 1e-9), r_hi, 1000)
        rgrid = np.unique(np.concatenate([[0.0], lin, logp, F.locations]))
        spec = (f"{rgrid.size} log+linear points on [0, {r_hi:.6g}], "
                f"extended x{2 ** extensions}, refined x2 near minimum")

    mass_idx = np.searchsorted(rgrid, F.locations)
    residuals = [float(lhs[j]) for j in mass_idx]
    if edge_pinned and grid_min >= -kt_tol:
        spec += "; minimum pinned at scan edge"
    passed = bool(
        feasible
        and grid_min >= -kt_tol
        and max(abs(v) for v in residuals) <= kt_tol
        and lam1 >= 0.0
        and lam2 >= 0.0
        and not (edge_pinned and grid_min >= -kt_tol)
    )
    report = KTReport(
        lambda1=float(lam1),
        lambda2=float(lam2),
        capacity_nats=float(C),
        grid_min=grid_min,
        argmin_r=argmin_r,
        mass_point_residuals=residuals,
        passed=passed,
        grid_spec=spec + ("" if feasible else "; candidate infeasible"),
    )
    if return_curve:
        return report, (rgrid, lhs)
    return report
