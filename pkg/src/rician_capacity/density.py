"""Output density, entropy, mutual information, and conditional divergences.

The output power density under a discrete amplitude distribution F is the
finite mixture f_R(R) = sum_i p_i g(R, r_i).  All integrals over R are
semi-infinite and evaluated by truncated adaptive Gauss-Legendre panels; a
single adaptively built node grid can be reused across integrands that share
kernel scales, with normalization identities serving as accuracy checks.

Two mutual informations share this machinery.  The classical model carries
information on both amplitude and (uniform) phase,

    I(F) = h(R) - sum_i p_i ln(1 + r_i^2) - 1,

which is positive already for a single nonzero mass point when K > 0.  The
phase-noise model retains only the amplitude channel and its information is
an average divergence,

    I(F) = sum_i p_i D(g(., r_i) || f_R),

zero whenever F is a single point.  Both agree at K = 0.
"""

import numpy as np

from .kernels import ChannelModel, kernel_mean, log_kernel_g
from .quadrature import QuadratureError, adaptive_nodes, integrate_adaptive, truncation_radius

# Self-check tolerances for reused node grids.
NORM_TOL = 1e-8
MEAN_REL_TOL = 1e-6

_R_CHUNK = 512


def log_output_density(R, F, K):
    """ln f_R(R; F) by log-sum-exp over the mixture components.

    Finite for every finite R: the slowest component decays exponentially,
    never faster than exp(-R).  Broadcasts over an array of R.
    """
    R = np.asarray(R, dtype=float)
    terms = np.log(F.probabilities)[:, None] + log_kernel_g(
        R[None, :] if R.ndim else R, F.locations[:, None], K
    )
    m = terms.max(axis=0)
    out = m + np.log(np.exp(terms - m).sum(axis=0))
    return out if R.ndim else float(out[0])


def _breakpoints(r_values, K, R_max):
    """Panel seeds straddling every kernel's bulk so no bump is missed."""
    pts = {0.0, float(R_max)}
    for r in np.atleast_1d(r_values):
        mu = kernel_mean(r, K)
        for frac in (0.3, 1.0, 3.0):
            v = frac * mu
            if 0.0 < v < R_max:
                pts.add(float(v))
    v = 0.5
    while v < R_max:
        pts.add(v)
        v *= 4.0
    out = sorted(pts)
    # Coalesce near-coincident seeds; panels of a few ulp width are useless
    # and their midpoints can round onto an endpoint.
    kept = [out[0]]
    for v in out[1:]:
        if v - kept[-1] > 1e-9 * (1.0 + abs(v)):
            kept.append(v)
    kept[-1] = out[-1]
    return np.array(kept)


def _grid_scales(r_values):
    r_all = np.unique(np.asarray(r_values, dtype=float).ravel())
    if r_all.size > 24:
        # Thin to a representative subset; geometric coverage is what matters.
        idx = np.unique(np.linspace(0, r_all.size - 1, 24).round().astype(int))
        r_all = np.unique(np.concatenate([r_all[idx], [r_all.max()]]))
    return r_all


def master_grid(r_values, K, q):
    """Reusable node/weight grid resolving every kernel scale in r_values.

    Built by adaptive refinement against the component normalization
    integrands; validated afterwards with check_grid before trusting it for
    other integrands on the same scales.
    """
    r_all = _grid_scales(r_values)
    R_max = truncation_radius(r_all.max(), K, q.r_tail_mass_tol)

    def components(R):
        return np.exp(log_kernel_g(R[None, :], r_all[:, None], K))

    x, w = adaptive_nodes(components, _breakpoints(r_all, K, R_max), q)
    return x, w


def check_grid(x, w, r_values, K, norm_tol=NORM_TOL, mean_rel_tol=MEAN_REL_TOL):
    """Verify the grid integrates each kernel to mass 1 and the exact mean.

    Returns (worst_norm_err, worst_mean_rel_err); raises QuadratureError when
    either identity fails, since every downstream integral would then be
    untrustworthy.
    """
    r_values = np.atleast_1d(np.asarray(r_values, dtype=float))
    worst_norm = 0.0
    worst_mean = 0.0
    wx = w * x
    for lo in range(0, r_values.size, _R_CHUNK):
        rr = r_values[lo:lo + _R_CHUNK]
        G = np.exp(log_kernel_g(x[None, :], rr[:, None], K))
        norm_err = np.abs(G @ w - 1.0).max()
        means = kernel_mean(rr, K)
        mean_err = (np.abs(G @ wx - means) / means).max()
        worst_norm = max(worst_norm, float(norm_err))
        worst_mean = max(worst_mean, float(mean_err))
    if worst_norm > norm_tol or worst_mean > mean_rel_tol:
        raise QuadratureError(
            f"grid self-check failed: normalization error {worst_norm:.2e} "
            f"(tol {norm_tol:.0e}), mean relative error {worst_mean:.2e} "
            f"(tol {mean_rel_tol:.0e})",
            error_estimate=max(worst_norm, worst_mean),
        )
    return worst_norm, worst_mean


def output_entropy(F, K, q):
    """Differential entropy h(R) = -int f_R ln f_R dR in nats.

    The adaptive refinement tracks each mixture component's normalization
    alongside the entropy integrand, so the returned value comes with the
    built-in check that every kernel integrates to 1 within 1e-8.
    """
    r_all = F.locations
    R_max = truncation_radius(r_all.max(), K, q.r_tail_mass_tol)
    logp = np.log(F.probabilities)

    def components(R):
        logG = log_kernel_g(R[None, :], r_all[:, None], K)
        m = (logp[:, None] + logG).max(axis=0)
        lf = m + np.log(np.exp(logp[:, None] + logG - m).sum(axis=0))
        ent = -np.exp(lf) * lf
        return np.vstack([np.exp(logG), ent[None, :]])

    vals = integrate_adaptive(components, _breakpoints(r_all, K, R_max), q)
    norms, h = vals[:-1], float(vals[-1])
    if np.abs(norms - 1.0).max() > NORM_TOL:
        raise QuadratureError(
            f"entropy quadrature self-check failed: kernel normalization off by "
            f"{np.abs(norms - 1.0).max():.2e}",
            error_estimate=float(np.abs(norms - 1.0).max()),
        )
    return h


def mutual_information_classical(F, K, q):
    """I(F) = h(R) - sum_i p_i ln(1 + r_i^2) - 1 in nats."""
    return output_entropy(F, K, q) - float(
        F.probabilities @ np.log1p(F.locations**2)
    ) - 1.0


def divergence_pn(r, F, K, q):
    """D(g(., r) || f_R(., F)) in nats, the phase-noise channel's per-amplitude
    information density."""
    r = float(r)
    r_all = np.unique(np.concatenate([F.locations, [r]]))
    R_max = truncation_radius(r_all.max(), K, q.r_tail_mass_tol)
    logp = np.log(F.probabilities)

    def components(R):
        logG_F = log_kernel_g(R[None, :], F.locations[:, None], K)
        m = (logp[:, None] + logG_F).max(axis=0)
        lf = m + np.log(np.exp(logp[:, None] + logG_F - m).sum(axis=0))
        lg = log_kernel_g(R, r, K)
        g = np.exp(lg)
        return np.vstack([g[None, :], (g * (lg - lf))[None, :]])

    vals = integrate_adaptive(components, _breakpoints(r_all, K, R_max), q)
    norm, div = float(vals[0]), float(vals[1])
    if abs(norm - 1.0) > NORM_TOL:
        raise QuadratureError(
            f"divergence quadrature self-check failed: normalization off by {abs(norm - 1.0):.2e}",
            error_estimate=abs(norm - 1.0),
        )
    return div


def mutual_information_pn(F, K, q):
    """I(F) = sum_i p_i D(g(., r_i) || f_R) in nats; zero for one mass point."""
    if F.n_points == 1:
        return 0.0
    return float(sum(
        p * divergence_pn(r, F, K, q)
        for r, p in zip(F.locations, F.probabilities)
    ))


def mutual_information(F, channel, q):
    """Mutual information of F under the given channel, in nats."""
    if channel.model is ChannelModel.CLASSICAL:
        return mutual_information_classical(F, channel.rician_k, q)
    return mutual_information_pn(F, channel.rician_k, q)
