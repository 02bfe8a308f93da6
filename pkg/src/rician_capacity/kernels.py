"""Conditional output-density kernel of the noncoherent Rician channel.

Normalized coordinates are used throughout: R = |y|^2 / N0 is the output
power and r = (gamma / sqrt(N0)) |x| the input amplitude.  Conditioned on r,
the output power R is distributed as |u|^2 with u circular complex Gaussian,
mean sqrt(K) r and total variance 1 + r^2, which gives the kernel

    g(R, r) = (1 / (1 + r^2)) exp(-(R + K r^2) / (1 + r^2))
              I0(2 sqrt(K) r sqrt(R) / (1 + r^2)),

a scaled noncentral chi-square density in R.  K >= 0 is the Rician factor,
the ratio of line-of-sight power to diffuse fading power; K = 0 is the
Rayleigh channel and the kernel degenerates to an exponential with mean
1 + r^2.
"""

import enum
from dataclasses import dataclass

import numpy as np
from scipy import special


class ChannelModel(enum.Enum):
    """Channel variants sharing the same amplitude kernel.

    CLASSICAL keeps the line-of-sight phase fixed and known, so a uniform
    input phase carries information on top of the amplitude.  PHASE_NOISE
    multiplies the line-of-sight term by an i.i.d. uniform phase, destroying
    all phase information; only the amplitude channel r -> R remains.
    """

    CLASSICAL = "rician"
    PHASE_NOISE = "rician-pn"


@dataclass(frozen=True)
class ChannelSpec:
    """Channel variant plus Rician factor K = |m|^2 / gamma^2."""

    model: ChannelModel
    rician_k: float

    def __post_init__(self):
        object.__setattr__(self, "model", ChannelModel(self.model))
        k = float(self.rician_k)
        if not np.isfinite(k) or k < 0:
            raise ValueError(f"rician_k must be finite and >= 0, got {self.rician_k}")
        object.__setattr__(self, "rician_k", k)


def _check_nonnegative(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError(f"{name} must be finite and nonnegative")
    return arr


def log_i0(z):
    """ln I0(z) for z >= 0, scalar or array.

    Evaluated through the exponentially scaled Bessel function,
    ln I0(z) = z + ln(e^(-z) I0(z)), so the result stays finite for any
    representable argument.
    """
    z = _check_nonnegative("z", z)
    # I0 >= 1, so clamp the roundoff of z + ln i0e(z) at tiny z
    out = np.maximum(z + np.log(special.i0e(z)), 0.0)
    return out if out.ndim else float(out)


def bessel_i1_i0_ratio(z):
    """2 I1(z) / (z I0(z)), the logarithmic-derivative factor of I0.

    Continuous at z = 0 where the value is 1; a short series is used for
    tiny z to avoid the 0/0 form.
    """
    z = np.asarray(z, dtype=float)
    small = z < 1e-6
    zs = np.where(small, 1.0, z)
    ratio = 2.0 * special.i1e(zs) / (zs * special.i0e(zs))
    out = np.where(small, 1.0 - z * z / 8.0, ratio)
    return out if out.ndim else float(out)


def log_kernel_g(R, r, K):
    """ln g(R, r) of the noncentral chi-square kernel; broadcasts over inputs."""
    R = _check_nonnegative("R", R)
    r = _check_nonnegative("r", r)
    K = _check_nonnegative("K", K)
    s = r * r
    scale = 1.0 + s
    z = 2.0 * np.sqrt(K * R) * r / scale
    out = -np.log1p(s) - (R + K * s) / scale + (z + np.log(special.i0e(z)))
    return out if out.ndim else float(out)


def dlog_kernel_g_ds(R, r, K):
    """d ln g / ds at fixed R, with s = r^2.

    Smooth in s including s = 0 and across the K = 0 degeneracy:

        d ln g / ds = -1/(1+s) + (R - K)/(1+s)^2
                      + K R rho(z) (1 - s)/(1+s)^3,

    where z = 2 sqrt(K R s)/(1+s) and rho(z) = 2 I1(z) / (z I0(z)).
    """
    R = _check_nonnegative("R", R)
    r = _check_nonnegative("r", r)
    K = _check_nonnegative("K", K)
    s = r * r
    scale = 1.0 + s
    z = 2.0 * np.sqrt(K * R) * r / scale
    out = (-1.0 / scale + (R - K) / scale**2
           + K * R * bessel_i1_i0_ratio(z) * (1.0 - s) / scale**3)
    return out if out.ndim else float(out)


def kernel_mean(r, K):
    """First moment of g(., r): exactly 1 + (1 + K) r^2."""
    r = _check_nonnegative("r", r)
    K = _check_nonnegative("K", K)
    out = 1.0 + (1.0 + K) * r * r
    return out if out.ndim else float(out)


def sample_R(r, K, rng, size=None):
    """Draw output powers R ~ g(., r) exactly.

    u = sqrt(K) r + sigma (g1 + i g2) with sigma^2 = (1 + r^2)/2 and g1, g2
    independent standard normals; returns |u|^2.  Broadcasts over an array
    of amplitudes r, in which case size must be omitted or match r.
    """
    r = _check_nonnegative("r", r)
    K = _check_nonnegative("K", K)
    if size is None:
        shape = r.shape
    else:
        shape = (size,) if np.isscalar(size) else tuple(size)
        if r.ndim and shape != r.shape:
            raise ValueError("size must match the shape of r when r is an array")
    sigma = np.sqrt((1.0 + r * r) / 2.0)
    mean = np.sqrt(K) * r
    g1 = rng.standard_normal(shape)
    g2 = rng.standard_normal(shape)
    out = (mean + sigma * g1) ** 2 + (sigma * g2) ** 2
    return out if out.ndim else float(out)
