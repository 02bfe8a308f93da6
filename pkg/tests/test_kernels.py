"""Kernel identities against series, asymptotic, and sampling oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from rician_capacity.kernels import (
    ChannelModel,
    ChannelSpec,
    bessel_i1_i0_ratio,
    dlog_kernel_g_ds,
    kernel_mean,
    log_i0,
    log_kernel_g,
    sample_R,
)


def _log_i0_series(z, terms=60):
    # ln sum_k (z^2/4)^k / (k!)^2, summed in extended precision
    total = 0.0
    for k in range(terms - 1, -1, -1):
        total += (z * z / 4.0) ** k / math.factorial(k) ** 2
    return math.log(total)


@pytest.mark.parametrize("z", [0.0, 1e-8, 0.1, 1.0, 3.7, 10.0, 25.0])
def test_log_i0_matches_series(z):
    assert log_i0(z) == pytest.approx(_log_i0_series(z), abs=1e-13, rel=1e-13)


@pytest.mark.parametrize("z", [50.0, 200.0, 700.0, 5e4])
def test_log_i0_asymptotic(z):
    # I0(z) ~ e^z / sqrt(2 pi z) (1 + 1/(8z) + 9/(128 z^2) + 75/(1024 z^3))
    expect = z - 0.5 * np.log(2 * np.pi * z) + np.log1p(
        1 / (8 * z) + 9 / (128 * z**2) + 75 / (1024 * z**3))
    assert log_i0(z) == pytest.approx(expect, rel=1e-9)


def test_kernel_point_value():
    # g(R=1, r=1, K=1) = (1/2) e^{-1} I0(1), frozen via scipy.special.i0
    assert np.exp(log_kernel_g(1.0, 1.0, 1.0)) == pytest.approx(
        0.2328798037968202, rel=1e-13)


def test_kernel_rayleigh_degenerate():
    # K = 0: exponential with mean 1 + r^2, exactly
    R = np.array([0.0, 0.4, 2.0, 17.0])
    for r in (0.0, 0.5, 2.0):
        s = r * r
        np.testing.assert_allclose(
            log_kernel_g(R, r, 0.0), -np.log1p(s) - R / (1 + s), rtol=0, atol=1e-14)


@pytest.mark.parametrize("r,K", [(0.0, 1.0), (0.7, 0.0), (0.7, 1.0), (2.0, 4.0)])
def test_kernel_normalizes_and_mean(r, K):
    val, _ = quad(lambda R: np.exp(log_kernel_g(R, r, K)), 0, 60 * (1 + r * r), limit=300)
    assert val == pytest.approx(1.0, abs=1e-9)
    m, _ = quad(lambda R: R * np.exp(log_kernel_g(R, r, K)), 0, 80 * (1 + r * r), limit=300)
    assert m == pytest.approx(kernel_mean(r, K), rel=1e-9)
    assert kernel_mean(r, K) == 1.0 + (1.0 + K) * r * r


@pytest.mark.parametrize("R,r,K", [(0.5, 0.3, 1.0), (2.0, 1.0, 2.0), (7.0, 0.05, 0.5),
                                   (1.0, 1.0, 0.0), (3.0, 2.0, 1.0)])
def test_dlog_kernel_ds_matches_finite_difference(R, r, K):
    s = r * r
    h = 1e-6 * (1 + s)
    num = (log_kernel_g(R, np.sqrt(s + h), K) - log_kernel_g(R, np.sqrt(s - h), K)) / (2 * h)
    assert dlog_kernel_g_ds(R, r, K) == pytest.approx(num, rel=2e-5, abs=1e-8)


def test_sampler_deterministic_and_unbiased():
    rng1, rng2 = np.random.default_rng(42), np.random.default_rng(42)
    draws1 = sample_R(np.array(1.3), 2.0, rng1, size=200_000)
    draws2 = sample_R(np.array(1.3), 2.0, rng2, size=200_000)
    np.testing.assert_array_equal(draws1, draws2)
    sem = draws1.std(ddof=1) / np.sqrt(draws1.size)
    assert abs(draws1.mean() - kernel_mean(1.3, 2.0)) < 6 * sem
    assert draws1.min() >= 0.0


def test_sampler_zero_amplitude_is_unit_exponential():
    rng = np.random.default_rng(3)
    draws = sample_R(np.array(0.0), 5.0, rng, size=100_000)
    # R | r=0 is Exp(1) for every K
    assert draws.mean() == pytest.approx(1.0, abs=0.02)
    assert np.mean(draws > 1.0) == pytest.approx(np.exp(-1), abs=0.01)


def test_channel_spec_coerces_and_validates():
    spec = ChannelSpec("rician", 1.5)
    assert spec.model is ChannelModel.CLASSICAL and spec.rician_k == 1.5
    assert ChannelSpec("rician-pn", 0).model is ChannelModel.PHASE_NOISE
    with pytest.raises(ValueError):
        ChannelSpec("awgn", 1.0)
    with pytest.raises(ValueError):
        ChannelSpec("rician", -0.1)
    with pytest.raises(ValueError):
        ChannelSpec("rician", np.inf)


@given(st.floats(min_value=0.0, max_value=1e6))
@settings(max_examples=200, deadline=None)
def test_log_i0_bounded_by_argument(z):
    v = log_i0(z)
    assert 0.0 <= v <= z


@given(st.floats(min_value=0.0, max_value=1e4), st.floats(min_value=0.0, max_value=1e4))
@settings(max_examples=200, deadline=None)
def test_log_i0_monotone(a, b):
    lo, hi = sorted((a, b))
    assert log_i0(lo) <= log_i0(hi) + 1e-12


@given(st.floats(min_value=1e-3, max_value=1e3), st.floats(min_value=1e-3, max_value=1e3))
@settings(max_examples=200, deadline=None)
def test_log_i0_midpoint_convex(a, b):
    mid = 0.5 * (a + b)
    assert log_i0(mid) <= 0.5 * (log_i0(a) + log_i0(b)) + 1e-10


@given(st.floats(min_value=0.0, max_value=1e5))
@settings(max_examples=200, deadline=None)
def test_bessel_ratio_in_unit_interval(z):
    v = bessel_i1_i0_ratio(z)
    assert -1e-12 <= v <= 1.0 + 1e-12


@given(
    st.floats(min_value=0.0, max_value=500.0),
    st.floats(min_value=0.0, max_value=20.0),
    st.floats(min_value=0.0, max_value=50.0),
)
@settings(max_examples=300, deadline=None)
def test_log_kernel_finite(R, r, K):
    assert np.isfinite(log_kernel_g(R, r, K))
