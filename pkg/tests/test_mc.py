"""Stratified Monte Carlo estimator against the quadrature values."""

import numpy as np
import pytest

from rician_capacity import AmplitudeDistribution, ChannelSpec
from rician_capacity.mc import mc_mutual_information
from tests.conftest import ANCHOR_MI

CH1 = ChannelSpec("rician", 1.0)
PN2 = ChannelSpec("rician-pn", 2.0)


def test_anchor_agreement(anchor_distribution):
    est = mc_mutual_information(anchor_distribution, CH1, n_samples=400_000, seed=11)
    assert est.n_samples == 400_000
    assert abs(est.value - ANCHOR_MI) <= 4 * est.std_err
    assert est.std_err < 5e-3


def test_deterministic():
    F = AmplitudeDistribution(np.array([0.0, 1.0]), np.array([0.8, 0.2]))
    a = mc_mutual_information(F, CH1, n_samples=50_000, seed=3)
    b = mc_mutual_information(F, CH1, n_samples=50_000, seed=3)
    c = mc_mutual_information(F, CH1, n_samples=50_000, seed=4)
    assert a.value == b.value and a.std_err == b.std_err
    assert a.value != c.value


def test_error_scales_with_samples():
    F = AmplitudeDistribution(np.array([0.0, 1.0]), np.array([0.8, 0.2]))
    small = mc_mutual_information(F, CH1, n_samples=40_000, seed=5)
    big = mc_mutual_information(F, CH1, n_samples=640_000, seed=5)
    ratio = small.std_err / big.std_err
    assert 2.5 < ratio < 6.5  # expect ~4 for a 16x sample increase


def test_single_point_phase_noise_is_exactly_zero():
    F = AmplitudeDistribution(np.array([1.3]), np.array([1.0]))
    est = mc_mutual_information(F, PN2, n_samples=10_000, seed=0)
    assert est.value == 0.0
    assert est.std_err == 0.0


def test_tiny_stratum_is_represented():
    F = AmplitudeDistribution(np.array([0.0, 2.0]), np.array([0.9999, 0.0001]))
    est = mc_mutual_information(F, CH1, n_samples=100_000, seed=1)
    assert np.isfinite(est.value) and np.isfinite(est.std_err)


def test_sample_count_validation():
    F = AmplitudeDistribution(np.array([0.0, 1.0]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        mc_mutual_information(F, CH1, n_samples=5_000, seed=0)
    with pytest.raises(ValueError):
        mc_mutual_information(F, CH1, n_samples=100_001, seed=0)
