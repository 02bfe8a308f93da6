"""Output density, entropy, and the two mutual informations."""

import numpy as np
import pytest
from scipy.integrate import quad

from rician_capacity import AmplitudeDistribution, ChannelSpec
from rician_capacity.density import (
    log_output_density,
    mutual_information,
    mutual_information_classical,
    mutual_information_pn,
    output_entropy,
)
from tests.conftest import ANCHOR_MI


def _point(r):
    return AmplitudeDistribution(np.array([float(r)]), np.array([1.0]))


def test_entropy_single_point_at_origin(q):
    # r=0 gives f = e^{-R} for every K, so h = 1 nat
    for K in (0.0, 1.0, 7.0):
        assert output_entropy(_point(0.0), K, q) == pytest.approx(1.0, abs=1e-10)


def test_entropy_rayleigh_point(q):
    # K=0, single point at r: exponential with mean 1+s, h = 1 + ln(1+s)
    for r in (0.5, 1.0, 2.0):
        s = r * r
        assert output_entropy(_point(r), 0.0, q) == pytest.approx(
            1.0 + np.log1p(s), abs=1e-9)


def test_classical_mi_zero_for_rayleigh_point(q):
    assert mutual_information_classical(_point(1.3), 0.0, q) == pytest.approx(0.0, abs=1e-10)


def test_pn_mi_zero_for_any_single_point(q):
    assert mutual_information_pn(_point(1.3), 2.0, q) == 0.0


def test_classical_mi_positive_for_rician_point(q):
    # with a line-of-sight component the known phase carries information
    # even under a deterministic amplitude
    assert mutual_information_classical(_point(1.0), 1.0, q) > 0.01


def test_anchor_density_at_origin(q, anchor_distribution):
    # f_R(0) = 0.9 + 0.1 (2/3) e^{-1/3}, by hand
    assert log_output_density(0.0, anchor_distribution, 1.0) == pytest.approx(
        -0.053644736822355404, abs=1e-12)


def test_anchor_mutual_information_oracle(q, anchor_distribution):
    assert mutual_information_classical(anchor_distribution, 1.0, q) == pytest.approx(
        ANCHOR_MI, abs=1e-9)


def test_entropy_matches_direct_integral(q, anchor_distribution):
    f = lambda R: np.exp(log_output_density(R, anchor_distribution, 1.0))
    want = quad(lambda R: -f(R) * np.log(f(R)), 0, 200, limit=400)[0]
    assert output_entropy(anchor_distribution, 1.0, q) == pytest.approx(want, abs=1e-9)


def test_dispatcher_routes_by_model(q, anchor_distribution):
    classical = mutual_information(anchor_distribution, ChannelSpec("rician", 1.0), q)
    pn = mutual_information(anchor_distribution, ChannelSpec("rician-pn", 1.0), q)
    assert classical == pytest.approx(ANCHOR_MI, abs=1e-9)
    assert pn < classical


@pytest.mark.parametrize("K", [0.5, 1.0, 2.0])
def test_classical_dominates_phase_noise(q, K):
    F = AmplitudeDistribution(np.array([0.0, 1.1]), np.array([0.85, 0.15]))
    c = mutual_information_classical(F, K, q)
    p = mutual_information_pn(F, K, q)
    assert c >= p > 0.0


def test_models_agree_at_rayleigh(q):
    # K=0 destroys the line-of-sight phase reference, so the classical and
    # phase-noise informations coincide
    F = AmplitudeDistribution(np.array([0.0, 1.5]), np.array([0.9, 0.1]))
    assert mutual_information_classical(F, 0.0, q) == pytest.approx(
        mutual_information_pn(F, 0.0, q), abs=1e-9)


@pytest.mark.parametrize("K,locs,probs", [
    (0.0, [0.0, 1.0], [0.5, 0.5]),
    (1.0, [0.0, 0.7071067811865476], [0.9, 0.1]),
    (2.0, [0.3, 1.4, 3.0], [0.2, 0.5, 0.3]),
])
def test_mutual_information_nonnegative(q, K, locs, probs):
    F = AmplitudeDistribution(np.array(locs), np.array(probs))
    assert mutual_information_classical(F, K, q) >= -1e-12
    assert mutual_information_pn(F, K, q) >= -1e-12


def test_output_density_lower_bound(q):
    # every kernel component is bounded below by a scaled e^{-R}, hence
    # f_R(R) >= D_F e^{-R} with D_F = sum p e^{-K s/(1+s)} / (1+s)
    K = 1.5
    F = AmplitudeDistribution(np.array([0.0, 0.9, 2.5]), np.array([0.5, 0.3, 0.2]))
    s = F.locations**2
    D_F = float(np.sum(F.probabilities * np.exp(-K * s / (1 + s)) / (1 + s)))
    R = np.linspace(0.0, 60.0, 400)
    lf = log_output_density(R, F, K)
    assert (lf >= np.log(D_F) - R - 1e-12).all()


def test_output_density_peak_upper_bound(q):
    # peak-feasible supports obey f_R(R) <= exp(-R/(1+a) + 2 sqrt(K a R))
    K, a = 1.0, 0.25
    F = AmplitudeDistribution(np.array([0.0, 0.3, 0.5]), np.array([0.4, 0.25, 0.35]))
    assert F.max_location() <= np.sqrt(a)
    R = np.linspace(0.0, 80.0, 400)
    lf = log_output_density(R, F, K)
    assert (lf <= -R / (1 + a) + 2 * np.sqrt(K * a * R) + 1e-12).all()


def test_classical_mi_concave_in_probabilities(q):
    locs = np.array([0.0, 0.8, 1.6])
    p1 = np.array([0.7, 0.2, 0.1])
    p2 = np.array([0.3, 0.4, 0.3])
    mid = 0.5 * (p1 + p2)
    mi = lambda p: mutual_information_classical(AmplitudeDistribution(locs, p), 1.0, q)
    assert mi(mid) >= 0.5 * (mi(p1) + mi(p2)) - 1e-10
