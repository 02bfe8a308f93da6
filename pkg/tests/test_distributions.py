"""Discrete amplitude distribution container: validation, moments, text I/O."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rician_capacity import AmplitudeDistribution


def test_basic_accessors():
    F = AmplitudeDistribution(np.array([0.0, 0.5, 2.0]), np.array([0.6, 0.3, 0.1]))
    assert F.n_points == 3
    assert F.max_location() == 2.0
    assert F.second_moment() == pytest.approx(0.3 * 0.25 + 0.1 * 4.0)
    assert F.fourth_moment() == pytest.approx(0.3 * 0.5**4 + 0.1 * 16.0)
    pts = list(F.points)
    assert pts[0] == (0.0, 0.6) and pts[2] == (2.0, 0.1)


@pytest.mark.parametrize("locs,probs", [
    ([0.0, 0.5], [0.5, 0.6]),          # does not sum to one
    ([0.5, 0.5], [0.5, 0.5]),          # duplicate locations
    ([0.5, 0.2], [0.5, 0.5]),          # not increasing
    ([-0.1, 0.5], [0.5, 0.5]),         # negative amplitude
    ([0.0, 0.5], [-0.1, 1.1]),         # negative probability
    ([], []),                          # empty
])
def test_validation_rejects(locs, probs):
    with pytest.raises(ValueError):
        AmplitudeDistribution(np.array(locs, dtype=float), np.array(probs, dtype=float))


def test_from_pairs():
    F = AmplitudeDistribution.from_pairs([(0.7, 0.25), (0.0, 0.75)])
    np.testing.assert_array_equal(F.locations, [0.0, 0.7])
    np.testing.assert_array_equal(F.probabilities, [0.75, 0.25])


def test_text_round_trip(tmp_path):
    F = AmplitudeDistribution(
        np.array([0.0, 0.7071067811865476, 1.9669123]),
        np.array([0.8999999999999999, 0.05, 0.05000000000000006]))
    path = tmp_path / "dist.txt"
    F.to_text(path)
    G = AmplitudeDistribution.from_text(path)
    np.testing.assert_array_equal(F.locations, G.locations)
    np.testing.assert_array_equal(F.probabilities, G.probabilities)


def test_from_text_rejects_garbage(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0.0 0.9\nnot-a-number 0.1\n")
    with pytest.raises(ValueError):
        AmplitudeDistribution.from_text(path)


def test_to_dict_keys():
    F = AmplitudeDistribution(np.array([0.0, 1.0]), np.array([0.9, 0.1]))
    d = F.to_dict()
    assert d["locations"] == [0.0, 1.0]
    assert d["probabilities"] == [0.9, 0.1]


@st.composite
def distributions(draw):
    n = draw(st.integers(min_value=1, max_value=6))
    locs = draw(st.lists(st.floats(min_value=0.0, max_value=50.0), min_size=n,
                         max_size=n, unique=True))
    raw = draw(st.lists(st.floats(min_value=1e-6, max_value=1.0), min_size=n, max_size=n))
    locs = np.sort(np.array(locs))
    p = np.array(raw)
    p = p / p.sum()
    p = p / p.sum()  # second pass tightens the float sum toward 1
    return AmplitudeDistribution(locs, p)


@given(distributions())
@settings(max_examples=100, deadline=None)
def test_text_round_trip_exact(tmp_path_factory, F):
    path = tmp_path_factory.mktemp("dists") / "d.txt"
    F.to_text(path)
    G = AmplitudeDistribution.from_text(path)
    np.testing.assert_array_equal(F.locations, G.locations)
    np.testing.assert_array_equal(F.probabilities, G.probabilities)
