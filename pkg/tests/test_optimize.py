"""Solver: inner probability step, location refinement, full escalation."""

import numpy as np
import pytest

from rician_capacity import AmplitudeDistribution, ChannelSpec
from rician_capacity.constraints import AveragePower, InfeasibleError, Moment4, Peak
from rician_capacity.density import mutual_information
from rician_capacity.optimize import (
    SolverConfig,
    ansatz_two_point,
    optimize_probabilities,
    refine_locations,
    solve_capacity,
    solve_fixed_n,
)

CH1 = ChannelSpec("rician", 1.0)
CH0 = ChannelSpec("rician", 0.0)


def test_probability_step_matches_scalar_oracle(q):
    # two fixed locations, K=0, average power: the optimum sits on the power
    # boundary p1 = alpha/s1; oracle values from a scipy.integrate.quad +
    # bounded scalar search on the hand-written mixture density
    p, duals = optimize_probabilities([0.0, 0.7], CH0, AveragePower(0.05), q)
    assert p[1] == pytest.approx(0.05 / 0.49, abs=1e-9)
    F = AmplitudeDistribution(np.array([0.0, 0.7]), p)
    assert mutual_information(F, CH0, q) == pytest.approx(0.00790559780740896, abs=1e-9)
    assert duals["power"] > 0.0
    assert duals["kkt_residual"] <= 1e-8


def test_probability_step_anchor(q, anchor_distribution):
    p, duals = optimize_probabilities([0.0, 0.7071067811865476], CH1,
                                      Moment4(0.05, 10.0), q)
    np.testing.assert_allclose(p, [0.9, 0.1], atol=1e-8)
    assert duals["kkt_residual"] <= 1e-8
    assert duals["power"] > 0 and duals["fourth_moment"] > 0


@pytest.mark.parametrize("locs,con", [
    ([0.0, 0.5, 1.0], Moment4(0.05, 10.0)),
    ([0.1, 0.9], AveragePower(0.05)),
    ([0.0, 0.2236067977499790], Peak(0.05)),
])
def test_probability_step_kkt_residual(q, locs, con):
    _, duals = optimize_probabilities(locs, CH1, con, q)
    assert duals["kkt_residual"] <= 1e-8


def test_probability_step_rejects_infeasible_support(q):
    with pytest.raises(InfeasibleError):
        optimize_probabilities([0.3, 0.6], CH1, AveragePower(0.05), q)
    with pytest.raises(InfeasibleError):
        optimize_probabilities([0.0, 0.3], CH1, Peak(0.05), q)


def test_ansatz_moments_exact():
    F = ansatz_two_point(10.0, 0.05)
    np.testing.assert_allclose(F.locations, [0.0, np.sqrt(0.5)], rtol=1e-15)
    np.testing.assert_allclose(F.probabilities, [0.9, 0.1], rtol=1e-15)
    s = F.locations**2
    assert float(F.probabilities @ s) == pytest.approx(0.05, rel=1e-14)
    assert float(F.probabilities @ s**2) == pytest.approx(10.0 * 0.05**2, rel=1e-14)
    with pytest.raises(ValueError):
        ansatz_two_point(1.0, 0.05)
    with pytest.raises(ValueError):
        ansatz_two_point(10.0, 0.0)


def test_refinement_never_loses_information(q):
    F = ansatz_two_point(10.0, 0.05)
    mi0 = mutual_information(F, CH1, q)
    G = refine_locations(F, CH1, Moment4(0.05, 10.0), q)
    assert mutual_information(G, CH1, q) >= mi0 - 1e-12


def test_escalation_monotone(q):
    cfg = SolverConfig(restarts=4, seed=0)
    con = AveragePower(0.05)
    mis = [solve_fixed_n(n, CH1, con, cfg, q)[1] for n in (1, 2, 3)]
    assert mis[1] >= mis[0] - 1e-9
    assert mis[2] >= mis[1] - 1e-9


def test_solver_feasibility_and_certificate(q):
    cfg = SolverConfig(restarts=6, seed=0)
    sol = solve_capacity(CH1, AveragePower(0.05), cfg, q)
    F = sol.distribution
    assert sol.converged
    assert float(F.probabilities @ F.locations**2) <= 0.05 * (1 + 1e-10)
    assert sol.report.grid_min >= -1e-3


def test_solver_respects_peak_bound(q):
    cfg = SolverConfig(restarts=4, seed=0)
    sol = solve_capacity(CH1, Peak(0.05), cfg, q)
    assert sol.converged
    assert sol.distribution.max_location() <= np.sqrt(0.05) * (1 + 1e-12)
    np.testing.assert_allclose(sol.distribution.locations, [np.sqrt(0.05)], rtol=1e-9)


def test_solver_deterministic(q):
    cfg = SolverConfig(restarts=4, seed=7)
    a = solve_capacity(CH1, AveragePower(0.05), cfg, q)
    b = solve_capacity(CH1, AveragePower(0.05), cfg, q)
    assert a.to_dict() == b.to_dict()


def test_phase_noise_requires_average_power(q):
    cfg = SolverConfig(restarts=2, seed=0)
    with pytest.raises(ValueError):
        solve_capacity(ChannelSpec("rician-pn", 1.0), Moment4(0.05, 10.0), cfg, q)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(max_points=0)
    with pytest.raises(ValueError):
        SolverConfig(restarts=0)
