import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import minimize_scalar

from bayesgi.core_model import GameParams, RestrictedAction
from bayesgi.distributions import (GainPriors, PointMass, Quadrature, Triangular,
                                   TruncatedExponential, Uniform, expectation)
from bayesgi.static_games import (MixedRestrictedStrategy, bgi_expected_payoffs,
                                  bgi_monte_carlo_payoff, bgi_verify_symmetric_bne,
                                  lemma_gap, restricted_actions, ucgi_best_response,
                                  ucgi_br_dynamics, ucgi_foc_residual, ucgi_symmetric_ne)

UNIT_SELF = GainPriors(PointMass(1.0), Uniform(0, 1), Uniform(0, 1), PointMass(1.0))
SPREAD, C1, C2 = RestrictedAction.spread(), RestrictedAction.concentrate(1), RestrictedAction.concentrate(2)


def expected_rate(params, priors, p, q):
    """Player 1's expected two-subchannel rate, integrated directly."""
    P, N0 = params.power_budget, params.noise_density
    f = lambda g, h: 0.5 * (np.log2(1 + g * p / (N0 + h * q))
                            + np.log2(1 + g * (P - p) / (N0 + h * (P - q))))
    return expectation([priors.g11, priors.g21], f, Quadrature(48))


def test_foc_zero_at_symmetric_point(base):
    assert abs(ucgi_foc_residual(base, UNIT_SELF, 0.5, 0.5)) < 1e-12


def test_foc_sign_forced_by_numerator(base):
    assert ucgi_foc_residual(base, UNIT_SELF, 0.7, 0.7) < 0
    assert ucgi_foc_residual(base, UNIT_SELF, 0.2, 0.1) > 0


@given(st.floats(0, 1), st.floats(0, 1))
def test_foc_antisymmetry(p, q):
    params = GameParams()
    a = ucgi_foc_residual(params, UNIT_SELF, p, q)
    b = ucgi_foc_residual(params, UNIT_SELF, 1 - p, 1 - q)
    assert a == pytest.approx(-b, abs=1e-10)


def test_foc_matches_numerical_derivative(base):
    p, q, eps = 0.3, 0.8, 1e-6
    num = (expected_rate(base, UNIT_SELF, p + eps, q) - expected_rate(base, UNIT_SELF, p - eps, q)) / (2 * eps)
    assert ucgi_foc_residual(base, UNIT_SELF, p, q, method=Quadrature(48)) == pytest.approx(num, rel=1e-6)


def test_foc_rejects_other_k():
    with pytest.raises(ValueError):
        ucgi_foc_residual(GameParams(subchannels=3), UNIT_SELF, 0.5, 0.5)


def test_best_response_symmetric(base):
    assert ucgi_best_response(base, UNIT_SELF, 0.5) == pytest.approx(0.5, abs=1e-12)


def test_best_response_against_corner_matches_search(base):
    br = ucgi_best_response(base, UNIT_SELF, 1.0, method=Quadrature(48))
    grid = np.linspace(0, 1, 10_001)
    vals = [expected_rate(base, UNIT_SELF, p, 1.0) for p in grid[::50]]
    coarse = grid[::50][int(np.argmax(vals))]
    fine = minimize_scalar(lambda p: -expected_rate(base, UNIT_SELF, p, 1.0),
                           bounds=(max(0, coarse - 0.01), min(1, coarse + 0.01)),
                           method="bounded", options={"xatol": 1e-10})
    assert br == pytest.approx(fine.x, abs=1e-6)
    # against a fully loaded subchannel 1 the response favors subchannel 2
    assert 0 < br < 0.5
    assert abs(ucgi_foc_residual(base, UNIT_SELF, br, 1.0, method=Quadrature(48))) < 1e-9


def test_point_mass_priors_match_complete_information(base):
    priors = GainPriors(PointMass(1.0), PointMass(0.4), PointMass(0.3), PointMass(1.0))
    for q in (0.0, 0.2, 0.9):
        br = ucgi_best_response(base, priors, q)
        grid = np.linspace(0, 1, 10_001)
        direct = 0.5 * (np.log2(1 + grid / (0.01 + 0.3 * q))
                        + np.log2(1 + (1 - grid) / (0.01 + 0.3 * (1 - q))))
        assert br == pytest.approx(grid[np.argmax(direct)], abs=2e-4)


def test_boundary_best_response(base):
    # a weak own signal against a strong interferer in subchannel 1
    priors = GainPriors(PointMass(0.05), PointMass(1.0), PointMass(5.0), PointMass(1.0))
    assert ucgi_best_response(base, priors, 1.0) == 0.0


@pytest.mark.parametrize("c", [0.5, 3.0])
def test_best_response_scales_with_power(c):
    small = ucgi_best_response(GameParams(1.0, 0.01), UNIT_SELF, 0.8)
    scaled = ucgi_best_response(GameParams(c, 0.01 * c), UNIT_SELF, 0.8 * c)
    assert scaled == pytest.approx(c * small, rel=1e-9)


def test_dynamics_fixed_at_symmetric_point(base):
    traj = ucgi_br_dynamics(base, UNIT_SELF, 0.5, 0.5)
    assert traj.converged and traj.iterations == 1 and traj.final_gap < 1e-12


def test_dynamics_mirrored(base):
    a = ucgi_br_dynamics(base, UNIT_SELF, 1.0, 0.0)
    b = ucgi_br_dynamics(base, UNIT_SELF, 0.0, 1.0)
    assert a.converged and b.converged
    for ra, rb in zip(a.rows, b.rows):
        assert ra[1] == pytest.approx(rb[2], abs=1e-12)
        assert ra[3] == pytest.approx(rb[4], abs=1e-12)


def test_dynamics_gauss_seidel_also_converges(base):
    traj = ucgi_br_dynamics(base, UNIT_SELF, 1.0, 0.0, simultaneous=False)
    assert traj.converged and traj.final_gap < 1e-6


def test_trajectory_csv(base):
    text = ucgi_br_dynamics(base, UNIT_SELF, 1.0, 0.0, max_iter=2).to_csv()
    lines = text.splitlines()
    assert lines[0] == "iteration,p11,p12,p21,p22"
    assert lines[1] == "0,1.0,0.0,0.0,1.0"
    assert len(lines) == 4


def test_symmetric_ne():
    assert ucgi_symmetric_ne(GameParams()).tolist() == [0.5, 0.5]
    assert ucgi_symmetric_ne(GameParams(2.0, subchannels=5)).tolist() == [0.4] * 5
    assert ucgi_symmetric_ne(GameParams(subchannels=1)).tolist() == [1.0]


def test_strategy_validation():
    with pytest.raises(ValueError):
        MixedRestrictedStrategy((0.5, 0.6), 0.0)
    with pytest.raises(ValueError):
        MixedRestrictedStrategy((0.5, 0.5), -0.0001)


def test_spread_best_against_spread(base):
    vals = bgi_expected_payoffs(base, (1.0, 0.5), MixedRestrictedStrategy((0.0, 0.0), 1.0))
    assert all(vals[SPREAD] > vals[a] for a in (C1, C2))


def test_less_crowded_subchannel_preferred(base):
    vals = bgi_expected_payoffs(base, (1.0, 0.5), MixedRestrictedStrategy((0.2, 0.5), 0.3))
    assert vals[C1] > vals[C2]


def test_expected_payoffs_match_monte_carlo(base):
    strat = MixedRestrictedStrategy((0.5, 0.5), 0.0)
    vals = bgi_expected_payoffs(base, (1.0, 0.5), strat)
    for i, a in enumerate(restricted_actions(2)):
        mc = bgi_monte_carlo_payoff(base, (1.0, 0.5), a, strat, 10 ** 6, 100 + i)
        # three significant figures: within half a unit of the third digit
        unit = 10.0 ** (math.floor(math.log10(abs(vals[a]))) - 2)
        assert abs(mc - vals[a]) <= 0.5 * unit


def test_expected_payoffs_match_monte_carlo_k3():
    params = GameParams(subchannels=3)
    strat = MixedRestrictedStrategy((0.1, 0.3, 0.2), 0.4)
    vals = bgi_expected_payoffs(params, (0.8, 1.3), strat)
    for i, a in enumerate(restricted_actions(3)):
        mc = bgi_monte_carlo_payoff(params, (0.8, 1.3), a, strat, 400_000, i)
        assert mc == pytest.approx(vals[a], rel=5e-3)


def test_lemma_gap_positive():
    params = GameParams()
    for h in np.logspace(-6, 3, 50):
        for g in (0.1, 1.0, 4.0):
            assert lemma_gap(params, g, h) > 0


def test_verify_spread_and_concentrate(base):
    ok = bgi_verify_symmetric_bne(base, lambda g, h: SPREAD, Uniform(0.5, 1.5), Uniform(0, 1),
                                  n_check=300, n_strategy=1000)
    assert ok.verified and ok.witness is None
    bad = bgi_verify_symmetric_bne(base, lambda g, h: C1, Uniform(0.5, 1.5), Uniform(0, 1),
                                   n_check=300, n_strategy=1000)
    assert not bad.verified and bad.witness["chosen"] == "concentrate(1)"


def test_verify_rejects_median_rule(base):
    cand = lambda g, h: SPREAD if g > 1.0 else C1
    out = bgi_verify_symmetric_bne(base, cand, Uniform(0.5, 1.5), Uniform(0, 1),
                                   n_check=300, n_strategy=2000)
    assert not out.verified and out.max_gain > 0


@pytest.mark.parametrize("prior", [Uniform(0, 1), TruncatedExponential(3.0, 0, 2),
                                   Triangular(0.1, 0.2, 1.5)], ids=str)
def test_spread_verified_for_other_priors(prior):
    out = bgi_verify_symmetric_bne(GameParams(subchannels=3), lambda g, h: SPREAD,
                                   Uniform(0.5, 2), prior, n_check=200, n_strategy=500)
    assert out.verified
