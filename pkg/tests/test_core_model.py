import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bayesgi.core_model import (ChannelGains, GameParams, RestrictedAction, joint_rates, payoff,
                                rate, share_rate, spread_rate, to_allocation, validate_allocation)
from bayesgi.sequential_games import g_star
from oracle_values import BOTH_SPREAD_UNIT, PI0, SHARE, SPREAD_05

gains_st = st.floats(0.01, 10.0)
alloc_st = st.tuples(st.floats(0, 1), st.floats(0, 1)).map(
    lambda t: (t[0] * 0.3, t[1] * 0.3))


def test_params_reject_bad_values():
    for kwargs in ({"power_budget": 0}, {"noise_density": -1}, {"subchannels": 0},
                   {"power_cost_coeff": -0.1}, {"subchannels": 1.5}):
        with pytest.raises(ValueError):
            GameParams(**kwargs)


def test_gains_reject_nonpositive_self_gain():
    with pytest.raises(ValueError):
        ChannelGains(g11=0)
    with pytest.raises(ValueError):
        ChannelGains(g12=-1e-3)


def test_interference_free_payoff(base):
    gains = ChannelGains(1, 1, 0, 1)
    assert payoff(base, gains, [0.5, 0.5], [0.3, 0.7], 1) == pytest.approx(PI0, rel=1e-14)


def test_both_spread_unit_gains(base):
    out = payoff(base, ChannelGains(), [0.5, 0.5], [0.5, 0.5], 1)
    assert out == pytest.approx(BOTH_SPREAD_UNIT, rel=1e-14)


def test_zero_allocation_gives_zero(base):
    assert payoff(base, ChannelGains(), [0, 0], [1, 0], 2) == 0.0


def test_payoff_rejects_bad_allocations(base):
    with pytest.raises(ValueError):
        payoff(base, ChannelGains(), [0.5, 0.5, 0.0], [0.5, 0.5], 1)
    with pytest.raises(ValueError):
        payoff(base, ChannelGains(), [0.6, 0.5], [0.5, 0.5], 1)
    with pytest.raises(ValueError):
        payoff(base, ChannelGains(), [-0.1, 0.5], [0.5, 0.5], 1)


def test_budget_tolerance_is_relative(base):
    validate_allocation([0.5, 0.5 + 1e-13], base)
    with pytest.raises(ValueError):
        validate_allocation([0.5, 0.5 + 1e-11], base)


def test_to_allocation():
    assert to_allocation(RestrictedAction.concentrate(1), GameParams()).tolist() == [1, 0]
    assert to_allocation(RestrictedAction.spread(), GameParams(subchannels=4)).tolist() == [0.25] * 4
    assert to_allocation(RestrictedAction.concentrate(2), GameParams(power_budget=2)).tolist() == [0, 2]
    with pytest.raises(ValueError):
        to_allocation(RestrictedAction.concentrate(3), GameParams())
    with pytest.raises(ValueError):
        RestrictedAction.concentrate(0)


def test_joint_rates(base):
    share, spread = joint_rates(base, ChannelGains(g21=0.5), 1)
    assert share == pytest.approx(SHARE, rel=1e-14)
    assert spread == pytest.approx(SPREAD_05, rel=1e-14)
    assert spread_rate(base, 1e12) < 1e-10


def test_spread_rate_matches_general_payoff(base):
    for g in (0.0, 0.1, 0.5, 2.0):
        gains = ChannelGains(1, 1, g, 1)
        assert spread_rate(base, g) == pytest.approx(
            payoff(base, gains, [0.5, 0.5], [0.5, 0.5], 1), rel=1e-13)
        assert share_rate(base) == pytest.approx(
            payoff(base, gains, [1, 0], [0, 1], 1), rel=1e-13)


@given(gains_st, gains_st, gains_st, gains_st, alloc_st, alloc_st)
def test_player_symmetry(a, b, c, d, x, y):
    params = GameParams()
    p1 = payoff(params, ChannelGains(a, b, c, d), x, y, 1)
    p2 = payoff(params, ChannelGains(d, c, b, a), x, y, 2)
    assert p1 == pytest.approx(p2, rel=1e-12)


@given(gains_st, gains_st, alloc_st, alloc_st, st.floats(1e-3, 0.39))
def test_payoff_increasing_in_own_power(g_self, g_cross, x, y, bump):
    params = GameParams()
    gains = ChannelGains(g_self, 1, g_cross, 1)
    more = (x[0] + bump, x[1])
    assert payoff(params, gains, more, y, 1) > payoff(params, gains, x, y, 1)


def test_spreading_concavity_on_log_grid():
    x = np.logspace(-6, 6, 200)
    for K in (2, 3, 8):
        assert np.all(K * np.log2(1 + x / K) > np.log2(1 + x))


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(0.0, 2.0))
def test_share_beats_spread_above_g_star(P, N0, g):
    params = GameParams(P, N0)
    gs = g_star(params)
    if abs(g - gs) < 1e-9 * max(1.0, gs):
        return
    share, spread = share_rate(params), spread_rate(params, g)
    assert (share > spread) == (g > gs)


def test_rate_is_elementwise():
    out = rate(1.0, np.array([0.0, 1.0]), 1.0, np.array([0.0, 0.0]), 1.0)
    assert out.tolist() == [0.0, 0.5]
    assert math.isclose(float(out[1]), 0.5)
