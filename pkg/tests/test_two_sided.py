import math

import numpy as np
import pytest

from bayesgi.core_model import GameParams, share_rate, spread_rate
from bayesgi.distributions import TruncatedExponential, Triangular, Uniform, rng, sample
from bayesgi.sequential_games import g12_tilde, g_star, sbgie_equilibrium
from bayesgi.two_sided import (delta, g12_hat, g21_hat, h, h_limit, kappa_posterior,
                               primary_payoffs, scan_fixed_points, share_spread_rate,
                               solve_two_sided)
from oracle_values import G21_HAT_K05, H_A03_G08, PI0, SHARE


def test_delta_at_zero(base):
    for kappa in (0.0, 0.4, 1.0):
        assert delta(base, 0.0, kappa) == pytest.approx(PI0 - SHARE, rel=1e-13)


def test_delta_decreasing_and_positive_at_kappa_one(base):
    grid = np.linspace(0, 20, 2001)
    for kappa in (0.0, 0.3, 0.9):
        vals = np.array([delta(base, g, kappa) for g in grid])
        assert np.all(vals[1:] < vals[:-1])
    assert all(delta(base, g, 1.0) > 0 for g in np.logspace(-3, 6, 100))


def test_delta_limit_kappa_zero(base):
    assert delta(base, 1e12, 0.0) == pytest.approx(-SHARE, abs=1e-9)


def test_payoffs_nonnegative(base):
    for g in (0, 0.5, 50):
        p = primary_payoffs(base, g, 0.7)
        assert p.spread_payoff >= 0 and p.share_payoff >= 0


def test_g21_hat(base):
    assert g21_hat(base, 0.0) == pytest.approx(g_star(base), abs=1e-12)
    assert g21_hat(base, 0.5) == pytest.approx(G21_HAT_K05, abs=1e-12)
    assert g21_hat(base, 1.0) == math.inf
    r = g21_hat(base, 0.3)
    assert delta(base, r - 1e-7, 0.3) > 0 > delta(base, r + 1e-7, 0.3)
    vals = [g21_hat(base, k) for k in np.linspace(0, 0.99, 40)]
    assert all(v > 0 for v in vals) and np.all(np.diff(vals) >= 0)


def test_h_pieces(base):
    assert h(base, 0.8, 1.0) == pytest.approx(spread_rate(base, 0.8), rel=1e-14)
    assert h(base, 0.8, 0.3) == pytest.approx(H_A03_G08, rel=1e-13)
    for alpha in (0.0, 0.4, 1.0):
        jump = abs(h(base, 0.5 - 1e-12, alpha) - h(base, 0.5 + 1e-12, alpha))
        assert jump < 1e-9
    assert share_spread_rate(base, 0.5) == pytest.approx(share_rate(base), rel=1e-14)


def test_h_monte_carlo(base):
    # lottery over the primary's action, alpha = 0.3, g12 = 0.8
    gen = rng(5)
    spreads = gen.random(10 ** 6) < 0.3
    draws = np.where(spreads, spread_rate(base, 0.8), share_rate(base))
    assert float(np.mean(draws)) == pytest.approx(h(base, 0.8, 0.3), rel=5e-3)


def test_h_decreasing(base):
    grid = np.linspace(0, 10, 500)
    for alpha in np.linspace(0.1, 1.0, 10):
        vals = np.array([h(base, g, alpha) for g in grid])
        assert np.all(np.diff(vals) < 0)


def test_g12_hat_cases():
    never = GameParams(1.0, 0.01, 2, 7.0)
    assert g12_hat(never, 0.5) == 0.0
    always = GameParams(1.0, 0.01, 2, 0.5)
    assert h_limit(always, 0.5) > 0.5 and g12_hat(always, 0.5) == math.inf
    mid = GameParams(1.0, 0.01, 2, 2.0)
    r = g12_hat(mid, 0.6)
    assert 0 < r < math.inf
    assert h(mid, r, 0.6) == pytest.approx(2.0, abs=1e-10)
    with pytest.raises(ValueError):
        g12_hat(mid, 0.0)


def test_g12_hat_alpha_one_is_g12_tilde():
    params = GameParams(1.0, 0.01, 2, 2.0)
    assert g12_hat(params, 1.0) == pytest.approx(g12_tilde(params), abs=1e-10)


def test_kappa_posterior():
    u = Uniform(0, 1)
    assert kappa_posterior(u, 0.4) == (1.0, True)
    assert kappa_posterior(u, math.inf) == (0.5, True)
    k, on = kappa_posterior(u, 0.8)
    assert on and k == pytest.approx(0.625, rel=1e-14)
    # rejection sampling oracle
    x = sample(u, 3, 400_000)
    kept = x[x < 0.8]
    assert np.mean(kept < 0.5) == pytest.approx(0.625, abs=0.005)
    assert kappa_posterior(Uniform(0.3, 1), 0.1) == (pytest.approx(2 / 7), False)


def test_symmetric_uniform_fixed_point():
    params = GameParams(1.0, 0.01, 2, 0.5)
    eq = solve_two_sided(params, Uniform(0, 1), Uniform(0, 1))
    assert eq.converged
    assert max(eq.residuals.values()) <= 1e-10
    assert eq.kappa_hat == pytest.approx(0.5) and eq.g12_hat == math.inf


def test_degenerate_prior_recovers_one_sided_logic():
    params = GameParams(1.0, 0.01, 2, 0.5)
    eq = solve_two_sided(params, Uniform(0.1, 0.2), Uniform(0, 1))
    assert eq.kappa_hat == 1.0 and eq.g21_hat == math.inf and eq.alpha == 1.0
    # with the primary always spreading the secondary enters iff its spread rate covers kP
    assert eq.g12_hat == pytest.approx(g12_tilde(params), abs=1e-9)
    for g12 in (0.15, 0.19):
        one_sided = sbgie_equilibrium(params, g12, 0.5, Uniform(0, 1))
        assert (g12 < eq.g12_hat) == (one_sided.entry.value == "N")


def test_prohibitive_cost_is_off_path():
    eq = solve_two_sided(GameParams(1.0, 0.01, 2, 10.0), Uniform(0, 1), Uniform(0, 1))
    assert eq.g12_hat == 0.0 and not eq.on_path and eq.kappa_hat == 0.5


def test_unbounded_priors_supported():
    params = GameParams(1.0, 0.01, 2, 2.5)
    eq = solve_two_sided(params, TruncatedExponential(1.0), TruncatedExponential(4.0))
    assert eq.converged and max(eq.residuals.values()) <= 1e-8


def test_non_convergence_is_reported():
    params = GameParams(1.0, 0.01, 2, 2.5)
    eq = solve_two_sided(params, Uniform(0, 3), TruncatedExponential(4.0), max_iter=1, tol=1e-15)
    assert not eq.converged


def test_scan_contains_solver_fixed_point():
    params = GameParams(1.0, 0.01, 2, 2.5)
    pg12, pg21 = Uniform(0, 3), Triangular(0, 0.1, 1)
    eq = solve_two_sided(params, pg12, pg21)
    brackets = scan_fixed_points(params, pg12, pg21)
    assert any(lo - 1e-9 <= eq.kappa_hat <= hi + 1e-9 for lo, hi in brackets)


def test_record_is_flat():
    rec = solve_two_sided(GameParams(1.0, 0.01, 2, 0.5), Uniform(0, 1), Uniform(0, 1)).record()
    assert {"kappa_hat", "g21_hat", "g12_hat", "alpha", "converged"} <= set(rec)
    assert all(not isinstance(v, (dict, list)) for v in rec.values())
