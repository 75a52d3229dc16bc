"""Sequential entry game when each user knows only its own incident gain.

The primary holds a belief kappa = P(g12 < 1/2) about the secondary and
spreads iff g21 is below a threshold that depends on kappa; the secondary
enters iff g12 is below a threshold that depends on alpha, its probability
that the primary spreads. Entry itself carries information about g12, so
the primary's post-entry belief comes from Bayes' rule, which closes a
fixed-point loop kappa -> g21_hat -> alpha -> g12_hat -> kappa.

If entry has zero prior probability the post-entry belief is off path; we
keep the prior kappa there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_model import GameParams, share_rate, spread_rate
from .distributions import GainDistribution, cdf
from .numerics import SolveReport, bisect, fixed_point

BRACKET_CAP = 1e6


def primary_spread_payoff(params: GameParams, g21: float) -> float:
    return spread_rate(params, g21)


def primary_share_payoff(params: GameParams, g21: float, kappa: float) -> float:
    """Expected rate from sharing when the secondary spreads w.p. kappa."""
    P, N0 = params.power_budget, params.noise_density
    both_share = 0.5 * math.log2(1 + P / N0)
    other_spreads = 0.5 * math.log2(1 + P / (N0 + g21 * P / 2))
    return (1 - kappa) * both_share + kappa * other_spreads


@dataclass(frozen=True)
class PrimaryExpectedPayoffs:
    spread_payoff: float
    share_payoff: float


def primary_payoffs(params: GameParams, g21: float, kappa: float) -> PrimaryExpectedPayoffs:
    return PrimaryExpectedPayoffs(primary_spread_payoff(params, g21),
                                  primary_share_payoff(params, g21, kappa))


def delta(params: GameParams, g21: float, kappa: float) -> float:
    """Spread minus expected share payoff for the primary."""
    if not 0 <= kappa <= 1:
        raise ValueError(f"kappa must lie in [0, 1], got {kappa}")
    return primary_spread_payoff(params, g21) - primary_share_payoff(params, g21, kappa)


def _root_decreasing(f, start_hi: float, cap: float, tol: float) -> float:
    """Root of a decreasing f with f(0) > 0, expanding [0, hi] by doubling.

    Returns inf when f stays positive up to `cap`.
    """
    hi = start_hi
    while f(hi) > 0:
        if hi >= cap:
            return math.inf
        hi *= 2.0
    return bisect(f, (0.0, hi), tol).value


def g21_hat(params: GameParams, kappa: float, tol: float = 1e-13) -> float:
    """Primary spreads iff g21 < g21_hat(kappa); inf when it always spreads."""
    if kappa >= 1:
        return math.inf
    return _root_decreasing(lambda g: delta(params, g, kappa), 1.0, BRACKET_CAP, tol)


def share_spread_rate(params: GameParams, g12: float) -> float:
    """Secondary's rate when the primary concentrates in subchannel 1 and it spreads."""
    P, N0 = params.power_budget, params.noise_density
    return 0.5 * math.log2(1 + P / (2 * N0)) + 0.5 * math.log2(1 + (P / 2) / (N0 + g12 * P))


def h(params: GameParams, g12: float, alpha: float) -> float:
    """Secondary's expected rate on entry when the primary spreads w.p. alpha."""
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    after_share = share_spread_rate(params, g12) if g12 <= 0.5 else share_rate(params)
    return alpha * spread_rate(params, g12) + (1 - alpha) * after_share


def h_limit(params: GameParams, alpha: float) -> float:
    """Limit of h(g12, alpha) as g12 -> inf."""
    return (1 - alpha) * share_rate(params)


def _entry_threshold(params: GameParams, alpha: float, tol: float) -> float:
    kP = params.entry_cost
    f = lambda g: h(params, g, alpha) - kP
    if f(0.0) < 0:
        return 0.0
    if alpha == 0:
        # h is flat at the share rate above 1/2, so any crossing lies in (0, 1/2]
        if share_rate(params) > kP:
            return math.inf
        if f(0.5) >= 0:
            return 0.5
        return bisect(f, (0.0, 0.5), tol).value
    if h_limit(params, alpha) >= kP:
        return math.inf
    return _root_decreasing(f, 1.0, math.inf, tol)


def g12_hat(params: GameParams, alpha: float, tol: float = 1e-13) -> float:
    """Secondary enters iff g12 < g12_hat(alpha); 0 = never, inf = always."""
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    return _entry_threshold(params, alpha, tol)


def kappa_posterior(prior_g12: GainDistribution, threshold: float) -> tuple[float, bool]:
    """P(g12 < 1/2 | g12 < threshold) and whether entry is on path.

    Off path (the threshold rule never enters) the prior kappa is returned.
    """
    prior_kappa = cdf(prior_g12, 0.5)
    mass = cdf(prior_g12, threshold)
    if mass <= 0:
        return prior_kappa, False
    return min(prior_kappa, mass) / mass, True


@dataclass(frozen=True)
class TwoSidedEquilibrium:
    kappa_hat: float
    g21_hat: float
    g12_hat: float
    alpha: float
    on_path: bool
    report: SolveReport
    residuals: dict

    @property
    def converged(self) -> bool:
        return self.report.converged

    def record(self) -> dict:
        out = {
            "kappa_hat": self.kappa_hat,
            "g21_hat": self.g21_hat,
            "g12_hat": self.g12_hat,
            "alpha": self.alpha,
            "on_path": self.on_path,
            "converged": self.report.converged,
            "iterations": self.report.iterations,
        }
        out.update({f"residual_{k}": v for k, v in self.residuals.items()})
        return out


def _chain(params, prior_g12, prior_g21, kappa, tol):
    g21 = g21_hat(params, kappa, tol)
    alpha = cdf(prior_g21, g21)
    g12 = _entry_threshold(params, alpha, tol)
    kappa_next, on_path = kappa_posterior(prior_g12, g12)
    return g21, alpha, g12, kappa_next, on_path


def consistency_residuals(params: GameParams, prior_g12: GainDistribution,
                          prior_g21: GainDistribution, kappa: float, g21: float,
                          alpha: float, g12: float) -> dict:
    """How far each of the four equilibrium objects is from its defining equation."""
    res = {}
    res["kappa"] = abs(kappa_posterior(prior_g12, g12)[0] - kappa)
    res["g21_hat"] = 0.0 if math.isinf(g21) else abs(delta(params, g21, kappa))
    res["alpha"] = abs(cdf(prior_g21, g21) - alpha)
    if 0 < g12 < math.inf:
        res["g12_hat"] = abs(h(params, g12, alpha) - params.entry_cost)
    else:
        res["g12_hat"] = 0.0
    return res


def solve_two_sided(params: GameParams, prior_g12: GainDistribution,
                    prior_g21: GainDistribution, damping: float = 0.5,
                    tol: float = 1e-10, max_iter: int = 10_000) -> TwoSidedEquilibrium:
    """Damped fixed-point iteration on the primary's post-entry belief.

    Starts from the prior kappa. Non-convergence is reported, not raised.
    """
    root_tol = 1e-13

    def step(kappa):
        return _chain(params, prior_g12, prior_g21, kappa, root_tol)[3]

    report = fixed_point(step, cdf(prior_g12, 0.5), damping, tol, max_iter)
    kappa = report.value
    g21, alpha, g12, _, on_path = _chain(params, prior_g12, prior_g21, kappa, root_tol)
    residuals = consistency_residuals(params, prior_g12, prior_g21, kappa, g21, alpha, g12)
    return TwoSidedEquilibrium(kappa, g21, g12, alpha, on_path, report, residuals)


def scan_fixed_points(params: GameParams, prior_g12: GainDistribution,
                      prior_g21: GainDistribution, n_grid: int = 201) -> list[tuple[float, float]]:
    """Brackets [kappa_lo, kappa_hi] on which map(kappa) - kappa changes sign."""
    grid = np.linspace(0.0, 1.0, n_grid)
    vals = [_chain(params, prior_g12, prior_g21, float(k), 1e-12)[3] - float(k) for k in grid]
    out = []
    for i in range(n_grid - 1):
        if vals[i] == 0:
            out.append((float(grid[i]), float(grid[i])))
        elif vals[i] * vals[i + 1] < 0:
            out.append((float(grid[i]), float(grid[i + 1])))
    if vals[-1] == 0:
        out.append((1.0, 1.0))
    return out
