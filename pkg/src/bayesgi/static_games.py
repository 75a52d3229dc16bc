"""Simultaneous-move games: unknown-channel (UC-GI) and Bayesian (BGI).

UC-GI: neither user sees any gain; with K = 2 a strategy is the power put in
subchannel 1, the remainder going to subchannel 2. BGI: each user sees its
own (self, incident) gains and picks one of the K + 1 restricted actions.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core_model import GameParams, RestrictedAction, to_allocation
from .distributions import (GainDistribution, GainPriors, Quadrature, MonteCarlo,
                            derive_seed, expectation, sample)
from .numerics import bisect

LN2 = math.log(2.0)


def _require_two_subchannels(params: GameParams):
    if params.subchannels != 2:
        raise ValueError(
            f"the UC-GI first-order condition is defined for K = 2, got K = {params.subchannels}")


def foc_integrand(params: GameParams, own_ch1: float, opp_ch1: float):
    """d/d(own_ch1) of the two-subchannel rate, as a function of (g_self, g_cross).

    The numerator g*(P - 2p) + h*(P - 2q) fixes the sign whenever p and q
    sit on the same side of P/2.
    """
    P, N0 = params.power_budget, params.noise_density
    p, q = own_ch1, opp_ch1

    def integrand(g, h):
        num = g * (P - 2 * p) + h * (P - 2 * q)
        den = (N0 + g * p + h * q) * (N0 + g * (P - p) + h * (P - q))
        return 0.5 * g * num / den / LN2

    return integrand


def ucgi_foc_residual(params: GameParams, priors: GainPriors, p1_ch1: float, p2_ch1: float,
                      player: int = 1, method=Quadrature()) -> float:
    """Derivative of `player`'s expected rate w.r.t. its own subchannel-1 power."""
    _require_two_subchannels(params)
    P = params.power_budget
    for name, v in (("p1_ch1", p1_ch1), ("p2_ch1", p2_ch1)):
        if not 0 <= v <= P:
            raise ValueError(f"{name}={v} outside [0, {P}]")
    own, opp = (p1_ch1, p2_ch1) if player == 1 else (p2_ch1, p1_ch1)
    self_prior, cross_prior = priors.own(player)
    return expectation([self_prior, cross_prior], foc_integrand(params, own, opp), method)


def ucgi_best_response(params: GameParams, priors: GainPriors, opponent_ch1: float,
                       player: int = 1, tol: float = 1e-13, method=Quadrature()) -> float:
    """Maximizer over [0, P] of the expected rate against `opponent_ch1`.

    The expected rate is strictly concave in own power, so the residual is
    decreasing and the maximizer is either its root or a boundary point.
    """
    _require_two_subchannels(params)
    P = params.power_budget

    def r(p):
        if player == 1:
            return ucgi_foc_residual(params, priors, p, opponent_ch1, 1, method)
        return ucgi_foc_residual(params, priors, opponent_ch1, p, 2, method)

    if r(0.0) <= 0:
        return 0.0
    if r(P) >= 0:
        return P
    return bisect(r, (0.0, P), tol * P).value


def ucgi_symmetric_ne(params: GameParams) -> np.ndarray:
    return np.full(params.subchannels, params.power_budget / params.subchannels)


@dataclass
class BrTrajectory:
    """Rows of (iteration, p11, p12, p21, p22); row 0 is the initial point."""

    rows: list[tuple[int, float, float, float, float]] = field(default_factory=list)
    converged: bool = False
    final_gap: float = math.nan

    @property
    def final(self) -> tuple[float, float, float, float]:
        return self.rows[-1][1:]

    @property
    def iterations(self) -> int:
        return self.rows[-1][0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "p11", "p12", "p21", "p22"])
        for it, *ps in self.rows:
            w.writerow([it, *(repr(float(x)) for x in ps)])
        return buf.getvalue()


def ucgi_br_dynamics(params: GameParams, priors: GainPriors, init1: float, init2: float,
                     max_iter: int = 100, tol: float = 1e-10, simultaneous: bool = True,
                     method=Quadrature()) -> BrTrajectory:
    """Best-response dynamics from subchannel-1 powers (init1, init2).

    With `simultaneous` both users respond to the previous iterate; otherwise
    user 2 responds to user 1's fresh update (Gauss-Seidel).
    """
    _require_two_subchannels(params)
    P = params.power_budget
    p1, p2 = float(init1), float(init2)
    traj = BrTrajectory(rows=[(0, p1, P - p1, p2, P - p2)])
    for it in range(1, max_iter + 1):
        n1 = ucgi_best_response(params, priors, p2, 1, method=method)
        n2 = ucgi_best_response(params, priors, p1 if simultaneous else n1, 2, method=method)
        change = max(abs(n1 - p1), abs(n2 - p2))
        p1, p2 = n1, n2
        traj.rows.append((it, p1, P - p1, p2, P - p2))
        if change < tol:
            traj.converged = True
            break
    traj.final_gap = max(abs(p1 - P / 2), abs(p2 - P / 2))
    return traj


@dataclass(frozen=True)
class MixedRestrictedStrategy:
    """Probabilities alphas[k-1] of concentrate(k) and gamma of spread."""

    alphas: tuple[float, ...]
    gamma: float

    def __post_init__(self):
        probs = [*self.alphas, self.gamma]
        if any(not 0 <= x <= 1 for x in probs):
            raise ValueError(f"probabilities must lie in [0, 1]: {probs}")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ValueError(f"probabilities must sum to 1, got {math.fsum(probs)!r}")

    @property
    def subchannels(self) -> int:
        return len(self.alphas)

    def probability(self, action: RestrictedAction) -> float:
        return self.gamma if action.is_spread else self.alphas[action.subchannel - 1]


def restricted_actions(K: int) -> list[RestrictedAction]:
    return [RestrictedAction.concentrate(k) for k in range(1, K + 1)] + [RestrictedAction.spread()]


def lemma_gap(params: GameParams, g_self: float, g_cross: float) -> float:
    """Rate lost by concentrating on a subchannel the opponent also fills."""
    P, N0 = params.power_budget, params.noise_density
    return 0.5 * (math.log2(1 + g_self * P / N0) - math.log2(1 + g_self * P / (N0 + g_cross * P)))


def bgi_expected_payoffs(params: GameParams, own_gains: tuple[float, float],
                         opponent: MixedRestrictedStrategy) -> dict[RestrictedAction, float]:
    """Expected rate of each restricted action against a mixed opponent.

    Three interference regimes per subchannel: none, the opponent's full
    power P, or its spread share P/K.
    """
    K, P, N0 = params.subchannels, params.power_budget, params.noise_density
    if opponent.subchannels != K:
        raise ValueError(f"strategy has {opponent.subchannels} subchannels, params have {K}")
    g, h = own_gains
    half_log = lambda x: 0.5 * math.log2(1 + x)

    clear = half_log(g * P / N0)
    hit = half_log(g * P / (N0 + h * P))
    hit_spread = half_log(g * P / (N0 + h * P / K))
    out = {}
    for k in range(1, K + 1):
        a_k = opponent.alphas[k - 1]
        out[RestrictedAction.concentrate(k)] = (
            a_k * hit + opponent.gamma * hit_spread + (1 - a_k - opponent.gamma) * clear)

    s_clear = half_log(g * P / K / N0)
    s_hit = half_log(g * P / K / (N0 + h * P))
    s_both = half_log(g * P / K / (N0 + h * P / K))
    out[RestrictedAction.spread()] = (
        (1 - opponent.gamma) * ((K - 1) * s_clear + s_hit) + opponent.gamma * K * s_both)
    return out


@dataclass
class BneCheck:
    verified: bool
    strategy: MixedRestrictedStrategy
    witness: dict | None = None
    max_gain: float = 0.0


def induced_strategy(candidate: Callable[[float, float], RestrictedAction], K: int,
                     self_prior: GainDistribution, cross_prior: GainDistribution,
                     n: int, seed: int) -> MixedRestrictedStrategy:
    """Action frequencies of `candidate` over n sampled opponent types."""
    gs = sample(self_prior, derive_seed(seed, 0), n)
    hs = sample(cross_prior, derive_seed(seed, 1), n)
    counts = np.zeros(K + 1)
    for g, h in zip(gs, hs):
        a = candidate(float(g), float(h))
        counts[K if a.is_spread else a.subchannel - 1] += 1
    probs = counts / n
    gamma = float(probs[K])
    alphas = tuple(float(x) for x in probs[:K])
    # absorb the float residue so the strategy validates exactly
    slack = 1.0 - math.fsum([*alphas, gamma])
    return MixedRestrictedStrategy(alphas, gamma + slack)


def bgi_verify_symmetric_bne(params: GameParams,
                             candidate: Callable[[float, float], RestrictedAction],
                             self_prior: GainDistribution, cross_prior: GainDistribution,
                             n_check: int = 1000, n_strategy: int = 10_000, seed: int = 0,
                             tol: float = 1e-12) -> BneCheck:
    """Check whether both users playing `candidate` is a symmetric BNE.

    `candidate(g_self, g_cross)` maps a user's own gains to an action. The
    opponent's mixed strategy is estimated from n_strategy sampled types;
    n_check further types are then tested for a strictly better action.
    """
    K = params.subchannels
    strategy = induced_strategy(candidate, K, self_prior, cross_prior, n_strategy,
                                derive_seed(seed, 0))
    gs = sample(self_prior, derive_seed(seed, 1), n_check)
    hs = sample(cross_prior, derive_seed(seed, 2), n_check)
    best_gain, witness = 0.0, None
    for g, h in zip(gs, hs):
        g, h = float(g), float(h)
        values = bgi_expected_payoffs(params, (g, h), strategy)
        chosen = candidate(g, h)
        better = max(values, key=values.get)
        gain = values[better] - values[chosen]
        if gain > tol * max(1.0, abs(values[chosen])) and gain > best_gain:
            best_gain = gain
            witness = {"g_self": g, "g_cross": h, "chosen": str(chosen),
                       "better": str(better), "gain": gain}
    return BneCheck(witness is None, strategy, witness, best_gain)


def bgi_monte_carlo_payoff(params: GameParams, own_gains: tuple[float, float],
                           action: RestrictedAction, opponent: MixedRestrictedStrategy,
                           n: int, seed: int) -> float:
    """Sample the opponent's action and average the realized rate directly."""
    K, N0 = params.subchannels, params.noise_density
    g, h = own_gains
    actions = restricted_actions(K)
    probs = np.array([opponent.probability(a) for a in actions])
    idx = np.random.Generator(np.random.PCG64(seed)).choice(len(actions), size=n, p=probs)
    own = to_allocation(action, params)
    allocs = np.stack([to_allocation(a, params) for a in actions])
    rates = np.sum(0.5 * np.log2(1 + g * own / (N0 + h * allocs)), axis=1)
    return float(np.mean(rates[idx]))
