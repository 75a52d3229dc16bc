"""One-shot sequential games with the primary moving first (SBGI, SBGI-E).

Self gains are normalized to 1. The primary knows both cross gains; the
secondary knows only g12 and holds a prior over g21. When the primary
concentrates it uses subchannel 1 and the secondary subchannel 2.

Threshold ties (g12 = 1/2, g21 = g*, rho = d, spread rate = kP) have zero
probability under continuous priors; they resolve to SP and to exit.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .core_model import EntryAction, GameParams, SeqAction, share_rate, spread_rate
from .distributions import GainDistribution, cdf


def g_star(params: GameParams) -> float:
    """Cross gain above which mutual sharing beats mutual spreading.

    Equals 1/(sqrt(1 + P/N0) - 1) - 2*N0/P, evaluated in the cancellation-free
    form 1/(1 + sqrt(1 + P/N0)).
    """
    return 1.0 / (1.0 + math.sqrt(1.0 + params.snr))


def g12_tilde(params: GameParams) -> float:
    """Largest g12 for which the secondary's spread rate still covers kP.

    +inf when entry is free (kP = 0).
    """
    kP = params.entry_cost
    if kP == 0:
        return math.inf
    return 1.0 / math.expm1(kP * math.log(2.0)) - 2.0 * params.noise_density / params.power_budget


def assumption_two_holds(params: GameParams) -> bool:
    """Sharing pays for the entry cost: P/N0 > 2^(2kP) - 1."""
    return share_rate(params) > params.entry_cost


def entry_cutoff_d(params: GameParams, g12: float) -> float:
    """Belief cutoff d: the secondary enters iff P(primary spreads) < d."""
    share, spread, kP = share_rate(params), spread_rate(params, g12), params.entry_cost
    if not share > kP:
        raise ValueError(
            f"sharing rate {share!r} does not exceed entry cost kP={kP!r} "
            f"(needs P/N0 > 2^(2kP) - 1)")
    if not share > spread:
        raise ValueError(
            f"d is undefined: share rate {share!r} <= spread rate {spread!r} at g12={g12!r}")
    return (share - kP) / (share - spread)


def secondary_best_response(primary: SeqAction, g12: float) -> SeqAction:
    if primary is SeqAction.SP:
        return SeqAction.SP
    return SeqAction.SH if g12 > 0.5 else SeqAction.SP


@dataclass(frozen=True)
class SbgiEquilibrium:
    primary_action: SeqAction
    secondary_action: SeqAction
    primary_payoff: float
    secondary_payoff: float

    def record(self) -> dict:
        out = asdict(self)
        out["primary_action"] = self.primary_action.value
        out["secondary_action"] = self.secondary_action.value
        return out


def sbgi_equilibrium(params: GameParams, g12: float, g21: float) -> SbgiEquilibrium:
    """Backward-induction outcome once both cross gains are realized.

    Rates are the gross Shannon rates; the entry cost is not included.
    """
    if g12 > 0.5 and g21 > g_star(params):
        share = share_rate(params)
        return SbgiEquilibrium(SeqAction.SH, SeqAction.SH, share, share)
    return SbgiEquilibrium(SeqAction.SP, SeqAction.SP,
                           spread_rate(params, g21), spread_rate(params, g12))


@dataclass(frozen=True)
class SbgiEEquilibrium:
    entry: EntryAction
    post_entry: SbgiEquilibrium | None
    secondary_expected_payoff: float
    entry_value: float
    rho: float
    d: float | None
    primary_payoff: float
    secondary_payoff: float

    def record(self) -> dict:
        out = {
            "entry": self.entry.value,
            "primary_action": self.post_entry.primary_action.value if self.post_entry else "",
            "secondary_action": self.post_entry.secondary_action.value if self.post_entry else "",
            "secondary_expected_payoff": self.secondary_expected_payoff,
            "entry_value": self.entry_value,
            "rho": self.rho,
            "d": self.d,
            "primary_payoff": self.primary_payoff,
            "secondary_payoff": self.secondary_payoff,
        }
        return out


def monopoly_rate(params: GameParams) -> float:
    """Primary's rate when the secondary stays out (full band, no interference)."""
    return math.log2(1.0 + params.power_budget / (2.0 * params.noise_density))


def sbgie_equilibrium(params: GameParams, g12: float, g21: float,
                      prior_g21: GainDistribution) -> SbgiEEquilibrium:
    """Entry decision followed by SBGI play.

    `entry_value` is the secondary's expected net payoff from entering given
    its prior; `secondary_expected_payoff` is that value if it enters and 0
    otherwise. Realized payoffs include the -kP entry cost.
    """
    if not assumption_two_holds(params):
        raise ValueError(
            f"entry cost kP={params.entry_cost!r} is not below the share rate "
            f"{share_rate(params)!r}")
    if not (g12 > 0 and g21 > 0):
        raise ValueError(f"cross gains must be positive, got g12={g12}, g21={g21}")
    kP = params.entry_cost
    share, spread = share_rate(params), spread_rate(params, g12)
    rho = cdf(prior_g21, g_star(params))
    d = None
    if g12 <= 0.5:
        # the primary always spreads after entry
        entry_value = spread - kP
        enter = spread > kP
    else:
        d = entry_cutoff_d(params, g12)
        entry_value = rho * spread + (1 - rho) * share - kP
        enter = g12 < g12_tilde(params) or rho < d
    if not enter:
        return SbgiEEquilibrium(EntryAction.X, None, 0.0, entry_value, rho, d,
                                monopoly_rate(params), 0.0)
    play = sbgi_equilibrium(params, g12, g21)
    return SbgiEEquilibrium(EntryAction.N, play, entry_value, entry_value, rho, d,
                            play.primary_payoff, play.secondary_payoff - kP)
