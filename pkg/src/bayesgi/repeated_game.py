"""Finitely repeated entry game with a reputation effect.

Periods are numbered in reverse: t = T is played first and t = 1 last. The
secondary is myopic and tracks one number, mu = P(g21 < g* | history). A
primary with g21 < g* always spreads. A high-gain primary (g21 > g*) spreads
after entry while its reputation is high enough, mixes when it is not, and
shares in the last period. The secondary enters iff mu < d**t and mixes
with probability lambda when mu == d**t.

lambda is pinned down by the high-gain primary's indifference, so it
depends on that primary's spread rate. When the realized primary is a
low-gain type, the secondary's lambda is evaluated at the median high-gain
type of the prior on (g*, 1); see `RepeatedConfig.lambda_g21`.
"""

from __future__ import annotations

import csv
import dataclasses
import functools
import io
import itertools
import math
from dataclasses import dataclass, field

from .core_model import EntryAction, GameParams, SeqAction, share_rate, spread_rate
from .distributions import GainDistribution, cdf, check_seed, derive_seed, prob_below, rng
from .numerics import bisect
from .sequential_games import (assumption_two_holds, entry_cutoff_d, g12_tilde, g_star,
                               monopoly_rate, sbgi_equilibrium, sbgie_equilibrium)

TIE_RTOL = 1e-12


def _tie(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=TIE_RTOL, abs_tol=0.0)


def pi_zero(params: GameParams) -> float:
    """Primary's per-period rate when the secondary stays out."""
    return monopoly_rate(params)


def lambda_mix(params: GameParams, g21: float) -> float:
    """Entry probability at mu == d**t that keeps a g21-type primary indifferent."""
    if not g21 < 1:
        raise ValueError(
            f"lambda needs g21 < 1 (the prior must put all mass below 1), got g21={g21}")
    p0, share, spread = pi_zero(params), share_rate(params), spread_rate(params, g21)
    return 2.0 - (p0 - spread) / (p0 - share)


def gamma_mix(mu: float, d: float, t: int) -> float:
    """High-gain primary's spread probability after entry in period t > 1.

    Returns 1 when mu >= d**(t-1) (reputation already high enough).
    """
    if t <= 1:
        raise ValueError("in the last period a high-gain primary shares; gamma needs t > 1")
    if not 0 <= mu <= 1:
        raise ValueError(f"belief must lie in [0, 1], got {mu}")
    cut = d ** (t - 1)
    if mu >= cut or _tie(mu, cut):
        return 1.0
    return mu / (1 - mu) * (1 - cut) / cut


def belief_update(mu_prev: float, entry: EntryAction, action: SeqAction | None,
                  d: float, t: int) -> float:
    """Belief for period t after observing period t + 1's outcome."""
    if entry is EntryAction.X:
        return mu_prev
    if action is SeqAction.SP and mu_prev > 0:
        return max(d ** t, mu_prev)
    return 0.0


def bayes_posterior(mu_prev: float, spread_prob_high: float) -> float:
    """Explicit Bayes rule for P(low-gain | entry, SP)."""
    return mu_prev / (mu_prev + (1 - mu_prev) * spread_prob_high)


def entry_probability(mu: float, d: float, t: int, lam: float) -> float:
    cut = d ** t
    if _tie(mu, cut):
        return lam
    return 1.0 if mu < cut else 0.0


def secondary_entry(mu: float, d: float, t: int, lam: float, draw: float) -> EntryAction:
    if not 0 <= draw < 1:
        raise ValueError(f"draw must lie in [0, 1), got {draw}")
    return EntryAction.N if draw < entry_probability(mu, d, t, lam) else EntryAction.X


def spread_probability(g21: float, gstar: float, mu: float, d: float, t: int) -> float:
    """Probability that a g21-type primary spreads after entry in period t."""
    if g21 < gstar:
        return 1.0
    if t == 1:
        return 0.0
    return gamma_mix(mu, d, t)


def primary_response(g21: float, gstar: float, mu: float, d: float, t: int,
                     draw: float) -> SeqAction:
    if not 0 <= draw < 1:
        raise ValueError(f"draw must lie in [0, 1), got {draw}")
    return SeqAction.SP if draw < spread_probability(g21, gstar, mu, d, t) else SeqAction.SH


def deterrence_horizon(rho: float, d: float) -> float:
    """Approximate reverse index of the first entry, log(rho) / log(d)."""
    if not (0 < rho < 1 and 0 < d < 1):
        raise ValueError(f"need 0 < rho < 1 and 0 < d < 1, got rho={rho}, d={d}")
    return math.log(rho) / math.log(d)


def period_payoffs(params: GameParams, g12: float, g21: float, entry: EntryAction,
                   action: SeqAction | None) -> tuple[float, float]:
    """Per-period (primary, secondary) payoffs; the secondary pays kP on entry."""
    if entry is EntryAction.X:
        return pi_zero(params), 0.0
    kP = params.entry_cost
    if action is SeqAction.SH:
        s = share_rate(params)
        return s, s - kP
    return spread_rate(params, g21), spread_rate(params, g12) - kP


@dataclass(frozen=True)
class RepeatedConfig:
    horizon: int
    params: GameParams
    g12: float
    g21: float
    prior_g21: GainDistribution
    seed: int = 0
    lambda_g21: float | None = None

    def __post_init__(self):
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValueError(f"horizon must be an integer >= 1, got {self.horizon}")
        check_seed(self.seed)
        if not (self.g12 > 0 and self.g21 > 0):
            raise ValueError(f"cross gains must be positive, got g12={self.g12}, g21={self.g21}")
        if not assumption_two_holds(self.params):
            raise ValueError(
                f"entry cost kP={self.params.entry_cost!r} must be below the share rate "
                f"{share_rate(self.params)!r}")
        if self.reputation_regime:
            if prob_below(self.prior_g21, 1.0) < 1.0:
                raise ValueError("the g21 prior must put all its mass below 1")
            if not self.g21 < 1:
                raise ValueError(f"realized g21 must be < 1, got {self.g21}")

    @property
    def reputation_regime(self) -> bool:
        return self.g12 > 0.5 and self.g12 > g12_tilde(self.params)


@dataclass(frozen=True)
class Strategy:
    """Equilibrium constants for one configuration."""

    g_star: float
    rho: float
    d: float
    lam: float | None
    lambda_g21: float | None

    def enter_prob(self, mu: float, t: int) -> float:
        if self.lam is None:
            # no high-gain mass: mu is 1 and never ties with d**t < 1
            return entry_probability(mu, self.d, t, 0.0)
        return entry_probability(mu, self.d, t, self.lam)


def _median_high_type(prior: GainDistribution, gstar: float) -> float | None:
    lo_mass = cdf(prior, gstar)
    hi_mass = prob_below(prior, 1.0)
    if hi_mass - lo_mass <= 0:
        return None
    target = 0.5 * (lo_mass + hi_mass)
    return bisect(lambda x: cdf(prior, x) - target, (gstar, 1.0), 1e-14).value


def strategy_for(config: RepeatedConfig) -> Strategy:
    params = config.params
    gs = g_star(params)
    rho = cdf(config.prior_g21, gs)
    d = entry_cutoff_d(params, config.g12)
    ref = config.lambda_g21
    if ref is None:
        ref = config.g21 if gs < config.g21 < 1 else _median_high_type(config.prior_g21, gs)
    lam = lambda_mix(params, ref) if ref is not None else None
    return Strategy(gs, rho, d, lam, ref)


@dataclass(frozen=True)
class PeriodOutcome:
    t_reverse: int
    t_forward: int
    entry: EntryAction
    primary_action: SeqAction | None
    mu_before: float
    mu_after: float
    payoff1: float
    payoff2: float
    entry_draw: float
    primary_draw: float


CSV_COLUMNS = ["t_reverse", "t_forward", "entry", "primary_action", "mu_before", "mu_after",
               "payoff1", "payoff2"]


@dataclass
class SimulationTrace:
    config: RepeatedConfig
    periods: list[PeriodOutcome] = field(default_factory=list)
    regime: str = "reputation"
    strategy: Strategy | None = None

    @property
    def total_primary(self) -> float:
        return math.fsum(p.payoff1 for p in self.periods)

    @property
    def total_secondary(self) -> float:
        return math.fsum(p.payoff2 for p in self.periods)

    @property
    def deterrence_count(self) -> int:
        """Exit periods before the first entry."""
        n = 0
        for p in self.periods:
            if p.entry is EntryAction.N:
                break
            n += 1
        return n

    @property
    def first_entry_period(self) -> int | None:
        """Reverse index of the first period with entry, None if never."""
        for p in self.periods:
            if p.entry is EntryAction.N:
                return p.t_reverse
        return None

    @property
    def welfare(self) -> float:
        return self.total_primary + self.total_secondary

    @property
    def benchmark_welfare(self) -> float:
        """Both users transmit every period and play the one-shot SBGI outcome."""
        c = self.config
        play = sbgi_equilibrium(c.params, c.g12, c.g21)
        per = play.primary_payoff + play.secondary_payoff - c.params.entry_cost
        return c.horizon * per

    @property
    def efficiency_ratio(self) -> float:
        return self.welfare / self.benchmark_welfare

    @property
    def t_star(self) -> float | None:
        s = self.strategy
        if s is None or not (0 < s.rho < 1 and 0 < s.d < 1):
            return None
        return deterrence_horizon(s.rho, s.d)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for p in self.periods:
            w.writerow([p.t_reverse, p.t_forward, p.entry.value,
                        p.primary_action.value if p.primary_action else "",
                        repr(p.mu_before), repr(p.mu_after), repr(p.payoff1), repr(p.payoff2)])
        return buf.getvalue()

    def summary(self) -> dict:
        s = self.strategy
        c = self.config
        return {
            "regime": self.regime,
            "horizon": c.horizon,
            "seed": c.seed,
            "g_star": g_star(c.params),
            "g12_tilde": g12_tilde(c.params),
            "rho": s.rho if s else cdf(c.prior_g21, g_star(c.params)),
            "d": s.d if s else None,
            "lambda": s.lam if s else None,
            "lambda_g21": s.lambda_g21 if s else None,
            "t_star": self.t_star,
            "total_primary": self.total_primary,
            "total_secondary": self.total_secondary,
            "deterrence_count": self.deterrence_count,
            "first_entry_period": self.first_entry_period,
            "welfare": self.welfare,
            "benchmark_welfare": self.benchmark_welfare,
            "efficiency_ratio": self.efficiency_ratio,
            "draws": [[p.entry_draw, p.primary_draw] for p in self.periods],
        }


def simulate(config: RepeatedConfig) -> SimulationTrace:
    """Play periods T..1 with logged uniform draws (two per period)."""
    params, T = config.params, config.horizon
    gen = rng(config.seed)
    trace = SimulationTrace(config)
    if not config.reputation_regime:
        # entry does not depend on beliefs here: repeat the one-shot equilibrium
        trace.regime = "static"
        rho = cdf(config.prior_g21, g_star(params))
        one_shot = sbgie_equilibrium(params, config.g12, config.g21, config.prior_g21)
        action = one_shot.post_entry.primary_action if one_shot.post_entry else None
        for i, t in enumerate(range(T, 0, -1)):
            u_entry, u_primary = (float(x) for x in gen.random(2))
            p1, p2 = period_payoffs(params, config.g12, config.g21, one_shot.entry, action)
            trace.periods.append(PeriodOutcome(t, i + 1, one_shot.entry, action, rho, rho,
                                               p1, p2, u_entry, u_primary))
        return trace

    strat = strategy_for(config)
    trace.strategy = strat
    mu = strat.rho
    for i, t in enumerate(range(T, 0, -1)):
        u_entry, u_primary = (float(x) for x in gen.random(2))
        entry = EntryAction.N if u_entry < strat.enter_prob(mu, t) else EntryAction.X
        action = None
        if entry is EntryAction.N:
            action = primary_response(config.g21, strat.g_star, mu, strat.d, t, u_primary)
        mu_next = belief_update(mu, entry, action, strat.d, t - 1)
        p1, p2 = period_payoffs(params, config.g12, config.g21, entry, action)
        trace.periods.append(PeriodOutcome(t, i + 1, entry, action, mu, mu_next, p1, p2,
                                           u_entry, u_primary))
        mu = mu_next
    return trace


@dataclass(frozen=True)
class DeviationReport:
    """Largest one-shot gains over all decision nodes of a T-period game."""

    primary_gain: float
    secondary_gain: float
    nodes: int


def deviation_search(config: RepeatedConfig) -> DeviationReport:
    """Exhaustive one-shot deviation check over every history.

    Continuation values are exact expectations over both players' mixing.
    The primary is the realized g21 type; the secondary is myopic, so its
    check compares the chosen entry probability with the sign of its
    expected entry payoff.
    """
    if not config.reputation_regime:
        raise ValueError("deviation search applies to the reputation regime")
    params, g21 = config.params, config.g21
    strat = strategy_for(config)
    d = strat.d
    p0, share1, spread1 = pi_zero(params), share_rate(params), spread_rate(params, g21)
    kP = params.entry_cost
    share2, spread2 = share_rate(params) - kP, spread_rate(params, config.g12) - kP

    @functools.lru_cache(maxsize=None)
    def value(t: int, mu: float) -> float:
        if t == 0:
            return 0.0
        e = strat.enter_prob(mu, t)
        return e * after_entry(t, mu)[2] + (1 - e) * (p0 + value(t - 1, mu))

    @functools.lru_cache(maxsize=None)
    def after_entry(t: int, mu: float) -> tuple[float, float, float]:
        sp = spread1 + value(t - 1, belief_update(mu, EntryAction.N, SeqAction.SP, d, t - 1))
        sh = share1 + value(t - 1, belief_update(mu, EntryAction.N, SeqAction.SH, d, t - 1))
        s = spread_probability(g21, strat.g_star, mu, d, t)
        return sp, sh, s * sp + (1 - s) * sh

    worst_primary, worst_secondary, nodes = 0.0, 0.0, 0

    def visit(t: int, mu: float):
        nonlocal worst_primary, worst_secondary, nodes
        if t == 0:
            return
        nodes += 1
        sp, sh, eq = after_entry(t, mu)
        worst_primary = max(worst_primary, max(sp, sh) - eq)

        # the secondary's forecast uses the high-gain type's strategy
        s_high = 0.0 if t == 1 else gamma_mix(mu, d, t)
        p_spread = mu + (1 - mu) * s_high
        gain_enter = p_spread * spread2 + (1 - p_spread) * share2
        e = strat.enter_prob(mu, t)
        worst_secondary = max(worst_secondary, max(gain_enter, 0.0) - e * gain_enter)

        for entry, action in ((EntryAction.X, None), (EntryAction.N, SeqAction.SH),
                              (EntryAction.N, SeqAction.SP)):
            visit(t - 1, belief_update(mu, entry, action, d, t - 1))

    visit(config.horizon, strat.rho)
    return DeviationReport(worst_primary, worst_secondary, nodes)


@dataclass(frozen=True)
class TwoPeriodSolution:
    g_star: float
    rho: float
    period1_cutoff: float
    lam: float
    gamma: float
    period2_threshold: float
    enter_period2: bool
    primary_gain: float
    secondary_gain: float
    spread_beats_share_twice: bool


def two_period_oracle(params: GameParams, g12: float, g21: float,
                      prior_g21: GainDistribution) -> TwoPeriodSolution:
    """Backward induction for T = 2 from the payoff table alone.

    Uses its own root finding for every cutoff, enumerates the high-gain
    primary's candidate period-2 behaviors (never, always, or mixing) and
    keeps the one that is a best response to the period-1 entry it
    induces. Finally measures one-shot deviation gains for both players.
    """
    if not (g12 > 0.5 and g12 > g12_tilde(params)):
        raise ValueError("the two-period oracle needs g12 > 1/2 and g12 > g12_tilde")
    if not g21 < 1:
        raise ValueError(f"need g21 < 1, got {g21}")
    kP = params.entry_cost
    S1 = share_rate(params)
    P0 = math.log2(1 + params.power_budget / (2 * params.noise_density))
    S2 = share_rate(params) - kP
    if not S2 > 0:
        raise ValueError("sharing must pay for the entry cost")

    # spread-vs-share crossover for the primary, by sign change
    gs = bisect(lambda g: spread_rate(params, g) - S1, (0.0, 1.0), 1e-15).value
    F1 = spread_rate(params, g21)
    F2 = spread_rate(params, g12) - kP
    rho = cdf(prior_g21, gs)

    # period 1: myopic secondary, high-gain primary shares after entry
    cutoff1 = S2 / (S2 - F2)

    def posterior_after_spread(r, gamma):
        return 0.0 if r == 0 else r / (r + (1 - r) * gamma)

    def entry1(mu):
        if math.isclose(mu, cutoff1, rel_tol=1e-12):
            return (F1 + P0 - 2 * S1) / (P0 - S1)
        return 1.0 if mu < cutoff1 else 0.0

    def primary_values(gamma):
        e = entry1(posterior_after_spread(rho, gamma))
        return F1 + e * S1 + (1 - e) * P0, 2 * S1

    candidates = [0.0, 1.0]
    if 0 < rho < cutoff1:
        candidates.append(bisect(lambda gm: posterior_after_spread(rho, gm) - cutoff1,
                                 (1e-300, 1.0), 1e-15).value)
    consistent = []
    for gm in candidates:
        sp, sh = primary_values(gm)
        if (gm == 1.0 and sp >= sh) or (gm == 0.0 and sh >= sp) or \
                (0 < gm < 1 and math.isclose(sp, sh, rel_tol=1e-9)):
            consistent.append(gm)
    if len(consistent) != 1:
        raise RuntimeError(f"expected a unique period-2 behavior, found {consistent}")
    gamma = consistent[0]
    lam = (F1 + P0 - 2 * S1) / (P0 - S1)

    def entry_value2(r):
        gm = r * (1 - cutoff1) / ((1 - r) * cutoff1) if r < cutoff1 else 1.0
        p = r + (1 - r) * gm
        return p * F2 + (1 - p) * S2

    threshold2 = bisect(entry_value2, (0.0, cutoff1), 1e-15).value
    value2 = entry_value2(rho)
    enter2 = value2 > 0

    sp, sh = primary_values(gamma)
    eq = gamma * sp + (1 - gamma) * sh
    primary_gain = max(max(sp, sh) - eq, max(F1 - S1, 0.0))
    secondary_gain = max(value2, 0.0) - (value2 if enter2 else 0.0)
    return TwoPeriodSolution(gs, rho, cutoff1, lam, gamma, threshold2, enter2,
                             primary_gain, secondary_gain, F1 + P0 > 2 * S1)


def strategy_parameters(config: RepeatedConfig) -> dict:
    """The T = 2 quantities the simulator uses, for comparison with the oracle."""
    s = strategy_for(config)
    return {
        "lambda": s.lam,
        "gamma": gamma_mix(s.rho, s.d, 2),
        "period1_cutoff": s.d,
        "period2_threshold": s.d ** 2,
        "enter_period2": entry_probability(s.rho, s.d, 2, s.lam or 0.0) == 1.0,
    }


def exhaustive_histories(T: int):
    """All outcome sequences of length T (mostly for tests)."""
    outcomes = [(EntryAction.X, None), (EntryAction.N, SeqAction.SH), (EntryAction.N, SeqAction.SP)]
    return itertools.product(outcomes, repeat=T)


def welfare_gap(trace: SimulationTrace) -> float:
    """Benchmark welfare minus equilibrium welfare."""
    return trace.benchmark_welfare - trace.welfare


def batch_simulate(config: RepeatedConfig, runs: int) -> list[SimulationTrace]:
    """Independent replications; run i uses derive_seed(config.seed, i)."""
    if int(runs) != runs or runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    return [simulate(dataclasses.replace(config, seed=derive_seed(config.seed, i)))
            for i in range(int(runs))]
