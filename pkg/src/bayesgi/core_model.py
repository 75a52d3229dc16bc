"""Two-user Gaussian interference model: parameters, gains, actions and rates.

Rates are Shannon capacities in bits (log base 2), with the factor 1/2 per
real subchannel kept as is. Interference at user i's receiver in subchannel
k comes from the *opponent's* power in that subchannel.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

POWER_RTOL = 1e-12


@dataclass(frozen=True)
class GameParams:
    """Exogenous scalars shared by every game.

    power_budget is P, noise_density is N0, subchannels is K and
    power_cost_coeff is k (the secondary pays k*P on entry).
    """

    power_budget: float = 1.0
    noise_density: float = 0.01
    subchannels: int = 2
    power_cost_coeff: float = 0.0

    def __post_init__(self):
        if not self.power_budget > 0:
            raise ValueError(f"power_budget must be > 0, got {self.power_budget}")
        if not self.noise_density > 0:
            raise ValueError(f"noise_density must be > 0, got {self.noise_density}")
        if int(self.subchannels) != self.subchannels or self.subchannels < 1:
            raise ValueError(f"subchannels must be an integer >= 1, got {self.subchannels}")
        if not self.power_cost_coeff >= 0:
            raise ValueError(f"power_cost_coeff must be >= 0, got {self.power_cost_coeff}")

    @property
    def snr(self) -> float:
        return self.power_budget / self.noise_density

    @property
    def entry_cost(self) -> float:
        """k*P, the secondary's cost of entering."""
        return self.power_cost_coeff * self.power_budget


@dataclass(frozen=True)
class ChannelGains:
    """Power gains g_ij from transmitter i to receiver j.

    Self gains must be positive. Cross gains may be zero, which models an
    interference-free link.
    """

    g11: float = 1.0
    g12: float = 1.0
    g21: float = 1.0
    g22: float = 1.0

    def __post_init__(self):
        for name in ("g11", "g22"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("g12", "g21"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")

    def own(self, player: int) -> tuple[float, float]:
        """(self gain, incident gain) as seen by `player`."""
        if player == 1:
            return self.g11, self.g21
        if player == 2:
            return self.g22, self.g12
        raise ValueError(f"player must be 1 or 2, got {player}")


class SeqAction(str, enum.Enum):
    SH = "SH"
    SP = "SP"


class EntryAction(str, enum.Enum):
    N = "N"
    X = "X"


@dataclass(frozen=True)
class RestrictedAction:
    """Either all power in one subchannel (1-based index) or an even spread."""

    subchannel: int | None = None

    @classmethod
    def concentrate(cls, k: int) -> "RestrictedAction":
        if int(k) != k or k < 1:
            raise ValueError(f"subchannel index must be >= 1, got {k}")
        return cls(int(k))

    @classmethod
    def spread(cls) -> "RestrictedAction":
        return cls(None)

    @property
    def is_spread(self) -> bool:
        return self.subchannel is None

    def __str__(self):
        return "spread" if self.is_spread else f"concentrate({self.subchannel})"


def validate_allocation(alloc: Sequence[float], params: GameParams) -> np.ndarray:
    """Return `alloc` as an array after checking length, sign and budget."""
    a = np.asarray(alloc, dtype=float)
    if a.ndim != 1 or a.shape[0] != params.subchannels:
        raise ValueError(
            f"allocation has shape {a.shape}, expected ({params.subchannels},)")
    if np.any(a < 0) or not np.all(np.isfinite(a)):
        raise ValueError(f"allocation entries must be finite and >= 0: {a}")
    if a.sum() > params.power_budget * (1 + POWER_RTOL):
        raise ValueError(
            f"allocation uses {a.sum()!r} > power budget {params.power_budget!r}")
    return a


def to_allocation(action: RestrictedAction, params: GameParams) -> np.ndarray:
    K, P = params.subchannels, params.power_budget
    if action.is_spread:
        return np.full(K, P / K)
    if action.subchannel > K:
        raise ValueError(f"subchannel {action.subchannel} out of range 1..{K}")
    out = np.zeros(K)
    out[action.subchannel - 1] = P
    return out


def rate(g_self: float, signal, g_cross: float, interference, noise: float):
    """Per-subchannel rate 1/2*log2(1 + g_self*s / (noise + g_cross*i)).

    Works elementwise on arrays.
    """
    return 0.5 * np.log2(1.0 + g_self * signal / (noise + g_cross * interference))


def payoff(params: GameParams, gains: ChannelGains, own, other, player: int) -> float:
    """Shannon rate of `player` given its own and the opponent's allocation."""
    own = validate_allocation(own, params)
    other = validate_allocation(other, params)
    g_self, g_cross = gains.own(player)
    return float(np.sum(rate(g_self, own, g_cross, other, params.noise_density)))


def share_rate(params: GameParams) -> float:
    """Rate when both users concentrate in disjoint subchannels."""
    return 0.5 * math.log2(1.0 + params.snr)


def spread_rate(params: GameParams, incident_gain: float) -> float:
    """Rate when both users spread evenly over two subchannels (unit self gain)."""
    P, N0 = params.power_budget, params.noise_density
    return math.log2(1.0 + (P / 2) / (N0 + incident_gain * P / 2))


def joint_rates(params: GameParams, gains: ChannelGains, player: int) -> tuple[float, float]:
    """(share rate, spread rate) of `player` with self gain normalized to 1."""
    _, g_cross = gains.own(player)
    return share_rate(params), spread_rate(params, g_cross)
