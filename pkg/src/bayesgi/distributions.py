"""Priors over channel gains: cdf, inverse-cdf sampling and expectations.

Sampling uses numpy's PCG64 bit generator seeded with a 64-bit integer and
inverse-cdf transforms of ``Generator.random`` draws, so a (distribution,
seed, n) triple gives the same numbers on every platform. Independent
streams for several gains or runs come from :func:`derive_seed`.
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

SEED_MAX = 2**64


def check_seed(seed: int) -> int:
    if int(seed) != seed or not 0 <= seed < SEED_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def derive_seed(master: int, index: int) -> int:
    """Child seed number `index` of `master` (numpy SeedSequence spawn key)."""
    ss = np.random.SeedSequence(check_seed(master), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(check_seed(seed)))


class GainDistribution:
    """Base class. Subclasses implement cdf, ppf and quadrature_rule."""

    lo: float
    hi: float

    @property
    def support(self) -> tuple[float, float]:
        return self.lo, self.hi

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.hi)

    def cdf(self, x):
        raise NotImplementedError

    def ppf(self, u):
        raise NotImplementedError

    def quadrature_rule(self, order: int) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and probability weights for E[f(g)] ~ sum(w * f(nodes))."""
        raise NotImplementedError

    def literal(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.literal()


@functools.lru_cache(maxsize=None)
def _legendre_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def _gauss_legendre(lo: float, hi: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = _legendre_nodes(int(order))
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


@dataclass(frozen=True)
class Uniform(GainDistribution):
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("uniform bounds must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"uniform requires lo < hi, got lo={self.lo}, hi={self.hi}")
        if self.lo < 0:
            raise ValueError(f"gain support must be nonnegative, got lo={self.lo}")

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.lo) / (self.hi - self.lo), 0.0, 1.0)[()]

    def ppf(self, u):
        return self.lo + np.asarray(u, dtype=float) * (self.hi - self.lo)

    def quadrature_rule(self, order):
        x, w = _gauss_legendre(self.lo, self.hi, order)
        return x, w / (self.hi - self.lo)

    def literal(self):
        return f"uniform({self.lo!r},{self.hi!r})"


@dataclass(frozen=True)
class TruncatedExponential(GainDistribution):
    """Exponential(rate) shifted to start at lo and truncated at hi (hi may be inf)."""

    rate: float
    lo: float = 0.0
    hi: float = math.inf

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"exponential rate must be > 0, got {self.rate}")
        if not (math.isfinite(self.lo) and self.lo >= 0):
            raise ValueError(f"gain support must be nonnegative, got lo={self.lo}")
        if not self.lo < self.hi:
            raise ValueError(f"texp requires lo < hi, got lo={self.lo}, hi={self.hi}")

    @property
    def _mass(self) -> float:
        return -math.expm1(-self.rate * (self.hi - self.lo))

    def cdf(self, x):
        z = np.clip(np.asarray(x, dtype=float), self.lo, self.hi) - self.lo
        return np.clip(-np.expm1(-self.rate * z) / self._mass, 0.0, 1.0)[()]

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        return self.lo - np.log1p(-u * self._mass) / self.rate

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, self.rate * np.exp(-self.rate * (x - self.lo)) / self._mass, 0.0)

    def quadrature_rule(self, order):
        if not self.bounded:
            raise ValueError("quadrature needs a bounded support; truncate the exponential first")
        x, w = _gauss_legendre(self.lo, self.hi, order)
        return x, w * self.pdf(x)

    def literal(self):
        return f"texp({self.rate!r},{self.lo!r},{self.hi!r})"


@dataclass(frozen=True)
class Triangular(GainDistribution):
    lo: float
    mode: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.mode <= self.hi and self.lo < self.hi):
            raise ValueError(
                f"triangular requires lo <= mode <= hi and lo < hi, got "
                f"({self.lo}, {self.mode}, {self.hi})")
        if self.lo < 0 or not math.isfinite(self.hi):
            raise ValueError("triangular support must be finite and nonnegative")

    def cdf(self, x):
        a, c, b = self.lo, self.mode, self.hi
        x = np.clip(np.asarray(x, dtype=float), a, b)
        left = (x - a) ** 2 / ((b - a) * (c - a)) if c > a else np.zeros_like(x)
        right = 1.0 - (b - x) ** 2 / ((b - a) * (b - c)) if b > c else np.ones_like(x)
        return np.where(x <= c, left, right)[()]

    def ppf(self, u):
        a, c, b = self.lo, self.mode, self.hi
        u = np.asarray(u, dtype=float)
        split = (c - a) / (b - a)
        return np.where(u < split,
                        a + np.sqrt(u * (b - a) * (c - a)),
                        b - np.sqrt((1.0 - u) * (b - a) * (b - c)))

    def pdf(self, x):
        a, c, b = self.lo, self.mode, self.hi
        x = np.asarray(x, dtype=float)
        up = 2 * (x - a) / ((b - a) * (c - a)) if c > a else np.zeros_like(x)
        down = 2 * (b - x) / ((b - a) * (b - c)) if b > c else np.zeros_like(x)
        return np.where((x < a) | (x > b), 0.0, np.where(x <= c, up, down))

    def quadrature_rule(self, order):
        # the density has a kink at the mode, so integrate each side separately
        pieces = [(self.lo, self.mode), (self.mode, self.hi)]
        xs, ws = [], []
        for a, b in pieces:
            if b > a:
                x, w = _gauss_legendre(a, b, order)
                xs.append(x)
                ws.append(w * self.pdf(x))
        return np.concatenate(xs), np.concatenate(ws)

    def literal(self):
        return f"triangular({self.lo!r},{self.mode!r},{self.hi!r})"


@dataclass(frozen=True)
class PointMass(GainDistribution):
    value: float

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ValueError(f"point mass must be finite and >= 0, got {self.value}")

    @property
    def lo(self):
        return self.value

    @property
    def hi(self):
        return self.value

    def cdf(self, x):
        return np.where(np.asarray(x, dtype=float) >= self.value, 1.0, 0.0)[()]

    def ppf(self, u):
        return np.full(np.shape(u), self.value, dtype=float)

    def quadrature_rule(self, order):
        return np.array([self.value]), np.array([1.0])

    def literal(self):
        return f"point({self.value!r})"


@dataclass(frozen=True)
class Discrete(GainDistribution):
    values: tuple[float, ...]
    weights: tuple[float, ...]
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        weights = tuple(float(w) for w in self.weights)
        if len(values) == 0 or len(values) != len(weights):
            raise ValueError("discrete needs equally many (>= 1) values and weights")
        if any(not (math.isfinite(v) and v >= 0) for v in values):
            raise ValueError(f"discrete values must be finite and >= 0: {values}")
        if any(w < 0 for w in weights) or abs(math.fsum(weights) - 1.0) > 1e-12:
            raise ValueError(f"discrete weights must be >= 0 and sum to 1: {weights}")
        order = sorted(range(len(values)), key=values.__getitem__)
        object.__setattr__(self, "values", tuple(values[i] for i in order))
        object.__setattr__(self, "weights", tuple(weights[i] for i in order))
        object.__setattr__(self, "_cum", np.cumsum(self.weights))

    @property
    def lo(self):
        return self.values[0]

    @property
    def hi(self):
        return self.values[-1]

    def cdf(self, x):
        idx = np.searchsorted(np.asarray(self.values), np.asarray(x, dtype=float), side="right")
        cum = np.concatenate([[0.0], self._cum])
        return np.minimum(cum[idx], 1.0)[()]

    def ppf(self, u):
        idx = np.searchsorted(self._cum, np.asarray(u, dtype=float), side="right")
        idx = np.minimum(idx, len(self.values) - 1)
        return np.asarray(self.values)[idx]

    def quadrature_rule(self, order):
        return np.asarray(self.values), np.asarray(self.weights)

    def literal(self):
        body = ",".join(f"{v!r}:{w!r}" for v, w in zip(self.values, self.weights))
        return f"discrete({body})"


def cdf(dist: GainDistribution, x) -> float:
    return float(dist.cdf(x))


def prob_below(dist: GainDistribution, x: float) -> float:
    """P(g < x), strict. Differs from cdf only at atoms."""
    if isinstance(dist, PointMass):
        return 1.0 if dist.value < x else 0.0
    if isinstance(dist, Discrete):
        return min(1.0, math.fsum(w for v, w in zip(dist.values, dist.weights) if v < x))
    return cdf(dist, x)


def sample(dist: GainDistribution, seed: int, n: int) -> np.ndarray:
    """n i.i.d. draws; the same seed always gives the same array."""
    if int(n) != n or n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    return np.asarray(dist.ppf(rng(seed).random(int(n))), dtype=float)


@dataclass(frozen=True)
class Quadrature:
    order: int = 32


@dataclass(frozen=True)
class MonteCarlo:
    n: int = 100_000
    seed: int = 0


def expectation(dists: Sequence[GainDistribution], f: Callable[..., np.ndarray],
                method: Quadrature | MonteCarlo = Quadrature()) -> float:
    """E[f(g_1, ..., g_m)] for independent g_j ~ dists[j].

    `f` must accept m equally shaped arrays and evaluate elementwise.
    Quadrature uses a tensor product of per-distribution rules; Monte Carlo
    draws each coordinate from its own derived seed.
    """
    dists = list(dists)
    if isinstance(method, Quadrature):
        rules = [d.quadrature_rule(method.order) for d in dists]
        grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
        weights = np.ones_like(grids[0]) if grids else np.ones(())
        for j, (_, w) in enumerate(rules):
            shape = [1] * len(rules)
            shape[j] = w.shape[0]
            weights = weights * w.reshape(shape)
        return float(np.sum(weights * f(*grids)))
    if isinstance(method, MonteCarlo):
        draws = [sample(d, derive_seed(method.seed, j), method.n) for j, d in enumerate(dists)]
        return float(np.mean(f(*draws)))
    raise TypeError(f"unknown expectation method {method!r}")


_NUM = r"[-+]?(?:\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|inf)"
_LITERAL = re.compile(r"^\s*([a-z_]+)\s*\((.*)\)\s*$")


def parse_distribution(text: str) -> GainDistribution:
    """Parse a literal such as ``uniform(0,1)``, ``texp(2,0,inf)``,
    ``triangular(0,0.5,1)``, ``point(0.7)`` or ``discrete(0.1:0.5,0.9:0.5)``.

    Raises ValueError with a readable message on bad input.
    """
    m = _LITERAL.match(text)
    if not m:
        raise ValueError(f"not a distribution literal: {text!r}")
    kind, body = m.group(1), m.group(2).strip()
    if kind == "discrete":
        pairs = [p.strip() for p in body.split(",") if p.strip()]
        values, weights = [], []
        for p in pairs:
            parts = p.split(":")
            if len(parts) != 2 or not all(re.fullmatch(_NUM, s.strip()) for s in parts):
                raise ValueError(f"bad discrete entry {p!r} in {text!r}; expected value:weight")
            values.append(float(parts[0]))
            weights.append(float(parts[1]))
        return Discrete(tuple(values), tuple(weights))
    args = [a.strip() for a in body.split(",")] if body else []
    for a in args:
        if not re.fullmatch(_NUM, a):
            raise ValueError(f"bad number {a!r} in {text!r}")
    nums = [float(a) for a in args]
    arity = {"uniform": (2,), "texp": (1, 2, 3), "triangular": (3,), "point": (1,)}
    if kind not in arity:
        raise ValueError(f"unknown distribution kind {kind!r} in {text!r}")
    if len(nums) not in arity[kind]:
        raise ValueError(f"{kind} takes {arity[kind]} arguments, got {len(nums)} in {text!r}")
    if kind == "uniform":
        lo, hi = nums
        if not lo < hi:
            raise ValueError(f"uniform({lo},{hi}): lo >= hi")
        return Uniform(lo, hi)
    if kind == "texp":
        return TruncatedExponential(*nums)
    if kind == "triangular":
        return Triangular(*nums)
    return PointMass(nums[0])


@dataclass(frozen=True)
class GainPriors:
    """Independent priors for the four gains of the two-user channel."""

    g11: GainDistribution
    g12: GainDistribution
    g21: GainDistribution
    g22: GainDistribution

    def own(self, player: int) -> tuple[GainDistribution, GainDistribution]:
        """(self-gain prior, incident-gain prior) for `player`."""
        if player == 1:
            return self.g11, self.g21
        if player == 2:
            return self.g22, self.g12
        raise ValueError(f"player must be 1 or 2, got {player}")
