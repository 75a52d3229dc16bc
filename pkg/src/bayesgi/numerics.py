"""Scalar root finding and fixed-point iteration with explicit reports."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

DEFAULT_TOL = 1e-10


class NoSignChange(ValueError):
    """Raised when a bisection bracket does not straddle a root."""

    def __init__(self, lo, hi, f_lo, f_hi):
        self.lo, self.hi, self.f_lo, self.f_hi = lo, hi, f_lo, f_hi
        super().__init__(
            f"no sign change on [{lo!r}, {hi!r}]: f(lo)={f_lo!r}, f(hi)={f_hi!r}")


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class SolveReport:
    value: float
    iterations: int
    residual: float
    converged: bool
    width: float = 0.0


def bisect(f: Callable[[float], float], bracket: Bracket | tuple[float, float],
           tol: float = DEFAULT_TOL) -> SolveReport:
    """Bisection until the bracket is no wider than `tol`.

    The returned value is the endpoint with the smaller |f|; the residual is
    |f(value)| and `width` the final bracket width. Stops early on an exact
    zero or when the midpoint can no longer be represented between the
    endpoints (the bracket is then as tight as floats allow).
    """
    if not isinstance(bracket, Bracket):
        bracket = Bracket(*bracket)
    lo, hi = float(bracket.lo), float(bracket.hi)
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0:
        return SolveReport(lo, 0, 0.0, True)
    if f_hi == 0:
        return SolveReport(hi, 0, 0.0, True)
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi) or math.isnan(f_lo) or math.isnan(f_hi):
        raise NoSignChange(lo, hi, f_lo, f_hi)

    it = 0
    while hi - lo > tol:
        mid = lo + 0.5 * (hi - lo)
        if mid <= lo or mid >= hi:
            break
        it += 1
        f_mid = f(mid)
        if f_mid == 0:
            return SolveReport(mid, it, 0.0, True, 0.0)
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    root, res = (lo, f_lo) if abs(f_lo) <= abs(f_hi) else (hi, f_hi)
    return SolveReport(root, it, abs(res), True, hi - lo)


def fixed_point(g: Callable[[float], float], start: float, damping: float = 0.5,
                tol: float = DEFAULT_TOL, max_iter: int = 10_000) -> SolveReport:
    """Damped iteration x <- (1 - damping) * x + damping * g(x) on [0, 1].

    Converged means |g(x) - x| <= tol at the returned x. On failure the last
    iterate is returned with converged=False.
    """
    if not 0 < damping <= 1:
        raise ValueError(f"damping must lie in (0, 1], got {damping}")
    x = min(max(float(start), 0.0), 1.0)
    gx = g(x)
    for it in range(max_iter + 1):
        res = abs(gx - x)
        if res <= tol:
            return SolveReport(x, it, res, True)
        if it == max_iter:
            break
        x = min(max((1.0 - damping) * x + damping * gx, 0.0), 1.0)
        gx = g(x)
    return SolveReport(x, max_iter, abs(gx - x), False)
