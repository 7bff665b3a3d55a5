"""Asymptotic side: entropy exponents, thresholds, Gaussian window limits.

Floating-point throughout, except where an exact quantity from
:mod:`randcone.bigcomb` enters an envelope (then it is taken in log-space).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Literal

import mpmath

from randcone.bigcomb import ConeIndex, Model, difference, log_of_rational

LOG2 = math.log(2.0)
STIRLING_MAX_N = 5000

WindowMode = Literal["sqrt-window", "upper-power", "two-sided-power", "lower-power"]


class RootFindingError(ArithmeticError):
    """A bracketing root solve could not find a sign change."""


@dataclass(frozen=True)
class RegimeParams:
    delta: float
    rho: float

    def __post_init__(self) -> None:
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")


@dataclass(frozen=True)
class DerivedRatios:
    """tau = delta * rho and sigma = (1 - delta) / (1 - tau) of a concrete index."""

    tau: float
    sigma: float

    @classmethod
    def from_index(cls, idx: ConeIndex) -> "DerivedRatios":
        tau = Fraction(idx.k, idx.N)
        sigma = Fraction(idx.N - idx.d, idx.N - idx.k)
        return cls(float(tau), float(sigma))


@dataclass(frozen=True)
class WindowSpec:
    """Law for ``N - 2d + k``: ``c * sqrt(d)`` or ``c * d**alpha``."""

    c: float
    alpha: float = 0.5
    mode: WindowMode = "sqrt-window"

    def __post_init__(self) -> None:
        if self.mode == "sqrt-window":
            if self.alpha != 0.5:
                raise ValueError("sqrt-window requires alpha = 1/2")
        elif self.mode in ("upper-power", "lower-power"):
            if not 0.5 < self.alpha < 1.0:
                raise ValueError(f"{self.mode} requires 1/2 < alpha < 1, got {self.alpha}")
            if self.mode == "upper-power" and not self.c > 0:
                raise ValueError("upper-power requires c > 0")
            if self.mode == "lower-power" and not self.c < 0:
                raise ValueError("lower-power requires c < 0")
        elif self.mode == "two-sided-power":
            if not 0.0 < self.alpha < 0.5:
                raise ValueError(f"two-sided-power requires 0 < alpha < 1/2, got {self.alpha}")
        else:
            raise ValueError(f"unknown window mode {self.mode!r}")


def entropy_h(x: float) -> float:
    """Binary entropy in nats, with H(0) = H(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"entropy argument must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log(x) - (1.0 - x) * math.log1p(-x)


def g_exponent(delta: float, rho: float) -> float:
    """G(delta, rho) = H(delta) + delta*H(rho) - (1 - rho*delta) log 2."""
    _check_unit(delta=delta, rho=rho)
    return entropy_h(delta) + delta * entropy_h(rho) - (1.0 - rho * delta) * LOG2


def g_exponent_split(delta: float, rho: float) -> float:
    """G written through tau = delta*rho and sigma = (1-delta)/(1-tau).

    This is the form that falls out of the Stirling expansion of the DT
    difference; it must agree with :func:`g_exponent`.
    """
    _check_unit(delta=delta, rho=rho)
    tau = delta * rho
    if tau == 1.0:
        return entropy_h(1.0)
    sigma = (1.0 - delta) / (1.0 - tau)
    return entropy_h(tau) + (1.0 - tau) * entropy_h(sigma) - (1.0 - tau) * LOG2


def rho_weak(delta: float) -> float:
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return max(0.0, 2.0 - 1.0 / delta)


def bisect_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 0.0,
                max_iter: int = 200) -> float:
    """Bisection on a sign-change bracket; stops when ``|f| <= tol`` or the bracket collapses."""
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo < 0) == (f_hi < 0):
        raise RootFindingError(f"no sign change on [{lo}, {hi}]: f={f_lo}, {f_hi}")
    best, best_val = (lo, f_lo) if abs(f_lo) < abs(f_hi) else (hi, f_hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = f(mid)
        if abs(f_mid) < abs(best_val):
            best, best_val = mid, f_mid
        if f_mid == 0.0 or abs(f_mid) <= tol:
            return mid
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return best


def rho_strong(delta: float, tol: float = 1e-13) -> float:
    """Unique zero of ``G(delta, .)`` on [0, 1] for 1/2 < delta < 1."""
    if not 0.5 < delta < 1.0:
        raise ValueError(f"rho_strong needs 1/2 < delta < 1, got {delta}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    root = bisect_root(lambda r: g_exponent(delta, r), 0.0, 1.0 - 1e-12, tol=tol)
    residual = g_exponent(delta, root)
    if abs(residual) > tol:
        raise RootFindingError(f"residual {residual:.3e} exceeds tol {tol:.1e} at delta={delta}")
    return root


def normal_cdf(x: float) -> float:
    """Standard normal distribution function via the complementary error function."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def window_limit_ce(rho: float, c: float) -> float:
    """Limit of the CE quotient when N - 2d + k ~ c sqrt(d): Phi(-c / sqrt(2(1-rho)))."""
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    return normal_cdf(-c / math.sqrt(2.0 * (1.0 - rho)))


def window_limit_wendel(c: float) -> float:
    """Limit of P(d, N) when N - 2d ~ c sqrt(d)."""
    return normal_cdf(-c / math.sqrt(2.0))


def window_limit_ratio(c: float, b: float) -> float:
    """CE quotient limit for delta = 1/2 with N - 2d ~ c sqrt(d) and k ~ b sqrt(d)."""
    return normal_cdf(-(c + b) / math.sqrt(2.0)) / normal_cdf(-c / math.sqrt(2.0))


def okamoto_upper_tail_bound(d: int, N: int) -> float:
    """Bound exp(-2 (d/(N-1) - 1/2)^2 (N-1)) on P(xi_{N-1} >= d) = 1 - P(d, N).

    Requires d/(N-1) > 1/2, checked on integers.
    """
    if N < 2 or not 2 * d > N - 1:
        raise ValueError(f"upper-tail bound needs d/(N-1) > 1/2, got d={d}, N={N}")
    n = N - 1
    gap = Fraction(d, n) - Fraction(1, 2)
    return math.exp(-2.0 * float(gap * gap * n))


def okamoto_lower_tail_bound(d: int, N: int) -> float:
    """Bound exp(-2 ((d-1)/(N-1) - 1/2)^2 (N-1)) on P(xi_{N-1} <= d-1) = P(d, N).

    Requires (d-1)/(N-1) < 1/2, checked on integers.
    """
    if N < 2 or d < 1 or not 2 * (d - 1) < N - 1:
        raise ValueError(f"lower-tail bound needs (d-1)/(N-1) < 1/2, got d={d}, N={N}")
    n = N - 1
    gap = Fraction(d - 1, n) - Fraction(1, 2)
    return math.exp(-2.0 * float(gap * gap * n))


def stirling_theta(n: int) -> float:
    """theta(n) in n! = sqrt(2 pi n) e^{-n} n^n e^{theta/(12n)}.

    The remainder log n! - (n log n - n + log(2 pi n)/2) is about 1/(12n),
    which binary64 cannot resolve to the needed relative accuracy for large
    n, so the log of the exact factorial is taken at 60 digits.
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if n > STIRLING_MAX_N:
        raise OverflowError(f"stirling_theta is capped at n <= {STIRLING_MAX_N}")
    with mpmath.workdps(60):
        nn = mpmath.mpf(n)
        log_fact = mpmath.log(mpmath.mpf(math.factorial(n)))
        rest = log_fact - (nn * mpmath.log(nn) - nn + mpmath.log(2 * mpmath.pi * nn) / 2)
        return float(12 * nn * rest)


def difference_envelope(idx: ConeIndex, model: Model) -> float:
    """g(d) (DT) or h(d) (CE): N * exp(-N G(delta_d, rho_d)) * (C(N,k) - E f_k).

    Evaluated in log-space so that huge binomials never become floats.
    """
    delta_d = Fraction(idx.d, idx.N)
    rho_d = Fraction(idx.k, idx.d)
    if not Fraction(1, 2) < delta_d < 1:
        raise ValueError(f"envelope needs 1/2 < d/N < 1, got d/N={float(delta_d)}")
    if not rho_d < 2 - 1 / delta_d:
        raise ValueError(f"envelope needs k/d below the weak threshold, got k/d={float(rho_d)}")
    diff = difference(idx, model)
    if diff <= 0:
        raise ValueError(f"difference is not positive for {idx}")
    exponent = (math.log(idx.N) + log_of_rational(diff)
                - idx.N * g_exponent(float(delta_d), float(rho_d)))
    return math.exp(exponent)


def _check_unit(**values: float) -> None:
    for name, value in values.items():
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {value}")
