"""Exact combinatorics for random cones.

Every quantity here is an exact integer or a :class:`fractions.Fraction`;
floats only appear in :func:`log_of_rational`.  ``P(d, N)`` below denotes the
Wendel probability that ``N`` symmetric random points in general position in
``R^d`` lie in a common open halfspace.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

Model = Literal["dt", "ce"]
MODELS = ("dt", "ce")


class InvalidConeIndex(ValueError):
    """Raised when a (d, N, k) triple violates ``1 <= k < d < N``."""


@dataclass(frozen=True)
class ConeIndex:
    """Dimension ``d``, number of generators ``N`` and face dimension ``k``."""

    d: int
    N: int
    k: int

    def __post_init__(self) -> None:
        for name in ("d", "N", "k"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise InvalidConeIndex(f"{name} must be an integer, got {value!r}")
        if self.k < 1:
            raise InvalidConeIndex(f"violates k >= 1 (k={self.k})")
        if not self.k < self.d:
            raise InvalidConeIndex(f"violates k < d (k={self.k}, d={self.d})")
        if not self.d < self.N:
            raise InvalidConeIndex(f"violates d < N (d={self.d}, N={self.N})")

    @property
    def delta(self) -> Fraction:
        return Fraction(self.d, self.N)

    @property
    def rho(self) -> Fraction:
        return Fraction(self.k, self.d)


class BinomialCache:
    """Immutable Pascal triangle for ``0 <= n <= max_n``.

    Rows are built once at construction; requests outside the table fall
    back to :func:`math.comb`.
    """

    def __init__(self, max_n: int = 128):
        if max_n < 0:
            raise ValueError("max_n must be non-negative")
        rows = [(1,)]
        for _ in range(max_n):
            prev = rows[-1]
            rows.append((1,) + tuple(a + b for a, b in zip(prev, prev[1:])) + (1,))
        self._rows = tuple(rows)
        self.max_n = max_n

    def __call__(self, n: int, m: int) -> int:
        if n < 0:
            raise ValueError(f"n must be non-negative, got {n}")
        if m < 0 or m > n:
            return 0
        if n <= self.max_n:
            return self._rows[n][m]
        return math.comb(n, m)

    def row(self, n: int) -> tuple[int, ...]:
        if n <= self.max_n:
            return self._rows[n]
        return tuple(math.comb(n, m) for m in range(n + 1))


_CACHE = BinomialCache()


def binomial(n: int, m: int) -> int:
    """C(n, m), zero when ``m`` is outside ``[0, n]``."""
    return _CACHE(n, m)


def binom_partial_sum(n: int, m: int) -> int:
    """Sum of C(n, i) for ``0 <= i <= m``."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if m < 0:
        return 0
    if m >= n:
        return 1 << n
    if n <= _CACHE.max_n:
        return sum(_CACHE.row(n)[: m + 1])
    total = term = 1
    for i in range(1, m + 1):
        term = term * (n - i + 1) // i
        total += term
    return total


def wendel_count(N: int, d: int) -> int:
    """Number of regions cut out by N hyperplanes in general position: 2 * sum_{i<d} C(N-1, i)."""
    if d <= 0 or N <= 0:
        raise ValueError(f"require d >= 1 and N >= 1, got d={d}, N={N}")
    return 2 * binom_partial_sum(N - 1, d - 1)


def wendel_probability(d: int, N: int) -> Fraction:
    """Exact P(d, N) = C(N, d) / 2^N.

    For ``d >= N`` the points are linearly independent and never cover
    ``R^d``, so the result is exactly 1.
    """
    if d <= 0 or N <= 0:
        raise ValueError(f"require d >= 1 and N >= 1, got d={d}, N={N}")
    if d >= N:
        return Fraction(1)
    return Fraction(wendel_count(N, d), 1 << N)


def quotient_dt(idx: ConeIndex) -> Fraction:
    """E f_k(D_N) / C(N, k) = P(d-k, N-k)."""
    return wendel_probability(idx.d - idx.k, idx.N - idx.k)


def quotient_ce(idx: ConeIndex) -> Fraction:
    """E f_k(C_N) / C(N, k) = P(d-k, N-k) / P(d, N)."""
    return quotient_dt(idx) / wendel_probability(idx.d, idx.N)


def quotient_ce_closed_form(idx: ConeIndex) -> Fraction:
    """Same value as :func:`quotient_ce`, via 2^k C(N-k, d-k) / C(N, d)."""
    d, N, k = idx.d, idx.N, idx.k
    return Fraction(wendel_count(N - k, d - k) << k, wendel_count(N, d))


def expected_faces(idx: ConeIndex, model: Model) -> Fraction:
    return binomial(idx.N, idx.k) * _quotient(idx, model)


def difference(idx: ConeIndex, model: Model) -> Fraction:
    """C(N, k) - E f_k for the chosen cone model.

    The DT branch uses the complement ``1 - P(d-k, N-k) = P(N-d, N-k)`` so
    that the result is built from a single small tail sum.
    """
    n_k = binomial(idx.N, idx.k)
    if model == "dt":
        return n_k * wendel_probability(idx.N - idx.d, idx.N - idx.k)
    if model == "ce":
        return n_k * (1 - quotient_ce(idx))
    raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")


def ce_upper_bound(d: int, k: int) -> Fraction:
    """(2^d - 2^k) / (2^d - 1), attained by the CE quotient exactly at N = d + 1."""
    if not 0 < k < d:
        raise ValueError(f"require 0 < k < d, got k={k}, d={d}")
    return Fraction((1 << d) - (1 << k), (1 << d) - 1)


def partial_sum_sj(d: int, N: int, j: int) -> int:
    """S_j = sum_{i=0}^{d-j-2} C(N-j-1, i), with S_j = 0 once j >= d - 1."""
    if not N > d:
        raise ValueError(f"require N > d, got N={N}, d={d}")
    if j < 0:
        raise ValueError(f"require j >= 0, got {j}")
    if j >= d - 1:
        return 0
    return binom_partial_sum(N - j - 1, d - j - 2)


def log_of_rational(x: Fraction | int, rel_err: float = 1e-12) -> float:
    """Natural log of a positive rational of any size.

    The value is split as ``m * 2^e`` with ``m`` in ``[1/2, 2)`` obtained by a
    correctly rounded integer division, so only ``log(m)`` and ``e*log(2)``
    touch floating point.  Near 1 the log is taken via ``log1p`` to keep the
    error relative.  Achieved relative error is a few ulps.
    """
    if rel_err < 1e-15:
        raise ValueError(f"rel_err={rel_err} is below binary64 resolution")
    x = Fraction(x)
    if x <= 0:
        raise ValueError(f"log of non-positive value {x}")
    num, den = x.numerator, x.denominator
    if Fraction(1, 2) <= x <= 2:
        return math.log1p((num - den) / den)
    e = num.bit_length() - den.bit_length()
    if e >= 0:
        mantissa = num / (den << e)
    else:
        mantissa = (num << -e) / den
    return math.log(mantissa) + e * math.log(2)


def _quotient(idx: ConeIndex, model: Model) -> Fraction:
    if model == "dt":
        return quotient_dt(idx)
    if model == "ce":
        return quotient_ce(idx)
    raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
