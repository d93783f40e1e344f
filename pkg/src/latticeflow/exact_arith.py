"""Exact integer arithmetic primitives and the magnitude monitor.

Every number in this package is a plain Python ``int``; there is no
floating-point fallback anywhere. The helpers here pin down the two
rounding conventions the solver depends on (round-to-nearest with ties
toward +infinity, floor square root) and provide a monitor that tracks
the largest absolute value stored by a solve so the advertised magnitude
bound can be checked rather than assumed.
"""

from __future__ import annotations

import math
from typing import Iterable

from .errors import BoundViolationError

__all__ = [
    "round_nearest",
    "isqrt",
    "ceil_div",
    "gcd_all",
    "next_pow2",
    "BoundMonitor",
]


def round_nearest(p: int, q: int) -> int:
    """Return the integer nearest to p/q for q > 0.

    Ties (fractional part exactly 1/2) round toward +infinity, so
    ``round_nearest(7, 2) == 4`` and ``round_nearest(-3, 2) == -1``.
    Computed as floor((2p + q) / (2q)), which is exact for any signed p.
    """
    if q <= 0:
        raise ValueError(f"round_nearest requires q > 0, got {q}")
    return (2 * p + q) // (2 * q)


def isqrt(n: int) -> int:
    """Floor square root of a nonnegative integer."""
    if n < 0:
        raise ValueError(f"isqrt requires n >= 0, got {n}")
    return math.isqrt(n)


def ceil_div(p: int, q: int) -> int:
    """Ceiling of p/q for q > 0."""
    if q <= 0:
        raise ValueError(f"ceil_div requires q > 0, got {q}")
    return -(-p // q)


def gcd_all(values: Iterable[int]) -> int:
    """Nonnegative gcd of all entries; zeros are skipped, all-zero gives 0."""
    g = 0
    for v in values:
        g = math.gcd(g, v)
        if g == 1:
            return 1
    return g


def next_pow2(n: int) -> int:
    """Smallest power of two >= n (n >= 1)."""
    if n < 1:
        raise ValueError(f"next_pow2 requires n >= 1, got {n}")
    return 1 << (n - 1).bit_length()


class BoundMonitor:
    """Running maximum of |value| over everything a solve stores.

    ``limit`` is instance-derived. In strict mode any recorded value with
    absolute value above the limit raises :class:`BoundViolationError`;
    in log mode the maximum is tracked silently and can be inspected
    afterwards. The maximum is updated before the strict check so a
    violating value is still visible in ``max_seen``.
    """

    __slots__ = ("limit", "max_seen", "strict")

    def __init__(self, limit: int, strict: bool = True) -> None:
        self.limit = limit
        self.max_seen = 0
        self.strict = strict

    def record(self, value: int) -> None:
        a = -value if value < 0 else value
        if a > self.max_seen:
            self.max_seen = a
            if self.strict and a > self.limit:
                raise BoundViolationError(
                    f"integer magnitude {a} exceeds monitor limit {self.limit}"
                )

    def record_many(self, values: Iterable[int]) -> None:
        for v in values:
            self.record(v)
