"""Small exact combinatorial helpers."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    """Stirling numbers of the second kind."""
    if n == k:
        return 1
    if n == 0 or k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


@lru_cache(maxsize=None)
def stirling1(n: int, k: int) -> int:
    """Signed Stirling numbers of the first kind: ``(x)_n = sum s(n,k) x^k``."""
    if n == k:
        return 1
    if n == 0 or k == 0 or k > n:
        return 0
    return stirling1(n - 1, k - 1) - (n - 1) * stirling1(n - 1, k)


def falling(x, s: int):
    out = 1
    for i in range(s):
        out *= x - i
    return out


def rising(x, s: int):
    out = 1
    for i in range(s):
        out *= x + i
    return out


def gen_binomial(g, k: int) -> Fraction:
    """``C(g, k)`` for rational ``g``."""
    return Fraction(falling(Fraction(g), k), factorial(k))


def double_factorial(n: int) -> int:
    if n <= 0:
        return 1
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)
