"""Polynomials in marker variables with exact rational coefficients.

A ``UPoly`` is a polynomial in one marker variable. Several markers nest:
the coefficients of a UPoly in ``v1`` may themselves be UPolys in ``v2``.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Union

Scalar = Union[int, Fraction]
Coeff = Union[int, Fraction, "UPoly"]


def _as_coeff(c):
    if isinstance(c, UPoly):
        return c
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    raise TypeError(f"not an exact coefficient: {c!r}")


def _is_zero(c) -> bool:
    return (not c.coeffs) if isinstance(c, UPoly) else c == 0


class UPoly:
    """Immutable polynomial ``sum c_k v^k``; trailing zero coefficients are dropped."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Coeff] = ()):
        cs = [_as_coeff(c) for c in coeffs]
        while cs and _is_zero(cs[-1]):
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def var(cls) -> "UPoly":
        return cls([0, 1])

    @classmethod
    def constant(cls, c: Coeff) -> "UPoly":
        return cls([c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def depth(self) -> int:
        """Number of nested marker variables."""
        inner = max((c.depth for c in self.coeffs if isinstance(c, UPoly)), default=0)
        return 1 + inner

    def __getitem__(self, k: int):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return Fraction(0)

    def __iter__(self):
        return iter(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, UPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return not self.coeffs
            return len(self.coeffs) == 1 and self.coeffs[0] == other
        return NotImplemented

    def __hash__(self):
        if len(self.coeffs) <= 1:
            return hash(self.coeffs[0] if self.coeffs else Fraction(0))
        return hash(self.coeffs)

    def __repr__(self):
        return f"UPoly({list(self.coeffs)!r})"

    def __add__(self, other):
        if not isinstance(other, UPoly):
            other = UPoly([other])
        n = max(len(self.coeffs), len(other.coeffs))
        return UPoly(self[k] + other[k] for k in range(n))

    __radd__ = __add__

    def __neg__(self):
        return UPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, UPoly):
            if isinstance(other, (int, Fraction)):
                return UPoly(c * other for c in self.coeffs)
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return UPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if _is_zero(a):
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return UPoly(out)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return UPoly(c / Fraction(other) for c in self.coeffs)
        return NotImplemented

    def __pow__(self, k: int):
        out = UPoly([1])
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, *values):
        """Evaluate at ``v1 = values[0]``; nested markers take the following values."""
        if not values:
            raise TypeError("need a value for the marker")
        x, rest = values[0], values[1:]
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            if isinstance(c, UPoly):
                c = c(*rest) if rest else c
            acc = acc * x + c
        return acc

    def derivative(self) -> "UPoly":
        return UPoly(k * c for k, c in enumerate(self.coeffs) if k)
