"""Expression trees for generating functions.

Components are written in a small grammar over ``z``: rational constants,
sums, products, ``reciprocal``, ``pow_binomial`` (``(1 + tail)^gamma``),
``quasi_inverse`` (``1/(1 - h)``), ``log_quasi_inverse`` (``log 1/(1 - h)``)
and ``compose``. An expression can be expanded at ``z`` to any order, or
evaluated with ``z`` replaced by another series, which is how ``G(H(z))`` is
computed without a generic composition. Expressions also differentiate
symbolically, giving ``G^(s)`` for the factorial moment formulas.
"""
from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Callable

from .errors import ValidationError
from .pseries import series as ps
from .pseries.series import Series


def _q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ValidationError("booleans are not numbers")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError as exc:
            raise ValidationError(f"bad rational {x!r}") from exc
    if isinstance(x, Decimal):
        return Fraction(x)
    if isinstance(x, float):
        raise ValidationError(f"floats are not exact; write {x!r} as a fraction string")
    raise ValidationError(f"bad rational {x!r}")


class Expr:
    """Base class; subclasses are frozen dataclasses (hashable, comparable)."""

    def series(self, order: int) -> Series:
        return self.at(Series.z(order))

    def at(self, inner: Series, cache: dict | None = None) -> Series:
        """Value with ``z`` replaced by ``inner`` (same order as ``inner``)."""
        if cache is None:
            cache = {}
        key = self
        hit = cache.get(key)
        if hit is not None:
            return hit
        out = self._eval(inner, cache)
        cache[key] = out
        return out

    def _eval(self, inner: Series, cache: dict) -> Series:
        raise NotImplementedError

    def derivative(self) -> "Expr":
        raise NotImplementedError

    def nth_derivative(self, s: int) -> "Expr":
        e = self
        for _ in range(s):
            e = e.derivative()
        return e

    def to_json(self):
        raise NotImplementedError

    # building helpers
    def __add__(self, other):
        return add(self, lift(other))

    def __radd__(self, other):
        return add(lift(other), self)

    def __sub__(self, other):
        return add(self, mul(Const(Fraction(-1)), lift(other)))

    def __rsub__(self, other):
        return add(lift(other), mul(Const(Fraction(-1)), self))

    def __neg__(self):
        return mul(Const(Fraction(-1)), self)

    def __mul__(self, other):
        return mul(self, lift(other))

    def __rmul__(self, other):
        return mul(lift(other), self)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, str)):
            return mul(self, Const(1 / _q(other)))
        return mul(self, Reciprocal(lift(other)))


def lift(x) -> Expr:
    return x if isinstance(x, Expr) else Const(_q(x))


@dataclass(frozen=True)
class Z(Expr):
    def _eval(self, inner, cache):
        return inner

    def derivative(self):
        return Const(Fraction(1))

    def to_json(self):
        return "z"

    def __str__(self):
        return "z"


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction

    def _eval(self, inner, cache):
        return Series.constant(self.value, inner.order).with_markers(inner.markers)

    def derivative(self):
        return Const(Fraction(0))

    def to_json(self):
        return str(self.value)

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple

    def _eval(self, inner, cache):
        out = self.terms[0].at(inner, cache)
        for t in self.terms[1:]:
            out = out + t.at(inner, cache)
        return out

    def derivative(self):
        return add(*(t.derivative() for t in self.terms))

    def to_json(self):
        return {"add": [t.to_json() for t in self.terms]}

    def __str__(self):
        return "(" + " + ".join(str(t) for t in self.terms) + ")"


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple

    def _eval(self, inner, cache):
        scale = Fraction(1)
        out = None
        for f in self.factors:
            if isinstance(f, Const):
                scale *= f.value
                continue
            v = f.at(inner, cache)
            out = v if out is None else ps.mul(out, v)
        if out is None:
            return Series.constant(scale, inner.order).with_markers(inner.markers)
        return out.scale(scale) if scale != 1 else out

    def derivative(self):
        terms = []
        for i, f in enumerate(self.factors):
            d = f.derivative()
            if isinstance(d, Const) and d.value == 0:
                continue
            terms.append(mul(*self.factors[:i], d, *self.factors[i + 1:]))
        return add(*terms) if terms else Const(Fraction(0))

    def to_json(self):
        return {"mul": [f.to_json() for f in self.factors]}

    def __str__(self):
        return "*".join(str(f) for f in self.factors)


@dataclass(frozen=True)
class Reciprocal(Expr):
    arg: Expr

    def _eval(self, inner, cache):
        return ps.reciprocal(self.arg.at(inner, cache))

    def derivative(self):
        return mul(Const(Fraction(-1)), self.arg.derivative(), self, self)

    def to_json(self):
        return {"reciprocal": self.arg.to_json()}

    def __str__(self):
        return f"1/{self.arg}"


@dataclass(frozen=True)
class PowBinomial(Expr):
    """``(1 + tail)^gamma`` with ``tail(0) = 0``."""

    tail: Expr
    gamma: Fraction

    def _eval(self, inner, cache):
        return ps.pow_binomial(self.tail.at(inner, cache), self.gamma)

    def derivative(self):
        if self.gamma == 0:
            return Const(Fraction(0))
        return mul(Const(self.gamma), PowBinomial(self.tail, self.gamma - 1), self.tail.derivative())

    def to_json(self):
        return {"pow_binomial": self.tail.to_json(), "gamma": str(self.gamma)}

    def __str__(self):
        return f"(1 + {self.tail})^({self.gamma})"


@dataclass(frozen=True)
class QuasiInverse(Expr):
    arg: Expr

    def _eval(self, inner, cache):
        return ps.quasi_inverse(self.arg.at(inner, cache))

    def derivative(self):
        return mul(self.arg.derivative(), self, self)

    def to_json(self):
        return {"quasi_inverse": self.arg.to_json()}

    def __str__(self):
        return f"1/(1 - {self.arg})"


@dataclass(frozen=True)
class LogQuasiInverse(Expr):
    arg: Expr

    def _eval(self, inner, cache):
        return ps.log_quasi_inverse(self.arg.at(inner, cache))

    def derivative(self):
        return mul(self.arg.derivative(), QuasiInverse(self.arg))

    def to_json(self):
        return {"log_quasi_inverse": self.arg.to_json()}

    def __str__(self):
        return f"log(1/(1 - {self.arg}))"


@dataclass(frozen=True)
class Compose(Expr):
    outer: Expr
    inner: Expr

    def _eval(self, inner, cache):
        # the outer expression gets its own cache: its z means something else
        return self.outer.at(self.inner.at(inner, cache), {})

    def derivative(self):
        return mul(Compose(self.outer.derivative(), self.inner), self.inner.derivative())

    def to_json(self):
        return {"compose": [self.outer.to_json(), self.inner.to_json()]}

    def __str__(self):
        return f"({self.outer})∘({self.inner})"


@dataclass(frozen=True, eq=False)
class SeriesFunction(Expr):
    """Leaf given by a coefficient generator ``order -> Series`` (no closed form).

    Evaluation at an inner series falls back to Horner composition.
    """

    fn: Callable[[int], Series]
    name: str = "f"
    shift: int = 0  # number of derivatives already applied

    def series(self, order):
        base = self.fn(order + self.shift)
        return ps.derivative(base, self.shift) if self.shift else base

    def _eval(self, inner, cache):
        v = inner.valuation()
        if v == 0:
            raise ValidationError("cannot substitute a series with nonzero constant term")
        return ps.compose(self.series(inner.order), inner)

    def derivative(self):
        return SeriesFunction(self.fn, self.name, self.shift + 1)

    def to_json(self):
        raise ValidationError(f"component {self.name!r} has no expression form")

    def __str__(self):
        return self.name + "'" * self.shift

    def __eq__(self, other):
        return (isinstance(other, SeriesFunction) and self.fn is other.fn
                and self.shift == other.shift)

    def __hash__(self):
        return hash((id(self.fn), self.shift))


# smart constructors ---------------------------------------------------------------

def add(*terms: Expr) -> Expr:
    flat: list[Expr] = []
    c = Fraction(0)
    for t in terms:
        if isinstance(t, Add):
            items = t.terms
        else:
            items = (t,)
        for x in items:
            if isinstance(x, Const):
                c += x.value
            else:
                flat.append(x)
    if c != 0 or not flat:
        flat.append(Const(c))
    return flat[0] if len(flat) == 1 else Add(tuple(flat))


def mul(*factors: Expr) -> Expr:
    flat: list[Expr] = []
    c = Fraction(1)
    for f in factors:
        items = f.factors if isinstance(f, Mul) else (f,)
        for x in items:
            if isinstance(x, Const):
                c *= x.value
            else:
                flat.append(x)
    if c == 0:
        return Const(Fraction(0))
    if c != 1 or not flat:
        flat.insert(0, Const(c))
    return flat[0] if len(flat) == 1 else Mul(tuple(flat))


def z() -> Z:
    return Z()


def const(x) -> Const:
    return Const(_q(x))


def pow_binomial(tail: Expr, gamma) -> Expr:
    return PowBinomial(lift(tail), _q(gamma))


def power(base_minus_one: Expr, gamma) -> Expr:
    """Alias of ``pow_binomial`` reading as ``(1 + t)^gamma``."""
    return pow_binomial(base_minus_one, gamma)


def reciprocal(e: Expr) -> Expr:
    return Reciprocal(lift(e))


def quasi_inverse(e: Expr) -> Expr:
    return QuasiInverse(lift(e))


def log_quasi_inverse(e: Expr) -> Expr:
    return LogQuasiInverse(lift(e))


def compose(outer: Expr, inner: Expr) -> Expr:
    return Compose(lift(outer), lift(inner))


def int_power(e: Expr, k: int) -> Expr:
    if k < 0:
        return Reciprocal(int_power(e, -k))
    return mul(*([e] * k)) if k else Const(Fraction(1))


# JSON grammar -------------------------------------------------------------------

_UNARY = {
    "reciprocal": Reciprocal,
    "quasi_inverse": QuasiInverse,
    "log_quasi_inverse": LogQuasiInverse,
}


def from_json(obj) -> Expr:
    """Parse the descriptor grammar.

    ``"z"``; numbers or rational strings (``"1/2"``); ``{"add": [...]}``;
    ``{"mul": [...]}``; ``{"sub": [a, b]}``; ``{"neg": e}``;
    ``{"pow": [e, k]}`` with integer ``k``; ``{"reciprocal": e}``;
    ``{"pow_binomial": tail, "gamma": "p/q"}``; ``{"quasi_inverse": e}``;
    ``{"log_quasi_inverse": e}``; ``{"compose": [outer, inner]}``.
    """
    if obj == "z":
        return Z()
    if isinstance(obj, (int, str)) and not isinstance(obj, bool):
        return Const(_q(obj))
    if not isinstance(obj, dict):
        raise ValidationError(f"bad expression node {obj!r}")
    keys = set(obj)
    if keys == {"pow_binomial", "gamma"}:
        return PowBinomial(from_json(obj["pow_binomial"]), _q(obj["gamma"]))
    if len(keys) != 1:
        raise ValidationError(f"bad expression node keys {sorted(keys)}")
    (op,) = keys
    arg = obj[op]
    if op in _UNARY:
        return _UNARY[op](from_json(arg))
    if op == "neg":
        return -from_json(arg)
    if op in ("add", "mul"):
        if not isinstance(arg, list) or not arg:
            raise ValidationError(f"{op} needs a non-empty list")
        parts = [from_json(a) for a in arg]
        return add(*parts) if op == "add" else mul(*parts)
    if op == "sub":
        if not isinstance(arg, list) or len(arg) != 2:
            raise ValidationError("sub needs two operands")
        return from_json(arg[0]) - from_json(arg[1])
    if op == "pow":
        if not isinstance(arg, list) or len(arg) != 2 or not isinstance(arg[1], int):
            raise ValidationError("pow needs [expr, integer]")
        return int_power(from_json(arg[0]), arg[1])
    if op == "compose":
        if not isinstance(arg, list) or len(arg) != 2:
            raise ValidationError("compose needs [outer, inner]")
        return Compose(from_json(arg[0]), from_json(arg[1]))
    raise ValidationError(f"unknown expression operator {op!r}")
