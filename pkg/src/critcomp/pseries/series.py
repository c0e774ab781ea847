"""Truncated power series with exact coefficients.

A ``Series`` of order ``N`` knows the coefficients of ``z^0..z^N`` and nothing
beyond. Coefficients are rationals, or polynomials in marker variables
(``UPoly``, possibly nested). Internally a series is a flat list of integer
numerators over one common denominator, laid out row by row in ``z`` with a
mixed-radix block per row for the marker degrees. That layout lets every
product go through a single integer-vector convolution (see ``kernels``).
"""
from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Callable, Iterable, Sequence

from ..errors import NotInvertibleError, PreconditionError
from .kernels import mullow
from .upoly import UPoly

_Q = Fraction


def _prod(xs):
    out = 1
    for x in xs:
        out *= x
    return out


def _coeff_dims(c, depth: int) -> list[int]:
    """Per-level sizes (degree + 1) needed to hold coefficient ``c``."""
    dims = [1] * depth
    if isinstance(c, UPoly) and depth:
        dims[0] = max(1, len(c.coeffs))
        for sub in c.coeffs:
            sd = _coeff_dims(sub, depth - 1)
            for i, d in enumerate(sd):
                if d > dims[i + 1]:
                    dims[i + 1] = d
    return dims


def _coeff_depth(c) -> int:
    return c.depth if isinstance(c, UPoly) else 0


def _flatten_coeff(c, dims: Sequence[int], out: list, offset: int) -> None:
    if not isinstance(c, UPoly):
        if c:
            out[offset] = _Q(c)
        return
    if not dims:
        if len(c.coeffs) > 1:
            raise ValueError("coefficient has more markers than the series")
        if c.coeffs:
            _flatten_coeff(c.coeffs[0], dims, out, offset)
        return
    step = _prod(dims[1:])
    for k, sub in enumerate(c.coeffs):
        _flatten_coeff(sub, dims[1:], out, offset + k * step)


def _build_coeff(vals: Sequence, dims: Sequence[int]):
    if not dims:
        return vals[0]
    step = _prod(dims[1:])
    return UPoly(_build_coeff(vals[k * step:(k + 1) * step], dims[1:]) for k in range(dims[0]))


def _relayout(num: list, shape: tuple, rows: int, dims: Sequence[int]) -> list:
    """Copy ``rows`` z-rows of ``num`` (marker dims ``shape[1:]``) into larger marker dims."""
    old = shape[1:]
    if tuple(old) == tuple(dims):
        s = _prod(dims)
        return num[: rows * s]
    s_new = _prod(dims)
    out = [0] * (rows * s_new)
    s_old = _prod(old)
    # strides for old and new layouts
    m = len(dims)
    old_strides = [_prod(old[i + 1:]) for i in range(m)]
    new_strides = [_prod(dims[i + 1:]) for i in range(m)]
    idx_map = []
    for flat in range(s_old):
        rem, tgt = flat, 0
        for i in range(m):
            d, rem = divmod(rem, old_strides[i])
            tgt += d * new_strides[i]
        idx_map.append(tgt)
    for r in range(min(rows, len(num) // s_old if s_old else 0)):
        base_o, base_n = r * s_old, r * s_new
        for flat in range(s_old):
            v = num[base_o + flat]
            if v:
                out[base_n + idx_map[flat]] = v
    return out


def _content(num: list, den: int) -> int:
    g = den
    if g == 1:
        return 1
    for x in num:
        if x:
            g = gcd(g, x)
            if g == 1:
                return 1
    return g


class Series:
    """Exact truncated power series in ``z``.

    ``order`` is the index of the last known coefficient. Operations combining
    series of different orders truncate to the smaller one.
    """

    __slots__ = ("_num", "_den", "_shape")

    def __init__(self, num: list, den: int, shape: tuple, *, _normalize: bool = True):
        self._num = num
        self._den = den
        self._shape = tuple(shape)
        if _normalize:
            self._reduce()

    # construction -----------------------------------------------------------
    @classmethod
    def from_coeffs(cls, coeffs: Iterable, order: int | None = None) -> "Series":
        cs = list(coeffs)
        if order is None:
            order = len(cs) - 1
        if order < 0:
            raise PreconditionError("order must be non-negative")
        cs = cs[: order + 1] + [0] * max(0, order + 1 - len(cs))
        depth = max((_coeff_depth(c) for c in cs), default=0)
        dims = [1] * depth
        for c in cs:
            for i, d in enumerate(_coeff_dims(c, depth)):
                if d > dims[i]:
                    dims[i] = d
        s = _prod(dims)
        vals = [0] * ((order + 1) * s)
        for k, c in enumerate(cs):
            _flatten_coeff(c, dims, vals, k * s)
        den = reduce(lcm, (v.denominator for v in vals if v), 1)
        num = [int(v * den) if v else 0 for v in vals]
        return cls(num, den, (order + 1, *dims))

    @classmethod
    def from_ints(cls, nums: Sequence[int], den: int = 1, order: int | None = None) -> "Series":
        if order is None:
            order = len(nums) - 1
        num = list(nums[: order + 1]) + [0] * max(0, order + 1 - len(nums))
        return cls(num, den, (order + 1,))

    @classmethod
    def from_function(cls, f: Callable[[int], object], order: int) -> "Series":
        return cls.from_coeffs([f(k) for k in range(order + 1)], order)

    @classmethod
    def zero(cls, order: int, markers: int = 0) -> "Series":
        return cls([0] * (order + 1), 1, (order + 1, *([1] * markers)), _normalize=False)

    @classmethod
    def constant(cls, c, order: int) -> "Series":
        return cls.from_coeffs([c], order)

    @classmethod
    def one(cls, order: int) -> "Series":
        return cls.from_ints([1], 1, order)

    @classmethod
    def z(cls, order: int) -> "Series":
        return cls.from_ints([0, 1], 1, order)

    @classmethod
    def monomial(cls, c, k: int, order: int) -> "Series":
        return cls.from_coeffs([0] * k + [c], order)

    # basic properties -------------------------------------------------------
    @property
    def order(self) -> int:
        return self._shape[0] - 1

    @property
    def markers(self) -> int:
        return len(self._shape) - 1

    @property
    def stride(self) -> int:
        return _prod(self._shape[1:])

    @property
    def denominator(self) -> int:
        return self._den

    def numerators(self) -> list[int]:
        """Flat integer numerators (only meaningful with ``denominator``)."""
        return list(self._num)

    def _reduce(self) -> None:
        g = _content(self._num, self._den)
        if g > 1:
            self._num = [x // g for x in self._num]
            self._den //= g
        if self._den == 1:
            return
        if not any(self._num):
            self._den = 1

    def __getitem__(self, k):
        if isinstance(k, slice):
            return [self[i] for i in range(*k.indices(self.order + 1))]
        return self.coefficient(k)

    def coefficient(self, k: int):
        if k < 0:
            return _Q(0)
        if k > self.order:
            raise PreconditionError(f"coefficient {k} is beyond the truncation order {self.order}")
        s = self.stride
        if not self.markers:
            return _Q(self._num[k], self._den)
        row = [_Q(x, self._den) for x in self._num[k * s:(k + 1) * s]]
        return _build_coeff(row, self._shape[1:])

    @property
    def coeffs(self) -> list:
        return [self.coefficient(k) for k in range(self.order + 1)]

    def __len__(self):
        return self.order + 1

    def __iter__(self):
        return iter(self.coeffs)

    def row_numerators(self, k: int) -> list[int]:
        s = self.stride
        return self._num[k * s:(k + 1) * s]

    def is_zero_row(self, k: int) -> bool:
        return not any(self.row_numerators(k))

    def valuation(self) -> int | None:
        """Index of the first nonzero coefficient, or None if all known ones vanish."""
        s = self.stride
        for k in range(self.order + 1):
            if any(self._num[k * s:(k + 1) * s]):
                return k
        return None

    def __repr__(self):
        shown = ", ".join(str(c) for c in self.coeffs[:8])
        more = ", ..." if self.order >= 8 else ""
        return f"Series([{shown}{more}], order={self.order})"

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        if self.order != other.order:
            return False
        return self.coeffs == other.coeffs

    __hash__ = None  # mutable-free but compared by value

    # layout helpers ---------------------------------------------------------
    def _with_dims(self, dims: Sequence[int], rows: int | None = None) -> list:
        rows = self.order + 1 if rows is None else rows
        dims = tuple(dims)
        have = self._shape[1:]
        if len(have) < len(dims):
            have_shape = (self._shape[0], *have, *([1] * (len(dims) - len(have))))
        else:
            have_shape = self._shape
        return _relayout(self._num, have_shape, rows, dims)

    def _marker_degrees(self) -> list[int]:
        """Actual max degree + 1 used per marker level (trimmed dims)."""
        dims = self._shape[1:]
        if not dims:
            return []
        m = len(dims)
        strides = [_prod(dims[i + 1:]) for i in range(m)]
        used = [1] * m
        s = _prod(dims)
        nz = set()
        for idx, v in enumerate(self._num):
            if v:
                nz.add(idx % s)
        for flat in nz:
            rem = flat
            for i in range(m):
                d, rem = divmod(rem, strides[i])
                if d + 1 > used[i]:
                    used[i] = d + 1
        return used

    def _trimmed(self) -> "Series":
        if not self.markers:
            return self
        used = self._marker_degrees()
        if tuple(used) == self._shape[1:]:
            return self
        dims = self._shape[1:]
        m = len(dims)
        strides = [_prod(dims[i + 1:]) for i in range(m)]
        new_strides = [_prod(used[i + 1:]) for i in range(m)]
        s_old, s_new = _prod(dims), _prod(used)
        out = [0] * ((self.order + 1) * s_new)
        for idx, v in enumerate(self._num):
            if v:
                r, flat = divmod(idx, s_old)
                rem, tgt = flat, 0
                for i in range(m):
                    d, rem = divmod(rem, strides[i])
                    tgt += d * new_strides[i]
                out[r * s_new + tgt] = v
        return Series(out, self._den, (self.order + 1, *used), _normalize=False)

    def with_markers(self, markers: int) -> "Series":
        """Lift to a ring with ``markers`` marker variables (constants in them)."""
        if markers < self.markers:
            raise PreconditionError("cannot drop markers this way; use substitute_markers")
        if markers == self.markers:
            return self
        shape = (*self._shape, *([1] * (markers - self.markers)))
        return Series(list(self._num), self._den, shape, _normalize=False)

    # arithmetic -------------------------------------------------------------
    @staticmethod
    def _coerce(x, like: "Series") -> "Series":
        if isinstance(x, Series):
            return x
        if isinstance(x, (int, Fraction, UPoly)):
            return Series.constant(x, like.order)
        raise TypeError(f"cannot combine Series with {type(x).__name__}")

    def _align(self, other: "Series"):
        m = max(self.markers, other.markers)
        a, b = self.with_markers(m), other.with_markers(m)
        dims = tuple(max(x, y) for x, y in zip(a._shape[1:], b._shape[1:]))
        rows = min(a.order, b.order) + 1
        return a._with_dims(dims, rows), b._with_dims(dims, rows), (rows, *dims)

    def __add__(self, other) -> "Series":
        other = self._coerce(other, self)
        an, bn, shape = self._align(other)
        if self._den == other._den:
            d = self._den
            num = [x + y for x, y in zip(an, bn)]
        else:
            d = lcm(self._den, other._den)
            fa, fb = d // self._den, d // other._den
            num = [x * fa + y * fb for x, y in zip(an, bn)]
        return Series(num, d, shape)

    __radd__ = __add__

    def __neg__(self) -> "Series":
        return Series([-x for x in self._num], self._den, self._shape, _normalize=False)

    def __sub__(self, other) -> "Series":
        return self + (-self._coerce(other, self))

    def __rsub__(self, other) -> "Series":
        return (-self) + other

    def scale(self, c) -> "Series":
        c = _Q(c)
        if c == 0:
            return Series.zero(self.order, self.markers)
        return Series([x * c.numerator for x in self._num], self._den * c.denominator, self._shape)

    def __mul__(self, other) -> "Series":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other, self)
        return mul(self, other)

    def __rmul__(self, other) -> "Series":
        return self.__mul__(other)

    def __truediv__(self, other) -> "Series":
        if isinstance(other, (int, Fraction)):
            return self.scale(1 / _Q(other))
        return mul(self, reciprocal(self._coerce(other, self)))

    def __pow__(self, k: int) -> "Series":
        return pow_int(self, k)

    def truncate(self, order: int) -> "Series":
        if order > self.order:
            raise PreconditionError(f"cannot extend a series of order {self.order} to {order}")
        s = self.stride
        return Series(self._num[: (order + 1) * s], self._den, (order + 1, *self._shape[1:]))

    def shift(self, k: int) -> "Series":
        """Multiply by ``z^k``; the result is known to order ``order + k``."""
        if k < 0:
            raise PreconditionError("negative shift")
        s = self.stride
        return Series([0] * (k * s) + list(self._num), self._den,
                      (self.order + 1 + k, *self._shape[1:]), _normalize=False)

    def unshift(self, k: int) -> "Series":
        """Divide by ``z^k``; the first ``k`` coefficients must vanish."""
        s = self.stride
        if any(self._num[: k * s]):
            raise PreconditionError(f"series is not divisible by z^{k}")
        return Series(self._num[k * s:], self._den, (self.order + 1 - k, *self._shape[1:]),
                      _normalize=False)

    def derivative(self, s: int = 1) -> "Series":
        return derivative(self, s)

    def integral(self) -> "Series":
        """Antiderivative with zero constant term; order grows by one."""
        st = self.stride
        n = self.order + 1
        L = reduce(lcm, range(1, n + 1), 1)
        num = [0] * st
        for k in range(n):
            f = L // (k + 1)
            num.extend(x * f for x in self._num[k * st:(k + 1) * st])
        return Series(num, self._den * L, (n + 1, *self._shape[1:]))

    def substitute_markers(self, *values) -> "Series":
        """Evaluate every marker (outermost first) at the given rationals."""
        if len(values) != self.markers:
            raise PreconditionError(f"need {self.markers} marker values")
        return Series.from_coeffs(
            [c(*values) if isinstance(c, UPoly) else c for c in self.coeffs], self.order)

    def evaluate(self, x) -> Fraction:
        """Exact polynomial value of the truncation at a rational point (no markers)."""
        if self.markers:
            raise PreconditionError("substitute markers first")
        acc = 0
        x = _Q(x)
        for v in reversed(self._num):
            acc = acc * x + v
        return acc / self._den

    def map_coefficients(self, f: Callable[[int, object], object]) -> "Series":
        return Series.from_coeffs([f(k, c) for k, c in enumerate(self.coeffs)], self.order)


# module level operations ------------------------------------------------------

def add(a: Series, b: Series) -> Series:
    return a + b


def mul(a: Series, b: Series) -> Series:
    """Truncated product; the result order is the smaller of the two orders."""
    n = min(a.order, b.order) + 1
    if not a.markers and not b.markers:
        num = mullow(a._num[:n], b._num[:n] if b is not a else a._num[:n], n)
        return Series(num, a._den * b._den, (n,))
    m = max(a.markers, b.markers)
    a2, b2 = a.with_markers(m)._trimmed(), b.with_markers(m)._trimmed()
    dims = tuple(x + y - 1 for x, y in zip(a2._shape[1:], b2._shape[1:]))
    S = _prod(dims)
    fa = a2._with_dims(dims, n)
    fb = fa if (a is b) else b2._with_dims(dims, n)
    num = mullow(fa, fb, n * S)
    return Series(num, a._den * b._den, (n, *dims))._trimmed()


def pow_int(a: Series, k: int) -> Series:
    if k < 0:
        return reciprocal(pow_int(a, -k))
    result = None
    base = a
    while k:
        if k & 1:
            result = base if result is None else mul(result, base)
        k >>= 1
        if k:
            base = mul(base, base)
    if result is None:
        return Series.one(a.order).with_markers(a.markers)
    return result


def derivative(a: Series, s: int = 1) -> Series:
    """``s``-fold derivative; order drops by ``s``."""
    if s < 0:
        raise PreconditionError("derivative order must be non-negative")
    if s == 0:
        return a
    if a.order < s:
        raise PreconditionError(f"need order >= {s} to differentiate {s} times")
    st = a.stride
    num = []
    for k in range(s, a.order + 1):
        f = 1
        for t in range(k - s + 1, k + 1):
            f *= t
        num.extend(x * f for x in a._num[k * st:(k + 1) * st])
    return Series(num, a._den, (a.order + 1 - s, *a._shape[1:]))


def _check_unit(a: Series):
    row = a.row_numerators(0)
    if not row[0] or any(row[1:]):
        raise NotInvertibleError("constant term is not invertible in the coefficient ring")
    return _Q(row[0], a._den)


def reciprocal(a: Series) -> Series:
    """Multiplicative inverse by Newton iteration ``y <- y + y (1 - a y)``."""
    c0 = _check_unit(a)
    N = a.order
    m = a.markers
    y = Series.constant(1 / c0, 0).with_markers(m)
    prec = 1
    while prec < N + 1:
        prec = min(2 * prec, N + 1)
        y = _extend(y, prec - 1)
        e = Series.one(prec - 1).with_markers(m) - mul(a.truncate(prec - 1), y)
        y = y + mul(y, e)
    return y


def _extend(y: Series, order: int) -> Series:
    """Pad ``y`` with zeros up to ``order`` (used inside Newton steps only)."""
    if order <= y.order:
        return y.truncate(order)
    st = y.stride
    return Series(y._num + [0] * ((order - y.order) * st), y._den,
                  (order + 1, *y._shape[1:]), _normalize=False)


def quasi_inverse(h: Series) -> Series:
    """``1 / (1 - h)`` for ``h`` with zero constant term."""
    _need_valuation(h)
    return reciprocal(Series.one(h.order).with_markers(h.markers) - h)


def log_quasi_inverse(h: Series) -> Series:
    """``log(1 / (1 - h))`` for ``h`` with zero constant term."""
    _need_valuation(h)
    if h.order == 0:
        return Series.zero(0, h.markers)
    q = quasi_inverse(h.truncate(h.order - 1))
    return mul(derivative(h), q).integral()


def _need_valuation(h: Series) -> None:
    if any(h.row_numerators(0)):
        raise PreconditionError("argument must have zero constant term")


def _binomial_series(gamma: Fraction, order: int) -> Series:
    cs = [Fraction(1)]
    for k in range(1, order + 1):
        cs.append(cs[-1] * (gamma - k + 1) / k)
    return Series.from_coeffs(cs, order)


def pow_binomial(S: Series, gamma, method: str = "newton") -> Series:
    """``(1 + S)^gamma`` for ``S`` with zero constant term and rational ``gamma``.

    ``method="binomial"`` evaluates the finite sum ``sum_k C(gamma, k) S^k``
    by Horner's rule; ``"newton"`` uses an inverse-root Newton iteration
    followed by integer powering. Both are exact and agree coefficientwise.
    """
    _need_valuation(S)
    g = _Q(gamma)
    if method == "binomial":
        return compose(_binomial_series(g, S.order), S)
    if method != "newton":
        raise ValueError(f"unknown method {method!r}")
    A = Series.one(S.order).with_markers(S.markers) + S
    p, q = g.numerator, g.denominator
    if q == 1:
        return pow_int(A, p)
    R = _inv_root(A, q)
    if p < 0:
        return pow_int(R, -p)
    k = -(-p // q)
    return mul(pow_int(A, k), pow_int(R, k * q - p))


def _inv_root(A: Series, q: int) -> Series:
    """``A^(-1/q)`` for ``A`` with constant term 1."""
    N = A.order
    m = A.markers
    r = Series.one(0).with_markers(m)
    prec = 1
    while prec < N + 1:
        prec = min(2 * prec, N + 1)
        r = _extend(r, prec - 1)
        e = Series.one(prec - 1).with_markers(m) - mul(A.truncate(prec - 1), pow_int(r, q))
        r = r + mul(r, e).scale(Fraction(1, q))
    return r


def compose(outer: Series, inner: Series) -> Series:
    """``outer(inner(z))`` by Horner's rule; ``inner`` must have zero constant term."""
    _need_valuation(inner)
    N = min(outer.order, inner.order)
    v = inner.valuation()
    m = max(outer.markers, inner.markers)
    if v is None:
        return Series.constant(outer.coefficient(0), N).with_markers(m)
    unit = inner.with_markers(m).truncate(N).unshift(v)
    acc = None
    for k in range(N // v, -1, -1):
        ck = outer.coefficient(k)
        need = N - k * v
        if acc is None:
            acc = Series.constant(ck, need).with_markers(m)
            continue
        # acc is known to order need - v; inner * acc = z^v * unit * acc
        acc = mul(unit.truncate(acc.order), acc).shift(v) + ck
    return acc.with_markers(m)


def exp_series(a: Series) -> Series:
    """``exp(a)`` for ``a`` with zero constant term (Newton on ``log y = a``)."""
    _need_valuation(a)
    N = a.order
    m = a.markers
    y = Series.one(0).with_markers(m)
    prec = 1
    while prec < N + 1:
        prec = min(2 * prec, N + 1)
        y = _extend(y, prec - 1)
        lg = mul(derivative(y), reciprocal(y.truncate(prec - 2))).integral()
        y = y + mul(y, a.truncate(prec - 1) - lg)
    return y
