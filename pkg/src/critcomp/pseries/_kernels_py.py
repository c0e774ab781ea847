"""Pure-Python integer polynomial kernels.

Truncated products of integer coefficient vectors. Large products go through
Kronecker substitution: both operands are packed into one big integer with
fixed-width slots, multiplied once, and the product is unpacked with balanced
(signed) digits. Small products use the schoolbook loop.
"""
from __future__ import annotations

try:  # gmpy2 multiplies large integers much faster than CPython's Karatsuba
    from gmpy2 import mpz as _big
except ImportError:  # pragma: no cover
    _big = int

BACKEND = "python"

SCHOOLBOOK_CUTOFF = 12


def _maxbits(v):
    m = 0
    for x in v:
        b = x.bit_length()
        if b > m:
            m = b
    return m


def _trim(v):
    k = len(v)
    while k and not v[k - 1]:
        k -= 1
    return v[:k]


def mullow_schoolbook(a, b, n):
    la, lb = min(len(a), n), min(len(b), n)
    out = [0] * n
    for i in range(la):
        ai = a[i]
        if not ai:
            continue
        top = min(lb, n - i)
        for j in range(top):
            bj = b[j]
            if bj:
                out[i + j] += ai * bj
    return out


def _pack(v, nbytes):
    pos = b"".join((x if x > 0 else 0).to_bytes(nbytes, "little") for x in v)
    p = int.from_bytes(pos, "little")
    if any(x < 0 for x in v):
        neg = b"".join((-x if x < 0 else 0).to_bytes(nbytes, "little") for x in v)
        p -= int.from_bytes(neg, "little")
    return p


def _unpack(q, nbytes, n):
    sign = 1
    if q < 0:
        q, sign = -q, -1
    raw = int(q).to_bytes(max(1, (int(q).bit_length() + 7) // 8), "little")
    half = 1 << (8 * nbytes - 1)
    full = 1 << (8 * nbytes)
    out = []
    carry = 0
    for i in range(n):
        chunk = raw[i * nbytes:(i + 1) * nbytes]
        v = int.from_bytes(chunk, "little") + carry
        if v >= half:
            v -= full
            carry = 1
        else:
            carry = 0
        out.append(sign * v)
    return out


def mullow_kronecker(a, b, n):
    same = a is b
    a = _trim(list(a[:n]))
    b = _trim(list(b[:n]))
    if not a or not b:
        return [0] * n
    bound = _maxbits(a) + _maxbits(b) + min(len(a), len(b)).bit_length() + 2
    nbytes = (bound + 7) // 8
    pa = _big(_pack(a, nbytes))
    pb = pa if same else _big(_pack(b, nbytes))
    q = pa * pb
    m = min(n, len(a) + len(b) - 1)
    out = _unpack(q, nbytes, m)
    if m < n:
        out.extend([0] * (n - m))
    return out


def mullow(a, b, n):
    """First ``n`` coefficients of the product of integer vectors ``a`` and ``b``."""
    if n <= 0:
        return []
    if min(len(a), len(b), n) <= SCHOOLBOOK_CUTOFF:
        return mullow_schoolbook(a, b, n)
    return mullow_kronecker(a, b, n)
