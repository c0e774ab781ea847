# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled integer polynomial kernels (GMP backed).

Same contract as the pure-Python fallback: ``mullow(a, b, n)`` returns the
first ``n`` coefficients of the product of two integer vectors. Operands are
written straight into byte buffers as fixed-width two's complement slots,
multiplied with one ``mpz_mul`` and decoded with balanced digits.
"""
from libc.stdlib cimport calloc, free
from libc.string cimport memcpy

cdef extern from "gmp.h":
    ctypedef struct __mpz_struct:
        pass
    ctypedef __mpz_struct mpz_t[1]
    void mpz_init(mpz_t)
    void mpz_clear(mpz_t)
    void mpz_import(mpz_t, size_t, int, size_t, int, size_t, const void *)
    void *mpz_export(void *, size_t *, int, size_t, int, size_t, const mpz_t)
    void mpz_mul(mpz_t, const mpz_t, const mpz_t)
    void mpz_sub(mpz_t, const mpz_t, const mpz_t)
    void mpz_neg(mpz_t, const mpz_t)
    int mpz_sgn(const mpz_t)
    size_t mpz_sizeinbase(const mpz_t, int)

cdef extern from "_pylong_bytes.h":
    int pylong_to_bytes(object v, unsigned char *buf, size_t n) except -1
    object pylong_from_bytes(const unsigned char *buf, size_t n, int is_signed)

BACKEND = "compiled"


cdef Py_ssize_t _trimmed_len(list v, Py_ssize_t n):
    cdef Py_ssize_t k = min(len(v), n)
    while k > 0 and not v[k - 1]:
        k -= 1
    return k


cdef size_t _maxbits(list v, Py_ssize_t k):
    cdef size_t m = 0, b
    cdef Py_ssize_t i
    for i in range(k):
        b = (<object>v[i]).bit_length()
        if b > m:
            m = b
    return m


cdef int _pack(mpz_t out, list v, Py_ssize_t k, size_t nbytes) except -1:
    # out = sum v[i] 2^(8 nbytes i); negative slots borrow from the next one
    cdef size_t total = (<size_t>k + 1) * nbytes + 8
    total = (total + 7) & ~(<size_t>7)
    cdef unsigned char *buf = <unsigned char *>calloc(total, 1)
    cdef unsigned char *brw = NULL
    cdef Py_ssize_t i
    cdef bint anyneg = False
    cdef mpz_t tmp
    if buf == NULL:
        raise MemoryError()
    try:
        for i in range(k):
            x = v[i]
            if x:
                pylong_to_bytes(x, buf + i * nbytes, nbytes)
                if x < 0:
                    if brw == NULL:
                        brw = <unsigned char *>calloc(total, 1)
                        if brw == NULL:
                            raise MemoryError()
                    brw[(i + 1) * nbytes] = 1
                    anyneg = True
        mpz_import(out, total // 8, -1, 8, -1, 0, buf)
        if anyneg:
            mpz_init(tmp)
            mpz_import(tmp, total // 8, -1, 8, -1, 0, brw)
            mpz_sub(out, out, tmp)
            mpz_clear(tmp)
    finally:
        free(buf)
        if brw != NULL:
            free(brw)
    return 0


def mullow(list a, list b, Py_ssize_t n):
    """First ``n`` coefficients of the product of integer vectors ``a`` and ``b``."""
    if n <= 0:
        return []
    cdef Py_ssize_t la = _trimmed_len(a, n), lb = _trimmed_len(b, n)
    if la == 0 or lb == 0:
        return [0] * n
    cdef size_t bound = _maxbits(a, la) + _maxbits(b, lb) + (<object>min(la, lb)).bit_length() + 2
    cdef size_t nbytes = (bound + 7) // 8
    cdef Py_ssize_t m = min(n, la + lb - 1)
    cdef mpz_t pa, pb, q
    cdef int sgn
    cdef size_t count = 0, qbytes, t
    cdef unsigned char *raw = NULL
    cdef unsigned char *slot = NULL
    cdef Py_ssize_t i
    cdef int carry = 0, overflow
    mpz_init(pa)
    mpz_init(pb)
    mpz_init(q)
    try:
        _pack(pa, a, la, nbytes)
        if a is b:
            mpz_mul(q, pa, pa)
        else:
            _pack(pb, b, lb, nbytes)
            mpz_mul(q, pa, pb)
        sgn = mpz_sgn(q)
        if sgn < 0:
            mpz_neg(q, q)
        qbytes = (<size_t>m + 1) * nbytes + 8
        qbytes = max(qbytes, (mpz_sizeinbase(q, 2) + 7) // 8 + 8)
        qbytes = (qbytes + 7) & ~(<size_t>7)
        raw = <unsigned char *>calloc(qbytes, 1)
        slot = <unsigned char *>calloc(nbytes, 1)
        if raw == NULL or slot == NULL:
            raise MemoryError()
        if sgn != 0:
            mpz_export(raw, &count, -1, 8, -1, 0, q)
        out = [0] * n
        for i in range(m):
            memcpy(slot, raw + i * nbytes, nbytes)
            overflow = 0
            if carry:
                overflow = 1
                for t in range(nbytes):
                    slot[t] = <unsigned char>(slot[t] + 1)
                    if slot[t] != 0:
                        overflow = 0
                        break
            if overflow:
                carry = 1
                continue
            carry = (slot[nbytes - 1] >> 7) & 1
            c = pylong_from_bytes(slot, nbytes, 1)
            out[i] = -c if sgn < 0 else c
        return out
    finally:
        mpz_clear(pa)
        mpz_clear(pb)
        mpz_clear(q)
        if raw != NULL:
            free(raw)
        if slot != NULL:
            free(slot)
