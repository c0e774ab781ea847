#ifndef CRITCOMP_PYLONG_BYTES_H
#define CRITCOMP_PYLONG_BYTES_H
#include <Python.h>

/* Write v as an n-byte little-endian two's complement integer. */
static int pylong_to_bytes(PyObject *v, unsigned char *buf, size_t n)
{
#if PY_VERSION_HEX >= 0x030D0000
    return _PyLong_AsByteArray((PyLongObject *)v, buf, n, 1, 1, 1);
#else
    return _PyLong_AsByteArray((PyLongObject *)v, buf, n, 1, 1);
#endif
}

static PyObject *pylong_from_bytes(const unsigned char *buf, size_t n, int is_signed)
{
    return _PyLong_FromByteArray(buf, n, 1, is_signed);
}
#endif
