"""Exact truncated power series over rationals and marker polynomials."""
from .kernels import BACKEND
from .series import (
    Series,
    add,
    compose,
    derivative,
    exp_series,
    log_quasi_inverse,
    mul,
    pow_binomial,
    pow_int,
    quasi_inverse,
    reciprocal,
)
from .upoly import UPoly

__all__ = [
    "BACKEND",
    "Series",
    "UPoly",
    "add",
    "compose",
    "derivative",
    "exp_series",
    "log_quasi_inverse",
    "mul",
    "pow_binomial",
    "pow_int",
    "quasi_inverse",
    "reciprocal",
]
