"""Synthetic schemes for the non-critical-exponent regimes.

Each entry has nonnegative coefficients and an oracle built from the block
decomposition with coefficient lists taken straight from binomial series.
"""
from __future__ import annotations

from fractions import Fraction

from .. import expr as ex
from ..combinat import gen_binomial
from ..schemes import ComponentSpec, SingularData, extended
from .base import CatalogEntry, composition_counts, table

F = Fraction


def _binom_coeffs(gamma, scale, N):
    """Coefficients of ``(1 - scale z)^gamma`` up to ``z^N``."""
    return [gen_binomial(F(gamma), k) * (-F(scale)) ** k for k in range(N + 1)]


def _poly_plus(coeffs, extra: dict):
    out = list(coeffs)
    for k, v in extra.items():
        if k < len(out):
            out[k] += v
    return out


def _g_three_halves(N):
    # (1-x)^(3/2) - 1 + 3x/2
    return _poly_plus(_binom_coeffs(F(3, 2), 1, N), {0: -1, 1: F(3, 2)})


def _g_sqrt(N):
    # 2 - (1-x)^(1/2)
    return [-c for c in _poly_plus(_binom_coeffs(F(1, 2), 1, N), {0: -2})]


def _h_sqrt(N):
    return [-c for c in _poly_plus(_binom_coeffs(F(1, 2), 1, N), {0: -1})]


def _h_mixed(N):
    # z/2 + (1 - sqrt(1-z))/2
    return [c / 2 for c in _poly_plus(_h_sqrt(N), {1: 1})]


def _entry(name, description, G, H, M, g_list, h_list, m_list, oracle_max=30):
    spec = extended(G, H, M, name=name)

    def oracle(n):
        return table(n, composition_counts(n, g_list(n), h_list(n), m=m_list(n)))

    lo = next(k for k, c in enumerate(g_list(4)) if c)  # h_1 and m_0 are nonzero throughout
    return CatalogEntry(name, spec, description=description,
                        support=lambda n: n >= lo, support_note=f"n >= {lo}",
                        oracle=oracle, oracle_max=oracle_max)


def _z():
    return ex.z()


def _G32():
    z = _z()
    return ComponentSpec(ex.pow_binomial(-z, F(3, 2)) - 1 + F(3, 2) * z,
                         SingularData(1, F(3, 2), F(1, 2), 1, d1=F(3, 2)), "(1-x)^(3/2)-1+3x/2")


def _Gsqrt():
    z = _z()
    return ComponentSpec(2 - ex.pow_binomial(-z, F(1, 2)), SingularData(1, F(1, 2), 2, -1), "2-sqrt(1-x)")


def _Hsqrt():
    z = _z()
    return ComponentSpec(1 - ex.pow_binomial(-z, F(1, 2)), SingularData(1, F(1, 2), 1, -1), "1-sqrt(1-z)")


def _Hmixed():
    z = _z()
    return ComponentSpec(z / 2 + (1 - ex.pow_binomial(-z, F(1, 2))) / 2,
                         SingularData(1, F(1, 2), 1, F(-1, 2)), "z/2+(1-sqrt(1-z))/2")


def build_discrete_s() -> CatalogEntry:
    """``lambda_G = 3/2 > 1`` and ``lambda_M = 3/2 > lambda_H``: ``X_n -> S``."""
    z = _z()
    M = ComponentSpec(ex.pow_binomial(-z, F(3, 2)) + F(3, 2) * z,
                      SingularData(1, F(3, 2), F(3, 2), 1), "(1-z)^(3/2)+3z/2")
    return _entry("synthetic-discrete-s", "size-biased discrete limit g_k k tau^(k-1)/G'(tau)",
                  _G32(), _Hsqrt(), M, _g_three_halves, _h_sqrt,
                  lambda n: _poly_plus(_binom_coeffs(F(3, 2), 1, n), {1: F(3, 2)}))


def build_degenerate_ii() -> CatalogEntry:
    z = _z()
    M = ComponentSpec(ex.pow_binomial(-z, F(-1, 2)), SingularData(1, F(-1, 2), None, 1), "(1-z)^(-1/2)")
    return _entry("synthetic-degenerate-ii", "lambda_G > 1, lambda_M < lambda_H: bounded Boltzmann limit",
                  _G32(), _Hsqrt(), M, _g_three_halves, _h_sqrt,
                  lambda n: _binom_coeffs(F(-1, 2), 1, n))


def build_partial_ii() -> CatalogEntry:
    """``lambda_M = lambda_H``; ``H`` has ``tau_H = 1`` but ``c_H = -1/2`` so the
    two candidate mixing weights differ."""
    z = _z()
    M = ComponentSpec(2 - ex.pow_binomial(-z, F(1, 2)), SingularData(1, F(1, 2), 2, -1), "2-sqrt(1-z)")
    return _entry("synthetic-partial-ii", "mixture of the size-biased and Boltzmann laws",
                  _G32(), _Hmixed(), M, _g_three_halves, _h_mixed,
                  lambda n: [-c for c in _poly_plus(_binom_coeffs(F(1, 2), 1, n), {0: -2})])


def build_degenerate_i() -> CatalogEntry:
    z = _z()
    M = ComponentSpec(ex.pow_binomial(-z, F(-1, 2)), SingularData(1, F(-1, 2), None, 1), "(1-z)^(-1/2)")
    return _entry("synthetic-degenerate-i", "0 < lambda_G < 1, lambda_M < lambda_G lambda_H: X_n stays bounded",
                  _Gsqrt(), _Hsqrt(), M, _g_sqrt, _h_sqrt,
                  lambda n: _binom_coeffs(F(-1, 2), 1, n))


def build_partial_i() -> CatalogEntry:
    z = _z()
    M = ComponentSpec(2 - ex.pow_binomial(-z, F(1, 4)), SingularData(1, F(1, 4), 2, -1), "2-(1-z)^(1/4)")
    return _entry("synthetic-partial-i", "lambda_M = lambda_G lambda_H: mass at zero plus a continuous part",
                  _Gsqrt(), _Hmixed(), M, _g_sqrt, _h_mixed,
                  lambda n: [-c for c in _poly_plus(_binom_coeffs(F(1, 4), 1, n), {0: -2})])
