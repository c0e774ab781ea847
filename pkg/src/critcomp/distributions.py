"""Limit laws: stable and Mittag-Leffler families, tilts, Beta products,
mixed Poisson laws, and the special functions they need.

Series evaluators return ``SeriesValue(value, error, converged)``. Alternating
series are summed in mpmath with the working precision raised to cover the
largest term, so that cancellation does not eat the result.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import mpmath as mp

from .combinat import stirling1, stirling2
from .errors import NonConvergenceError, PreconditionError, UnsupportedSchemeError, ValidationError


class SeriesValue(NamedTuple):
    value: float
    error: float
    converged: bool


# special functions -------------------------------------------------------------

def log_gamma(x: float) -> float:
    """``log |Gamma(x)|``; poles raise."""
    if x <= 0 and float(x).is_integer():
        raise ValidationError(f"Gamma has a pole at {x}")
    return math.lgamma(x)


def gamma(x: float) -> float:
    if x <= 0 and float(x).is_integer():
        raise ValidationError(f"Gamma has a pole at {x}")
    return math.gamma(x)


def upper_incomplete_gamma(a, x) -> float:
    """``Gamma(a, x) = int_x^oo t^(a-1) e^(-t) dt``."""
    return float(mp.gammainc(a, a=x))


def _mpq(x):
    """Exact rationals to mpmath at the current precision."""
    if isinstance(x, mp.mpf):
        return x
    if isinstance(x, (Fraction, int)):
        x = Fraction(x)
        return mp.mpf(x.numerator) / x.denominator
    if isinstance(x, str):
        return _mpq(Fraction(x))
    return mp.mpf(x)


def _rgamma_ratio(num: Sequence, den: Sequence):
    """``prod Gamma(num) / prod Gamma(den)`` in mpmath (handles negative arguments)."""
    out = mp.mpf(1)
    for a in num:
        out *= mp.gamma(a)
    for b in den:
        out *= mp.rgamma(b)
    return out


# moments of the basic families ---------------------------------------------------

def ml_moment(alpha, s):
    """Mittag-Leffler ``M_alpha``: ``Gamma(1 + s) / Gamma(1 + s alpha)``."""
    s, alpha = _mpq(s), _mpq(alpha)
    return _rgamma_ratio([1 + s], [1 + s * alpha])


def reciprocal_stable_moment(alpha, beta, s):
    """``E S^s = Gamma(1 + s beta/alpha) / Gamma(1 + s beta)``; ``beta = alpha`` is ``M_alpha``."""
    s, alpha, beta = _mpq(s), _mpq(alpha), _mpq(beta)
    return _rgamma_ratio([1 + s * beta / alpha], [1 + s * beta])


def tilt_moments(moment: Callable, c, s):
    """Moments of the ``c``-tilt ``x^c f(x) / mu_c``: ``mu_{s+c} / mu_c``."""
    s, c = _mpq(s), _mpq(c)
    return moment(s + c) / moment(c)


def tilted_stable_moment(alpha, beta, c, s):
    """``Gamma((s+c) beta/alpha) Gamma(beta c) / (Gamma((s+c) beta) Gamma(c beta/alpha))``."""
    s, c, alpha, beta = _mpq(s), _mpq(c), _mpq(alpha), _mpq(beta)
    if c == 0:
        return reciprocal_stable_moment(alpha, beta, s)
    return _rgamma_ratio([(s + c) * beta / alpha, beta * c], [(s + c) * beta, c * beta / alpha])


def tilted_ml_moment(alpha, c, s):
    """Moments of ``tilt_c(M_alpha)``."""
    return tilt_moments(lambda t: ml_moment(alpha, t), c, s)


def beta_moment(a, b, s):
    """``E W^s`` for ``W ~ Beta(a, b)``: ``Gamma(s+a) Gamma(a+b) / (Gamma(s+a+b) Gamma(a))``."""
    s, a, b = _mpq(s), _mpq(a), _mpq(b)
    return _rgamma_ratio([s + a, a + b], [s + a + b, a])


def beta_stable_product_moment(alpha1, beta1, beta2, c, s):
    """``E Z^s`` for ``Z = X_c W^beta1``, ``W ~ Beta(beta1 c, beta2)``, ``X_c`` a ``c``-tilted stable."""
    s, c, alpha1, beta1, beta2 = (_mpq(x) for x in (s, c, alpha1, beta1, beta2))
    return _rgamma_ratio([(s + c) * beta1 / alpha1, beta1 * c + beta2],
                         [(s + c) * beta1 + beta2, c * beta1 / alpha1])


def dirichlet_stable_joint_moment(alphas: Sequence, r: Sequence, s: Sequence):
    """Joint moment of ``(D_j^{r_j} V_j)_j``, ``D ~ Dirichlet(alphas)`` with one extra
    trailing parameter, ``V_j`` tilted stable with ``c_j = alpha_j / r_j``:
    ``Gamma(sum alpha) / Gamma(alpha_{k+1} + sum(r_j s_j + alpha_j)) prod Gamma(s_j + c_j)/Gamma(c_j)``.
    """
    k = len(r)
    if len(alphas) != k + 1 or len(s) != k:
        raise PreconditionError("need k+1 Dirichlet parameters and k orders")
    a = [_mpq(x) for x in alphas]
    r = [_mpq(x) for x in r]
    total = mp.fsum(a)
    top = a[k] + mp.fsum(r[j] * s[j] + a[j] for j in range(k))
    out = _rgamma_ratio([total], [top])
    for j in range(k):
        cj = a[j] / r[j]
        out *= _rgamma_ratio([mp.mpf(s[j]) + cj], [cj])
    return out


def rayleigh_moment(sigma, s):
    sigma, s = _mpq(sigma), _mpq(s)
    return sigma ** s * mp.mpf(2) ** (s / 2) * mp.gamma(s / 2 + 1)


def half_normal_moment(sigma, s):
    sigma, s = _mpq(sigma), _mpq(s)
    return sigma ** s * mp.mpf(2) ** (s / 2) * mp.gamma((s + 1) / 2) / mp.sqrt(mp.pi)


def rayleigh_density(sigma, x):
    sigma, x = float(sigma), float(x)
    return x / sigma ** 2 * math.exp(-x * x / (2 * sigma ** 2)) if x >= 0 else 0.0


def half_normal_density(sigma, x):
    sigma, x = float(sigma), float(x)
    if x < 0:
        return 0.0
    return math.sqrt(2) / (sigma * math.sqrt(math.pi)) * math.exp(-x * x / (2 * sigma ** 2))


def chi_moment(k, s):
    """``E chi(k)^s = 2^{s/2} Gamma((k+s)/2) / Gamma(k/2)``."""
    k, s = _mpq(k), _mpq(s)
    return mp.mpf(2) ** (s / 2) * _rgamma_ratio([(k + s) / 2], [k / 2])


# limit-law moments in scheme parameters -----------------------------------------

def scheme_limit_moment(lam_G, lam_H, lam_M_tilde, s):
    """``mu_s = Gamma(s - lG) Gamma(-lG lH - lM) / (Gamma(-lG) Gamma(s lH - lG lH - lM))``."""
    lG, lH, lM = (_mpq(x) for x in (lam_G, lam_H, lam_M_tilde))
    s = _mpq(s)
    return _rgamma_ratio([s - lG, -lG * lH - lM], [-lG, s * lH - lG * lH - lM])


def scheme_limit_moment_unified(lam_G, lam_H, s):
    """Equivalent form for ``lM = 0`` that stays finite at ``lG = 0``."""
    lG, lH, s = _mpq(lam_G), _mpq(lam_H), _mpq(s)
    return _rgamma_ratio([s + 1 - lG, 1 - lG * lH], [1 - lG, s * lH - lG * lH + 1])


# series densities -------------------------------------------------------------------

def _sum_series(log_mag: Callable[[int], float], term: Callable[[int], "mp.mpf"],
                start: int, tol: float, max_terms: int) -> SeriesValue:
    """Sum ``term(n)`` for ``n >= start`` in raised precision.

    ``log_mag(n)`` estimates ``log10 |term(n)|`` in floating point; it picks the
    precision and the stopping point (terms must eventually decrease).
    """
    peak = -math.inf
    n = start
    last_ok = None
    # scan magnitudes to find the peak and the cut-off
    while n < start + max_terms:
        lm = log_mag(n)
        if lm > peak:
            peak = lm
        if n > start + 5 and lm < peak and lm < math.log10(tol) - 3:
            last_ok = n
            break
        n += 1
    if last_ok is None:
        return SeriesValue(float("nan"), float("inf"), False)
    dps = int(max(0.0, peak)) + 25
    with mp.workdps(dps):
        acc = mp.mpf(0)
        for k in range(start, last_ok + 1):
            acc += term(k)
        tail = mp.mpf(10) ** log_mag(last_ok) * 2
        value = float(acc)
        err = float(tail) + abs(value) * 1e-16
    return SeriesValue(value, err, err <= max(tol, tol * abs(value)) * 10)


def stable_density(alpha, beta, x, tol: float = 1e-14, max_terms: int = 20000) -> SeriesValue:
    """Density of the reciprocal stable law ``S_{alpha,beta}`` by its power series

    ``(1/(beta pi)) sum_{n>=1} (-1)^{n+1} Gamma(n alpha + 1) sin(pi n alpha) / n! x^{n alpha/beta - 1}``.
    """
    alpha, beta, x = float(alpha), float(beta), float(x)
    if not 0 < alpha < 1:
        raise ValidationError("alpha must lie in (0, 1)")
    if x <= 0:
        return SeriesValue(0.0, 0.0, True)
    lx = math.log10(x)

    def log_mag(n):
        return ((math.lgamma(n * alpha + 1) - math.lgamma(n + 1)) / math.log(10)
                + (n * alpha / beta - 1) * lx)

    def term(n):
        a = mp.mpf(alpha)
        return ((-1) ** (n + 1) * mp.gamma(n * a + 1) * mp.sinpi(n * a) / mp.factorial(n)
                * mp.mpf(x) ** (n * a / beta - 1))

    v = _sum_series(log_mag, term, 1, tol, max_terms)
    scale = 1 / (beta * math.pi)
    return SeriesValue(v.value * scale, v.error * scale, v.converged)


def tilted_stable_density(alpha, beta, c, x, tol: float = 1e-14, max_terms: int = 20000) -> SeriesValue:
    """Density of the ``c``-tilt of ``S_{alpha,beta}``: ``x^c f(x) / E S^c``."""
    v = stable_density(alpha, beta, x, tol, max_terms)
    if not v.converged:
        return v
    mu_c = float(reciprocal_stable_moment(alpha, beta, c))
    f = float(x) ** float(c) / mu_c
    return SeriesValue(v.value * f, v.error * f, True)


def limit_density_X(lam_G, lam_H, lam_M_tilde, x, tol: float = 1e-14,
                    max_terms: int = 20000) -> SeriesValue:
    """Density of the scheme limit law ``X`` for parameters ``(lG, lH, lM~)``:

    ``Gamma(-lG lH - lM)/Gamma(-lG) sum_j (-1)^j x^(-lG + j - 1)/j!
    sin(pi (1 + j lH + lM))/pi Gamma(1 + j lH + lM)``.
    """
    lG, lH, lM = float(Fraction(lam_G)), float(Fraction(lam_H)), float(Fraction(lam_M_tilde))
    x = float(x)
    if x <= 0:
        return SeriesValue(0.0, 0.0, True)
    lx = math.log10(x)

    def log_mag(j):
        g = 1 + j * lH + lM
        lg = math.lgamma(g) if not (g <= 0 and g.is_integer()) else -300.0
        return (lg - math.lgamma(j + 1)) / math.log(10) + (-lG + j - 1) * lx

    def term(j):
        g = 1 + j * _mpq(lam_H) + _mpq(lam_M_tilde)
        s = mp.sinpi(g)
        if s == 0:
            return mp.mpf(0)
        return ((-1) ** j * mp.mpf(x) ** (-_mpq(lam_G) + j - 1) / mp.factorial(j)
                * s / mp.pi * mp.gamma(g))

    v = _sum_series(log_mag, term, 0, tol, max_terms)
    pref = float(_rgamma_ratio([-_mpq(lam_G) * _mpq(lam_H) - _mpq(lam_M_tilde)],
                               [-_mpq(lam_G)]))
    return SeriesValue(v.value * pref, abs(pref) * v.error, v.converged)


# mixed Poisson ------------------------------------------------------------------------

def mixed_poisson_pmf(moment: Callable, rho, ell: int, tol: float = 1e-15,
                      max_terms: int = 5000) -> SeriesValue:
    """``P{Y = ell} = sum_{s>=ell} (-1)^(s-ell) C(s, ell) mu_s rho^s / s!`` for ``Y ~ MPo(rho X)``.

    ``moment(s)`` must return ``E X^s`` (mpmath numbers are honoured).
    """
    rho = _mpq(rho)
    if rho < 0:
        raise ValidationError("rho must be non-negative")
    if ell < 0:
        return SeriesValue(0.0, 0.0, True)
    if rho == 0:
        return SeriesValue(1.0 if ell == 0 else 0.0, 0.0, True)

    def log_mag(s):
        with mp.workdps(20):
            m = abs(moment(s))
            if m == 0:
                return -400.0
            v = (mp.log10(mp.binomial(s, ell)) + mp.log10(m) + s * mp.log10(rho)
                 - mp.log10(mp.factorial(s)))
        return float(v)

    def term(s):
        return (-1) ** (s - ell) * mp.binomial(s, ell) * moment(s) * rho ** s / mp.factorial(s)

    return _sum_series(log_mag, term, ell, tol, max_terms)


def mixed_poisson_pmf_quadrature(density: Callable[[float], float], rho, ell: int,
                                 upper: float = math.inf) -> SeriesValue:
    """``P{Y = ell} = int e^(-rho x) (rho x)^ell / ell! f(x) dx`` by adaptive quadrature."""
    from scipy import integrate

    rho = float(rho)
    lf = math.lgamma(ell + 1)

    def integrand(x):
        if x <= 0:
            return 0.0
        return math.exp(-rho * x + ell * math.log(rho * x) - lf) * density(x)

    val, err = integrate.quad(integrand, 0, upper, limit=200, epsabs=1e-13, epsrel=1e-11)
    return SeriesValue(val, err, err < 1e-8)


def mixed_poisson_rayleigh_pmf(sigma, rho, ell: int) -> float:
    """Closed form for ``MPo(rho X)`` with ``X ~ Rayleigh(sigma)``."""
    with mp.workdps(40 + 2 * ell):
        r = mp.mpf(rho) * sigma
        h = r * r / 2
        acc = mp.mpf(0)
        for i in range(ell + 2):
            acc += (mp.binomial(ell + 1, i) * (-r) ** (ell + 1 - i) * mp.mpf(2) ** (mp.mpf(i - 1) / 2)
                    * mp.gammainc(mp.mpf(i + 1) / 2, a=h))
        return float(r ** ell / mp.factorial(ell) * mp.exp(h) * acc)


# moment transforms ---------------------------------------------------------------------

def stirling_transform(factorial_moments: Sequence) -> list:
    """Raw moments ``E X^s = sum_k S2(s, k) E (X)_k`` from factorial moments (index 0..S)."""
    fm = list(factorial_moments)
    return [sum(stirling2(s, k) * fm[k] for k in range(s + 1)) for s in range(len(fm))]


def inverse_stirling_transform(moments: Sequence) -> list:
    """Factorial moments ``E (X)_s = sum_k s(s, k) E X^k``."""
    m = list(moments)
    return [sum(stirling1(s, k) * m[k] for k in range(s + 1)) for s in range(len(m))]


# law objects -----------------------------------------------------------------------------

class LimitLaw:
    """A (possibly degenerate or discrete) limiting distribution."""

    continuous = True

    def moment(self, s):
        raise NotImplementedError

    def mean(self) -> float:
        return float(self.moment(1))

    def variance(self) -> float:
        return float(self.moment(2) - self.moment(1) ** 2)

    def density(self, x) -> float:
        raise NotImplementedError(f"{self} has no density")


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.12g}"


@dataclass(frozen=True)
class TiltedMittagLeffler(LimitLaw):
    """``tilt_c(M_alpha)``; ``c = 0`` is the Mittag-Leffler law itself."""

    alpha: Fraction
    c: Fraction = Fraction(0)

    def moment(self, s):
        return tilted_ml_moment(_mpq(self.alpha), _mpq(self.c), s)

    def density(self, x):
        # tilt_c(M_alpha) is the scheme law with lG = -c, lH = alpha, lM = 0
        return limit_density_X(-Fraction(self.c), self.alpha, 0, x).value

    def __str__(self):
        return f"TiltedMittagLeffler(alpha={_fmt(self.alpha)}, c={_fmt(self.c)})"


@dataclass(frozen=True)
class BetaStableProduct(LimitLaw):
    """``Beta(a, b)^power * tilt_c(M_alpha)`` (independent factors)."""

    alpha: Fraction
    c: Fraction
    a: Fraction
    b: Fraction
    power: Fraction

    def moment(self, s):
        return (beta_moment(_mpq(self.a), _mpq(self.b),
                            _mpq(s) * _mpq(self.power))
                * tilted_ml_moment(_mpq(self.alpha), _mpq(self.c), s))

    def density(self, x):
        lM = -Fraction(self.b)
        return limit_density_X(-Fraction(self.c), self.alpha, lM, x).value

    def __str__(self):
        return (f"BetaStableProduct(Beta({_fmt(self.a)}, {_fmt(self.b)})^{_fmt(self.power)} "
                f"* TiltedMittagLeffler(alpha={_fmt(self.alpha)}, c={_fmt(self.c)}))")


@dataclass(frozen=True)
class Rayleigh(LimitLaw):
    sigma: float

    def moment(self, s):
        return rayleigh_moment(self.sigma, s)

    def density(self, x):
        return rayleigh_density(self.sigma, x)

    def __str__(self):
        return f"Rayleigh(sigma={_fmt(self.sigma)})"


@dataclass(frozen=True)
class HalfNormal(LimitLaw):
    sigma: float

    def moment(self, s):
        return half_normal_moment(self.sigma, s)

    def density(self, x):
        return half_normal_density(self.sigma, x)

    def __str__(self):
        return f"HalfNormal(sigma={_fmt(self.sigma)})"


@dataclass(frozen=True)
class Scaled(LimitLaw):
    """``factor * law``."""

    law: LimitLaw
    factor: float

    def moment(self, s):
        return _mpq(self.factor) ** s * self.law.moment(s)

    def density(self, x):
        return self.law.density(x / self.factor) / self.factor

    def __str__(self):
        return f"{_fmt(self.factor)} * {self.law}"


@dataclass(frozen=True)
class DiracZero(LimitLaw):
    """Point mass at 0 for the normalized count; ``discrete`` describes the
    unnormalized count when it has a proper limit."""

    discrete: "LimitLaw | None" = None
    continuous = False

    def moment(self, s):
        return mp.mpf(1) if s == 0 else mp.mpf(0)

    def __str__(self):
        return "DiracZero" + (f"[X_n -> {self.discrete}]" if self.discrete else "")


@dataclass(frozen=True)
class BernoulliMixture(LimitLaw):
    """``Be(1 - p) * inner``: mass ``p`` at 0, otherwise ``inner``."""

    p: float
    inner: LimitLaw
    discrete: "LimitLaw | None" = None

    def moment(self, s):
        if s == 0:
            return mp.mpf(1)
        return (1 - _mpq(self.p)) * self.inner.moment(s)

    def pmf(self, k: int) -> float:
        """Law of the unnormalized count when both parts are discrete."""
        if not hasattr(self.inner, "pmf") or self.discrete is None:
            raise UnsupportedSchemeError("the continuous part has no probability mass function")
        return self.p * self.discrete.pmf(k) + (1 - self.p) * self.inner.pmf(k)

    def __str__(self):
        return f"BernoulliMixture(p0={_fmt(self.p)}, {self.inner})"


@dataclass(frozen=True)
class DiscreteLaw(LimitLaw):
    """A law on ``0, 1, 2, ...`` given by a probability function."""

    name: str
    pmf_fn: Callable[[int], float]
    support_hint: int = 200
    continuous = False

    def pmf(self, k: int) -> float:
        return float(self.pmf_fn(k))

    def moment(self, s):
        return mp.fsum(mp.mpf(k) ** s * self.pmf_fn(k) for k in range(self.support_hint))

    def __str__(self):
        return self.name

    def __hash__(self):
        return hash(self.name)


@dataclass(frozen=True)
class MixedPoisson(LimitLaw):
    """``MPo(rho X)`` with mixing law ``X``."""

    rho: float
    mixing: LimitLaw
    continuous = False

    def pmf(self, ell: int) -> float:
        v = mixed_poisson_pmf(self.mixing.moment, self.rho, ell)
        if not v.converged:
            raise NonConvergenceError(f"mixed Poisson series for ell={ell} did not converge")
        return v.value

    def moment(self, s):
        # E Y^s = sum_k S2(s,k) rho^k E X^k
        return mp.fsum(stirling2(s, k) * _mpq(self.rho) ** k * self.mixing.moment(k)
                       for k in range(s + 1))

    def __str__(self):
        return f"MixedPoisson(rho={_fmt(self.rho)}, {self.mixing})"


@dataclass(frozen=True)
class DirichletStableProduct(LimitLaw):
    """Joint law ``(D_l^{lH_l} V_l)_l`` with ``D ~ Dirichlet(-lG_l lH_l ..., -lM)`` and
    ``V_l ~ tilt_{-lG_l}(M_{lH_l})``."""

    lam_G: tuple
    lam_H: tuple
    lam_M_tilde: Fraction

    def joint_moment(self, s: Sequence[int]):
        alphas = [-Fraction(g) * Fraction(h) for g, h in zip(self.lam_G, self.lam_H)]
        alphas.append(-Fraction(self.lam_M_tilde))
        return dirichlet_stable_joint_moment(alphas, list(self.lam_H), s)

    def moment(self, s):
        raise NotImplementedError("use joint_moment for the multivariate law")

    def __str__(self):
        gs = ", ".join(_fmt(g) for g in self.lam_G)
        hs = ", ".join(_fmt(h) for h in self.lam_H)
        return f"DirichletStableProduct(lam_G=({gs}), lam_H=({hs}), lam_M={_fmt(self.lam_M_tilde)})"
