"""Singularity analysis of composition schemes: regime classification,
composed singular data, transfer asymptotics, limit moments and laws,
and the phase diagram of the refined counts ``X_{n,j}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath as mp

from . import distributions as D
from .errors import UnsupportedSchemeError, ValidationError
from .schemes import CYCLE, MULTIVARIATE, SchemeSpec, SingularData, h_coefficient

# tags
CRITICAL = "critical-small-exponent"
CYCLE_CRITICAL = "cycle-critical"
MV_CRITICAL = "multivariate-critical"
DEGENERATE_I = "degenerate-(i)"            # 0 < lG < 1, lM < lG lH
PARTIAL_I = "partial-degenerate-(i)"       # 0 < lG < 1, lM = lG lH
DEGENERATE_II = "degenerate-(ii)"          # lG > 1, lM < lH
PARTIAL_II = "partial-degenerate-(ii)"     # lG > 1, lM = lH
DISCRETE_S = "discrete-size-biased"        # lG > 1, lM > lH
SUBCRITICAL_M = "dominant-M"               # rho_M < rho_H
UNSUPPORTED = "unsupported"

_REL = 1e-9


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _close(a, b) -> bool:
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return a == b
    a, b = float(a), float(b)
    return abs(a - b) <= _REL * max(1.0, abs(a), abs(b))


@dataclass
class Classification:
    tag: str
    lam_G: Fraction | None = None
    lam_H: Fraction | None = None
    lam_M: Fraction | None = None      # None when M is entire or absent
    lam_M_tilde: Fraction = Fraction(0)
    reasons: list = field(default_factory=list)

    @property
    def supported(self) -> bool:
        return self.tag != UNSUPPORTED


def _m_data(spec: SchemeSpec) -> SingularData | None:
    return spec.M.singular if spec.M is not None else None


def _lam_M(spec) -> Fraction | None:
    sd = _m_data(spec)
    if sd is None or sd.entire:
        return None
    return _q(sd.lam)


def _tau_M(spec):
    sd = _m_data(spec)
    if sd is None:
        return 1
    if sd.entire or _q(sd.lam) > 0:
        if sd.tau is None:
            raise ValidationError("M needs tau (its value at rho_H)")
        return sd.tau
    return None


def classify_scheme(spec: SchemeSpec) -> Classification:
    """Decide which limit theorem applies."""
    if spec.kind == MULTIVARIATE:
        return _classify_mv(spec)
    H = spec.H.singular
    H.check("H")
    if H.entire:
        return Classification(UNSUPPORTED, reasons=["H is entire"])
    lH = _q(H.lam)
    lM = _lam_M(spec)
    lMt = min(Fraction(0), lM) if lM is not None else Fraction(0)
    msd = _m_data(spec)
    if msd is not None:
        msd.check("M")
        if not msd.entire and float(msd.rho) < float(H.rho) * (1 - _REL):
            return Classification(SUBCRITICAL_M, None, lH, lM, lMt,
                                  ["M is singular before H: a bounded number of components"])
    if not 0 < lH < 1:
        return Classification(UNSUPPORTED, None, lH, lM, lMt, ["need 0 < lambda_H < 1"])
    if H.tau is None:
        return Classification(UNSUPPORTED, None, lH, lM, lMt, ["H needs tau_H"])
    if spec.kind == CYCLE:
        if not _close(H.tau, 1):
            return Classification(UNSUPPORTED, None, lH, lM, lMt,
                                  ["cycle scheme is critical only when tau_H = 1"])
        if lM is not None and lM < 0:
            return Classification(UNSUPPORTED, None, lH, lM, lMt,
                                  ["cycle scheme with a singular M (lambda_M < 0) is not covered"])
        return Classification(CYCLE_CRITICAL, None, lH, lM, lMt)
    G = spec.G.singular
    G.check("G")
    if G.entire:
        return Classification(UNSUPPORTED, None, lH, lM, lMt, ["G is entire: not critical"])
    lG = _q(G.lam)
    if not _close(G.rho, H.tau):
        return Classification(UNSUPPORTED, lG, lH, lM, lMt,
                              [f"not critical: rho_G = {G.rho} but tau_H = {H.tau}"])
    if lG < 0:
        return Classification(CRITICAL, lG, lH, lM, lMt)
    if 0 < lG < 1:
        if lM is None or lG * lH < lM:
            return Classification(CRITICAL, lG, lH, lM, Fraction(0),
                                  [] if lM is not None else ["entire M: lambda_M~ = 0"])
        if lM == lG * lH:
            return Classification(PARTIAL_I, lG, lH, lM, lMt)
        return Classification(DEGENERATE_I, lG, lH, lM, lMt)
    if lG > 1:
        if lM is None or lM > lH:
            return Classification(DISCRETE_S, lG, lH, lM, lMt)
        if lM == lH:
            return Classification(PARTIAL_II, lG, lH, lM, lMt)
        return Classification(DEGENERATE_II, lG, lH, lM, lMt)
    return Classification(UNSUPPORTED, lG, lH, lM, lMt, ["lambda_G = 1 is not covered"])


def _classify_mv(spec: SchemeSpec) -> Classification:
    lM = _lam_M(spec)
    lMt = min(Fraction(0), lM) if lM is not None else Fraction(0)
    rhos = []
    for l, (G, H) in enumerate(spec.components):
        G.singular.check(f"G_{l + 1}")
        H.singular.check(f"H_{l + 1}")
        lG, lH = _q(G.singular.lam), _q(H.singular.lam)
        if not 0 < lH < 1 or lG >= 0:
            return Classification(UNSUPPORTED, lam_M=lM, lam_M_tilde=lMt,
                                  reasons=[f"component {l + 1}: need 0 < lambda_H < 1 and lambda_G < 0"])
        if not _close(G.singular.rho, H.singular.tau):
            return Classification(UNSUPPORTED, lam_M=lM, lam_M_tilde=lMt,
                                  reasons=[f"component {l + 1} is not critical"])
        rhos.append(H.singular.rho)
    if any(not _close(r, rhos[0]) for r in rhos):
        return Classification(UNSUPPORTED, lam_M=lM, lam_M_tilde=lMt,
                              reasons=["all H_l must share the same radius"])
    return Classification(MV_CRITICAL, lam_M=lM, lam_M_tilde=lMt)


# composed singular data ------------------------------------------------------------

@dataclass
class SingularTerm:
    """``c (1 - z/rho)^lam`` (``kind='power'``) or ``c log(1/(1 - z/rho))`` (``'log'``)."""

    lam: Fraction
    c: float
    kind: str = "power"


@dataclass
class ComposedData:
    rho: float
    terms: list  # dominant first

    @property
    def lam(self) -> Fraction:
        return self.terms[0].lam

    @property
    def c(self) -> float:
        return self.terms[0].c


def _d1_G(G: SingularData) -> float:
    """``G'(rho_G)``, needed when ``lambda_G > 1``."""
    d1 = getattr(G, "d1", None)
    if d1 is None:
        raise ValidationError("G'(rho_G) (SingularData.d1) is required when lambda_G > 1")
    return float(d1)


def composed_singular_data(spec: SchemeSpec) -> ComposedData:
    """Singular expansion of ``F(z) = G(H(z)) M(z)`` at ``rho_H``."""
    cl = classify_scheme(spec)
    if spec.kind == MULTIVARIATE:
        return _composed_mv(spec)
    H = spec.H.singular
    rho = float(H.rho)
    msd = _m_data(spec)
    lM = cl.lam_M
    if cl.tag == SUBCRITICAL_M:
        raise UnsupportedSchemeError("F is dominated by the singularity of M; see identify_limit_law")
    if cl.tag == UNSUPPORTED:
        raise UnsupportedSchemeError("; ".join(cl.reasons) or "unsupported scheme")
    cH = float(H.c)
    if spec.kind == CYCLE:
        tM = float(_tau_M(spec))
        # -log(1 - H) ~ lam_H log(1/(1 - z/rho)) - log(-c_H)
        return ComposedData(rho, [SingularTerm(Fraction(0), float(cl.lam_H) * tM, "log")])
    G = spec.G.singular
    lG, lH = cl.lam_G, cl.lam_H
    cG, rG = float(G.c), float(G.rho)
    base = (-cH / rG) ** float(lG)
    terms = []
    if lG < 0:
        if lM is not None and lM < 0:
            terms.append(SingularTerm(lG * lH + lM, float(msd.c) * cG * base))
        else:
            terms.append(SingularTerm(lG * lH, float(_tau_M(spec)) * cG * base))
    elif 0 < lG < 1:
        tM = _tau_M(spec)
        if tM is not None:
            terms.append(SingularTerm(lG * lH, float(tM) * cG * base))
        else:
            # lambda_M < 0: M's own singularity multiplies G(H) ~ tau_G
            terms.append(SingularTerm(lG * lH + lM, float(msd.c) * cG * base))
        if lM is not None:
            terms.append(SingularTerm(lM, float(msd.c) * float(G.tau)))
    else:  # lG > 1: G(H) ~ G(tau_H) + G'(tau_H) c_H (1 - z/rho)^lH
        tM = _tau_M(spec)
        d1 = _d1_G(G)
        if tM is not None:
            terms.append(SingularTerm(lH, float(tM) * d1 * cH))
        if lM is not None:
            terms.append(SingularTerm(lM, float(msd.c) * float(G.tau)))
    terms.sort(key=lambda t: t.lam)
    return ComposedData(rho, terms)


def _composed_mv(spec: SchemeSpec) -> ComposedData:
    rho = float(spec.components[0][1].singular.rho)
    lam = Fraction(0)
    c = 1.0
    for G, H in spec.components:
        lG, lH = _q(G.singular.lam), _q(H.singular.lam)
        lam += lG * lH
        c *= float(G.singular.c) * (-float(H.singular.c) / float(G.singular.rho)) ** float(lG)
    lM = _lam_M(spec)
    if lM is not None and lM < 0:
        lam += lM
        c *= float(spec.M.singular.c)
    else:
        c *= float(_tau_M(spec))
    return ComposedData(rho, [SingularTerm(lam, c)])


def transfer_asymptotic(data, n: int) -> float:
    """Leading term of ``[z^n]`` for ``SingularData``, ``SingularTerm`` lists or ``ComposedData``:
    ``c rho^(-n) n^(-lam-1) / Gamma(-lam)`` (``c rho^(-n) / n`` for a log term).

    A float when it fits, an ``mpmath.mpf`` beyond the double range."""
    if isinstance(data, SingularData):
        if data.entire:
            raise ValidationError("entire functions have no transfer asymptotic")
        rho, term = float(data.rho), SingularTerm(_q(data.lam), float(data.c))
    elif isinstance(data, ComposedData):
        rho, term = data.rho, data.terms[0]
    else:
        raise TypeError("need SingularData or ComposedData")
    lam = term.lam
    if term.kind != "log" and lam.denominator == 1 and lam >= 0:
        raise ValidationError("non-negative integer exponent: coefficients vanish eventually")
    if term.kind == "log":
        lg, scale = -n * math.log(rho) - math.log(n), term.c
    else:
        lg = -n * math.log(rho) - (float(lam) + 1) * math.log(n)
        scale = term.c / D.gamma(-float(lam))
    if lg < 700:
        return scale * math.exp(lg)
    # past the float range: same formula in mpmath
    return scale * mp.exp(-n * mp.log(rho) - (0 if term.kind == "log" else float(lam) + 1) * mp.log(n)
                          - (mp.log(n) if term.kind == "log" else 0))


# limit moments and laws ----------------------------------------------------------------

def _kappa(H: SingularData) -> float:
    return float(H.tau) / -float(H.c)


def limit_moments(spec: SchemeSpec, s) -> tuple[float, float]:
    """``(kappa, mu_s)`` with ``E (X_n)_s ~ kappa^s n^(s lam_H) mu_s``."""
    cl = classify_scheme(spec)
    if cl.tag == CYCLE_CRITICAL:
        return _kappa(spec.H.singular), float(D.ml_moment(D._mpq(cl.lam_H), s))
    if cl.tag != CRITICAL:
        raise UnsupportedSchemeError(f"no continuous limit law in regime {cl.tag}")
    mu = D.scheme_limit_moment(cl.lam_G, cl.lam_H, cl.lam_M_tilde, s)
    return _kappa(spec.H.singular), float(mu)


def multivariate_limit_moments(spec: SchemeSpec, s: Sequence[int]) -> tuple[list, float]:
    """``([kappa_l], mu_s)`` for the joint factorial moments of a multivariate scheme."""
    cl = classify_scheme(spec)
    if cl.tag != MV_CRITICAL:
        raise UnsupportedSchemeError(f"multivariate scheme in regime {cl.tag}")
    lGs = [_q(G.singular.lam) for G, _ in spec.components]
    lHs = [_q(H.singular.lam) for _, H in spec.components]
    law = D.DirichletStableProduct(tuple(lGs), tuple(lHs), cl.lam_M_tilde)
    kappas = [_kappa(H.singular) for _, H in spec.components]
    return kappas, float(law.joint_moment(list(s)))


def law_for_parameters(lam_G, lam_H, lam_M_tilde=Fraction(0)) -> D.LimitLaw:
    """Identify the limit law from the exponent triple, with closed forms where they exist."""
    lG, lH, lM = _q(lam_G), _q(lam_H), _q(lam_M_tilde)
    if lM == 0:
        if lG == -1 and lH == Fraction(1, 2):
            return D.Rayleigh(math.sqrt(2))
        return D.TiltedMittagLeffler(lH, -lG)
    if lG >= 0:
        raise UnsupportedSchemeError("lambda_M~ < 0 requires lambda_G < 0")
    if lG == -1 and lH - lM == 1:
        if lH == Fraction(1, 2):
            return D.HalfNormal(math.sqrt(2))
        return D.TiltedMittagLeffler(lH, Fraction(0))
    return D.BetaStableProduct(alpha=lH, c=-lG, a=-lG * lH, b=-lM, power=lH)


def _boltzmann_law(spec: SchemeSpec, x: float, label: str) -> D.DiscreteLaw:
    """``P{k} = g_k x^k / G(x)``."""
    K = 400
    g = [float(c) for c in _g_coeffs(spec, K)]
    w = [g[k] * x ** k for k in range(K + 1)]
    G = spec.G.singular if spec.G is not None else None
    if G is not None and G.tau is not None and _close(x, G.rho):
        tot = float(G.tau)  # the truncated sum converges too slowly at the singularity
    else:
        tot = math.fsum(w)
    return D.DiscreteLaw(f"{label}(x={x:.6g})", lambda k: w[k] / tot if 0 <= k <= K else 0.0, K + 1)


def _size_biased_law(spec: SchemeSpec) -> D.DiscreteLaw:
    """``P{S = k} = g_k k tau_H^(k-1) / G'(tau_H)``."""
    tau = float(spec.H.singular.tau)
    d1 = _d1_G(spec.G.singular)
    K = 2000
    g = [float(c) for c in _g_coeffs(spec, K)]
    return D.DiscreteLaw("SizeBiased(g_k k tau^(k-1)/G'(tau))",
                         lambda k: g[k] * k * tau ** (k - 1) / d1 if 1 <= k <= K else 0.0, K + 1)


def _g_coeffs(spec, K):
    from .schemes import g_coefficients
    return g_coefficients(spec, K)


def degenerate_mixing_p(spec: SchemeSpec) -> float:
    """Mass ``p`` of the bounded part in the partially degenerate regimes."""
    cl = classify_scheme(spec)
    if cl.tag not in (PARTIAL_I, PARTIAL_II):
        raise UnsupportedSchemeError(f"no mixing weight in regime {cl.tag}")
    G, H, M = spec.G.singular, spec.H.singular, spec.M.singular
    tG, cM, cG, cH = float(G.tau), float(M.c), float(G.c), float(H.c)
    tM = float(M.tau) if M.tau is not None else None
    if cl.tag == PARTIAL_I:
        if tM is None:
            raise ValidationError("M needs tau")
        a = tG * -cM
        b = tM * -cG * (-cH / float(G.rho)) ** float(cl.lam_G)
    else:
        if tM is None:
            raise ValidationError("M needs tau")
        a = tG * -cM
        # the H-singularity enters through G'(tau_H) (H - tau_H) ~ G'(tau_H) c_H t^lam_H
        b = tM * _d1_G(G) * -cH
    p = a / (a + b)
    if not 0 < p < 1:
        raise ValidationError(f"mixing weight p = {p} outside (0, 1): check the sign conventions")
    return p


def identify_limit_law(spec: SchemeSpec) -> D.LimitLaw:
    """Limit of ``X_n / (kappa n^lam_H)`` (or of ``X_n`` itself in the discrete regimes)."""
    cl = classify_scheme(spec)
    if cl.tag == CRITICAL:
        return law_for_parameters(cl.lam_G, cl.lam_H, cl.lam_M_tilde)
    if cl.tag == CYCLE_CRITICAL:
        return D.TiltedMittagLeffler(cl.lam_H, Fraction(0))
    if cl.tag == MV_CRITICAL:
        return D.DirichletStableProduct(tuple(_q(G.singular.lam) for G, _ in spec.components),
                                        tuple(_q(H.singular.lam) for _, H in spec.components),
                                        cl.lam_M_tilde)
    if cl.tag in (DEGENERATE_I, DEGENERATE_II):
        return D.DiracZero(_boltzmann_law(spec, float(spec.H.singular.tau), "Boltzmann"))
    if cl.tag == PARTIAL_I:
        p = degenerate_mixing_p(spec)
        inner = law_for_parameters(cl.lam_G, cl.lam_H, 0)
        return D.BernoulliMixture(p, inner, _boltzmann_law(spec, float(spec.H.singular.tau), "Boltzmann"))
    if cl.tag == PARTIAL_II:
        p = degenerate_mixing_p(spec)
        return D.BernoulliMixture(p, _size_biased_law(spec),
                                  _boltzmann_law(spec, float(spec.H.singular.tau), "Boltzmann"))
    if cl.tag == DISCRETE_S:
        return _size_biased_law(spec)
    if cl.tag == SUBCRITICAL_M:
        x = getattr(spec.M.singular, "h_at_rho", None)
        if x is None:
            raise UnsupportedSchemeError("dominant-M regime needs H(rho_M) (SingularData.h_at_rho)")
        return _boltzmann_law(spec, float(x), "Boltzmann")
    raise UnsupportedSchemeError("; ".join(cl.reasons) or "unsupported scheme")


# refined counts -------------------------------------------------------------------------

def theta(spec: SchemeSpec, n: int, j: int) -> float:
    """``theta_{n,j} = rho_H^j h_j n^lam_H / (-c_H)``."""
    H = spec.H.singular
    # rho^j h_j stays O(1) even when h_j alone overflows a float
    scaled = _q(H.rho) ** j * h_coefficient(spec, j)
    return float(scaled) * n ** float(_q(H.lam)) / -float(H.c)


def theta_asymptotic(spec: SchemeSpec, n: int, j: int) -> float:
    """Large-``j`` form ``n^lam / (j^(1+lam) |Gamma(-lam)|)`` of ``theta_{n,j}``."""
    lam = float(_q(spec.H.singular.lam))
    return n ** lam / (j ** (1 + lam) * abs(D.gamma(-lam)))


CONTINUOUS, MIXED_POISSON, DEGENERATE = "continuous", "mixed-poisson", "degenerate"


@dataclass
class PhaseReport:
    n: int
    j: int
    theta: float
    threshold_exponent: Fraction
    growth_exponent: float
    phase: str
    law: D.LimitLaw

    def __str__(self):
        return (f"theta={self.theta:.6g} phase={self.phase} "
                f"threshold_exponent={self.threshold_exponent} law={self.law}")


def threshold_exponent(spec: SchemeSpec) -> Fraction:
    lH = _q(spec.H.singular.lam)
    return lH / (1 + lH)


def phase_classify(spec: SchemeSpec, n: int, j: int, growth: float | None = None,
                   tol: float = 0.05) -> PhaseReport:
    """Phase of ``X_{n,j}`` when ``j ~ n^growth``.

    Without ``growth`` the exponent is read off as ``log j / log n``; within
    ``tol`` of the threshold ``lam_H/(1+lam_H)`` the count is mixed Poisson
    with parameter ``theta_{n,j}``.
    """
    thr = threshold_exponent(spec)
    g = growth if growth is not None else (math.log(j) / math.log(n) if n > 1 else 0.0)
    th = theta(spec, n, j)
    X = identify_limit_law(spec)
    if g < float(thr) - tol:
        phase, law = CONTINUOUS, X
    elif g > float(thr) + tol:
        phase, law = DEGENERATE, D.DiracZero()
    else:
        phase, law = MIXED_POISSON, D.MixedPoisson(th, X)
    return PhaseReport(n, j, th, thr, g, phase, law)


@dataclass
class CovCorr:
    cov: float
    corr: float
    theta1: float
    theta2: float
    corr_simplified: float  # sqrt(t1 t2) / sqrt((t1 + E X)(t2 + E X))


def cov_corr_asymptotic(spec: SchemeSpec, n: int, j1: int, j2: int) -> CovCorr:
    """``cov ~ theta1 theta2 V(X)`` and the matching correlation.

    With ``V(X_{n,j}) ~ theta^2 V(X) + theta E(X)`` the correlation is
    ``1/sqrt((1 + E X/(theta1 V X))(1 + E X/(theta2 V X)))``. The variant
    without ``V(X)`` is returned as ``corr_simplified``; both tend to 1 when
    both thetas grow, but only ``corr`` matches the exact values to second order.
    """
    X = identify_limit_law(spec)
    m1, m2 = float(X.moment(1)), float(X.moment(2))
    V = m2 - m1 * m1
    t1, t2 = theta(spec, n, j1), theta(spec, n, j2)
    corr = 1 / math.sqrt((1 + m1 / (t1 * V)) * (1 + m1 / (t2 * V)))
    simp = math.sqrt(t1 * t2) / math.sqrt((t1 + m1) * (t2 + m1))
    return CovCorr(t1 * t2 * V, corr, t1, t2, simp)


def check_criticality(spec: SchemeSpec, order: int = 4000, tol: float = 1e-9) -> bool:
    """Numerically confirm ``H(rho_H) = rho_G`` from partial sums of ``H``.

    The tail beyond ``order`` is estimated from the declared ``(lam_H, c_H)``:
    ``sum_{n > N} h_n rho^n ~ c N^(-lam) / (lam Gamma(-lam))``. Raises
    ``ValidationError`` on mismatch.
    """
    pairs = ([(G, H) for G, H in spec.components] if spec.kind == MULTIVARIATE
             else [(spec.G, spec.H)])
    for G, H in pairs:
        hs = H.singular
        target = 1.0 if G is None else float(G.singular.rho)
        lam, rho, c = float(_q(hs.lam)), float(hs.rho), float(hs.c)
        coeffs = H.series(order).coeffs
        # partial sums in high precision, rho may be inexact
        with mp.workdps(30):
            r = mp.mpf(hs.rho.numerator) / hs.rho.denominator if isinstance(hs.rho, Fraction) else mp.mpf(rho)
            part = mp.fsum(mp.mpf(x.numerator) / x.denominator * r ** k for k, x in enumerate(coeffs))
            tail = c * order ** (-lam) / (lam * D.gamma(-lam))
            val = float(part + tail)
        if abs(val - target) > max(tol, 10 * abs(tail) * order ** -0.5):
            raise ValidationError(f"not critical: H(rho_H) ~ {val!r} but rho_G = {target!r}")
    return True
