import math
from fractions import Fraction as F

import mpmath as mp
import pytest
from hypothesis import given
from hypothesis import strategies as st

from critcomp import asymptotics as A
from critcomp import distributions as D
from critcomp import schemes as S
from critcomp.catalog import CrpSpec, get
from critcomp.catalog.crp import pitman_moment
from critcomp.combinat import catalan
from critcomp.errors import UnsupportedSchemeError, ValidationError


def spec(name):
    return get(name).spec


def ratio(exact: F, predicted) -> float:
    return float(mp.mpf(exact.numerator) / exact.denominator / predicted)


# classification ----------------------------------------------------------------------

def test_supertrees_is_critical():
    cl = A.classify_scheme(spec("supertrees"))
    assert cl.tag == A.CRITICAL
    assert (cl.lam_G, cl.lam_H, cl.lam_M_tilde) == (F(1, 2), F(1, 2), 0)
    assert cl.lam_M is None


def test_walk_returns_is_critical():
    cl = A.classify_scheme(spec("motzkin-walk-returns"))
    assert cl.tag == A.CRITICAL
    assert (cl.lam_G, cl.lam_H, cl.lam_M) == (-1, F(1, 2), F(-1, 2))


@pytest.mark.parametrize("name,tag", [
    ("synthetic-partial-i", A.PARTIAL_I), ("synthetic-partial-ii", A.PARTIAL_II),
    ("synthetic-degenerate-i", A.DEGENERATE_I), ("synthetic-degenerate-ii", A.DEGENERATE_II),
    ("synthetic-discrete-s", A.DISCRETE_S), ("cycle2z", A.CYCLE_CRITICAL), ("mbundled3", A.MV_CRITICAL),
])
def test_regime_tags(name, tag):
    assert A.classify_scheme(spec(name)).tag == tag


def test_partial_i_condition():
    cl = A.classify_scheme(spec("synthetic-partial-i"))
    assert cl.lam_M == cl.lam_G * cl.lam_H


def test_mv_with_positive_lambda_g_unsupported():
    st_ = spec("supertrees")
    mv = S.multivariate([(st_.G, st_.H)], st_.M)
    cl = A.classify_scheme(mv)
    assert cl.tag == A.UNSUPPORTED and cl.reasons


@pytest.mark.parametrize("name", ["supertrees", "motzkin-bridge-returns", "crp", "urn-figure"])
def test_criticality_check(name):
    assert A.check_criticality(spec(name))


# composed data and transfer --------------------------------------------------------------

def test_supertrees_composed_data():
    cd = A.composed_singular_data(spec("supertrees"))
    assert cd.rho == pytest.approx(0.25)
    assert cd.lam == F(1, 4)
    assert cd.c == pytest.approx(-0.5)


def test_lambda_f_rule():
    for name in ("supertrees", "motzkin-walk-returns", "motzkin-bridge-returns", "urn-figure", "crp"):
        cl = A.classify_scheme(spec(name))
        assert A.composed_singular_data(spec(name)).lam == cl.lam_G * cl.lam_H + cl.lam_M_tilde


def test_bilabelled_composed_data():
    cd = A.composed_singular_data(spec("bilabelled3"))
    assert cd.rho == pytest.approx(1) and cd.lam == F(-3, 2)


def test_transfer_central_binomial():
    sd = S.SingularData(1, F(-1, 2), None, 1)
    pred = A.transfer_asymptotic(sd, 100)
    assert pred == pytest.approx(1 / math.sqrt(100 * math.pi), rel=1e-14)
    assert pred == pytest.approx(0.05641895, abs=1e-8)
    exact = F(math.comb(200, 100), 4 ** 100)
    assert float(exact) == pytest.approx(0.05634848, abs=1e-8)
    # the prediction overshoots by 0.125 %
    assert float(pred / exact) == pytest.approx(1.00125, abs=1e-5)
    assert ratio(exact, pred) == pytest.approx(0.99875, abs=1e-5)


def test_transfer_supertrees_formula():
    # f_n ~ 4^n / (8 Gamma(3/4) n^(5/4))
    cd = A.composed_singular_data(spec("supertrees"))
    for n in (10, 100, 500):
        assert A.transfer_asymptotic(cd, n) == pytest.approx(4.0 ** n / (8 * math.gamma(0.75) * n ** 1.25), rel=1e-12)


def test_transfer_supertrees_n50_misses_five_percent():
    # the first correction is O(n^(-1/4)), so n = 50 is still 8 % off
    cd = A.composed_singular_data(spec("supertrees"))
    r = 1 / ratio(S.f_coefficient(spec("supertrees"), 50), A.transfer_asymptotic(cd, 50))
    assert r == pytest.approx(0.9175, abs=5e-4)
    assert abs(r - 1) > 0.05


@pytest.mark.parametrize("lam", [0, 1, 2, 5])
def test_transfer_rejects_gamma_poles(lam):
    with pytest.raises(ValidationError):
        A.transfer_asymptotic(S.SingularData(1, F(lam), None, 1), 10)


def test_transfer_negative_integer_exponent():
    # (1-z)^(-2) has coefficients n + 1
    v = A.transfer_asymptotic(S.SingularData(1, F(-2), None, 1), 1000)
    assert v == pytest.approx(1000)


def test_transfer_large_n_leaves_float_range():
    cd = A.composed_singular_data(spec("supertrees"))
    v = A.transfer_asymptotic(cd, 4096)
    assert isinstance(v, mp.mpf)
    assert float(mp.log10(v)) == pytest.approx(4096 * math.log10(4) - 1.25 * math.log10(4096)
                                                 - math.log10(8 * math.gamma(0.75)), abs=1e-9)


GRID = [2 ** k for k in range(6, 13)]


@pytest.mark.parametrize("name", ["supertrees", "motzkin-bridge-returns", "crp", "urn-figure", "bilabelled3"])
def test_transfer_ratio_trend(name):
    sp = spec(name)
    cd = A.composed_singular_data(sp)
    Fs = S.f_series(sp, GRID[-1] + 1)
    errs = [abs(ratio(Fs[n], A.transfer_asymptotic(cd, n)) - 1) for n in GRID]
    assert all(b < a for a, b in zip(errs, errs[1:]))


@pytest.mark.parametrize("name", ["motzkin-walk-returns", "cycle2z"])
def test_transfer_exact_for_pure_terms(name):
    sp = spec(name)
    cd = A.composed_singular_data(sp)
    Fs = S.f_series(sp, 1025)
    for n in (64, 256, 1024):
        assert ratio(Fs[n], A.transfer_asymptotic(cd, n)) == pytest.approx(1, abs=1e-12)


# limit moments ---------------------------------------------------------------------------

def test_rayleigh_second_moment():
    assert float(D.scheme_limit_moment(-1, F(1, 2), 0, 2)) == pytest.approx(4, rel=1e-14)
    assert float(D.rayleigh_moment(math.sqrt(2), 2)) == pytest.approx(4)


def test_supertrees_mean():
    _, mu = A.limit_moments(spec("supertrees"), 1)
    assert mu == pytest.approx(2 * math.gamma(0.75) / math.gamma(0.25), rel=1e-14)
    assert mu == pytest.approx(0.67597, abs=1e-5)


@pytest.mark.parametrize("name", ["supertrees", "crp", "urn-figure", "motzkin-walk-returns", "cycle2z"])
def test_zeroth_moment(name):
    assert A.limit_moments(spec(name), 0)[1] == pytest.approx(1)


def test_cycle_moments_are_ml():
    k, mu = A.limit_moments(spec("cycle2z"), 3)
    assert mu == pytest.approx(math.gamma(4) / math.gamma(2.5))
    assert k == pytest.approx(1)  # 1 / (-c_H)


@pytest.mark.parametrize("name", ["supertrees", "crp", "urn-figure", "motzkin-walk-returns",
                                  "motzkin-bridge-returns", "bilabelled3", "cycle2z", "crp-negative"])
def test_law_moments_match_limit_moments(name):
    law = A.identify_limit_law(spec(name))
    for s in range(9):
        assert float(law.moment(s)) == pytest.approx(A.limit_moments(spec(name), s)[1], rel=1e-10)


def test_unified_form_grid():
    for lG in [F(-3), F(-5, 2), F(-17, 10), F(-1), F(-2, 5), F(-1, 10)]:
        for lH in [F(1, 10), F(3, 10), F(1, 2), F(77, 100), F(9, 10)]:
            for s in range(7):
                a = D.scheme_limit_moment(lG, lH, 0, s)
                b = D.scheme_limit_moment_unified(lG, lH, s)
                assert float(a) == pytest.approx(float(b), rel=1e-12)


@pytest.mark.parametrize("triple", [(F(1, 2), F(1, 2), 0), (-1, F(1, 2), 0), (-2, F(1, 2), F(-1, 2)),
                                    (F(-1, 3), F(9, 10), 0)])
def test_carleman_sum_diverges(triple):
    terms = [float(D.scheme_limit_moment(*triple, s)) ** (-1 / (2 * s)) for s in range(1, 61)]
    # terms decay no faster than s^(-1/2), so the partial sums keep growing
    assert all(t * math.sqrt(s) > 0.1 for s, t in enumerate(terms, 1))
    assert sum(terms) > 2 * sum(terms[:15])


def test_mv_zero_vector_and_reduction():
    kaps, mu = A.multivariate_limit_moments(spec("mbundled3"), [0, 0, 0])
    assert mu == pytest.approx(1)
    assert len(kaps) == 3
    for name in ("crp", "urn-figure"):
        sp = spec(name)
        mv = S.multivariate([(sp.G, sp.H)], sp.M)
        for s in range(6):
            k1, mu1 = A.multivariate_limit_moments(mv, [s])
            k0, mu0 = A.limit_moments(sp, s)
            assert k1[0] == pytest.approx(k0) and mu1 == pytest.approx(mu0, rel=1e-12)


def test_mv_symmetric_bundles():
    _, a = A.multivariate_limit_moments(spec("mbundled3"), [1, 1, 0])
    _, b = A.multivariate_limit_moments(spec("mbundled3"), [0, 1, 1])
    assert a == pytest.approx(b, rel=1e-13)


def test_crp_moments_match_pitman():
    for a, th in [(F(1, 2), F(1, 2)), (F(1, 3), F(0)), (F(1, 2), F(-1, 4)), (F(2, 3), F(5, 2))]:
        sp = get(f"crp({a},{th})").spec
        for s in range(1, 6):
            k, mu = A.limit_moments(sp, s)
            assert k ** s * mu == pytest.approx(pitman_moment(CrpSpec(a, th), s), rel=1e-12)


# limit laws ------------------------------------------------------------------------------

def test_walk_and_bridge_laws():
    walk, bridge = A.identify_limit_law(spec("motzkin-walk-returns")), A.identify_limit_law(spec("motzkin-bridge-returns"))
    assert isinstance(walk, D.HalfNormal) and isinstance(bridge, D.Rayleigh)
    # kappa * sigma = sqrt(P(1)/P''(1)) = sqrt(3/2) for Motzkin steps
    for name, law in (("motzkin-walk-returns", walk), ("motzkin-bridge-returns", bridge)):
        k, _ = A.limit_moments(spec(name), 1)
        assert k * law.sigma == pytest.approx(math.sqrt(1.5))


def test_urn_law():
    law = A.identify_limit_law(spec("urn-figure"))
    assert isinstance(law, D.BetaStableProduct)
    assert (law.alpha, law.c, law.a, law.b, law.power) == (F(1, 2), 2, 1, F(1, 2), F(1, 2))
    assert float(law.moment(1)) == pytest.approx(math.sqrt(math.pi))


def test_supertrees_law():
    law = A.identify_limit_law(spec("supertrees"))
    assert str(law) == "TiltedMittagLeffler(alpha=1/2, c=-1/2)"


def test_law_for_parameters_rejects():
    with pytest.raises(UnsupportedSchemeError):
        A.law_for_parameters(F(1, 2), F(1, 2), F(-1, 2))


def test_degenerate_laws():
    law = A.identify_limit_law(spec("synthetic-degenerate-i"))
    assert isinstance(law, D.DiracZero) and law.moment(1) == 0
    tot = math.fsum(law.discrete.pmf(k) for k in range(law.discrete.support_hint))
    # g_k ~ k^(-3/2) / (2 sqrt(pi)) and G(tau_H) = 2, so 400 terms miss about 2 K^(-1/2) / (4 sqrt(pi))
    tail = 2 / math.sqrt(400) / (4 * math.sqrt(math.pi))
    assert tot + tail == pytest.approx(1, abs=0.05 * tail)
    mix = A.identify_limit_law(spec("synthetic-partial-ii"))
    assert isinstance(mix, D.BernoulliMixture)
    assert mix.p == pytest.approx(0.25)
    assert mix.pmf(2) == pytest.approx(0.5625)
    assert math.fsum(mix.pmf(k) for k in range(2001)) == pytest.approx(1, abs=0.05)


def test_partial_mixing_weights():
    assert A.degenerate_mixing_p(spec("synthetic-partial-i")) == pytest.approx(2 - math.sqrt(2))
    assert A.degenerate_mixing_p(spec("synthetic-partial-ii")) == pytest.approx(0.25)
    with pytest.raises(UnsupportedSchemeError):
        A.degenerate_mixing_p(spec("supertrees"))


def test_size_biased_normalization():
    sp = spec("synthetic-discrete-s")
    K = 4000
    g = S.g_coefficients(sp, K)
    partial = sum(gk * k for k, gk in enumerate(g))  # tau_H = 1
    # G = (1-x)^(3/2) - 1 + 3x/2, so G'(1) = 3/2; tail of k g_k is 2 K^(-1/2) / Gamma(-3/2)
    tail = 2 / math.sqrt(K) / math.gamma(-1.5)
    assert float(partial) + tail == pytest.approx(1.5, abs=0.02 * tail)
    law = A.identify_limit_law(sp)
    tail_law = 2 / math.sqrt(2000) / math.gamma(-1.5) / 1.5
    assert math.fsum(law.pmf(k) for k in range(1, 2001)) + tail_law == pytest.approx(1, abs=0.02 * tail_law)


# refined counts ------------------------------------------------------------------------------

@pytest.mark.parametrize("j", range(1, 8))
def test_supertrees_theta(j):
    n = 900
    # c_{j-1} = [z^(j-1)] C(z) = Catalan(j - 2)
    c = catalan(j - 2) if j >= 2 else 0
    want = 2 * 0.25 ** (j - 1) * c * math.sqrt(n)
    assert A.theta(spec("supertrees"), n, j) == pytest.approx(want, rel=1e-13)


def test_supertrees_theta_example():
    assert A.theta(spec("supertrees"), 10_000, 2) == pytest.approx(50)


def test_theta_asymptotic_form():
    sp = spec("supertrees")
    r = [A.theta(sp, 10 ** 6, j) / A.theta_asymptotic(sp, 10 ** 6, j) for j in (10, 100, 1000)]
    assert all(abs(b - 1) < abs(a - 1) for a, b in zip(r, r[1:]))
    # relative correction is O(1/j)
    assert abs(r[-1] - 1) < 3 / 1000


def test_threshold_exponents():
    assert A.threshold_exponent(spec("supertrees")) == F(1, 3)
    for a in (F(1, 3), F(1, 2), F(2, 3)):
        sp = get(f"crp({a},1)").spec
        alpha = 1 / a - 1
        assert A.threshold_exponent(sp) == 1 / (alpha + 2)


def test_phase_classify():
    sp = spec("supertrees")
    n = 10 ** 6
    assert A.phase_classify(sp, n, 2).phase == A.CONTINUOUS
    rep = A.phase_classify(sp, n, 100)
    assert rep.phase == A.MIXED_POISSON
    assert isinstance(rep.law, D.MixedPoisson) and rep.law.rho == pytest.approx(rep.theta)
    assert A.phase_classify(sp, n, 1000).phase == A.DEGENERATE
    assert A.phase_classify(sp, n, 2, growth=0.5).phase == A.DEGENERATE


def test_correlation_limits():
    sp = spec("supertrees")
    law = A.identify_limit_law(sp)
    m1, m2 = float(law.moment(1)), float(law.moment(2))
    V = m2 - m1 * m1
    big = A.cov_corr_asymptotic(sp, 10 ** 12, 2, 3)
    assert big.corr == pytest.approx(1, abs=1e-5) and big.corr_simplified == pytest.approx(1, abs=1e-5)
    # theta1 bounded, theta2 growing
    cc = A.cov_corr_asymptotic(sp, 10 ** 12, 60, 2)
    r1 = cc.theta1
    assert cc.corr_simplified == pytest.approx(math.sqrt(r1) / math.sqrt(r1 + m1), rel=1e-4)
    assert cc.corr == pytest.approx(math.sqrt(r1 * V) / math.sqrt(r1 * V + m1), rel=1e-4)
    assert cc.cov == pytest.approx(cc.theta1 * cc.theta2 * V)


@given(st.integers(2, 40), st.integers(2, 40))
def test_correlation_bounded(j1, j2):
    cc = A.cov_corr_asymptotic(spec("supertrees"), 5000, j1, j2)
    assert 0 < cc.corr <= 1 and 0 < cc.corr_simplified <= 1
