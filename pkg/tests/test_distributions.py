import math
from fractions import Fraction as F

import mpmath as mp
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from critcomp import distributions as D
from critcomp.combinat import falling, stirling1, stirling2

SQ2 = math.sqrt(2)


def quad(f, a=0, b=math.inf):
    return integrate.quad(f, a, b, limit=400, epsabs=1e-12, epsrel=1e-10)[0]


# Gamma-ratio moment families ---------------------------------------------------------

def test_tilt_zero_is_identity():
    for s in range(5):
        assert D.tilt_moments(lambda t: D.ml_moment(F(1, 3), t), 0, s) == pytest.approx(
            float(D.ml_moment(F(1, 3), s)), rel=1e-14)


def test_tilted_ml_half_mean_is_rayleigh_mean():
    # Gamma(2) Gamma(1/2) / Gamma(1)
    assert float(D.tilted_ml_moment(F(1, 2), 1, 1)) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert float(D.tilted_ml_moment(F(1, 2), 1, 1)) == pytest.approx(float(D.rayleigh_moment(SQ2, 1)))


@pytest.mark.parametrize("s", range(1, 6))
def test_tilted_beta_stays_beta(s):
    a, b, c = F(3, 2), F(2, 3), F(5, 4)
    lhs = D.tilt_moments(lambda t: D.beta_moment(a, b, t), c, s)
    assert float(lhs) == pytest.approx(float(D.beta_moment(a + c, b, s)), rel=1e-13)


@given(st.fractions(0, 3, max_denominator=7), st.fractions(0, 3, max_denominator=7), st.integers(0, 6))
def test_tilt_composition(c1, c2, s):
    base = lambda t: D.ml_moment(F(2, 5), t)  # noqa: E731
    twice = D.tilt_moments(lambda t: D.tilt_moments(base, c1, t), c2, s)
    once = D.tilt_moments(base, c1 + c2, s)
    assert float(twice) == pytest.approx(float(once), rel=1e-12)


def test_reciprocal_stable_examples():
    assert float(D.reciprocal_stable_moment(F(1, 2), F(1, 2), 1)) == pytest.approx(2 / math.sqrt(math.pi))
    assert D.reciprocal_stable_moment(F(1, 3), F(1, 5), 0) == 1
    assert float(D.reciprocal_stable_moment(F(1, 2), F(1, 2), 2)) == pytest.approx(2.0)


def test_beta_moments():
    assert float(D.beta_moment(1, 1, 2)) == pytest.approx(1 / 3)
    # quadrature oracle
    a, b = 2.5, 0.75
    dens = lambda x: x ** (a - 1) * (1 - x) ** (b - 1) / math.exp(  # noqa: E731
        math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
    for s in (1, 2, 3.5):
        assert float(D.beta_moment(F(5, 2), F(3, 4), s)) == pytest.approx(quad(lambda x: x ** s * dens(x), 0, 1), rel=1e-8)


def test_beta_stable_product_urn_mean():
    # alpha=1, sigma=2, w0=2, b0=1: Beta(1, 1/2)^(1/2) * tilt_2(M_(1/2))
    v = D.beta_stable_product_moment(F(1, 2), F(1, 2), F(1, 2), 2, 1)
    assert float(v) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


@pytest.mark.parametrize("s", range(0, 7))
def test_beta_stable_product_factorizes(s):
    alpha1, c, beta2 = F(1, 2), F(2), F(1, 2)
    beta1 = alpha1
    prod = D.beta_moment(beta1 * c, beta2, s * beta1) * D.tilted_ml_moment(alpha1, c, s)
    assert float(D.beta_stable_product_moment(alpha1, beta1, beta2, c, s)) == pytest.approx(float(prod), rel=1e-13)


@pytest.mark.parametrize("s", range(0, 6))
def test_dirichlet_reduces_to_beta_stable(s):
    a1, a2, r = F(1, 3), F(3, 4), F(2, 5)
    lhs = D.dirichlet_stable_joint_moment([a1, a2], [r], [s])
    rhs = D.beta_stable_product_moment(r, r, a2, a1 / r, s)
    assert float(lhs) == pytest.approx(float(rhs), rel=1e-13)


def test_dirichlet_zero_and_symmetry():
    al = [F(1, 4), F(1, 4), F(1, 4), F(1, 2)]
    r = [F(1, 2)] * 3
    assert D.dirichlet_stable_joint_moment(al, r, [0, 0, 0]) == pytest.approx(1)
    base = float(D.dirichlet_stable_joint_moment(al, r, [2, 1, 0]))
    for perm in ([1, 2, 0], [0, 1, 2], [2, 0, 1]):
        assert float(D.dirichlet_stable_joint_moment(al, r, perm)) == pytest.approx(base, rel=1e-13)


def test_scheme_moment_forms_agree():
    # unified form vs the main form when lM = 0, over a grid
    for lG in [-3, -2.5, -1.7, -1, -0.4, -0.1]:
        for lH in [0.1, 0.3, 0.5, 0.77, 0.9]:
            for s in range(7):
                a = D.scheme_limit_moment(F(lG).limit_denominator(100), F(lH).limit_denominator(100), 0, s)
                b = D.scheme_limit_moment_unified(F(lG).limit_denominator(100), F(lH).limit_denominator(100), s)
                assert float(a) == pytest.approx(float(b), rel=1e-12)


@pytest.mark.parametrize("law", [D.Rayleigh(SQ2), D.HalfNormal(SQ2), D.TiltedMittagLeffler(F(1, 2), F(-1, 2)),
                                 D.BetaStableProduct(F(1, 2), F(2), F(1), F(1, 2), F(1, 2))],
                         ids=str)
def test_hankel_positivity(law):
    m0, m1, m2 = (float(law.moment(s)) for s in range(3))
    assert m0 * m2 - m1 * m1 >= 0


# densities ---------------------------------------------------------------------------

@pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
def test_ml_half_density_is_half_normal(x):
    v = D.stable_density(0.5, 0.5, x)
    assert v.converged
    assert v.value == pytest.approx(math.exp(-x * x / 4) / math.sqrt(math.pi), abs=1e-8)


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
def test_tilted_ml_half_density_is_rayleigh(x):
    v = D.tilted_stable_density(0.5, 0.5, 1, x)
    assert v.value == pytest.approx(x / 2 * math.exp(-x * x / 4), abs=1e-8)


# upper limits sit where the density is below 1e-15; past them the series needs
# hundreds of digits of cancellation
@pytest.mark.parametrize("alpha,beta,top", [(0.5, 0.5, 14), (1 / 3, 1 / 3, 40), (0.5, 0.25, 5)])
def test_stable_density_normalized(alpha, beta, top):
    total = quad(lambda x: D.stable_density(alpha, beta, x).value, 0, top)
    assert total == pytest.approx(1, abs=1e-6)


@pytest.mark.parametrize("x", [0.5, 1, 2, 4])
def test_limit_density_closed_forms(x):
    assert D.limit_density_X(-1, F(1, 2), 0, x).value == pytest.approx(D.rayleigh_density(SQ2, x), abs=1e-6)
    assert D.limit_density_X(-1, F(1, 2), F(-1, 2), x).value == pytest.approx(D.half_normal_density(SQ2, x), abs=1e-6)


def test_stable_density_flags_failure():
    v = D.stable_density(0.5, 0.05, 30.0, max_terms=50)
    assert not v.converged


# mixed Poisson ---------------------------------------------------------------------

def test_mixed_poisson_dirac_is_poisson():
    v = D.mixed_poisson_pmf(lambda s: mp.mpf(1), 1, 0)
    assert v.converged and v.value == pytest.approx(math.exp(-1), abs=1e-14)


def test_mixed_poisson_rayleigh_example():
    want = 1 - math.sqrt(math.pi / 2) * math.exp(0.5) * math.erfc(1 / SQ2)
    assert want == pytest.approx(0.3443, abs=1e-4)
    assert D.mixed_poisson_pmf(lambda s: D.rayleigh_moment(1, s), 1, 0).value == pytest.approx(want, abs=1e-12)
    assert D.mixed_poisson_rayleigh_pmf(1, 1, 0) == pytest.approx(want, abs=1e-12)
    assert D.mixed_poisson_pmf_quadrature(lambda x: D.rayleigh_density(1, x), 1, 0).value == pytest.approx(want, abs=1e-9)


@pytest.mark.parametrize("rho", [0.25, 1, 2])
def test_mixed_poisson_normalized(rho):
    tot = math.fsum(D.mixed_poisson_rayleigh_pmf(1, rho, ell) for ell in range(41))
    assert tot == pytest.approx(1, abs=1e-10)
    tot = math.fsum(D.mixed_poisson_pmf(lambda s: D.rayleigh_moment(1, s), rho, ell).value for ell in range(41))
    assert tot == pytest.approx(1, abs=1e-10)


def test_mixed_poisson_small_rho():
    assert D.mixed_poisson_rayleigh_pmf(1, 1e-9, 0) == pytest.approx(1, abs=1e-8)
    assert D.mixed_poisson_pmf(lambda s: D.rayleigh_moment(1, s), 0, 0).value == 1


@pytest.mark.parametrize("sigma,rho", [(1, 0.5), (SQ2, 1), (1, 2)])
def test_mixed_poisson_rayleigh_mean(sigma, rho):
    mean = math.fsum(ell * D.mixed_poisson_rayleigh_pmf(sigma, rho, ell) for ell in range(80))
    assert mean == pytest.approx(rho * sigma * math.sqrt(math.pi / 2), abs=1e-8)


@pytest.mark.parametrize("s", range(1, 5))
def test_mixed_poisson_factorial_moments(s):
    rho = 1.5
    law = D.TiltedMittagLeffler(F(1, 2), F(-1, 2))
    fm = math.fsum(falling(ell, s) * D.mixed_poisson_pmf(law.moment, rho, ell).value for ell in range(90))
    assert fm == pytest.approx(rho ** s * float(law.moment(s)), rel=1e-8)


def test_mixed_poisson_law_object():
    law = D.MixedPoisson(2.0, D.Rayleigh(1))
    assert law.pmf(3) == pytest.approx(D.mixed_poisson_rayleigh_pmf(1, 2.0, 3), abs=1e-12)
    assert float(law.moment(1)) == pytest.approx(2.0 * math.sqrt(math.pi / 2))


# Stirling transforms --------------------------------------------------------------

def test_bell_numbers():
    assert D.stirling_transform([1] * 6) == [1, 1, 2, 5, 15, 52]


@given(st.lists(st.fractions(-50, 50, max_denominator=20), min_size=1, max_size=13))
def test_stirling_roundtrip(xs):
    assert D.inverse_stirling_transform(D.stirling_transform(xs)) == xs
    assert D.stirling_transform(D.inverse_stirling_transform(xs)) == xs


@given(st.integers(0, 12), st.integers(0, 10))
def test_point_mass_factorial_moments(a, S):
    fm = D.inverse_stirling_transform([a ** s for s in range(S + 1)])
    assert fm == [falling(a, s) for s in range(S + 1)]


@given(st.integers(1, 25), st.integers(1, 25))
def test_stirling_recurrences(n, k):
    assert stirling2(n, k) == k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)
    assert stirling1(n, k) == stirling1(n - 1, k - 1) - (n - 1) * stirling1(n - 1, k)


def test_gamma_determinism():
    a = D.beta_stable_product_moment(F(1, 3), F(1, 3), F(1, 2), F(3, 2), 5)
    b = D.beta_stable_product_moment(F(1, 3), F(1, 3), F(1, 2), F(3, 2), 5)
    assert a == b
