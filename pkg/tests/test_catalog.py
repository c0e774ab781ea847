import math
from fractions import Fraction as F

import pytest

from critcomp import schemes as S
from critcomp.catalog import (CrpSpec, MOTZKIN, StepSet, UrnSpec, all_entries, build_lattice,
                              get, names, oracle_enumerate)
from critcomp.catalog.crp import crp_oracle, exact_mean_tables
from critcomp.catalog.lattice import BRIDGE_RETURNS, minimal_bridge_weights, returns_weights
from critcomp.catalog.trees import _root_profile, bilabelled_count, supertree_count_closed
from critcomp.catalog.urn import exact_mean_white, urn_history_weights
from critcomp.combinat import double_factorial
from critcomp.errors import PreconditionError, ValidationError
from critcomp.harness import descriptor as Dsc

ORACLE_ENTRIES = [n for n in names() if get(n).oracle is not None]


def _range(entry):
    return [n for n in range(entry.oracle_max + 1) if entry.support(n)]


@pytest.mark.parametrize("name", ORACLE_ENTRIES)
def test_oracle_matches_engine(name):
    e = get(name)
    for n in _range(e):
        assert oracle_enumerate(e, n) == e.exact_pmf(n), (name, n)


@pytest.mark.parametrize("name", [n for n in ORACLE_ENTRIES if get(n).refined_oracle is not None])
def test_refined_oracle_matches_engine(name):
    e = get(name)
    for n in _range(e)[-4:]:
        for marks in ((1,), (2,), (1, 2), (2, 3)):
            assert oracle_enumerate(e, n, marks) == e.exact_refined(n, marks), (name, n, marks)


def test_oracle_range_enforced():
    e = get("supertrees")
    with pytest.raises(PreconditionError):
        oracle_enumerate(e, e.oracle_max + 1)
    with pytest.raises(PreconditionError):
        oracle_enumerate(e, 1)  # outside the support


# reference sequences ---------------------------------------------------------------

def test_supertrees_counts():
    sp = get("supertrees").spec
    Fs = S.f_series(sp, 301)
    assert [Fs[n] for n in range(2, 10)] == [2, 2, 8, 18, 64, 188, 656, 2154]
    assert all(Fs[n] == supertree_count_closed(n) for n in range(2, 301))
    assert get("supertrees").reference["K_2..K_9"][0] == [2, 2, 8, 18, 64, 188, 656, 2154]


def test_supertrees_n4_pmf():
    assert oracle_enumerate(get("supertrees"), 4).probs == {1: F(1, 2), 2: F(1, 2)}


def test_bilabelled_counts():
    want = [1, 3, 45, 1575, 99225, 9823275]
    assert [bilabelled_count(2 * m) for m in range(1, 7)] == want
    assert want == [double_factorial(2 * m - 1) * double_factorial(2 * m - 3) for m in range(1, 7)]
    e = get("bilabelled3")
    Fs = S.f_series(e.spec, 6)
    # f_n = T_{2n+2} / (2n)!
    for n in range(5):
        assert Fs[n] == F(want[n], math.factorial(2 * n))
    assert bilabelled_count(7) == 0


def test_bilabelled_taylor_by_root_degree():
    # z^4/4!: 3u and z^6/6!: 9u + 36u^2 by direct enumeration
    assert _root_profile(4, ()) == {1: 3}
    assert _root_profile(6, ()) == {1: 9, 2: 36}
    assert sum(_root_profile(8, ()).values()) == 1575
    e = get("bilabelled3")
    tab = e.exact_pmf(2)
    assert tab.probs == {1: F(9, 45), 2: F(36, 45)}


def test_bilabelled_shift():
    e = get("bilabelled3")
    assert e.shift == (2, 2) and e.natural_size(3) == 8


def test_cycle2z_counts():
    Fs = S.f_series(get("cycle2z").spec, 51)
    for n in range(1, 51):
        assert math.factorial(n) * Fs[n] == double_factorial(2 * n - 2)


def test_motzkin_bridges_and_walks():
    Fb = S.f_series(get("motzkin-bridge-returns").spec, 12)
    assert [Fb[n] for n in range(7)] == [1, 1, 3, 7, 19, 51, 141]
    Fw = S.f_series(get("motzkin-walk-returns").spec, 12)
    assert all(Fw[n] == 3 ** n for n in range(12))


def test_minimal_bridges():
    h = minimal_bridge_weights(8, MOTZKIN)
    assert h[1:4] == [1, 2, 2]
    sp = get("motzkin-bridge-returns").spec
    assert [S.h_coefficient(sp, j) for j in range(1, 9)] == h[1:]


def test_returns_dp_total():
    # all Motzkin bridges of length 6
    assert sum(returns_weights(6, MOTZKIN, True).values()) == 141


def test_zero_drift_and_periodicity():
    assert MOTZKIN.zero_drift and MOTZKIN.drift == 0
    with pytest.raises(PreconditionError):
        build_lattice(StepSet(1, 1, 2), BRIDGE_RETURNS)
    with pytest.raises(ValidationError):
        StepSet(1, 0, 1)
    with pytest.raises(ValidationError):
        build_lattice(MOTZKIN, "zigzag")


def test_weighted_steps():
    e = build_lattice(StepSet(2, 1, 2), BRIDGE_RETURNS)
    for n in range(8):
        assert oracle_enumerate(e, n) == e.exact_pmf(n)
    assert e.name.startswith("lattice(2,1,2)")


def test_coloured_bridge_support():
    e = get("motzkin-coloured-bridge-3")
    assert not e.support(2) and e.support(3)
    with pytest.raises(Exception):
        e.exact_pmf(2)


def test_arbitrary_colours_geometric():
    # P{X = l} = 2^-l on l >= 1; convergence is geometric, so compare exactly
    e = get("motzkin-arbitrary-colours")
    errs = {n: [abs(e.exact_pmf(n)[l] - F(1, 2 ** l)) for l in range(1, 6)] for n in (10, 30, 120)}
    for l in range(5):
        assert errs[120][l] < errs[30][l] < errs[10][l]
    assert max(errs[120]) < F(1, 10 ** 14)


# urns --------------------------------------------------------------------------------

def test_urn_histories():
    u = get("urn-figure")
    Fs = S.f_series(u.spec, 201)
    total = 1
    for n in range(201):
        assert math.factorial(n) * Fs[n] == total
        total *= 3 + 2 * n


def test_urn_history_oracle_total():
    u = UrnSpec.two_colour(1, 1, 2, 1)
    for n in range(8):
        assert sum(urn_history_weights(u, n).values()) == u.total_histories(n)


def test_urn_mean_recursion():
    e = get("urn-figure")
    u = UrnSpec.two_colour(1, 1, 2, 1)
    for n in (1, 5, 20):
        # W_n = w0 + alpha X_n
        assert exact_mean_white(u, n) == 2 + e.exact_pmf(n).mean()


def test_urn_validation():
    with pytest.raises(ValidationError):
        UrnSpec((1, 2), (1, 2), (1, 1, 1))
    with pytest.raises(ValidationError):
        UrnSpec.two_colour(0, 2, 1, 1)
    with pytest.raises(ValidationError):
        get("urn(1,1,2)")


def test_urn3_refined_formal():
    e = get("urn3")
    assert e.spec.kind == S.MULTIVARIATE
    for n in range(6):
        assert oracle_enumerate(e, n) == e.exact_pmf(n)


# CRP ---------------------------------------------------------------------------------

def test_crp_n4():
    c = CrpSpec(F(1, 2), F(1, 2))
    tab = get("crp").exact_pmf(4)
    assert tab == crp_oracle(c, 4)
    # P{K_4 = 1} = (1/2)(3/2)(5/2) / ((3/2)(5/2)(7/2))
    assert tab.probs[1] == F(1, 2) * F(3, 2) * F(5, 2) / (F(3, 2) * F(5, 2) * F(7, 2))
    assert sum(tab.probs.values()) == 1


@pytest.mark.parametrize("a,th", [(F(1, 2), F(1, 2)), (F(1, 3), 0), (F(1, 2), F(-1, 4)), (F(3, 4), 2)])
def test_crp_branches(a, th):
    e = get(f"crp({a},{th})")
    c = CrpSpec(a, th)
    for n in range(1, 9):
        assert e.exact_pmf(n) == crp_oracle(c, n)
    assert exact_mean_tables(c, 30) == S.factorial_moment_exact(e.spec, 30, 1)


def test_crp_validation():
    with pytest.raises(ValidationError):
        CrpSpec(F(3, 2), 1)
    with pytest.raises(ValidationError):
        CrpSpec(F(1, 2), F(-1, 2))


def test_crp_psi_branch_names():
    assert get("crp").params["psi"] == "power"
    assert get("crp-theta0").params["psi"] == "log"
    assert get("crp-negative").params["psi"] == "shifted"


# registry and descriptors ---------------------------------------------------------------

def test_parametric_names():
    assert get("mbundled2").name == "mbundled2"
    assert get("motzkin-coloured-walk-3").name == "motzkin-coloured-walk-3"
    assert get("crp(1/3,1)").params["crp"] == CrpSpec(F(1, 3), 1)
    with pytest.raises(ValidationError):
        get("no-such-entry")


@pytest.mark.parametrize("name", names())
def test_descriptor_roundtrip(name):
    e = get(name)
    obj = Dsc.spec_to_json(e.spec)
    back = Dsc.spec_from_json(obj).spec
    assert Dsc.spec_to_json(back) == obj
    if e.spec.kind != S.MULTIVARIATE:
        assert list(S.f_series(back, 10).coeffs) == list(S.f_series(e.spec, 10).coeffs)
    else:
        assert S.pmf_mv(back, 5) == S.pmf_mv(e.spec, 5)


def test_every_entry_described():
    for e in all_entries():
        assert e.description and e.support_note
