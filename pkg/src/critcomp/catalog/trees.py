"""Tree examples: supertrees, bilabelled 3-bundled trees, m-bundled recursive
trees, and the critical cycle example ``-log(1 - H)`` with ``H = 1 - sqrt(1 - 2z)``."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from .. import expr as ex
from ..combinat import double_factorial, gen_binomial
from ..schemes import ComponentSpec, SingularData, cycle, extended, multivariate
from .base import CatalogEntry, composition_counts, table

F = Fraction


# supertrees ------------------------------------------------------------------------

def _plane_trees(m: int) -> list:
    """All plane trees with ``m`` nodes as nested tuples (explicit listing)."""
    return _plane_trees_cached(m)


@lru_cache(maxsize=None)
def _plane_trees_cached(m: int) -> tuple:
    if m == 1:
        return ((),)
    return tuple(tuple(f) for f in _forests(m - 1))


@lru_cache(maxsize=None)
def _forests(m: int) -> tuple:
    if m == 0:
        return ((),)
    out = []
    for first in range(1, m + 1):
        for t in _plane_trees_cached(first):
            for rest in _forests(m - first):
                out.append((t,) + rest)
    return tuple(out)


def supertree_count_closed(n: int) -> int:
    """``K_n`` from the Lagrange-inversion sum."""
    tot = F(0)
    for k in range(1, n // 2 + 1):
        tot += F(2 ** k, n - k) * comb(2 * k - 2, k - 1) * comb(2 * n - 3 * k - 1, n - k - 1)
    assert tot.denominator == 1
    return int(tot)


def _supertree_weights(n: int, marks=()):
    plane = [0] + [len(_plane_trees(m)) for m in range(1, n + 1)]
    g = plane                                  # core: plane tree with k nodes
    h = [0, 0] + [2 * plane[j - 1] for j in range(2, n + 1)]  # coloured tree plus one atom
    return composition_counts(n, g, h, marks)


def supertrees_oracle(n: int):
    return table(n, _supertree_weights(n))


def supertrees_refined_oracle(n: int, marks: tuple):
    return table(n, _supertree_weights(n, marks), marks)


def build_supertrees() -> CatalogEntry:
    z = ex.z()
    C = (ex.const(1) - ex.pow_binomial(-4 * z, F(1, 2))) * F(1, 2)
    G = ComponentSpec(C, SingularData(F(1, 4), F(1, 2), F(1, 2), F(-1, 2)), "C")
    H = ComponentSpec(2 * z * C, SingularData(F(1, 4), F(1, 2), F(1, 4), F(-1, 4)), "2zC")
    spec = extended(G, H, None, name="supertrees")
    return CatalogEntry(
        "supertrees", spec,
        description="plane trees whose nodes carry red or blue plane trees; X_n = core size",
        support=lambda n: n >= 2, support_note="n >= 2",
        oracle=supertrees_oracle, refined_oracle=supertrees_refined_oracle, oracle_max=10,
        reference={"K_2..K_9": ([2, 2, 8, 18, 64, 188, 656, 2154], "OEIS A168506")},
        notes=("binary supertrees (binary core, binary substituted trees) give the same "
               "exponents and hence laws of the same shape; not shipped as an entry",),
    )


# bilabelled 3-bundled increasing trees ------------------------------------------------

def _phi3(d: int) -> int:
    return comb(d + 2, 2)


@lru_cache(maxsize=None)
def bilabelled_count(labels: int) -> int:
    """Total weight of bilabelled trees with the given number of labels."""
    if labels % 2 or labels < 2:
        return 0
    return sum(_root_profile(labels, ()).values())


@lru_cache(maxsize=None)
def _root_profile(labels: int, marks: tuple) -> dict:
    """Trees with ``labels`` labels by root degree (or by counts of root
    branches with ``2 j`` labels for ``j`` in ``marks``).

    The root holds the two smallest labels; the other ``labels - 2`` are
    shuffled into an ordered sequence of ``d`` branches, each a smaller tree,
    with weight ``C(d + 2, 2)``.
    """
    rest = labels - 2
    # ordered sequences of branches, exponential weights T_a / a!
    layer = {(0, (0,) * len(marks)): Fraction(1)}
    out: dict = {}
    d = 0
    while layer:
        for (used, cnt), w in layer.items():
            if used == rest:
                key = d if not marks else cnt
                out[key] = out.get(key, 0) + _phi3(d) * w * factorial(rest)
        d += 1
        nxt: dict = {}
        for (used, cnt), w in layer.items():
            for a in range(2, rest - used + 1, 2):
                t = bilabelled_count(a)
                c = list(cnt)
                if a // 2 in marks:
                    c[marks.index(a // 2)] += 1
                key = (used + a, tuple(c))
                nxt[key] = nxt.get(key, 0) + w * Fraction(t, factorial(a))
        layer = nxt
    return {k: int(v) for k, v in out.items() if v}


def bilabelled_oracle(n: int):
    """Root degree of trees with ``2n + 2`` labels (scheme size ``n``)."""
    return table(n, _root_profile(2 * n + 2, ()))


def bilabelled_refined_oracle(n: int, marks: tuple):
    return table(n, _root_profile(2 * n + 2, tuple(marks)), marks)


def build_bilabelled3() -> CatalogEntry:
    z = ex.z()
    G = ComponentSpec(ex.pow_binomial(-z, -3), SingularData(1, F(-3), None, 1), "(1-x)^-3")
    H = ComponentSpec(ex.const(1) - ex.pow_binomial(-z, F(1, 2)),
                      SingularData(1, F(1, 2), 1, -1), "1-sqrt(1-z)")
    spec = extended(G, H, None, name="bilabelled3")
    T = [(double_factorial(2 * m - 1) * double_factorial(2 * m - 3)) for m in range(1, 7)]
    return CatalogEntry(
        "bilabelled3", spec,
        description="root degree R_{n+1} of 3-bundled bilabelled increasing trees with 2n+2 labels",
        support=lambda n: n >= 0, support_note="all n >= 0 (odd label counts are empty)",
        size_note="scheme size n <-> 2n + 2 labels; f_n = T_{2n+2} / (2n)!", shift=(2, 2),
        oracle=bilabelled_oracle, refined_oracle=bilabelled_refined_oracle, oracle_max=5,
        reference={"T_2..T_12": (T, "OEIS A079484: (2n-1)!!(2n-3)!!")},
        params={"limit_scaling": "R_n / sqrt(n) -> sqrt(2) chi(4)"},
    )


# m-bundled plane-oriented recursive trees ----------------------------------------------

def mbundled_joint_weights(n: int, m: int) -> dict:
    """Exact law of the root's bundle sizes after growing a tree of size ``n + 1``.

    A node with ``d`` children in ``m`` bundles offers ``d + m`` insertion gaps
    (root bundle ``l`` offers ``d_l + 1``); a tree of size ``t`` has
    ``(m + 1) t - 1`` gaps in total and the new node picks one uniformly.
    """
    state = {(0,) * m: Fraction(1)}
    for t in range(1, n + 1):
        gaps = (m + 1) * t - 1
        nxt: dict = {}
        for d, p in state.items():
            root_gaps = 0
            for l in range(m):
                q = p * Fraction(d[l] + 1, gaps)
                root_gaps += d[l] + 1
                e = d[:l] + (d[l] + 1,) + d[l + 1:]
                nxt[e] = nxt.get(e, 0) + q
            stay = p * Fraction(gaps - root_gaps, gaps)
            if stay:
                nxt[d] = nxt.get(d, 0) + stay
        state = nxt
    return state


def build_mbundled(m: int = 3) -> CatalogEntry:
    if m < 1:
        raise ValueError("m >= 1")
    z = ex.z()
    a = F(1, m + 1)
    T = ex.const(1) - ex.pow_binomial(-(m + 1) * z, a)
    Hsd = SingularData(a, a, 1, -1)
    G = ComponentSpec(ex.reciprocal(ex.const(1) - z), SingularData(1, F(-1), None, 1), "1/(1-x)")
    H = ComponentSpec(T, Hsd, "T")
    spec = multivariate([(G, H)] * m, None, name=f"mbundled{m}")

    def oracle(n):
        return table(n, mbundled_joint_weights(n, m), tuple(range(1, m + 1)))

    return CatalogEntry(
        f"mbundled{m}", spec,
        description=f"root bundle sizes of {m}-bundled plane-oriented recursive trees of size n+1",
        support=lambda n: n >= 0, support_note="all n >= 0",
        size_note="scheme size n <-> tree size n + 1", shift=(1, 1),
        oracle=oracle, oracle_max=10,
        params={"m": m},
    )


# critical cycle example ----------------------------------------------------------------

def cycle2z_oracle(n: int):
    # -log(1 - H) with H = 1 - sqrt(1 - 2z): blocks weighted by h_j, cycles by 1/k
    h = [F(0)] + [-gen_binomial(F(1, 2), j) * (-2) ** j for j in range(1, n + 1)]
    g = [F(0)] + [F(1, k) for k in range(1, n + 1)]
    return table(n, composition_counts(n, g, h))


def build_cycle2z() -> CatalogEntry:
    z = ex.z()
    H = ComponentSpec(ex.const(1) - ex.pow_binomial(-2 * z, F(1, 2)),
                      SingularData(F(1, 2), F(1, 2), 1, -1), "1-sqrt(1-2z)")
    spec = cycle(H, None, name="cycle2z")
    return CatalogEntry(
        "cycle2z", spec,
        description="critical cycle scheme -log(1 - H), H = 1 - sqrt(1 - 2z)",
        oracle=cycle2z_oracle, oracle_max=12,
        reference={"n! f_n, n=1..6": ([1, 2, 8, 48, 384, 3840], "OEIS A000165: (2n-2)!!")},
    )
