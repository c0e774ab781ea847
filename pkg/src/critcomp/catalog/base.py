"""Catalog entry type and shared enumeration helpers."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from ..errors import PreconditionError, UnsupportedSchemeError
from ..schemes import PmfTable, SchemeSpec, pmf_core, pmf_mv, pmf_refined, MULTIVARIATE


def table(n: int, weights: Mapping, marks=()) -> PmfTable:
    """Normalize nonnegative weights into an exact ``PmfTable``."""
    if len(marks) == 1 and weights and isinstance(next(iter(weights)), tuple):
        weights = {k[0]: w for k, w in weights.items()}  # single mark: plain int keys
    tot = sum(weights.values(), Fraction(0))
    if tot == 0:
        raise PreconditionError(f"no objects of size {n}")
    keys = sorted(weights)
    if keys and isinstance(keys[0], tuple):
        probs = {k: Fraction(weights[k]) / tot for k in keys if weights[k]}
    else:
        lo, hi = keys[0], keys[-1]
        probs = {k: Fraction(weights.get(k, 0)) / tot for k in range(lo, hi + 1)}
        while len(probs) > 1 and probs[max(probs)] == 0:
            del probs[max(probs)]
        while len(probs) > 1 and probs[min(probs)] == 0:
            del probs[min(probs)]
    return PmfTable(n, probs, tuple(marks))


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    """A worked example: scheme, size lattice, brute-force oracle and reference data.

    ``size_note`` explains how the scheme size ``n`` maps to the natural size of
    the objects; ``shift = (a, b)`` states it as ``a n + b`` (for instance
    ``(2, 2)`` for ``2n + 2`` labels). ``exact_pmf`` overrides the
    scheme extraction when the scheme is only the dominant part of the true
    generating function.
    """

    name: str
    spec: SchemeSpec
    description: str = ""
    support: Callable[[int], bool] = lambda n: n >= 1
    support_note: str = "all sizes n >= 1"
    size_note: str = ""
    shift: tuple = (1, 0)
    oracle: Callable[[int], PmfTable] | None = None
    oracle_max: int = 0
    refined_oracle: Callable[[int, tuple], PmfTable] | None = None
    exact_pmf_fn: Callable[[int], PmfTable] | None = None
    simulator: Callable | None = None
    exact_mean_fn: Callable[[int], Fraction] | None = None
    reference: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    notes: tuple = ()
    formal_refined: bool = False

    def natural_size(self, n: int) -> int:
        a, b = self.shift
        return a * n + b

    def exact_pmf(self, n: int) -> PmfTable:
        if self.exact_pmf_fn is not None:
            return self.exact_pmf_fn(n)
        if self.spec.kind == MULTIVARIATE:
            return pmf_mv(self.spec, n)
        return pmf_core(self.spec, n)

    def exact_mean(self, n: int) -> Fraction:
        """``E(X_n)`` exactly, through a fast recursion when the entry has one."""
        if self.exact_mean_fn is not None:
            return self.exact_mean_fn(n)
        if self.exact_pmf_fn is not None:
            return self.exact_pmf_fn(n).mean()
        from ..schemes import factorial_moment_exact
        return factorial_moment_exact(self.spec, n, 1)

    def exact_refined(self, n: int, marks) -> PmfTable:
        if self.exact_pmf_fn is not None:
            raise UnsupportedSchemeError(f"{self.name}: the scheme is not exact for refined counts")
        return pmf_refined(self.spec, n, marks)


def oracle_enumerate(entry: CatalogEntry, n: int, marks=None) -> PmfTable:
    """Exact table from the entry's brute-force oracle (no series engine)."""
    if not 0 <= n <= entry.oracle_max:
        raise PreconditionError(f"{entry.name}: oracle range is n <= {entry.oracle_max}")
    if not entry.support(n):
        raise PreconditionError(f"{entry.name}: size {n} outside support ({entry.support_note})")
    if marks:
        if entry.refined_oracle is None:
            raise UnsupportedSchemeError(f"{entry.name} has no refined oracle")
        return entry.refined_oracle(n, tuple(marks))
    if entry.oracle is None:
        raise UnsupportedSchemeError(f"{entry.name} has no oracle")
    return entry.oracle(n)


def composition_counts(n: int, g: list, h: list, marks=(), m: list | None = None) -> dict:
    """Weighted count of sequences of ``k`` blocks plus a rest, total size ``n``.

    A ``k``-sequence of blocks of sizes ``j_1..j_k`` followed by a rest of size
    ``r`` weighs ``g[k] * prod h[j_i] * m[r]`` (``m`` defaults to the empty rest).
    Returns weights keyed by ``k`` (no marks) or by the tuple of counts of
    blocks of each marked size. Plain dynamic programming over the block list.
    """
    # state: (size used, k, counts of marked sizes) -> weight
    marks = tuple(marks)
    layer = {(0, ()): 1}
    by_k = {0: dict(layer)}
    k = 0
    while layer:
        k += 1
        nxt: dict = {}
        for (used, cnt), w in layer.items():
            for j in range(1, n - used + 1):
                if not h[j]:
                    continue
                c = list(cnt) if cnt else [0] * len(marks)
                if j in marks:
                    c[marks.index(j)] += 1
                key = (used + j, tuple(c))
                nxt[key] = nxt.get(key, 0) + w * h[j]
        layer = nxt
        if layer:
            by_k[k] = layer
    out: dict = {}
    for k, lay in by_k.items():
        if k >= len(g) or not g[k]:
            continue
        for (used, cnt), w in lay.items():
            r = n - used
            w *= (1 if r == 0 else 0) if m is None else m[r]
            if not w:
                continue
            key = k if not marks else (cnt if cnt else (0,) * len(marks))
            out[key] = out.get(key, 0) + g[k] * w
    return out
