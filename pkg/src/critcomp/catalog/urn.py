"""Triangular Pólya urns.

Two colours: drawing white adds ``alpha`` white and ``beta`` black balls,
drawing black adds ``sigma = alpha + beta`` black balls. The scheme variable
``X_n`` is the number of white draws among the first ``n``, so the white count
is ``W_n = w0 + alpha X_n``. Histories are ball-labelled: ``n! f_n`` is the
number of histories, ``prod_{i<n} (w0 + b0 + sigma i)``.

The ``k + 1`` colour version has a diagonal block ``alpha_r`` and last column
``beta_r``; the statistic is the vector of draws of colours ``1..k``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import expr as ex
from ..errors import ValidationError
from ..schemes import ComponentSpec, SingularData, extended, multivariate
from .base import CatalogEntry, table

F = Fraction


@dataclass(frozen=True)
class UrnSpec:
    """Balanced triangular urn.

    ``alphas[r]``, ``betas[r]`` for the first ``k`` colours, ``initial`` has
    ``k + 1`` entries (the last one is the absorbing colour). ``sigma`` is the
    common row sum.
    """

    alphas: tuple
    betas: tuple
    initial: tuple

    def __post_init__(self):
        a = tuple(F(x) for x in self.alphas)
        b = tuple(F(x) for x in self.betas)
        i = tuple(F(x) for x in self.initial)
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "betas", b)
        object.__setattr__(self, "initial", i)
        if not a or len(a) != len(b) or len(i) != len(a) + 1:
            raise ValidationError("need k alphas, k betas and k+1 initial counts")
        sig = {x + y for x, y in zip(a, b)}
        if len(sig) != 1:
            raise ValidationError(f"unbalanced urn: row sums {sorted(sig)}")
        if any(x <= 0 for x in a) or any(y <= 0 for y in b):
            raise ValidationError("need alpha_r > 0 and beta_r > 0 (critical regime)")
        if any(x < 0 for x in i) or i[-1] < 0:
            raise ValidationError("initial counts must be non-negative")
        if any(x == 0 for x in i[:-1]):
            raise ValidationError("each drawn colour needs a positive initial count")

    @classmethod
    def two_colour(cls, alpha, beta, w0, b0) -> "UrnSpec":
        return cls((alpha,), (beta,), (w0, b0))

    @property
    def sigma(self) -> Fraction:
        return self.alphas[0] + self.betas[0]

    @property
    def k(self) -> int:
        return len(self.alphas)

    def matrix(self) -> list:
        k = self.k
        rows = []
        for r in range(k):
            row = [F(0)] * (k + 1)
            row[r] = self.alphas[r]
            row[k] = self.betas[r]
            rows.append(row)
        rows.append([F(0)] * k + [self.sigma])
        return rows

    def total_histories(self, n: int) -> Fraction:
        s0 = sum(self.initial)
        out = F(1)
        for i in range(n):
            out *= s0 + self.sigma * i
        return out


FIGURE_URN = UrnSpec.two_colour(1, 1, 2, 1)


# oracle ------------------------------------------------------------------------------

def urn_history_weights(u: UrnSpec, n: int) -> dict:
    """Histories after ``n`` draws by draw counts of colours ``1..k``.

    Each history picks one specific ball per step, so a state with ``c_r``
    balls of colour ``r`` branches with weight ``c_r``.
    """
    k = u.k
    layer = {(0,) * k: F(1)}
    for t in range(n):
        total = sum(u.initial) + u.sigma * t
        nxt: dict = {}
        for d, w in layer.items():
            rest = total
            for r in range(k):
                c = u.initial[r] + u.alphas[r] * d[r]
                rest -= c
                if c:
                    e = d[:r] + (d[r] + 1,) + d[r + 1:]
                    nxt[e] = nxt.get(e, 0) + w * c
            if rest:
                nxt[d] = nxt.get(d, 0) + w * rest
        layer = nxt
    return layer


def urn_oracle(u: UrnSpec, n: int):
    w = urn_history_weights(u, n)
    if u.k == 1:
        return table(n, {d[0]: v for d, v in w.items()})
    return table(n, w, tuple(range(1, u.k + 1)))


def exact_mean_white(u: UrnSpec, n: int) -> Fraction:
    """``E(W_n)`` for a two-colour urn by the linear recursion of the mean."""
    w = u.initial[0]
    s0 = sum(u.initial)
    for t in range(n):
        w = w + u.alphas[0] * w / (s0 + u.sigma * t)
    return w


# schemes -----------------------------------------------------------------------------

def _components(u: UrnSpec, r: int):
    z = ex.z()
    a, s = u.alphas[r], u.sigma
    G = ComponentSpec(ex.pow_binomial(-z, -u.initial[r] / a),
                      SingularData(1, -u.initial[r] / a, None, 1), f"(1-x)^(-{u.initial[r] / a})")
    H = ComponentSpec(ex.const(1) - ex.pow_binomial(-s * z, a / s),
                      SingularData(1 / s, a / s, 1, -1), f"1-(1-{s}z)^({a / s})")
    return G, H


def _m_component(u: UrnSpec):
    b0 = u.initial[-1]
    if b0 == 0:
        return None
    z = ex.z()
    s = u.sigma
    return ComponentSpec(ex.pow_binomial(-s * z, -b0 / s), SingularData(1 / s, -b0 / s, None, 1),
                         f"(1-{s}z)^(-{b0 / s})")


def build_urn2(u: UrnSpec = FIGURE_URN) -> CatalogEntry:
    if u.k != 1:
        raise ValidationError("build_urn2 needs a two-colour urn")
    G, H = _components(u, 0)
    M = _m_component(u)
    a, b = u.alphas[0], u.betas[0]
    w0, b0 = u.initial
    name = f"urn({a},{b},{w0},{b0})"
    spec = extended(G, H, M, name=name)
    return CatalogEntry(
        name, spec,
        description=f"white draws in a triangular urn [[{a},{b}],[0,{u.sigma}]] from ({w0},{b0})",
        support=lambda n: n >= 0, support_note="n >= 0",
        size_note=f"n draws; white balls W_n = {w0} + {a} X_n",
        oracle=lambda n: urn_oracle(u, n), oracle_max=7,
        simulator=lambda n, runs, seed, stream=0: simulate_urn2(u, n, runs, seed, stream),
        exact_mean_fn=lambda n: (exact_mean_white(u, n) - w0) / a,
        params={"urn": u, "white_offset": w0, "white_scale": a},
        notes=("refined counts X_{n,j} are formal: no combinatorial meaning is attached",),
        formal_refined=True,
    )


def build_urnK(u: UrnSpec) -> CatalogEntry:
    comps = [_components(u, r) for r in range(u.k)]
    M = _m_component(u)
    name = "urnK(" + ";".join(f"{a},{b}" for a, b in zip(u.alphas, u.betas)) + \
        "|" + ",".join(str(x) for x in u.initial) + ")"
    spec = multivariate(comps, M, name=name)
    return CatalogEntry(
        name, spec,
        description=f"draw counts of colours 1..{u.k} in a balanced triangular urn",
        support=lambda n: n >= 0, support_note="n >= 0",
        size_note="n draws; colour r holds a_r + alpha_r X_r balls",
        oracle=lambda n: urn_oracle(u, n), oracle_max=7,
        params={"urn": u},
        formal_refined=True,
    )


# simulation ----------------------------------------------------------------------------

def simulate_urn2(u: UrnSpec, n: int, runs: int, seed: int, stream: int = 0) -> np.ndarray:
    """White draws ``X_n`` of ``runs`` independent urns (ball chosen uniformly)."""
    from ..harness.rng import generator
    rng = generator(seed, stream)
    a = float(u.alphas[0])
    w = np.full(runs, float(u.initial[0]))
    s0, s = float(sum(u.initial)), float(u.sigma)
    draws = np.zeros(runs, dtype=np.int64)
    for t in range(n):
        hit = rng.random(runs) * (s0 + s * t) < w
        draws += hit
        w += a * hit
    return draws
