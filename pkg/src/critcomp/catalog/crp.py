"""Two-parameter Chinese restaurant process ``(a, theta)``.

Scheme size ``n`` is the number of customers; ``X_n`` is the number of tables
and ``X_{n,j}`` the number of tables with ``j`` customers. The root weight
``psi`` depends on the sign of ``beta = theta / a``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import expr as ex
from ..combinat import gen_binomial
from ..errors import ValidationError
from ..schemes import ComponentSpec, SingularData, cycle, extended
from .base import CatalogEntry, table

F = Fraction


@dataclass(frozen=True)
class CrpSpec:
    a: Fraction
    theta: Fraction

    def __post_init__(self):
        a, t = F(self.a), F(self.theta)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "theta", t)
        if not 0 < a < 1:
            raise ValidationError("need 0 < a < 1")
        if not t > -a:
            raise ValidationError("need theta > -a")

    @property
    def alpha(self) -> Fraction:
        return 1 / self.a - 1

    @property
    def beta(self) -> Fraction:
        return self.theta / self.a


# oracle: exact seating recursion over partitions ------------------------------------------

def crp_partition_law(c: CrpSpec, n: int) -> dict:
    """Law of the multiset of table sizes after ``n`` customers.

    Customer ``m + 1`` joins a table of size ``s`` with probability
    ``(s - a) / (m + theta)`` and opens a new table with probability
    ``(theta + a K) / (m + theta)``.
    """
    a, th = c.a, c.theta
    layer = {(1,): F(1)} if n >= 1 else {(): F(1)}
    for m in range(1, n):
        nxt: dict = {}
        for sizes, p in layer.items():
            den = m + th
            new = tuple(sorted(sizes + (1,)))
            nxt[new] = nxt.get(new, 0) + p * (th + a * len(sizes)) / den
            seen = set()
            for i, s in enumerate(sizes):
                if s in seen:
                    continue
                seen.add(s)
                mult = sizes.count(s)
                grown = tuple(sorted(sizes[:i] + (s + 1,) + sizes[i + 1:]))
                nxt[grown] = nxt.get(grown, 0) + p * mult * (s - a) / den
        layer = nxt
    return layer


def crp_oracle(c: CrpSpec, n: int):
    out: dict = {}
    for sizes, p in crp_partition_law(c, n).items():
        out[len(sizes)] = out.get(len(sizes), 0) + p
    return table(n, out)


def crp_refined_oracle(c: CrpSpec, n: int, marks: tuple):
    out: dict = {}
    for sizes, p in crp_partition_law(c, n).items():
        key = tuple(sizes.count(j) for j in marks)
        out[key] = out.get(key, 0) + p
    return table(n, out, marks)


def exact_mean_tables(c: CrpSpec, n: int) -> Fraction:
    """``E(K_n)`` from ``E(K_{m+1}) = E(K_m) + (theta + a E(K_m)) / (m + theta)``."""
    if n == 0:
        return F(0)
    k = F(1)
    for m in range(1, n):
        k += (c.theta + c.a * k) / (m + c.theta)
    return k


def theta_crp(c: CrpSpec, n: int, j: int) -> float:
    """``n^a C(j - 1 - a, j - 1) / ((alpha + 1) j)``."""
    a = c.a
    return float(n) ** float(a) * float(gen_binomial(j - 1 - a, j - 1)) / (float(1 / a) * j)


def pitman_moment(c: CrpSpec, s: int) -> float:
    """``Gamma(s + theta/a) Gamma(theta) / (Gamma(theta + s a) Gamma(theta/a))``, stated
    through the equivalent ``+1``-shifted form so that ``theta = 0`` is allowed."""
    from mpmath import mp, gamma
    a, th = mp.mpf(c.a.numerator) / c.a.denominator, mp.mpf(c.theta.numerator) / c.theta.denominator
    return float(gamma(th + 1) * gamma(th / a + s + 1) / (gamma(th / a + 1) * gamma(th + s * a + 1)))


# scheme ------------------------------------------------------------------------------

def build_crp(c: CrpSpec = CrpSpec(F(1, 2), F(1, 2))) -> CatalogEntry:
    z = ex.z()
    a, beta = c.a, c.beta
    T = ex.const(1) - ex.pow_binomial(-z / a, a)
    H = ComponentSpec(T, SingularData(a, a, 1, -1), "T")
    name = f"crp({a},{c.theta})"
    if beta > 0:
        G = ComponentSpec(ex.pow_binomial(-z, -beta), SingularData(1, -beta, None, 1), f"(1-t)^(-{beta})")
        spec = extended(G, H, None, name=name)
        branch = "power"
    elif beta == 0:
        spec = cycle(H, None, offset=ex.const(1), name=name)
        branch = "log"
    else:
        Gx = 1 + (ex.pow_binomial(-z, -beta) - 1) * (1 / beta)
        G = ComponentSpec(Gx, SingularData(1, -beta, 1 - 1 / beta, 1 / beta),
                          f"1+((1-t)^(-{beta})-1)/{beta}")
        spec = extended(G, H, None, name=name)
        branch = "shifted"
    return CatalogEntry(
        name, spec,
        description=f"tables of a Chinese restaurant process with a={a}, theta={c.theta}",
        support=lambda n: n >= 1, support_note="n >= 1",
        size_note="scheme size n = customers = tree size - 1",
        oracle=lambda n: crp_oracle(c, n), oracle_max=10,
        refined_oracle=lambda n, marks: crp_refined_oracle(c, n, marks),
        simulator=lambda n, runs, seed, stream=0: simulate_crp(c, n, runs, seed, stream),
        exact_mean_fn=lambda n: exact_mean_tables(c, n),
        params={"crp": c, "alpha": c.alpha, "beta": beta, "psi": branch},
    )


def simulate_crp(c: CrpSpec, n: int, runs: int, seed: int, stream: int = 0) -> np.ndarray:
    """Table counts after ``n`` customers; the count is itself a Markov chain."""
    from ..harness.rng import generator
    rng = generator(seed, stream)
    a, th = float(c.a), float(c.theta)
    k = np.ones(runs, dtype=np.int64) if n >= 1 else np.zeros(runs, dtype=np.int64)
    for m in range(1, n):
        k += rng.random(runs) * (m + th) < th + a * k
    return k
