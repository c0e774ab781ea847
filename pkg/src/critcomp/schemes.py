"""Composition schemes and their exact finite-n distributions.

A scheme is ``F(z, u) = G(u H(z)) M(z)`` (extended), ``-log(1 - u H(z)) M(z)``
(cycle), or ``prod_l G_l(u_l H_l(z)) M(z)`` (multivariate). ``X_n`` counts the
``H``-components of a random object of size ``n``; ``X_{n,j}`` counts those of
size ``j``. Everything here is exact rational arithmetic on truncated series.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence, Union

from . import expr as ex
from .combinat import falling, stirling2
from .errors import EmptySizeClassError, PreconditionError, ValidationError
from .pseries import series as ps
from .pseries.series import Series
from .pseries.upoly import UPoly

Number = Union[int, Fraction, float]


class _Entire:
    """Marker for a component with no finite singularity (entire function)."""

    def __repr__(self):
        return "ENTIRE"

    def __reduce__(self):
        return "ENTIRE"


ENTIRE = _Entire()


@dataclass(frozen=True)
class SingularData:
    """Dominant singularity data ``f(z) ~ tau + c (1 - z/rho)^lam``.

    ``lam`` is an exact rational or ``ENTIRE``. ``rho``, ``tau`` and ``c`` may
    be exact or floating. ``tau`` is the value at ``rho`` when it is finite
    (``lam > 0``); for an entire ``M`` it is ``M`` evaluated at ``rho_H``.
    ``d1`` and ``h_at_rho`` are only needed by the degenerate regimes.
    """

    rho: Number | None
    lam: Fraction | _Entire
    tau: Number | None = None
    c: Number | None = None
    d1: Number | None = None       # f'(rho), needed for G when lam > 1
    h_at_rho: Number | None = None  # for M singular before H: H(rho_M)

    @property
    def entire(self) -> bool:
        return self.lam is ENTIRE

    def check(self, name: str = "component") -> None:
        if self.entire:
            return
        lam = Fraction(self.lam)
        if self.rho is None or float(self.rho) <= 0:
            raise ValidationError(f"{name}: radius must be positive")
        if lam == 0 or (lam.denominator == 1 and lam > 0):
            raise ValidationError(f"{name}: singular exponent must not be a non-negative integer")
        if self.c is None or float(self.c) == 0:
            raise ValidationError(f"{name}: singular coefficient must be nonzero")
        if 0 < lam < 1 and float(self.c) > 0:
            raise ValidationError(f"{name}: expected c < 0 for 0 < lambda < 1")
        if lam < 0 and float(self.c) < 0:
            raise ValidationError(f"{name}: expected c > 0 for lambda < 0")
        if lam > 0 and self.tau is None:
            raise ValidationError(f"{name}: tau required for lambda > 0")


@dataclass(frozen=True)
class ComponentSpec:
    """A generating function with its singular data."""

    expr: ex.Expr
    singular: SingularData
    name: str = ""

    def series(self, order: int) -> Series:
        return self.expr.series(order)

    def at(self, inner: Series) -> Series:
        return self.expr.at(inner)

    def derivative_expr(self, s: int) -> ex.Expr:
        return self.expr.nth_derivative(s)


EXTENDED, CYCLE, MULTIVARIATE = "extended", "cycle", "multivariate"

_CYCLE_G = ex.log_quasi_inverse(ex.z())


@dataclass(frozen=True)
class SchemeSpec:
    """Scheme descriptor.

    ``offset`` is an optional ``u``-free generating function added to the
    scheme (objects with no ``H``-components at all); it only adds mass at
    ``X = 0`` and must be asymptotically negligible.
    """

    kind: str
    H: ComponentSpec | None = None
    G: ComponentSpec | None = None
    M: ComponentSpec | None = None
    components: tuple = ()  # multivariate: ((G_1, H_1), ..., (G_m, H_m))
    offset: ex.Expr | None = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in (EXTENDED, CYCLE, MULTIVARIATE):
            raise ValidationError(f"unknown scheme kind {self.kind!r}")
        if self.kind == MULTIVARIATE:
            if not self.components:
                raise ValidationError("multivariate scheme needs components")
        elif self.H is None:
            raise ValidationError("scheme needs H")
        if self.kind == EXTENDED and self.G is None:
            raise ValidationError("extended scheme needs G")

    @property
    def g_expr(self) -> ex.Expr:
        return _CYCLE_G if self.kind == CYCLE else self.G.expr

    @property
    def m_expr(self) -> ex.Expr:
        return self.M.expr if self.M is not None else ex.const(1)

    @property
    def dimension(self) -> int:
        return len(self.components) if self.kind == MULTIVARIATE else 1


def extended(G: ComponentSpec, H: ComponentSpec, M: ComponentSpec | None = None, **kw) -> SchemeSpec:
    return SchemeSpec(EXTENDED, H=H, G=G, M=M, **kw)


def cycle(H: ComponentSpec, M: ComponentSpec | None = None, **kw) -> SchemeSpec:
    return SchemeSpec(CYCLE, H=H, M=M, **kw)


def multivariate(components: Sequence, M: ComponentSpec | None = None, **kw) -> SchemeSpec:
    return SchemeSpec(MULTIVARIATE, components=tuple(tuple(c) for c in components), M=M, **kw)


# result tables ------------------------------------------------------------------

@dataclass
class PmfTable:
    """Exact probability table. Keys are ints, or tuples for joint laws."""

    n: int
    probs: dict
    marks: tuple = ()
    flags: list = field(default_factory=list, compare=False)  # diagnostics, not part of the law

    def total(self) -> Fraction:
        return sum(self.probs.values(), Fraction(0))

    def nonzero(self) -> dict:
        return {k: p for k, p in self.probs.items() if p}

    def mean(self) -> Fraction:
        return sum((k * p for k, p in self.probs.items()), Fraction(0))

    def factorial_moment(self, s: int) -> Fraction:
        return sum((falling(k, s) * p for k, p in self.probs.items()), Fraction(0))

    def moment(self, s: int) -> Fraction:
        return sum((Fraction(k) ** s * p for k, p in self.probs.items()), Fraction(0))

    def marginal(self, i: int) -> "PmfTable":
        out: dict = {}
        for k, p in self.probs.items():
            out[k[i]] = out.get(k[i], Fraction(0)) + p
        return PmfTable(self.n, _trim_support(out), self.marks[i:i + 1], list(self.flags))

    def __getitem__(self, k):
        return self.probs.get(k, Fraction(0))


def _trim_support(d: Mapping) -> dict:
    """Keep keys from the smallest to the largest with nonzero mass (ints only)."""
    nz = [k for k, p in d.items() if p]
    if not nz:
        return {}
    if isinstance(nz[0], tuple):
        return {k: d[k] for k in sorted(nz)}
    lo, hi = min(nz), max(nz)
    return {k: d.get(k, Fraction(0)) for k in range(lo, hi + 1)}


# engine -------------------------------------------------------------------------

class _Engine:
    """Per-scheme cache of expanded series, grown on demand."""

    def __init__(self, spec: SchemeSpec):
        self.spec = spec
        self._cache: dict = {}

    def get(self, key, order: int, build):
        hit = self._cache.get(key)
        if hit is not None and hit.order >= order:
            return hit if hit.order == order else hit.truncate(order)
        s = build(order)
        self._cache[key] = s
        return s

    def H(self, order):
        return self.get("H", order, lambda N: self.spec.H.series(N))

    def M(self, order):
        return self.get("M", order, lambda N: self.spec.m_expr.series(N))

    def offset(self, order):
        if self.spec.offset is None:
            return None
        return self.get("A", order, lambda N: self.spec.offset.series(N))

    def G_of_H(self, order, s: int = 0):
        """``G^(s)(H(z))``."""
        def build(N):
            H = self.H(N)
            g = self.spec.g_expr.nth_derivative(s)
            return g.at(H)
        return self.get(("GsH", s), order, build)

    def F(self, order):
        def build(N):
            if self.spec.kind == MULTIVARIATE:
                out = self.M(N)
                for l in range(len(self.spec.components)):
                    out = ps.mul(out, self.mv_GsH(l, 0, N))
                return out
            out = ps.mul(self.G_of_H(N), self.M(N))
            A = self.offset(N)
            return out + A if A is not None else out
        return self.get("F", order, build)

    def mv_H(self, l, order):
        return self.get(("mvH", l), order, lambda N: self.spec.components[l][1].series(N))

    def mv_GsH(self, l, s, order):
        def build(N):
            G, H = self.spec.components[l]
            return G.expr.nth_derivative(s).at(self.mv_H(l, N))
        return self.get(("mvGsH", l, s), order, build)

    def HkM(self, order: int, kmax: int) -> list:
        """``[H^k M for k = 0..kmax]`` at the given order."""
        key = ("HkM", order)
        hit = self._cache.get(key)
        if hit is not None and len(hit) > kmax:
            return hit[: kmax + 1]
        H, M = self.H(order), self.M(order)
        out = list(hit) if hit else [M]
        while len(out) <= kmax:
            out.append(ps.mul(out[-1], H))
        self._cache[key] = out
        return out


@lru_cache(maxsize=64)
def _engine(spec: SchemeSpec) -> _Engine:
    return _Engine(spec)


def clear_caches() -> None:
    _engine.cache_clear()


def _fn(spec: SchemeSpec, n: int) -> Fraction:
    if n < 0:
        raise PreconditionError("n must be non-negative")
    f = _engine(spec).F(n)[n]
    if f == 0:
        raise EmptySizeClassError(f"no objects of size {n} (f_n = 0)")
    return f


def g_coefficients(spec: SchemeSpec, kmax: int) -> list[Fraction]:
    if spec.kind == MULTIVARIATE:
        raise PreconditionError("not defined for multivariate schemes")
    return spec.g_expr.series(kmax).coeffs


def f_series(spec: SchemeSpec, N: int) -> Series:
    """``F(z, 1)`` to order ``N``."""
    return _engine(spec).F(N)


def f_coefficient(spec: SchemeSpec, n: int) -> Fraction:
    return _fn(spec, n)


def _h_valuation(spec, n):
    v = _engine(spec).H(n).valuation()
    if v == 0:
        raise ValidationError("H must have zero constant term")
    return v


def pmf_core(spec: SchemeSpec, n: int) -> PmfTable:
    """Exact law of ``X_n``: ``P{X_n = k} = g_k [z^n] H^k M / f_n``."""
    if spec.kind == MULTIVARIATE:
        raise PreconditionError("pmf_core needs an extended or cycle scheme; use pmf_mv")
    return pmf_core_range(spec, n, n)[n]


def pmf_core_range(spec: SchemeSpec, n_min: int, n_max: int) -> dict[int, PmfTable]:
    """``pmf_core`` for every ``n`` in ``[n_min, n_max]`` from one set of expansions."""
    eng = _engine(spec)
    v = _h_valuation(spec, n_max)
    kmax = n_max // v if v else 0
    g = g_coefficients(spec, kmax)
    P = eng.HkM(n_max, kmax)
    F = eng.F(n_max)
    A = eng.offset(n_max)
    out = {}
    for n in range(n_min, n_max + 1):
        f = F[n]
        if f == 0:
            continue
        probs = {}
        for k in range(0, (n // v if v else 0) + 1):
            c = g[k] * P[k][n] if g[k] else Fraction(0)
            if k == 0 and A is not None:
                c += A[n]
            probs[k] = c / f
        out[n] = PmfTable(n, _trim_support(probs))
    if n_min == n_max and n_min not in out:
        raise EmptySizeClassError(f"no objects of size {n_min} (f_n = 0)")
    return out


def factorial_moment_exact(spec: SchemeSpec, n: int, s: int) -> Fraction:
    """``E((X_n)_s) = [z^n] H^s G^(s)(H) M / f_n``."""
    if spec.kind == MULTIVARIATE:
        raise PreconditionError("use joint_factorial_moment_mv")
    if s < 0:
        raise PreconditionError("s must be non-negative")
    f = _fn(spec, n)
    eng = _engine(spec)
    if s == 0:
        return Fraction(1)
    GsH = eng.G_of_H(n, s)
    Hs = ps.pow_int(eng.H(n), s)
    return ps.mul(ps.mul(Hs, GsH), eng.M(n))[n] / f


def moment_exact(spec: SchemeSpec, n: int, s: int) -> Fraction:
    """Raw moment ``E(X_n^s)`` from the exact factorial moments."""
    return sum((stirling2(s, k) * factorial_moment_exact(spec, n, k) for k in range(s + 1)),
               Fraction(0))


def h_coefficient(spec: SchemeSpec, j: int) -> Fraction:
    return _engine(spec).H(j)[j]


def _check_marks(spec, n, marks):
    marks = tuple(int(j) for j in marks)
    if not marks:
        raise PreconditionError("need at least one mark")
    if len(set(marks)) != len(marks):
        raise PreconditionError("marks must be distinct")
    for j in marks:
        if j < 1:
            raise PreconditionError(f"mark {j} must be >= 1")
    return marks


def _marker_coeff(c, level: int, nlevels: int):
    """``c * v_level`` as a nested UPoly over ``nlevels`` markers."""
    poly = c
    for lev in range(nlevels - 1, -1, -1):
        poly = UPoly([0, poly]) if lev == level else UPoly([poly])
    return poly


def _refined_inner(spec, n, marks, H=None):
    H = _engine(spec).H(n) if H is None else H
    cs = list(H.coeffs)
    m = len(marks)
    flags = []
    for level, j in enumerate(marks):
        if j > n:
            flags.append(f"j = {j} > n: X_(n,{j}) is identically 0")
            continue
        if cs[j] == 0:
            flags.append(f"h_{j} = 0: X_(n,{j}) is identically 0")
        cs[j] = _marker_coeff(cs[j], level, m)
    return Series.from_coeffs(cs, n), flags


def pmf_refined(spec: SchemeSpec, n: int, marks: Iterable[int]) -> PmfTable:
    """Exact (joint) law of ``X_{n,j}`` for the marked sizes ``j``.

    ``G`` is composed with ``H - sum (1 - v_j) h_j z^j`` over the marker ring.
    """
    if spec.kind == MULTIVARIATE:
        raise PreconditionError("refined tables are for extended or cycle schemes")
    marks = _check_marks(spec, n, marks)
    f = _fn(spec, n)
    eng = _engine(spec)
    inner, flags = _refined_inner(spec, n, marks)
    Fv = ps.mul(spec.g_expr.at(inner), eng.M(n).with_markers(len(marks)))
    A = eng.offset(n)
    top = Fv[n]
    if A is not None:
        top = top + A[n] if isinstance(top, UPoly) else top + A[n]
    probs = _upoly_to_probs(top, len(marks), f)
    if len(marks) == 1:
        probs = {k[0]: p for k, p in probs.items()}
    return PmfTable(n, _trim_support(probs), marks, flags)


def _upoly_to_probs(poly, depth: int, f: Fraction) -> dict:
    out = {}

    def walk(p, prefix, d):
        if d == depth:
            if p:
                out[prefix] = Fraction(p) / f
            return
        if not isinstance(p, UPoly):
            walk(p, prefix + (0,), d + 1)
            return
        for k, c in enumerate(p.coeffs):
            walk(c, prefix + (k,), d + 1)

    walk(poly, (), 0)
    return out


def prob_refined_zero(spec: SchemeSpec, n: int, j: int) -> Fraction:
    """``P{X_{n,j} = 0} = [z^n] G(H - h_j z^j) M / f_n`` (plus any offset)."""
    _check_marks(spec, n, (j,))
    f = _fn(spec, n)
    if j > n:
        return Fraction(1)
    eng = _engine(spec)
    H = eng.H(n)
    hj = H[j]
    inner = H - Series.monomial(hj, j, n)
    top = ps.mul(spec.g_expr.at(inner), eng.M(n))[n]
    A = eng.offset(n)
    if A is not None:
        top += A[n]
    return top / f


def factorial_moment_refined(spec: SchemeSpec, n: int, j: int, s: int) -> Fraction:
    """``E((X_{n,j})_s) = h_j^s [z^(n - j s)] G^(s)(H) M / f_n``."""
    _check_marks(spec, n, (j,))
    f = _fn(spec, n)
    if s == 0:
        return Fraction(1)
    m = n - j * s
    if m < 0:
        return Fraction(0)
    eng = _engine(spec)
    hj = eng.H(n)[j]
    if hj == 0:
        return Fraction(0)
    t = ps.mul(eng.G_of_H(m, s), eng.M(m))[m]
    return hj ** s * t / f


def joint_moment_refined(spec: SchemeSpec, n: int, j1: int, j2: int) -> Fraction:
    """``E(X_{n,j1} X_{n,j2})``; for ``j1 != j2`` this is ``h h [z^(n-j1-j2)] G''(H) M / f_n``."""
    if j1 == j2:
        return (factorial_moment_refined(spec, n, j1, 2)
                + factorial_moment_refined(spec, n, j1, 1))
    _check_marks(spec, n, (j1, j2))
    f = _fn(spec, n)
    m = n - j1 - j2
    if m < 0:
        return Fraction(0)
    eng = _engine(spec)
    H = eng.H(n)
    t = ps.mul(eng.G_of_H(m, 2), eng.M(m))[m]
    return H[j1] * H[j2] * t / f


def covariance_refined(spec: SchemeSpec, n: int, j1: int, j2: int) -> Fraction:
    e1 = factorial_moment_refined(spec, n, j1, 1)
    e2 = factorial_moment_refined(spec, n, j2, 1)
    return joint_moment_refined(spec, n, j1, j2) - e1 * e2


def variance_refined(spec: SchemeSpec, n: int, j: int) -> Fraction:
    return covariance_refined(spec, n, j, j)


# multivariate -------------------------------------------------------------------

def joint_factorial_moment_mv(spec: SchemeSpec, n: int, s: Sequence[int],
                              j: int | Sequence[int] | None = None) -> Fraction:
    """``E(prod_l (X_{n,l})_{s_l})``; with ``j`` the size-``j_l`` refinement of each coordinate."""
    if spec.kind != MULTIVARIATE:
        raise PreconditionError("needs a multivariate scheme")
    s = tuple(int(x) for x in s)
    if len(s) != len(spec.components) or min(s) < 0:
        raise PreconditionError("need one non-negative order per component")
    f = _fn(spec, n)
    eng = _engine(spec)
    if j is None:
        out = eng.M(n)
        for l, sl in enumerate(s):
            out = ps.mul(out, eng.mv_GsH(l, sl, n))
            if sl:
                out = ps.mul(out, ps.pow_int(eng.mv_H(l, n), sl))
        return out[n] / f
    js = (int(j),) * len(s) if isinstance(j, int) else tuple(int(x) for x in j)
    if len(js) != len(s) or min(js) < 1:
        raise PreconditionError("need one positive size per component")
    m = n - sum(a * b for a, b in zip(s, js))
    if m < 0:
        return Fraction(0)
    out = eng.M(m)
    pref = Fraction(1)
    for l, sl in enumerate(s):
        out = ps.mul(out, eng.mv_GsH(l, sl, m))
        if sl:
            pref *= eng.mv_H(l, js[l])[js[l]] ** sl
    return pref * out[m] / f


def _h_groups(spec: SchemeSpec) -> list[list[int]]:
    """Indices of components sharing the same ``H`` expression."""
    groups: dict = {}
    for l, (_, H) in enumerate(spec.components):
        key = json.dumps(H.expr.to_json(), sort_keys=True)
        groups.setdefault(key, []).append(l)
    return list(groups.values())


def _dot(a: list[int], b: list[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


def _pmf_mv_grouped(spec: SchemeSpec, n: int, groups: list[list[int]]) -> PmfTable:
    """Joint law through ``C[K] = [z^n] M prod_g H_g^(K_g)`` (one or two distinct ``H``).

    Components with the same ``H`` only interact through their total count,
    so the weight of ``k`` is ``prod_l g_{l,k_l} * C[K(k)]``.
    """
    f = _fn(spec, n)
    eng = _engine(spec)
    m = len(spec.components)
    g = [G.expr.series(n).coeffs for G, _ in spec.components]
    Hs = [eng.mv_H(grp[0], n) for grp in groups]
    # Q_K = M H_1^K as integer numerators over a common denominator per K
    Q = []
    P = eng.M(n)
    for K in range(n + 1):
        Q.append(P)
        P = ps.mul(P, Hs[0])
    if len(groups) == 1:
        C = {(K,): q[n] for K, q in enumerate(Q)}
    else:
        C = {}
        R = Series.one(n)
        for K2 in range(n + 1):
            rn, rd = R.numerators(), R.denominator
            rrev = rn[::-1]
            for K1, q in enumerate(Q):
                if K1 + K2 > n:
                    break
                num = _dot(q.numerators(), rrev)
                if num:
                    C[(K1, K2)] = Fraction(num, q.denominator * rd)
            R = ps.mul(R, Hs[1])
    # expand every group total into its compositions k_l, weighted by g
    probs: dict = {}
    for Kv, c in C.items():
        if not c:
            continue
        cf = c / f
        parts = [[((), Fraction(1))]]
        for grp, K in zip(groups, Kv):
            cur = [((), Fraction(1))]
            for idx, l in enumerate(grp):
                last = idx == len(grp) - 1
                nxt = []
                for ks, w in cur:
                    used = sum(ks)
                    rng = [K - used] if last else range(K - used + 1)
                    for k in rng:
                        if g[l][k]:
                            nxt.append((ks + (k,), w * g[l][k]))
                cur = nxt
            parts.append(cur)
        combos = [((), Fraction(1))]
        order = [l for grp in groups for l in grp]
        for part in parts[1:]:
            combos = [(a + b, wa * wb) for a, wa in combos for b, wb in part]
        for ks, w in combos:
            key = [0] * m
            for l, k in zip(order, ks):
                key[l] = k
            probs[tuple(key)] = cf if w == 1 else w * cf
    return PmfTable(n, dict(sorted(probs.items())), tuple(range(1, m + 1)))


def pmf_mv(spec: SchemeSpec, n: int) -> PmfTable:
    """Exact joint law of ``(X_{n,1}, ..., X_{n,m})`` for a multivariate scheme."""
    if spec.kind != MULTIVARIATE:
        raise PreconditionError("needs a multivariate scheme")
    groups = _h_groups(spec)
    if len(groups) <= 2:
        return _pmf_mv_grouped(spec, n, groups)
    return _pmf_mv_direct(spec, n)


def _pmf_mv_direct(spec: SchemeSpec, n: int) -> PmfTable:
    f = _fn(spec, n)
    eng = _engine(spec)
    m = len(spec.components)
    out = eng.M(n).with_markers(m)
    for l, (G, _) in enumerate(spec.components):
        H = eng.mv_H(l, n)
        inner = Series.from_coeffs([_marker_coeff(c, l, m) if c else 0 for c in H.coeffs], n)
        out = ps.mul(out, G.expr.at(inner))
    probs = _upoly_to_probs(out[n], m, f)
    return PmfTable(n, _trim_support(probs), tuple(range(1, m + 1)))
