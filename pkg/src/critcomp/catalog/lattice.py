"""Motzkin-family lattice paths: returns to zero, first returns in coloured
bridges and walks, and sign changes.

Steps are ``-1, 0, +1`` with rational weights ``p_{-1}, p_0, p_1``. Bridges
end at height 0. The oracles here run a plain dynamic programme over
(position, height, statistic) and never touch the series engine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import expr as ex
from ..errors import PreconditionError, ValidationError
from ..pseries import series as ps
from ..pseries.series import Series
from ..schemes import ComponentSpec, PmfTable, SingularData, extended
from .base import CatalogEntry, table

F = Fraction

BRIDGE_RETURNS = "bridge-returns"
WALK_RETURNS = "walk-returns"
COLOURED_BRIDGE = "coloured-bridge"
COLOURED_WALK = "coloured-walk"
ARBITRARY_COLOURS = "arbitrary-colours"
SIGN_BRIDGE = "sign-changes-bridge"
SIGN_WALK = "sign-changes-walk"
OBJECTS = (BRIDGE_RETURNS, WALK_RETURNS, COLOURED_BRIDGE, COLOURED_WALK,
           ARBITRARY_COLOURS, SIGN_BRIDGE, SIGN_WALK)


@dataclass(frozen=True)
class StepSet:
    """Weights of the steps ``-1, 0, +1``."""

    p_down: Fraction
    p_flat: Fraction
    p_up: Fraction

    def __post_init__(self):
        for name in ("p_down", "p_flat", "p_up"):
            v = Fraction(getattr(self, name))
            if v < 0:
                raise ValidationError(f"{name} must be non-negative")
            object.__setattr__(self, name, v)
        if self.p_flat == 0:
            raise ValidationError("p_0 = 0 gives a periodic step set (excluded)")
        if self.p_up == 0 or self.p_down == 0:
            raise ValidationError("need both up and down steps")

    @property
    def total(self) -> Fraction:
        return self.p_down + self.p_flat + self.p_up

    @property
    def drift(self) -> Fraction:
        return self.p_up - self.p_down

    @property
    def second_derivative(self) -> Fraction:
        """``P''(1)`` for ``P(u) = p_{-1}/u + p_0 + p_1 u``."""
        return 2 * self.p_down

    @property
    def zero_drift(self) -> bool:
        return self.drift == 0

    def steps(self):
        return ((-1, self.p_down), (0, self.p_flat), (1, self.p_up))


MOTZKIN = StepSet(F(1), F(1), F(1))


# oracles: dynamic programming over paths ----------------------------------------------

def _run(n: int, steps: StepSet, start, move, final_ok):
    """Push weights through ``n`` steps; ``move(state, dh) -> new state or None``."""
    layer = {start: Fraction(1)}
    for t in range(n):
        nxt: dict = {}
        last = t == n - 1
        for st, w in layer.items():
            for dh, p in steps.steps():
                if not p:
                    continue
                for ns in move(st, dh, last):
                    nxt[ns] = nxt.get(ns, 0) + w * p
        layer = nxt
    return {st: w for st, w in layer.items() if final_ok(st)}


def returns_weights(n: int, steps: StepSet, bridge: bool, marks=()) -> dict:
    """Weights by number of returns to zero (or by counts of gaps of the marked lengths)."""
    marks = tuple(marks)

    def move(st, dh, last):
        h, t, cnt = st
        h2 = h + dh
        if h2 == 0:
            gap = t + 1
            c = list(cnt)
            if marks:
                if gap in marks:
                    c[marks.index(gap)] += 1
            else:
                c[0] += 1
            return [(0, 0, tuple(c))]
        return [(h2, t + 1, cnt)]

    start = (0, 0, (0,) * max(1, len(marks)))
    fin = _run(n, steps, start, move, lambda st: st[0] == 0 or not bridge)
    out: dict = {}
    for (_, _, cnt), w in fin.items():
        key = cnt if marks else cnt[0]
        out[key] = out.get(key, 0) + w
    return out


def first_return_weights(n: int, steps: StepSet, k: int | None, bridge: bool) -> dict:
    """Coloured paths by number of first returns.

    The bridge part (up to the last return) is cut at returns into ``k``
    nonempty pieces (any number of pieces when ``k`` is None); each piece is a
    colour. First returns are the returns inside the first piece. Walks add a
    tail that never returns; a walk with no return at all counts once with 0.
    """
    # state: (h, first returns i, cuts c, first piece closed, returns since last cut)
    def move(st, dh, last):
        h, i, c, closed, since = st
        h2 = h + dh
        if h2 != 0:
            return [(h2, i, c, closed, since)]
        i2 = i if closed else i + 1
        out = [(0, i2, c, closed, since + 1)]
        if not last and (k is None or c < k - 1):
            out.append((0, i2, c + 1, True, 0))
        return out

    def ok(st):
        h, i, c, closed, since = st
        if bridge and h != 0:
            return False
        returns_seen = i > 0
        if not returns_seen:
            return not bridge  # empty bridge part: walks only
        if since == 0:
            return False  # last piece empty
        return k is None or c == k - 1

    fin = _run(n, steps, (0, 0, 0, False, 0), move, ok)
    out: dict = {}
    for (h, i, c, closed, since), w in fin.items():
        out[i] = out.get(i, 0) + w
    return out


def sign_change_weights(n: int, steps: StepSet, bridge: bool) -> dict:
    def move(st, dh, last):
        h, s, cnt = st
        h2 = h + dh
        if h2 == 0:
            return [(0, s, cnt)]
        s2 = 1 if h2 > 0 else -1
        return [(h2, s2, cnt + (1 if s and s2 != s else 0))]

    fin = _run(n, steps, (0, 0, 0), move, lambda st: st[0] == 0 or not bridge)
    out: dict = {}
    for (_, _, cnt), w in fin.items():
        out[cnt] = out.get(cnt, 0) + w
    return out


def minimal_bridge_weights(n: int, steps: StepSet) -> list:
    """``h_j``: weighted bridges of length ``j`` touching zero only at both ends."""
    out = [F(0)]
    for j in range(1, n + 1):
        def move(st, dh, last):
            h2 = st + dh
            if h2 == 0 and not last:
                return []
            return [h2]
        fin = _run(j, steps, 0, move, lambda st: st == 0)
        out.append(sum(fin.values(), F(0)))
    return out


# series building blocks --------------------------------------------------------------

def _blocks(steps: StepSet):
    z = ex.z()
    p0, pp = steps.p_flat, steps.p_up * steps.p_down
    D_tail = -2 * p0 * z + (p0 * p0 - 4 * pp) * z * z     # (1 - p0 z)^2 - 4 p1 p-1 z^2 - 1
    sqrtD = ex.pow_binomial(D_tail, F(1, 2))
    B = ex.pow_binomial(D_tail, F(-1, 2))
    W = ex.reciprocal(ex.const(1) - steps.total * z)
    H = ex.const(1) - sqrtD
    S = ex.reciprocal(ex.const(1) - p0 * z)
    E = 2 * ex.reciprocal(ex.const(1) - p0 * z + sqrtD)
    return dict(z=z, B=B, W=W, H=H, S=S, E=E, sqrtD=sqrtD)


def _consts(steps: StepSet):
    P1, P2 = float(steps.total), float(steps.second_derivative)
    cB = math.sqrt(P1 / (2 * P2))
    return P1, P2, cB


def _G_seq(shifted: bool):
    z = ex.z()
    if shifted:
        return ComponentSpec(z * ex.reciprocal(ex.const(1) - z), SingularData(1, F(-1), None, 1), "x/(1-x)")
    return ComponentSpec(ex.reciprocal(ex.const(1) - z), SingularData(1, F(-1), None, 1), "1/(1-x)")


def _arbitrary_colour_singularity(steps: StepSet):
    """Root ``z0`` of ``B(z0) = 2`` and ``1/(z0 B'(z0))``."""
    p0, pp = float(steps.p_flat), float(steps.p_up * steps.p_down)
    a, b, c = p0 * p0 - 4 * pp, -2 * p0, 0.75
    if abs(a) < 1e-300:
        z0 = -c / b
    else:
        disc = math.sqrt(b * b - 4 * a * c)
        roots = [r for r in ((-b - disc) / (2 * a), (-b + disc) / (2 * a)) if r > 0]
        z0 = min(roots)
    dB = 4 * (2 * p0 * (1 - p0 * z0) + 8 * pp * z0)
    return z0, 1 / (z0 * dB)


def build_lattice(steps: StepSet = MOTZKIN, obj: str = BRIDGE_RETURNS, k: int = 1) -> CatalogEntry:
    if obj not in OBJECTS:
        raise ValidationError(f"unknown lattice object {obj!r}; choose from {OBJECTS}")
    if obj in (COLOURED_BRIDGE, COLOURED_WALK) and k < 1:
        raise ValidationError("k >= 1")
    if not steps.zero_drift:
        raise PreconditionError("the limit theorems for these objects need zero drift")
    b = _blocks(steps)
    P1, P2, cB = _consts(steps)
    rho = F(1) / steps.total
    Hsd = SingularData(rho, F(1, 2), 1, -1 / cB)
    H = ComponentSpec(b["H"], Hsd, "1-1/B")
    walk_tail = ComponentSpec(b["W"] * b["sqrtD"], SingularData(rho, F(-1, 2), None, 1 / cB), "W/B")
    offset = None
    exact = None
    sim = None
    oracle_max = 14
    refined_oracle = None
    notes = []
    prefix = "motzkin" if steps == MOTZKIN else f"lattice({steps.p_down},{steps.p_flat},{steps.p_up})"
    name = f"{prefix}-{obj}"

    def bridge_ok(n):
        return n >= 0

    if obj == BRIDGE_RETURNS:
        spec = extended(_G_seq(False), H, None, name=name)
        oracle = lambda n: table(n, returns_weights(n, steps, True))
        refined_oracle = lambda n, marks: table(n, returns_weights(n, steps, True, marks), marks)
    elif obj == WALK_RETURNS:
        spec = extended(_G_seq(False), H, walk_tail, name=name)
        oracle = lambda n: table(n, returns_weights(n, steps, False))
        refined_oracle = lambda n, marks: table(n, returns_weights(n, steps, False, marks), marks)
        sim = lambda n, runs, seed, stream=0: simulate_walk_returns(steps, n, runs, seed, stream)
    elif obj in (COLOURED_BRIDGE, COLOURED_WALK):
        name = f"{prefix}-{obj}-{k}"
        bridge = obj == COLOURED_BRIDGE
        Bm1 = b["B"] - 1
        if bridge:
            if k == 1:
                M = None
            else:
                M = ComponentSpec(ex.int_power(Bm1, k - 1),
                                  SingularData(rho, F(-(k - 1), 2), None, cB ** (k - 1)), f"(B-1)^{k-1}")
        else:
            M = ComponentSpec(ex.int_power(Bm1, k - 1) * b["W"] * b["sqrtD"],
                              SingularData(rho, F(-k, 2), None, cB ** (k - 2)), f"(B-1)^{k-1} W/B")
            offset = b["W"] * b["sqrtD"]
        spec = extended(_G_seq(True), H, M, offset=offset, name=name)
        oracle = lambda n: table(n, first_return_weights(n, steps, k, bridge))
        bridge_ok = (lambda n: n >= k) if bridge else bridge_ok
    elif obj == ARBITRARY_COLOURS:
        z0, cM = _arbitrary_colour_singularity(steps)
        M = ComponentSpec(ex.reciprocal(2 - b["B"]),
                          SingularData(z0, F(-1), None, cM, h_at_rho=F(1, 2)), "1/(2-B)")
        spec = extended(_G_seq(True), H, M, name=name)
        oracle = lambda n: table(n, first_return_weights(n, steps, None, True))
        bridge_ok = lambda n: n >= 1
        notes.append("M = 1/(2-B) is singular before H: bounded first returns, Geometric(1/2) limit")
    elif obj == SIGN_BRIDGE:
        S = b["S"]
        Hs = b["E"] * (1 - steps.p_flat * b["z"]) - 1
        s_rho = 1 / (1 - float(steps.p_flat * rho))
        cHs = -2 * math.sqrt(2 * P1 / P2)
        Hc = ComponentSpec(Hs, SingularData(rho, F(1, 2), 1, cHs), "E/S-1")
        M = ComponentSpec(2 * S * Hs, SingularData(rho, F(1, 2), 2 * s_rho, 2 * s_rho * cHs), "2SH")
        spec = extended(_G_seq(False), Hc, M, offset=S, name=name)
        oracle = lambda n: table(n, sign_change_weights(n, steps, True))
    else:  # SIGN_WALK
        S = b["S"]
        z = b["z"]
        Hs = b["E"] * (1 - steps.p_flat * z) - 1
        T = _meander(b, steps)
        s_rho = 1 / (1 - float(steps.p_flat * rho))
        cHs = -2 * math.sqrt(2 * P1 / P2)
        cT = math.sqrt(float(steps.p_up) / P1)
        Hc = ComponentSpec(Hs, SingularData(rho, F(1, 2), 1, cHs), "E/S-1")
        M = ComponentSpec(2 * S * Hs * (1 + 2 * T), SingularData(rho, F(-1, 2), None, 4 * s_rho * cT),
                          "2SH(1+2T)")
        spec = extended(_G_seq(False), Hc, M, offset=S * (1 + 2 * T), name=name)
        oracle = lambda n: table(n, sign_change_weights(n, steps, False))
        exact = lambda n: sign_walk_exact_pmf(steps, n)
        notes.append("scheme is the dominant part only; exact laws come from the full bivariate form")

    return CatalogEntry(
        name, spec,
        description=f"{obj} for steps ({steps.p_down}, {steps.p_flat}, {steps.p_up})",
        support=bridge_ok, support_note=_support_note(bridge_ok),
        oracle=oracle, oracle_max=oracle_max, refined_oracle=refined_oracle,
        exact_pmf_fn=exact, simulator=sim,
        params={"steps": (steps.p_down, steps.p_flat, steps.p_up), "object": obj, "k": k,
                "sigma_returns": math.sqrt(P1 / P2), "sigma_sign": 0.5 * math.sqrt(P2 / P1),
                "c_B": cB},
        notes=tuple(notes),
    )


def _support_note(ok) -> str:
    lo = next(n for n in range(0, 64) if ok(n))
    return f"n >= {lo}"


def _meander(b, steps):
    """Paths leaving zero upwards and never coming back: ``x/(1-x)``, ``x = p_1 z E``."""
    x = steps.p_up * b["z"] * b["E"]
    return x * ex.reciprocal(1 - x)


def sign_walk_exact_pmf(steps: StepSet, n: int) -> PmfTable:
    """Law of sign changes in walks from the exact bivariate form
    ``S(1+2T) + 2 S H / (1 - u H) * (1 + T (1 + u))``."""
    b = _blocks(steps)
    z = b["z"]
    S = b["S"].series(n)
    Hs = (b["E"] * (1 - steps.p_flat * z) - 1).series(n)
    T = _meander(b, steps).series(n)
    one = Series.one(n)
    base = ps.mul(S, one + T * 2)[n]
    lead = ps.mul(ps.mul(S, Hs), one + T) * 2      # 2 S H (1 + T)
    extra = ps.mul(ps.mul(S, Hs), T) * 2           # 2 S H T, carries one more u
    weights = {0: base}
    Hk = one
    k = 0
    while True:
        a = ps.mul(lead, Hk)[n]
        c = ps.mul(extra, Hk)[n]
        if a == 0 and c == 0 and k > 0:
            break
        weights[k] = weights.get(k, 0) + a
        weights[k + 1] = weights.get(k + 1, 0) + c
        Hk = ps.mul(Hk, Hs)
        k += 1
        if k > n + 1:
            break
    return table(n, weights)


# simulation ---------------------------------------------------------------------------

def simulate_walk_returns(steps: StepSet, n: int, runs: int, seed: int, stream: int = 0) -> np.ndarray:
    """Returns to zero of ``runs`` independent weighted walks of length ``n``."""
    from ..harness.rng import generator
    rng = generator(seed, stream)
    p = np.array([float(steps.p_down), float(steps.p_flat), float(steps.p_up)])
    p = p / p.sum()
    h = np.zeros(runs, dtype=np.int64)
    cnt = np.zeros(runs, dtype=np.int64)
    cum = np.cumsum(p)
    for _ in range(n):
        u = rng.random(runs)
        dh = np.searchsorted(cum, u, side="right") - 1
        h += dh
        cnt += h == 0
    return cnt
