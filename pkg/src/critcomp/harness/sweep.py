"""Convergence sweeps: exact values against predictions along an ``n``-grid.

Config (JSON)::

    {
      "entry": "supertrees",              # or "descriptor": {...} / "path.json"
      "n_grid": [64, 128, 256] ,          # or {"geometric": {"start": 64, "stop": 4096, "ratio": 2}}
      "statistics": [
        {"type": "f_n"},
        {"type": "moments", "s_max": 2},
        {"type": "pmf", "k_max": 5},
        {"type": "refined", "j": 2},                  # fixed j
        {"type": "refined", "j_exponent": "1/3", "j_scale": 1},   # j = floor(scale n^gamma)
        {"type": "covariance", "j1": 2, "j2": 3}
      ],
      "targets": ["exact", "transfer", "limit-law"],
      "monte_carlo": {"runs": 100000, "seed": 7}      # optional, entries with a simulator
    }

Rows that fail are kept with ``flag = "error: ..."``; the sweep never aborts.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .. import __version__
from .. import asymptotics as A
from .. import schemes as S
from ..errors import CritcompError, NonConvergenceError, ValidationError
from . import descriptor as Dsc
from .report import Report, Row, spec_hash
from .simulate import simulate, workers_from_env

TARGETS = ("exact", "transfer", "limit-law")
STAT_TYPES = ("f_n", "moments", "pmf", "refined", "covariance")


@dataclass
class SweepConfig:
    source: object                 # catalog name, descriptor path, or descriptor dict
    n_grid: list
    statistics: list = field(default_factory=lambda: [{"type": "moments", "s_max": 1}])
    targets: list = field(default_factory=lambda: ["exact", "limit-law"])
    monte_carlo: dict | None = None

    def __post_init__(self):
        grid = [int(n) for n in self.n_grid]
        if not grid:
            raise ValidationError("n_grid: empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValidationError("n_grid: must be strictly increasing")
        if grid[0] < 0:
            raise ValidationError("n_grid: sizes must be non-negative")
        self.n_grid = grid
        for i, st in enumerate(self.statistics):
            if not isinstance(st, dict) or st.get("type") not in STAT_TYPES:
                raise ValidationError(f"statistics[{i}].type: expected one of {', '.join(STAT_TYPES)}")
        bad = [t for t in self.targets if t not in TARGETS]
        if bad:
            raise ValidationError(f"targets: unknown {bad}; choose from {', '.join(TARGETS)}")
        if self.monte_carlo is not None:
            mc = self.monte_carlo
            if not isinstance(mc, dict) or "seed" not in mc or "runs" not in mc:
                raise ValidationError("monte_carlo: needs explicit runs and seed")

    @classmethod
    def from_json(cls, obj) -> "SweepConfig":
        if not isinstance(obj, dict):
            raise ValidationError("$: sweep config must be a JSON object")
        src = obj.get("entry", obj.get("descriptor"))
        if src is None:
            raise ValidationError("$: need entry or descriptor")
        grid = obj.get("n_grid")
        if isinstance(grid, dict) and "geometric" in grid:
            g = grid["geometric"]
            try:
                start, stop, ratio = int(g["start"]), int(g["stop"]), Fraction(str(g.get("ratio", 2)))
            except (KeyError, ValueError, TypeError) as exc:
                raise ValidationError(f"n_grid.geometric: {exc}") from None
            if ratio <= 1 or start < 1:
                raise ValidationError("n_grid.geometric: need start >= 1 and ratio > 1")
            grid, x = [], Fraction(start)
            while x <= stop:
                if not grid or int(x) > grid[-1]:
                    grid.append(int(x))
                x *= ratio
        if not isinstance(grid, list):
            raise ValidationError("n_grid: expected a list or {\"geometric\": ...}")
        return cls(src, grid, obj.get("statistics", [{"type": "moments", "s_max": 1}]),
                   obj.get("targets", ["exact", "limit-law"]), obj.get("monte_carlo"))

    def to_json(self) -> dict:
        return {"entry" if isinstance(self.source, str) else "descriptor": self.source,
                "n_grid": self.n_grid, "statistics": self.statistics, "targets": self.targets,
                "monte_carlo": self.monte_carlo}


def _load(source):
    if isinstance(source, dict):
        return Dsc.spec_from_json(source)
    return Dsc.load(source)


def _j_for(st: dict, n: int) -> int:
    if "j" in st:
        return int(st["j"])
    gamma = float(Fraction(str(st.get("j_exponent", "1/3"))))
    scale = float(Fraction(str(st.get("j_scale", 1))))
    return max(1, int(math.floor(scale * n ** gamma + 1e-9)))


class _Ctx:
    """Predictions that do not depend on ``n``, computed once per sweep."""

    def __init__(self, loaded):
        self.spec = loaded.spec
        self.entry = loaded.entry
        self.cl = A.classify_scheme(self.spec)
        self._law = self._composed = None

    @property
    def law(self):
        if self._law is None:
            self._law = A.identify_limit_law(self.spec)
        return self._law

    @property
    def composed(self):
        if self._composed is None:
            self._composed = A.composed_singular_data(self.spec)
        return self._composed

    def discrete_law(self):
        law = self.law
        if hasattr(law, "pmf"):
            return law
        if getattr(law, "discrete", None) is not None and not hasattr(law, "inner"):
            return law.discrete
        return None


def _guard(rows: list, make, n: int, statistic: str, j=None, k=None, predictor=""):
    try:
        rows.extend(make())
    except (CritcompError, ArithmeticError, ValueError, OverflowError) as exc:
        rows.append(Row(n, statistic, j=j, k=k, predictor=predictor, flag=f"error: {exc}"))


def _rows_for_n(cfg: SweepConfig, ctx: _Ctx, n: int) -> list[Row]:
    rows: list[Row] = []
    spec, targets = ctx.spec, cfg.targets
    if ctx.entry is not None and not ctx.entry.support(n):
        return [Row(n, "skipped", flag=f"outside support ({ctx.entry.support_note})")]
    for st in cfg.statistics:
        kind = st["type"]
        if kind == "f_n":
            def make():
                ex = S.f_coefficient(spec, n)
                out = [Row(n, "f_n", ex)] if "exact" in targets else []
                if "transfer" in targets:
                    out.append(Row(n, "f_n", ex, A.transfer_asymptotic(ctx.composed, n), "transfer"))
                return out
            _guard(rows, make, n, "f_n")
        elif kind == "moments":
            for s in range(1, int(st.get("s_max", 1)) + 1):
                def make(s=s):
                    if spec.kind == S.MULTIVARIATE:
                        sv = [0] * len(spec.components)
                        sv[0] = s
                        ex = S.joint_factorial_moment_mv(spec, n, sv)
                    elif ctx.entry is not None and s == 1:
                        ex = ctx.entry.exact_mean(n)
                    else:
                        ex = S.factorial_moment_exact(spec, n, s)
                    name = f"factorial_moment_{s}"
                    out = [Row(n, name, ex)] if "exact" in targets else []
                    if "limit-law" in targets:
                        out.append(Row(n, name, ex, _predicted_moment(ctx, n, s), "limit-law"))
                    return out
                _guard(rows, make, n, f"factorial_moment_{s}")
        elif kind == "pmf":
            def make():
                tab = ctx.entry.exact_pmf(n) if ctx.entry is not None else S.pmf_core(spec, n)
                law = ctx.discrete_law() if "limit-law" in targets else None
                out = []
                for k in range(int(st.get("k_min", 0)), int(st.get("k_max", 5)) + 1):
                    ex = tab[k]
                    if "exact" in targets:
                        out.append(Row(n, "pmf", ex, k=k))
                    if law is not None:
                        out.append(Row(n, "pmf", ex, float(law.pmf(k)), "limit-law", k=k))
                return out
            _guard(rows, make, n, "pmf")
        elif kind == "refined":
            j = _j_for(st, n)
            def make(j=j):
                out = []
                if n - j < 0:
                    return [Row(n, "refined_mean", Fraction(0), j=j, flag="j > n")]
                mean = S.factorial_moment_refined(spec, n, j, 1)
                p0 = S.prob_refined_zero(spec, n, j)
                if "exact" in targets:
                    out += [Row(n, "refined_mean", mean, j=j), Row(n, "refined_p0", p0, j=j)]
                if "limit-law" in targets:
                    th = A.theta(spec, n, j)
                    kap, mu1 = A.limit_moments(spec, 1)
                    out.append(Row(n, "theta", None, th, "limit-law", j=j))
                    out.append(Row(n, "refined_mean", mean, th * mu1, "limit-law", j=j))
                    ph = A.phase_classify(spec, n, j)
                    flag = ph.phase
                    try:
                        from ..distributions import MixedPoisson
                        pz = MixedPoisson(th, ctx.law).pmf(0)
                        out.append(Row(n, "refined_p0", p0, pz, "limit-law", j=j, flag=flag))
                    except CritcompError as exc:
                        out.append(Row(n, "refined_p0", p0, None, "limit-law", j=j, flag=f"{flag}; {exc}"))
                return out
            _guard(rows, make, n, "refined_mean", j=j)
        elif kind == "covariance":
            j1, j2 = int(st["j1"]), int(st["j2"])
            def make(j1=j1, j2=j2):
                cov = S.covariance_refined(spec, n, j1, j2)
                v1, v2 = S.variance_refined(spec, n, j1), S.variance_refined(spec, n, j2)
                out = [Row(n, "covariance", cov, j=j1, k=(j1, j2))] if "exact" in targets else []
                if v1 > 0 and v2 > 0:
                    corr = float(cov) / math.sqrt(float(v1) * float(v2))
                    if "limit-law" in targets:
                        cc = A.cov_corr_asymptotic(spec, n, j1, j2)
                        out.append(Row(n, "correlation", None, cc.corr, "limit-law", j=j1, k=(j1, j2),
                                       flag=f"exact={corr:.12g}"))
                        out.append(Row(n, "covariance", cov, cc.cov, "limit-law", j=j1, k=(j1, j2)))
                return out
            _guard(rows, make, n, "covariance", j=j1)
    if cfg.monte_carlo is not None and ctx.entry is not None and ctx.entry.simulator is not None:
        def make():
            mc = cfg.monte_carlo
            sim = simulate(ctx.entry, n, int(mc["runs"]), int(mc["seed"]), workers=1)
            ex = ctx.entry.exact_mean(n)
            z = (sim.mean - float(ex)) / sim.se if sim.se > 0 else 0.0
            return [Row(n, "mean", ex, sim.mean, "monte-carlo", se=sim.se,
                        flag="ok" if abs(z) < 3 else "deviates")]
        _guard(rows, make, n, "mean", predictor="monte-carlo")
    return rows


def _predicted_moment(ctx: _Ctx, n: int, s: int) -> float:
    tag = ctx.cl.tag
    spec = ctx.spec
    if tag in (A.CRITICAL, A.CYCLE_CRITICAL):
        kap, mu = A.limit_moments(spec, s)
        return kap ** s * mu * n ** (s * float(ctx.cl.lam_H))
    if tag == A.MV_CRITICAL:
        sv = [0] * len(spec.components)
        sv[0] = s
        kaps, mu = A.multivariate_limit_moments(spec, sv)
        lam = float(spec.components[0][1].singular.lam)
        return kaps[0] ** s * mu * n ** (s * lam)
    if tag == A.PARTIAL_I:
        # mass p stays bounded; the rest scales like the critical case
        kap = float(spec.H.singular.tau) / -float(spec.H.singular.c)
        return kap ** s * float(ctx.law.moment(s)) * n ** (s * float(ctx.cl.lam_H))
    law = ctx.discrete_law()
    if law is None:
        raise ValidationError(f"no moment prediction in regime {tag}")
    from ..combinat import falling
    K = max(getattr(x, "support_hint", 0) for x in (law, getattr(law, "inner", None),
                                                   getattr(law, "discrete", None)) if x is not None)
    K = K or 200
    terms = [falling(k, s) * law.pmf(k) for k in range(K)]
    full, half = math.fsum(terms), math.fsum(terms[:K // 2])
    if abs(full - half) > 1e-3 * abs(full):
        # heavy tail: the limit law has no finite moment of this order
        raise NonConvergenceError(f"order-{s} moment of {law} diverges; X_n is not uniformly integrable")
    return full


def _worker(cfg_json: dict, n: int) -> list[Row]:
    cfg = SweepConfig.from_json(cfg_json)
    return _rows_for_n(cfg, _Ctx(_load(cfg.source)), n)


def run_sweep(cfg: SweepConfig, workers: int | None = None) -> Report:
    t0 = time.perf_counter()
    loaded = _load(cfg.source)
    ctx = _Ctx(loaded)
    workers = workers_from_env() if workers is None else workers
    rows: list[Row] = []
    if workers > 1 and len(cfg.n_grid) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_worker, [cfg.to_json()] * len(cfg.n_grid), cfg.n_grid):
                rows.extend(part)
    else:
        for n in cfg.n_grid:
            rows.extend(_rows_for_n(cfg, ctx, n))
    meta = {
        "critcomp_version": __version__,
        "source": cfg.source if isinstance(cfg.source, str) else loaded.spec.name,
        "spec_hash": spec_hash(Dsc.spec_to_json(loaded.spec)),
        "classification": ctx.cl.tag,
        "n_grid": cfg.n_grid,
        "targets": cfg.targets,
        "monte_carlo": cfg.monte_carlo,
    }
    rep = Report(rows, meta)
    rep.runtime = time.perf_counter() - t0
    return rep
