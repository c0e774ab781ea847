"""Monte Carlo simulation of catalog entries.

Runs are split into chunks of ``CHUNK`` trajectories; chunk ``i`` draws from
substream ``i`` of the seed (``Philox(key=seed).jumped(i)``), so the result does
not depend on how many workers execute the chunks. The worker count comes from
the ``CRITCOMP_WORKERS`` environment variable (default 1).
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from ..errors import UnsupportedSchemeError, ValidationError
from ..schemes import PmfTable

CHUNK = 20000


@dataclass
class SimResult:
    n: int
    runs: int
    seed: int
    table: PmfTable          # empirical frequencies as exact fractions
    mean: float
    se: float                # standard error of the mean
    second_moment: float


def _chunk(name: str, n: int, size: int, seed: int, stream: int) -> np.ndarray:
    from .. import catalog
    entry = catalog.get(name)
    return np.bincount(entry.simulator(n, size, seed, stream))


def workers_from_env() -> int:
    raw = os.environ.get("CRITCOMP_WORKERS", "1")
    try:
        w = int(raw)
    except ValueError:
        raise ValidationError(f"CRITCOMP_WORKERS must be an integer, got {raw!r}") from None
    return max(1, w)


def simulate(entry, n: int, runs: int, seed: int, workers: int | None = None) -> SimResult:
    """Empirical law of ``X_n`` from ``runs`` independent trajectories.

    ``entry`` is a catalog name or a :class:`CatalogEntry` with a simulator.
    """
    from .. import catalog
    name = entry if isinstance(entry, str) else None
    e = catalog.get(entry) if isinstance(entry, str) else entry
    if e.simulator is None:
        raise UnsupportedSchemeError(f"{e.name} has no simulator (urn, CRP and walk entries do)")
    if runs < 1 or n < 0:
        raise ValidationError("need runs >= 1 and n >= 0")
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise ValidationError("seed must fit in 64 bits")
    sizes = [CHUNK] * (runs // CHUNK) + ([runs % CHUNK] if runs % CHUNK else [])
    workers = workers_from_env() if workers is None else workers
    if workers > 1 and name is not None and len(sizes) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk, [name] * len(sizes), [n] * len(sizes), sizes,
                                  [seed] * len(sizes), range(len(sizes))))
    else:
        parts = [np.bincount(e.simulator(n, s, seed, i)) for i, s in enumerate(sizes)]
    width = max(len(p) for p in parts)
    counts = np.zeros(width, dtype=np.int64)
    for p in parts:
        counts[:len(p)] += p
    return _result(n, runs, seed, counts)


def _result(n, runs, seed, counts) -> SimResult:
    ks = np.arange(len(counts), dtype=np.float64)
    mean = float((ks * counts).sum() / runs)
    m2 = float((ks * ks * counts).sum() / runs)
    var = max(0.0, m2 - mean * mean) * runs / max(1, runs - 1)
    probs = {int(k): Fraction(int(c), runs) for k, c in enumerate(counts) if c}
    return SimResult(n, runs, seed, PmfTable(n, probs), mean, math.sqrt(var / runs), m2)


def chi_square(exact: PmfTable, sim: SimResult, min_expected: float = 5.0):
    """Pearson statistic over bins pooled left to right until each expects ``min_expected``.

    Returns ``(statistic, degrees of freedom, 0.999 quantile)``.
    """
    runs = sim.runs
    keys = sorted(set(exact.probs) | set(sim.table.probs))
    bins = []
    e_acc = o_acc = 0.0
    for k in keys:
        e_acc += float(exact[k]) * runs
        o_acc += float(sim.table[k]) * runs
        if e_acc >= min_expected:
            bins.append([e_acc, o_acc])
            e_acc = o_acc = 0.0
    if e_acc or o_acc:
        if bins:
            bins[-1][0] += e_acc
            bins[-1][1] += o_acc
        else:
            bins.append([e_acc, o_acc])
    stat = sum((o - e) ** 2 / e for e, o in bins if e > 0)
    dof = max(1, len(bins) - 1)
    return stat, dof, float(stats.chi2.ppf(0.999, dof))
