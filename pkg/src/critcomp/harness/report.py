"""Report rows and their CSV / JSON serializations.

CSV columns (schema version 1)::

    n,j,k,statistic,exact_num,exact_den,predicted,rel_err,flag

``exact_num`` / ``exact_den`` are integer strings; empty cells mean "not
applicable". ``statistic`` carries the predictor tag after ``@`` when a
prediction is present (``factorial_moment_1@limit-law``). ``rel_err`` is
``|exact / predicted - 1|``.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction

import mpmath as mp

REPORT_FORMAT = "critcomp-report"
REPORT_VERSION = 1
CSV_COLUMNS = ("n", "j", "k", "statistic", "exact_num", "exact_den", "predicted", "rel_err", "flag")


def fmt_float(x) -> str:
    if x is None:
        return ""
    if isinstance(x, mp.mpf) and not math.isfinite(_as_float(x)):
        return mp.nstr(x, 15, min_fixed=1, max_fixed=0)
    return format(float(x), ".15g")


def int_text(v: int) -> str:
    """Decimal digits of ``v`` without the interpreter's int-to-str length cap."""
    return str(Decimal(v))


def _as_float(x) -> float:
    try:
        return float(x)
    except OverflowError:
        return math.inf


def _json_num(x):
    if x is None:
        return None
    f = _as_float(x)
    return f if math.isfinite(f) else fmt_float(x)


@dataclass
class Row:
    n: int
    statistic: str
    exact: Fraction | None = None
    predicted: float | None = None
    predictor: str = ""
    j: int | None = None
    k: object = None
    flag: str = ""
    se: float | None = None

    @property
    def rel_err(self) -> float | None:
        if self.exact is None or self.predicted is None:
            return None
        # error of the exact value measured against the prediction
        p = self.predicted
        if isinstance(p, mp.mpf) or not math.isfinite(_as_float(self.exact)):
            e = mp.mpf(self.exact.numerator) / self.exact.denominator
            return float(abs(e / p - 1)) if p != 0 else float(abs(e))
        p = float(p)
        if p == 0:
            return abs(float(self.exact))
        return abs(float(self.exact) / p - 1)

    @property
    def label(self) -> str:
        return f"{self.statistic}@{self.predictor}" if self.predictor else self.statistic

    def sort_key(self):
        k = self.k if isinstance(self.k, tuple) else (() if self.k is None else (self.k,))
        return (self.n, -1 if self.j is None else self.j, self.label, k)

    def csv_cells(self) -> list[str]:
        ex = self.exact
        k = "" if self.k is None else (" ".join(map(str, self.k)) if isinstance(self.k, tuple) else str(self.k))
        flag = self.flag
        if self.se is not None:
            flag = (flag + " " if flag else "") + f"se={fmt_float(self.se)}"
        return [str(self.n), "" if self.j is None else str(self.j), k, self.label,
                "" if ex is None else int_text(ex.numerator), "" if ex is None else int_text(ex.denominator),
                fmt_float(self.predicted), fmt_float(self.rel_err), flag]

    def to_json(self) -> dict:
        ex = self.exact
        return {
            "n": self.n, "j": self.j,
            "k": list(self.k) if isinstance(self.k, tuple) else self.k,
            "statistic": self.statistic, "predictor": self.predictor or None,
            "exact_num": None if ex is None else int_text(ex.numerator),
            "exact_den": None if ex is None else int_text(ex.denominator),
            "predicted": _json_num(self.predicted),
            "rel_err": self.rel_err, "se": self.se, "flag": self.flag,
        }


@dataclass
class Report:
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    runtime: float | None = None   # never serialized unless asked: reports stay byte-identical

    def sorted_rows(self) -> list[Row]:
        return sorted(self.rows, key=Row.sort_key)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.sorted_rows():
            w.writerow(r.csv_cells())
        return buf.getvalue()

    def to_json(self, include_runtime: bool = False) -> str:
        meta = dict(self.metadata)
        if include_runtime and self.runtime is not None:
            meta["runtime_seconds"] = self.runtime
        obj = {"format": REPORT_FORMAT, "version": REPORT_VERSION, "metadata": meta,
               "columns": list(CSV_COLUMNS), "rows": [r.to_json() for r in self.sorted_rows()]}
        return json.dumps(obj, indent=2, sort_keys=True) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        return self.to_csv()

    def series(self, statistic: str, predictor: str = "", j=None) -> list[Row]:
        """Rows of one statistic ordered by ``n``."""
        return sorted((r for r in self.rows if r.statistic == statistic and r.predictor == predictor
                       and (j is None or r.j == j)), key=lambda r: r.n)


def spec_hash(descriptor: dict) -> str:
    text = json.dumps(descriptor, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]
