"""Worked examples packaged as schemes with brute-force oracles.

``get(name)`` builds (and caches) an entry. Besides the fixed names listed by
``names()`` a few parametric forms are accepted::

    mbundled<m>                      m-bundled recursive trees
    motzkin-coloured-bridge-<k>      (also coloured-walk)
    crp(<a>,<theta>)                 Chinese restaurant process
    urn(<alpha>,<beta>,<w0>,<b0>)    two-colour triangular urn
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache

from ..errors import ValidationError
from .base import CatalogEntry, composition_counts, oracle_enumerate, table
from .crp import CrpSpec, build_crp, simulate_crp
from .lattice import (ARBITRARY_COLOURS, BRIDGE_RETURNS, COLOURED_BRIDGE, COLOURED_WALK,
                      MOTZKIN, SIGN_BRIDGE, SIGN_WALK, WALK_RETURNS, StepSet, build_lattice)
from .synthetic import (build_degenerate_i, build_degenerate_ii, build_discrete_s,
                        build_partial_i, build_partial_ii)
from .trees import build_bilabelled3, build_cycle2z, build_mbundled, build_supertrees
from .urn import FIGURE_URN, UrnSpec, build_urn2, build_urnK

_FIXED = {
    "supertrees": build_supertrees,
    "bilabelled3": build_bilabelled3,
    "mbundled3": lambda: build_mbundled(3),
    "cycle2z": build_cycle2z,
    "motzkin-bridge-returns": lambda: build_lattice(MOTZKIN, BRIDGE_RETURNS),
    "motzkin-walk-returns": lambda: build_lattice(MOTZKIN, WALK_RETURNS),
    "motzkin-coloured-bridge-2": lambda: build_lattice(MOTZKIN, COLOURED_BRIDGE, 2),
    "motzkin-coloured-bridge-3": lambda: build_lattice(MOTZKIN, COLOURED_BRIDGE, 3),
    "motzkin-coloured-walk-2": lambda: build_lattice(MOTZKIN, COLOURED_WALK, 2),
    "motzkin-arbitrary-colours": lambda: build_lattice(MOTZKIN, ARBITRARY_COLOURS),
    "motzkin-sign-changes-bridge": lambda: build_lattice(MOTZKIN, SIGN_BRIDGE),
    "motzkin-sign-changes-walk": lambda: build_lattice(MOTZKIN, SIGN_WALK),
    "urn-figure": lambda: build_urn2(FIGURE_URN),
    "urn3": lambda: build_urnK(UrnSpec((1, Fraction(1, 2)), (1, Fraction(3, 2)), (2, 1, 1))),
    "crp": lambda: build_crp(CrpSpec(Fraction(1, 2), Fraction(1, 2))),
    "crp-theta0": lambda: build_crp(CrpSpec(Fraction(1, 3), 0)),
    "crp-negative": lambda: build_crp(CrpSpec(Fraction(1, 2), Fraction(-1, 4))),
    "synthetic-discrete-s": build_discrete_s,
    "synthetic-degenerate-i": build_degenerate_i,
    "synthetic-degenerate-ii": build_degenerate_ii,
    "synthetic-partial-i": build_partial_i,
    "synthetic-partial-ii": build_partial_ii,
}


def names() -> list[str]:
    return sorted(_FIXED)


def _fracs(text: str) -> list[Fraction]:
    try:
        return [Fraction(x.strip()) for x in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"bad parameter list {text!r}: {exc}") from None


@lru_cache(maxsize=None)
def get(name: str) -> CatalogEntry:
    if name in _FIXED:
        return _FIXED[name]()
    m = re.fullmatch(r"mbundled(\d+)", name)
    if m:
        return build_mbundled(int(m.group(1)))
    m = re.fullmatch(r"motzkin-(coloured-bridge|coloured-walk)-(\d+)", name)
    if m:
        return build_lattice(MOTZKIN, m.group(1), int(m.group(2)))
    m = re.fullmatch(r"crp\((.*)\)", name)
    if m:
        a, th = _fracs(m.group(1))
        return build_crp(CrpSpec(a, th))
    m = re.fullmatch(r"urn\((.*)\)", name)
    if m:
        vals = _fracs(m.group(1))
        if len(vals) != 4:
            raise ValidationError("urn(alpha,beta,w0,b0) needs four numbers")
        return build_urn2(UrnSpec.two_colour(*vals))
    raise ValidationError(f"unknown catalog entry {name!r}; known: {', '.join(names())}")


def all_entries() -> list[CatalogEntry]:
    return [get(n) for n in names()]


__all__ = [
    "CatalogEntry", "CrpSpec", "StepSet", "UrnSpec", "FIGURE_URN", "MOTZKIN",
    "all_entries", "build_bilabelled3", "build_crp", "build_cycle2z", "build_lattice",
    "build_mbundled", "build_supertrees", "build_urn2", "build_urnK", "composition_counts",
    "get", "names", "oracle_enumerate", "simulate_crp", "table",
]
