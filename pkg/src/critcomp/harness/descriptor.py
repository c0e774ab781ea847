"""JSON scheme descriptors.

A descriptor is either a catalog reference ``{"catalog": "supertrees"}`` or a
full scheme::

    {
      "format": "critcomp-scheme", "version": 1,
      "kind": "extended",                 # extended | cycle | multivariate
      "name": "my scheme",
      "G": COMPONENT, "H": COMPONENT, "M": COMPONENT or null,
      "offset": EXPR or null,
      "components": [{"G": COMPONENT, "H": COMPONENT}, ...]   # multivariate
    }

with ``COMPONENT = {"expr": EXPR, "singular": {"rho", "lambda", "tau", "c",
"d1", "h_at_rho"}, "name": str}`` or ``{"catalog": entry, "part": "G"}``.
``EXPR`` follows :func:`critcomp.expr.from_json`. Numbers are exact: integers,
rational strings (``"-1/4"``) or decimals (``"0.25"`` or ``0.25``), and
``"lambda": "entire"`` marks an entire function.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

from .. import expr as ex
from ..errors import ValidationError
from ..schemes import CYCLE, ENTIRE, EXTENDED, MULTIVARIATE, ComponentSpec, SchemeSpec, SingularData

FORMAT = "critcomp-scheme"
VERSION = 1
_SING_KEYS = {"rho", "lambda", "tau", "c", "d1", "h_at_rho"}


@dataclass
class Loaded:
    spec: SchemeSpec
    entry: object = None      # CatalogEntry when the descriptor names one
    source: str = ""


def _num(v, path: str, allow_none: bool = True):
    if v is None:
        if allow_none:
            return None
        raise ValidationError(f"{path}: required")
    if isinstance(v, bool):
        raise ValidationError(f"{path}: expected a number, got a boolean")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, (Decimal, float)):
        return Fraction(Decimal(str(v)))
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"{path}: bad number {v!r} (use a rational like \"-1/4\" or a decimal)") from None
    raise ValidationError(f"{path}: expected a number, got {type(v).__name__}")


def _fmt_num(x) -> str | None:
    """Exact text for a number; long decimals stay decimals so dumps are idempotent."""
    if x is None:
        return None
    q = Fraction(Decimal(repr(x))) if isinstance(x, float) else Fraction(x)
    d, twos, fives = q.denominator, 0, 0
    while d % 2 == 0:
        d, twos = d // 2, twos + 1
    while d % 5 == 0:
        d, fives = d // 5, fives + 1
    k = max(twos, fives)
    if d == 1 and k >= 6:
        return str(Decimal(q.numerator * 10 ** k // q.denominator).scaleb(-k).normalize())
    return str(q)


def _singular(obj, path: str) -> SingularData:
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: expected an object")
    extra = set(obj) - _SING_KEYS
    if extra:
        raise ValidationError(f"{path}: unknown fields {sorted(extra)}")
    lam = obj.get("lambda")
    if lam is None:
        raise ValidationError(f"{path}.lambda: required")
    if isinstance(lam, str) and lam.strip().lower() == "entire":
        lam = ENTIRE
    else:
        lam = _num(lam, f"{path}.lambda", False)
    sd = SingularData(
        rho=_num(obj.get("rho"), f"{path}.rho"),
        lam=lam,
        tau=_num(obj.get("tau"), f"{path}.tau"),
        c=_num(obj.get("c"), f"{path}.c"),
        d1=_num(obj.get("d1"), f"{path}.d1"),
        h_at_rho=_num(obj.get("h_at_rho"), f"{path}.h_at_rho"),
    )
    try:
        sd.check(path)
    except ValidationError as exc:
        raise ValidationError(str(exc)) from None
    return sd


def _expr(obj, path: str) -> ex.Expr:
    try:
        return ex.from_json(obj)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def _catalog_part(obj, path: str) -> ComponentSpec:
    from .. import catalog
    entry = catalog.get(obj["catalog"])
    part = obj.get("part")
    spec = entry.spec
    if part in ("G", "H", "M"):
        comp = getattr(spec, part)
    elif isinstance(part, str) and part.startswith(("G", "H")) and part[1:].isdigit():
        i = int(part[1:]) - 1
        if spec.kind != MULTIVARIATE or not 0 <= i < len(spec.components):
            raise ValidationError(f"{path}.part: {part!r} not in {entry.name}")
        comp = spec.components[i][0 if part[0] == "G" else 1]
    else:
        raise ValidationError(f"{path}.part: expected G, H, M, G<i> or H<i>")
    if comp is None:
        raise ValidationError(f"{path}: {entry.name} has no {part}")
    return comp


def _component(obj, path: str, required: bool = True) -> ComponentSpec | None:
    if obj is None:
        if required:
            raise ValidationError(f"{path}: required")
        return None
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: expected an object")
    if "catalog" in obj:
        return _catalog_part(obj, path)
    for key in ("expr", "singular"):
        if key not in obj:
            raise ValidationError(f"{path}.{key}: required")
    extra = set(obj) - {"expr", "singular", "name"}
    if extra:
        raise ValidationError(f"{path}: unknown fields {sorted(extra)}")
    return ComponentSpec(_expr(obj["expr"], f"{path}.expr"), _singular(obj["singular"], f"{path}.singular"),
                         str(obj.get("name", "")))


def spec_from_json(obj) -> Loaded:
    """Build a scheme from a parsed descriptor."""
    if not isinstance(obj, dict):
        raise ValidationError("$: descriptor must be a JSON object")
    if "catalog" in obj and "kind" not in obj:
        from .. import catalog
        entry = catalog.get(obj["catalog"])
        return Loaded(entry.spec, entry, obj["catalog"])
    fmt = obj.get("format", FORMAT)
    if fmt != FORMAT:
        raise ValidationError(f"$.format: expected {FORMAT!r}")
    version = obj.get("version", VERSION)
    if version != VERSION:
        raise ValidationError(f"$.version: unsupported version {version!r} (this build reads {VERSION})")
    kind = obj.get("kind")
    if kind not in (EXTENDED, CYCLE, MULTIVARIATE):
        raise ValidationError(f"$.kind: expected one of extended, cycle, multivariate; got {kind!r}")
    name = str(obj.get("name", ""))
    M = _component(obj.get("M"), "$.M", required=False)
    offset = _expr(obj["offset"], "$.offset") if obj.get("offset") is not None else None
    if kind == MULTIVARIATE:
        comps = obj.get("components")
        if not isinstance(comps, list) or not comps:
            raise ValidationError("$.components: expected a non-empty list")
        pairs = []
        for i, c in enumerate(comps):
            p = f"$.components[{i}]"
            if not isinstance(c, dict):
                raise ValidationError(f"{p}: expected an object")
            pairs.append((_component(c.get("G"), f"{p}.G"), _component(c.get("H"), f"{p}.H")))
        spec = SchemeSpec(kind, components=tuple(pairs), M=M, offset=offset, name=name)
    else:
        H = _component(obj.get("H"), "$.H")
        G = _component(obj.get("G"), "$.G") if kind == EXTENDED else None
        spec = SchemeSpec(kind, H=H, G=G, M=M, offset=offset, name=name)
    return Loaded(spec, None, name)


def _component_json(c: ComponentSpec | None):
    if c is None:
        return None
    sd = c.singular
    sing = {
        "rho": _fmt_num(sd.rho),
        "lambda": "entire" if sd.entire else _fmt_num(sd.lam),
        "tau": _fmt_num(sd.tau),
        "c": _fmt_num(sd.c),
    }
    if sd.d1 is not None:
        sing["d1"] = _fmt_num(sd.d1)
    if sd.h_at_rho is not None:
        sing["h_at_rho"] = _fmt_num(sd.h_at_rho)
    return {"name": c.name, "expr": c.expr.to_json(), "singular": sing}


def spec_to_json(spec: SchemeSpec) -> dict:
    out = {"format": FORMAT, "version": VERSION, "kind": spec.kind, "name": spec.name}
    if spec.kind == MULTIVARIATE:
        out["components"] = [{"G": _component_json(G), "H": _component_json(H)} for G, H in spec.components]
    else:
        out["H"] = _component_json(spec.H)
        if spec.kind == EXTENDED:
            out["G"] = _component_json(spec.G)
    out["M"] = _component_json(spec.M)
    out["offset"] = spec.offset.to_json() if spec.offset is not None else None
    return out


def dumps(spec: SchemeSpec) -> str:
    return json.dumps(spec_to_json(spec), indent=2, sort_keys=True)


def parse_text(text: str, source: str = "<string>"):
    try:
        return json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load(arg: str) -> Loaded:
    """Resolve a CLI descriptor argument: catalog name, JSON file path or inline JSON."""
    from .. import catalog
    text = arg.strip()
    if text.startswith("{"):
        return spec_from_json(parse_text(text))
    if os.path.exists(arg):
        with open(arg, encoding="utf-8") as fh:
            return spec_from_json(parse_text(fh.read(), arg))
    entry = catalog.get(arg)
    return Loaded(entry.spec, entry, arg)
