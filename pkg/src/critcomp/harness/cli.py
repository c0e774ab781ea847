"""Command line interface.

    critcomp series   <descriptor> --order N
    critcomp pmf      <descriptor> --n N [--marks j,...]
    critcomp moments  <descriptor> --n N --s S [--refined j]
    critcomp predict  <descriptor>
    critcomp sweep    <config.json>
    critcomp simulate <descriptor> --n N --runs R --seed S
    critcomp oracle   <entry> --n N

``<descriptor>`` is a catalog name, a path to a JSON descriptor or inline
JSON. Output is CSV (default) or JSON (``--format json``). Exit status is 0 on
success, 2 on invalid input and 3 when a numerical series fails to converge.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .. import __version__
from .. import asymptotics as A
from .. import schemes as S
from ..errors import NonConvergenceError, ValidationError
from . import descriptor as Dsc
from .report import Report, Row, fmt_float

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGENCE = 0, 2, 3


def _report(rows, loaded=None, **meta) -> Report:
    md = {"critcomp_version": __version__, **meta}
    if loaded is not None:
        from .report import spec_hash
        md["source"] = loaded.source or loaded.spec.name
        md["spec_hash"] = spec_hash(Dsc.spec_to_json(loaded.spec))
    return Report(rows, md)


def _pmf_rows(tab) -> list[Row]:
    rows = []
    for k, p in sorted(tab.nonzero().items()):
        rows.append(Row(tab.n, "pmf", p, k=k))
    return rows


def cmd_series(args) -> Report:
    ld = Dsc.load(args.descriptor)
    if args.order < 0:
        raise ValidationError("--order must be non-negative")
    F = S.f_series(ld.spec, args.order + 1)
    rows = [Row(n, "f_n", Fraction(F[n])) for n in range(args.order + 1)]
    return _report(rows, ld, command="series")


def _marks(text):
    try:
        marks = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ValidationError(f"--marks: expected comma-separated integers, got {text!r}") from None
    if not marks:
        raise ValidationError("--marks: empty")
    return marks


def cmd_pmf(args) -> Report:
    ld = Dsc.load(args.descriptor)
    if args.marks:
        marks = _marks(args.marks)
        tab = ld.entry.exact_refined(args.n, marks) if ld.entry else S.pmf_refined(ld.spec, args.n, marks)
    elif ld.entry is not None:
        tab = ld.entry.exact_pmf(args.n)
    elif ld.spec.kind == S.MULTIVARIATE:
        tab = S.pmf_mv(ld.spec, args.n)
    else:
        tab = S.pmf_core(ld.spec, args.n)
    rep = _report(_pmf_rows(tab), ld, command="pmf", marks=list(tab.marks))
    if tab.flags:
        rep.metadata["flags"] = list(tab.flags)
    return rep


def cmd_moments(args) -> Report:
    ld = Dsc.load(args.descriptor)
    spec, n, s = ld.spec, args.n, args.s
    if s < 1:
        raise ValidationError("--s must be >= 1")
    rows = []
    if args.refined is not None:
        j = args.refined
        for r in range(1, s + 1):
            rows.append(Row(n, f"factorial_moment_{r}", S.factorial_moment_refined(spec, n, j, r), j=j))
        if ld.entry is not None and ld.entry.formal_refined:
            for row in rows:
                row.flag = "formal"
    else:
        tab = ld.entry.exact_pmf(n) if ld.entry is not None else None
        for r in range(1, s + 1):
            if tab is not None and spec.kind != S.MULTIVARIATE:
                fm, raw = tab.factorial_moment(r), tab.moment(r)
            elif spec.kind == S.MULTIVARIATE:
                joint = tab if tab is not None else S.pmf_mv(spec, n)
                fm, raw = joint.marginal(0).factorial_moment(r), joint.marginal(0).moment(r)
            else:
                fm, raw = S.factorial_moment_exact(spec, n, r), S.moment_exact(spec, n, r)
            rows += [Row(n, f"factorial_moment_{r}", fm), Row(n, f"moment_{r}", raw)]
    return _report(rows, ld, command="moments")


def _predict(ld) -> dict:
    spec = ld.spec
    cl = A.classify_scheme(spec)
    out = {"name": spec.name or ld.source, "kind": spec.kind, "classification": cl.tag}
    for key in ("lam_G", "lam_H", "lam_M", "lam_M_tilde"):
        v = getattr(cl, key)
        out[key] = None if v is None else str(v)
    if cl.reasons:
        out["reasons"] = "; ".join(cl.reasons)
    try:
        cd = A.composed_singular_data(spec)
        out["composed_rho"] = fmt_float(cd.rho)
        out["composed_terms"] = [
            {"lambda": str(t.lam), "c": fmt_float(t.c), "kind": t.kind} for t in cd.terms]
    except ValidationError as exc:
        out["composed_terms"] = f"unavailable: {exc}"
    try:
        out["limit_law"] = str(A.identify_limit_law(spec))
    except ValidationError as exc:
        out["limit_law"] = f"unavailable: {exc}"
    if cl.tag in (A.CRITICAL, A.CYCLE_CRITICAL):
        H = spec.H.singular
        out["kappa"] = fmt_float(float(H.tau) / -float(H.c))
        out["scale"] = f"n^{cl.lam_H}"
        out["theta_threshold_exponent"] = str(A.threshold_exponent(spec))
    return out


def cmd_predict(args):
    return _predict(Dsc.load(args.descriptor))


def cmd_sweep(args) -> Report:
    from .sweep import SweepConfig, run_sweep
    try:
        with open(args.config, encoding="utf-8") as fh:
            obj = Dsc.parse_text(fh.read(), args.config)
    except OSError as exc:
        raise ValidationError(f"{args.config}: {exc.strerror}") from None
    return run_sweep(SweepConfig.from_json(obj))


def cmd_simulate(args) -> Report:
    from .simulate import simulate
    ld = Dsc.load(args.descriptor)
    if ld.entry is None:
        raise ValidationError("simulate needs a catalog entry (urn, CRP or lattice walk)")
    res = simulate(ld.source if ld.source else ld.entry, args.n, args.runs, args.seed)
    rows = [Row(args.n, "empirical_pmf", p, k=k) for k, p in sorted(res.table.probs.items())]
    exact = ld.entry.exact_mean(args.n)
    z = (res.mean - float(exact)) / res.se if res.se > 0 else 0.0
    rows.append(Row(args.n, "mean", exact, res.mean, "monte-carlo", se=res.se,
                    flag="ok" if abs(z) < 3 else "deviates"))
    return _report(rows, ld, command="simulate", runs=args.runs, seed=args.seed)


def cmd_oracle(args) -> Report:
    from ..catalog import get
    from ..catalog.base import oracle_enumerate
    entry = get(args.entry)
    marks = _marks(args.marks) if args.marks else None
    tab = oracle_enumerate(entry, args.n, marks)
    return _report(_pmf_rows(tab), Dsc.Loaded(entry.spec, entry, entry.name), command="oracle")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="critcomp", description="Critical composition schemes: exact laws and limits.")
    p.add_argument("--version", action="version", version=f"critcomp {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, desc=True):
        sp = sub.add_parser(name, help=help_)
        if desc:
            sp.add_argument("descriptor", help="catalog name, JSON file or inline JSON")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.set_defaults(fn=fn)
        return sp

    sp = add("series", cmd_series, "coefficients f_0..f_N of F")
    sp.add_argument("--order", type=int, required=True)
    sp = add("pmf", cmd_pmf, "exact law of X_n (or of refined counts)")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--marks", help="comma-separated component sizes j")
    sp = add("moments", cmd_moments, "exact factorial and raw moments up to order S")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--s", type=int, default=1)
    sp.add_argument("--refined", type=int, help="moments of X_{n,j} for this j")
    add("predict", cmd_predict, "regime, composed singular data and limit law")
    sp = add("sweep", cmd_sweep, "convergence sweep from a JSON config", desc=False)
    sp.add_argument("config")
    sp = add("simulate", cmd_simulate, "Monte Carlo law of X_n")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--runs", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp = add("oracle", cmd_oracle, "brute-force law of X_n", desc=False)
    sp.add_argument("entry")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--marks")
    return p


def _render_predict(d: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(d, indent=2, sort_keys=True) + "\n"
    lines = ["field,value"]
    for k, v in d.items():
        if isinstance(v, list):
            v = " + ".join(f"{t['c']}*{'log' if t['kind'] == 'log' else 'power'}({t['lambda']})" for t in v)
        cell = "" if v is None else str(v)
        if any(ch in cell for ch in ',"\n'):
            cell = '"' + cell.replace('"', '""') + '"'
        lines.append(f"{k},{cell}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = args.fn(args)
    except NonConvergenceError as exc:
        print(f"critcomp: non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ValidationError as exc:
        print(f"critcomp: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = _render_predict(out, args.format) if isinstance(out, dict) else out.render(args.format)
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
