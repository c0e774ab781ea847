import csv
import io
import json
import math
from fractions import Fraction as F

import numpy as np
import pytest

from critcomp import schemes as S
from critcomp.catalog import get
from critcomp.catalog.crp import CrpSpec, crp_oracle
from critcomp.errors import UnsupportedSchemeError, ValidationError
from critcomp.harness import descriptor as Dsc
from critcomp.harness.cli import main
from critcomp.harness.report import CSV_COLUMNS, Report, Row
from critcomp.harness.rng import generator
from critcomp.harness.simulate import CHUNK, chi_square, simulate
from critcomp.harness.sweep import SweepConfig, run_sweep


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# descriptors --------------------------------------------------------------------------

SQRT_H = {"expr": {"add": ["1", {"mul": ["-1", {"pow_binomial": {"mul": ["-1", "z"]}, "gamma": "1/2"}]}]},
          "singular": {"rho": "1", "lambda": "1/2", "tau": "1", "c": "-1"}}


def test_descriptor_catalog_reference():
    ld = Dsc.spec_from_json({"catalog": "supertrees"})
    assert ld.entry is get("supertrees")


def test_descriptor_inline_scheme():
    obj = {"kind": "extended", "name": "geo",
           "G": {"expr": {"reciprocal": {"add": ["1", {"mul": ["-1", "z"]}]}},
                 "singular": {"rho": "1", "lambda": "-1", "tau": None, "c": "1"}},
           "H": SQRT_H}
    ld = Dsc.spec_from_json(obj)
    assert ld.spec.kind == S.EXTENDED
    assert ld.spec.H.singular.lam == F(1, 2)
    # decimal strings are exact
    obj["H"] = dict(SQRT_H, singular={"rho": "1.0", "lambda": "0.5", "tau": "1", "c": "-1"})
    assert Dsc.spec_from_json(obj).spec.H.singular.lam == F(1, 2)


@pytest.mark.parametrize("obj,where", [
    ([], "$"),
    ({"kind": "spiral", "H": SQRT_H}, "$.kind"),
    ({"kind": "cycle"}, "$.H"),
    ({"kind": "cycle", "H": {"expr": "z"}}, "$.H.singular"),
    ({"kind": "cycle", "H": dict(SQRT_H, singular={"rho": "x", "lambda": "1/2", "tau": 1, "c": -1})}, "$.H.singular.rho"),
    ({"kind": "cycle", "H": dict(SQRT_H, extra=1)}, "$.H"),
    ({"kind": "multivariate", "components": []}, "$.components"),
    ({"kind": "cycle", "H": SQRT_H, "version": 99}, "$.version"),
])
def test_descriptor_errors_name_the_field(obj, where):
    with pytest.raises(ValidationError) as info:
        Dsc.spec_from_json(obj)
    assert str(info.value).startswith(where)


def test_parse_text_reports_position():
    with pytest.raises(ValidationError, match="line 2 column"):
        Dsc.parse_text('{"kind": "cycle",\n  oops}')


def test_dumps_is_stable():
    for name in ("supertrees", "motzkin-walk-returns", "urn3"):
        text = Dsc.dumps(get(name).spec)
        again = Dsc.dumps(Dsc.spec_from_json(json.loads(text)).spec)
        assert text == again


# reports ------------------------------------------------------------------------------

def test_report_csv_columns_and_exact_cells():
    rep = Report([Row(4, "pmf", F(1, 3), k=2), Row(2, "mean", F(7, 2), 3.5, "limit-law")])
    rows = csv_rows(rep.to_csv())
    assert tuple(rows[0].keys()) == CSV_COLUMNS
    assert rows[0]["n"] == "2" and rows[0]["statistic"] == "mean@limit-law" and rows[0]["rel_err"] == "0"
    assert (rows[1]["exact_num"], rows[1]["exact_den"], rows[1]["k"]) == ("1", "3", "2")


def test_report_huge_exact_values():
    big = F(10 ** 400 + 1, 3)
    r = Row(1, "f_n", big, predicted=None)
    assert r.csv_cells()[4] == str(10 ** 400 + 1)
    # numerators past the interpreter's 4300-digit str() cap still print in full
    huge = Row(1, "f_n", F(10 ** 5000 + 1, 7))
    cells = huge.csv_cells()
    assert len(cells[4]) == 5001 and cells[4].endswith("0001") and cells[5] == "7"
    assert len(json.loads(Report([huge]).to_json())["rows"][0]["exact_num"]) == 5001
    import mpmath as mp
    r = Row(1, "f_n", big, mp.mpf(10) ** 400 / 3, "transfer")
    assert r.rel_err == pytest.approx(0, abs=1e-12)
    assert json.loads(Report([r]).to_json())["rows"][0]["predicted"].startswith("3.33333")


# CLI ------------------------------------------------------------------------------------

def test_cli_pmf_supertrees(capsys):
    code, out, _ = run_cli(capsys, "pmf", "supertrees", "--n", "4")
    assert code == 0
    rows = csv_rows(out)
    assert [(r["k"], r["exact_num"], r["exact_den"]) for r in rows] == [("1", "1", "2"), ("2", "1", "2")]


def test_cli_predict_supertrees(capsys):
    code, out, _ = run_cli(capsys, "predict", "supertrees", "--format", "json")
    d = json.loads(out)
    assert code == 0
    assert d["limit_law"] == "TiltedMittagLeffler(alpha=1/2, c=-1/2)"
    assert d["theta_threshold_exponent"] == "1/3"
    assert d["classification"] == "critical-small-exponent"
    code, out, _ = run_cli(capsys, "predict", "supertrees")
    assert "theta_threshold_exponent,1/3" in out


def test_cli_series_cycle(capsys):
    code, out, _ = run_cli(capsys, "series", "cycle2z", "--order", "6")
    vals = [F(int(r["exact_num"]), int(r["exact_den"])) for r in csv_rows(out)]
    assert vals == [0, 1, 1, F(4, 3), 2, F(16, 5), F(16, 3)]
    # scaled check n! f_n = (2n-2)!!
    assert [math.factorial(n) * v for n, v in enumerate(vals)][1:] == [1, 2, 8, 48, 384, 3840]


def test_cli_moments_and_refined(capsys):
    code, out, _ = run_cli(capsys, "moments", "supertrees", "--n", "8", "--s", "2", "--format", "json")
    d = json.loads(out)
    fm1 = next(r for r in d["rows"] if r["statistic"] == "factorial_moment_1")
    assert F(int(fm1["exact_num"]), int(fm1["exact_den"])) == get("supertrees").exact_pmf(8).mean()
    code, out, _ = run_cli(capsys, "moments", "urn-figure", "--n", "5", "--s", "1", "--refined", "1")
    assert code == 0 and "formal" in out


def test_cli_oracle_and_marks(capsys):
    code, a, _ = run_cli(capsys, "oracle", "supertrees", "--n", "6", "--marks", "2")
    code2, b, _ = run_cli(capsys, "pmf", "supertrees", "--n", "6", "--marks", "2")
    assert code == code2 == 0
    strip = lambda t: [(r["k"], r["exact_num"], r["exact_den"]) for r in csv_rows(t)]  # noqa: E731
    assert strip(a) == strip(b)


def test_cli_inline_descriptor(capsys, tmp_path):
    desc = Dsc.dumps(get("supertrees").spec)
    p = tmp_path / "st.json"
    p.write_text(desc)
    code, out, _ = run_cli(capsys, "pmf", str(p), "--n", "4")
    assert code == 0 and len(csv_rows(out)) == 2
    code, out2, _ = run_cli(capsys, "pmf", desc, "--n", "4")
    assert out2 == out


def test_cli_simulate(capsys):
    code, out, _ = run_cli(capsys, "simulate", "crp", "--n", "20", "--runs", "5000", "--seed", "3")
    assert code == 0
    mean = next(r for r in csv_rows(out) if r["statistic"].startswith("mean"))
    assert "se=" in mean["flag"]


@pytest.mark.parametrize("argv", [
    ["pmf", "{\"kind\": ", "--n", "3"],
    ["pmf", "no-such-entry", "--n", "3"],
    ["series", "supertrees", "--order", "-1"],
    ["pmf", "supertrees", "--n", "4", "--marks", "a,b"],
    ["simulate", "supertrees", "--n", "4", "--runs", "10", "--seed", "1"],
])
def test_cli_invalid_input_exit_2(capsys, argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == 2 and out == "" and "invalid input" in err


def test_cli_malformed_json_position(capsys):
    code, _, err = run_cli(capsys, "pmf", '{"kind": ]', "--n", "3")
    assert code == 2 and "line 1 column" in err


def test_cli_argparse_error_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["pmf", "supertrees"])
    assert info.value.code == 2


def test_cli_nonconvergence_exit_3(capsys, monkeypatch):
    from critcomp.errors import NonConvergenceError
    from critcomp.harness import cli

    def boom(args):
        raise NonConvergenceError("series did not settle")
    monkeypatch.setattr(cli, "cmd_predict", boom)
    code, out, err = run_cli(capsys, "predict", "supertrees")
    assert code == 3 and out == "" and "non-convergence" in err


# sweeps ----------------------------------------------------------------------------------

def _cfg(**kw):
    base = {"entry": "supertrees", "n_grid": [16, 32, 64],
            "statistics": [{"type": "moments", "s_max": 2}, {"type": "refined", "j": 2},
                           {"type": "covariance", "j1": 2, "j2": 3}, {"type": "f_n"}],
            "targets": ["exact", "transfer", "limit-law"]}
    base.update(kw)
    return SweepConfig.from_json(base)


def test_sweep_deterministic_bytes():
    a, b = run_sweep(_cfg()), run_sweep(_cfg())
    assert a.to_csv() == b.to_csv()
    assert a.to_json() == b.to_json()
    assert run_sweep(_cfg(), workers=2).to_csv() == a.to_csv()


def test_sweep_moment_trend():
    rep = run_sweep(_cfg(n_grid=[64, 128, 256, 512], statistics=[{"type": "moments", "s_max": 2}]))
    for s in (1, 2):
        rows = rep.series(f"factorial_moment_{s}", "limit-law")
        errs = [r.rel_err for r in rows]
        assert len(errs) == 4 and all(b < a for a, b in zip(errs, errs[1:]))


def test_sweep_geometric_grid_and_roundtrip():
    cfg = SweepConfig.from_json({"entry": "crp", "n_grid": {"geometric": {"start": 8, "stop": 64, "ratio": 2}}})
    assert cfg.n_grid == [8, 16, 32, 64]
    assert SweepConfig.from_json(json.loads(json.dumps(cfg.to_json()))).n_grid == cfg.n_grid


@pytest.mark.parametrize("bad", [
    {"entry": "supertrees", "n_grid": [8, 8]},
    {"entry": "supertrees", "n_grid": []},
    {"entry": "supertrees", "n_grid": [4, 8], "statistics": [{"type": "median"}]},
    {"entry": "supertrees", "n_grid": [4, 8], "targets": ["oracle-of-delphi"]},
    {"entry": "supertrees", "n_grid": [4, 8], "monte_carlo": {"runs": 10}},
])
def test_sweep_config_validation(bad):
    with pytest.raises(ValidationError):
        SweepConfig.from_json(bad)


def test_sweep_rows_fail_softly():
    rep = run_sweep(SweepConfig.from_json({"entry": "synthetic-degenerate-i", "n_grid": [8, 16],
                                           "statistics": [{"type": "moments", "s_max": 1}, {"type": "pmf", "k_max": 3}]}))
    flags = [r.flag for r in rep.rows]
    assert any(f.startswith("error:") for f in flags)
    assert any(r.statistic == "pmf" and r.predicted is not None for r in rep.rows)


def test_sweep_support_skips():
    rep = run_sweep(SweepConfig.from_json({"entry": "motzkin-coloured-bridge-3", "n_grid": [2, 8],
                                           "statistics": [{"type": "moments", "s_max": 1}]}))
    assert [(r.statistic, r.flag.startswith("outside support")) for r in rep.rows if r.n == 2] == [("skipped", True)]
    assert any(r.statistic == "factorial_moment_1" for r in rep.rows if r.n == 8)


def test_sweep_degenerate_pmf_trend():
    rep = run_sweep(SweepConfig.from_json({"entry": "synthetic-discrete-s", "n_grid": [25, 50, 100, 200],
                                           "statistics": [{"type": "pmf", "k_max": 3}]}))
    rows = [r for r in rep.rows if r.statistic == "pmf" and r.k == 2 and r.predicted is not None]
    errs = [abs(float(r.exact) - r.predicted) for r in sorted(rows, key=lambda r: r.n)]
    assert len(errs) == 4 and all(b < a for a, b in zip(errs, errs[1:]))


def test_sweep_monte_carlo_row():
    rep = run_sweep(SweepConfig.from_json({"entry": "crp", "n_grid": [50],
                                           "statistics": [{"type": "moments", "s_max": 1}],
                                           "monte_carlo": {"runs": 20000, "seed": 11}}))
    mc = [r for r in rep.rows if r.predictor == "monte-carlo"]
    assert len(mc) == 1 and mc[0].se > 0 and mc[0].flag == "ok"


def test_sweep_metadata():
    rep = run_sweep(_cfg(n_grid=[8]))
    md = json.loads(rep.to_json())["metadata"]
    assert md["source"] == "supertrees" and md["classification"] == "critical-small-exponent"
    assert len(md["spec_hash"]) == 16 and "runtime_seconds" not in md


# simulation ------------------------------------------------------------------------------

def test_rng_streams():
    a = generator(5).random(4)
    assert np.array_equal(a, generator(5).random(4))
    assert not np.array_equal(a, generator(5, 1).random(4))
    assert not np.array_equal(a, generator(6).random(4))


def test_simulate_deterministic():
    a = simulate("crp", 30, 30000, 99)
    b = simulate("crp", 30, 30000, 99)
    assert a.table == b.table and a.mean == b.mean
    assert simulate("crp", 30, 30000, 100).table != a.table


def test_simulate_worker_count_independent(monkeypatch):
    runs = 2 * CHUNK + 500
    one = simulate("urn-figure", 25, runs, 4, workers=1)
    three = simulate("urn-figure", 25, runs, 4, workers=3)
    assert one.table == three.table
    monkeypatch.setenv("CRITCOMP_WORKERS", "2")
    assert simulate("urn-figure", 25, runs, 4).table == one.table


def test_simulate_chunks_are_substreams():
    # the first chunk of a long run is exactly a short run
    e = get("crp")
    first = np.bincount(e.simulator(12, CHUNK, 8, 0))
    res = simulate("crp", 12, CHUNK, 8)
    assert [int(c) for c in first] == [int(res.table[k] * CHUNK) for k in range(len(first))]


def test_simulate_rejects():
    with pytest.raises(UnsupportedSchemeError):
        simulate("supertrees", 5, 10, 1)
    with pytest.raises(ValidationError):
        simulate("crp", 5, 0, 1)
    with pytest.raises(ValidationError):
        simulate("crp", 5, 10, -1)
    monkey_env = "CRITCOMP_WORKERS"
    import os
    old = os.environ.get(monkey_env)
    os.environ[monkey_env] = "many"
    try:
        with pytest.raises(ValidationError):
            simulate("crp", 5, 10, 1)
    finally:
        if old is None:
            del os.environ[monkey_env]
        else:
            os.environ[monkey_env] = old


def test_crp_n3_chi_square():
    sim = simulate("crp", 3, 100_000, 20240601)
    exact = crp_oracle(CrpSpec(F(1, 2), F(1, 2)), 3)
    stat, dof, q = chi_square(exact, sim)
    assert stat < q
    for k, p in exact.probs.items():
        assert abs(float(sim.table[k]) - float(p)) < 4 * math.sqrt(float(p) * (1 - float(p)) / 100_000) + 1e-12


@pytest.mark.parametrize("name,seed", [("urn-figure", 77), ("crp", 78), ("motzkin-walk-returns", 79)])
def test_simulated_law_chi_square(name, seed):
    n = 40
    sim = simulate(name, n, 100_000, seed)
    stat, dof, q = chi_square(get(name).exact_pmf(n), sim)
    assert stat < q
