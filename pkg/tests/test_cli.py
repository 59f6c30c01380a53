import pytest

from hestonsim.cli import main, parse_config_file
from hestonsim.errors import ConfigurationError
from hestonsim.harness import parse_table_csv

CASE_III_CONFIG = """\
# Case III parameters
model.s0 = 100
model.v0 = 0.010201
model.kappa = 6.21
model.theta = 0.019
model.xi = 0.61
model.rho = -0.7
model.r = 0.0319  # decimal rate
product.maturity = 1
product.strike = 100
"""


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize(
    "case,ref",
    [("I", "13.08467014"), ("II", "16.64922292"),
     ("III", "6.80611331"), ("IV", "9.02491348")],
)
def test_exact_prints_reference_price(capsys, case, ref):
    code, out, _ = _run(capsys, "exact", "--case", case)
    assert code == 0
    assert out.strip() == ref


def test_exact_from_params_file(tmp_path, capsys):
    cfg = tmp_path / "case3.cfg"
    cfg.write_text(CASE_III_CONFIG)
    code, out, _ = _run(capsys, "exact", "--params", str(cfg))
    assert code == 0
    assert out.strip() == "6.80611331"


def test_exact_requires_case_or_params(capsys):
    code, _, err = _run(capsys, "exact")
    assert code == 1
    assert "error:" in err


def test_unknown_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["price", "--case", "I", "--scheme", "pois-ge", "--bogus"])
    assert exc.value.code == 2


def test_unknown_scheme_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["price", "--case", "I", "--scheme", "euler"])
    assert exc.value.code == 2


def test_price_smoke_csv(capsys):
    code, out, _ = _run(capsys, "price", "--case", "IV", "--scheme", "pois-ge",
                        "--K", "1", "--paths", "2000", "--reps", "2", "--seed", "3")
    assert code == 0
    rows = parse_table_csv(out)
    assert len(rows) == 1
    row = rows[0]
    assert row.scheme == "POIS-GE" and row.trunc_k == 1
    assert abs(row.bias) < 0.5
    assert row.benchmark == pytest.approx(9.02491348, abs=1e-6)


def test_price_missing_scheme_is_runtime_error(capsys):
    code, _, err = _run(capsys, "price", "--case", "I", "--paths", "100", "--reps", "1")
    assert code == 1
    assert "--scheme" in err


def test_price_config_file_matches_flags(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(CASE_III_CONFIG + "run.scheme = ig\nrun.paths = 1500\n"
                   "run.reps = 2\nrun.seed = 11\n")
    code, out_cfg, _ = _run(capsys, "price", "--params", str(cfg))
    assert code == 0
    code, out_flags, _ = _run(capsys, "price", "--case", "III", "--scheme", "ig",
                              "--paths", "1500", "--reps", "2", "--seed", "11")
    assert code == 0
    row_cfg = parse_table_csv(out_cfg)[0]
    row_flags = parse_table_csv(out_flags)[0]
    assert row_cfg.estimate == row_flags.estimate
    assert row_cfg.se == row_flags.se


def test_price_grid_config_emits_cross_product(tmp_path, capsys):
    cfg = tmp_path / "grid.cfg"
    cfg.write_text(CASE_III_CONFIG + "run.scheme = pois-ge\nrun.paths = 500\n"
                   "run.reps = 1\ngrid.xi = 0.61,0.3\ngrid.kappa = 6.21,1\n")
    code, out, _ = _run(capsys, "price", "--params", str(cfg))
    assert code == 0
    rows = parse_table_csv(out)
    assert len(rows) == 4
    assert {r.case for r in rows} == {
        "custom[xi=0.61,kappa=6.21]", "custom[xi=0.61,kappa=1]",
        "custom[xi=0.3,kappa=6.21]", "custom[xi=0.3,kappa=1]",
    }


def test_price_markdown_output(capsys):
    code, out, _ = _run(capsys, "price", "--case", "I", "--scheme", "qem",
                        "--steps", "4", "--paths", "500", "--reps", "1",
                        "--format", "md")
    assert code == 0
    assert "| QEM | 4 |" in out


def test_price_writes_out_file(tmp_path, capsys):
    dest = tmp_path / "table.csv"
    code, out, _ = _run(capsys, "price", "--case", "IV", "--scheme", "pois-td",
                        "--steps", "2", "--paths", "500", "--reps", "1",
                        "--out", str(dest))
    assert code == 0
    assert dest.read_text() == out


def test_varswap_smoke(capsys):
    code, out, _ = _run(capsys, "varswap", "--case", "IV", "--scheme", "pois-td",
                        "--periods", "4", "--paths", "2000", "--reps", "2")
    assert code == 0
    row = parse_table_csv(out)[0]
    assert row.scheme == "POIS-TD" and row.n_steps == 4
    assert row.benchmark == pytest.approx(0.21132, abs=5e-5)


def test_varswap_rejects_exact_scheme(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["varswap", "--case", "IV", "--scheme", "pois-ge", "--periods", "4"])
    assert exc.value.code == 2


def test_bench_var3_table(capsys):
    code, out, _ = _run(capsys, "bench", "--table", "var3",
                        "--paths", "400", "--reps", "1", "--seed", "2")
    assert code == 0
    rows = parse_table_csv(out)
    assert len(rows) == 8
    benchmarks = sorted({round(100 * r.benchmark, 3) for r in rows}, reverse=True)
    assert benchmarks == [1.870, 1.832, 1.790, 1.767]
    assert {r.scheme for r in rows} == {"QEM", "POIS-TD"}


def test_bench_opt_table_config_count(capsys):
    code, out, _ = _run(capsys, "bench", "--table", "opt4",
                        "--paths", "200", "--reps", "1")
    assert code == 0
    rows = parse_table_csv(out)
    # 5 GE levels + 5 series levels + 4 IG steps + 4 series steps + 3 + 3 TD rows
    assert len(rows) == 24
    assert all(r.benchmark == pytest.approx(9.02491348, abs=1e-6) for r in rows)


def test_parse_config_rejects_malformed_line(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("model.s0 100\n")
    with pytest.raises(ConfigurationError):
        parse_config_file(str(cfg))


def test_missing_config_file_is_runtime_error(capsys):
    code, _, err = _run(capsys, "exact", "--params", "/nonexistent/file.cfg")
    assert code == 1
    assert "error:" in err
