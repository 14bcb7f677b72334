import csv
import io

import pytest

from annulus_bergman import cli


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_kernel_text_and_csv():
    code, text = run("kernel", "--r", "0.5", "--z", "0.7")
    assert code == 0 and "(2,2)" in text and "terms=" in text
    code, text = run("--format", "csv", "kernel", "--r", "0.5", "--z", "0.3+0.6j")
    assert code == 0
    assert [row["entry"] for row in rows(text)][:3] == ["(0,0)", "(1,0)", "(0,1)"]


def test_curvature_lists_all_terms():
    code, text = run("curvature", "--r", "0.1", "--z", "0.4", "--format", "csv")
    names = [row["quantity"] for row in rows(text)]
    assert code == 0
    assert names[:2] == ["g", "S"] and "A24" in names and names[-3:] == ["R", "R_direct", "discrepancy"]


def test_extended_precision_flag():
    code, text = run("curvature", "--r", "0.1", "--z", "0.4", "--precision-digits", "50", "--format", "csv")
    R = next(row["value"] for row in rows(text) if row["quantity"] == "R")
    assert code == 0 and len(R.lstrip("-").replace(".", "")) > 40


@pytest.mark.parametrize("argv", [
    ("kernel", "--r", "0.5", "--z", "1.5"),
    ("kernel", "--r", "2", "--z", "0.5"),
    ("bogus",),
    ("sweep", "--r", "0.1", "--samples", "1"),
    ("sweep", "--r", "0.1", "--start", "0.5", "--stop", "0.4"),
    ("kernel", "--r", "0.5", "--z", "0.7", "--tolerance", "-1"),
    ("--precision-digits", "0", "kernel", "--r", "0.5", "--z", "0.7"),
])
def test_usage_errors(argv):
    assert run(*argv)[0] == cli.EXIT_USAGE


def test_truncation_failure_is_numerical():
    code, _ = run("kernel", "--r", "0.5", "--z", "0.7", "--max-terms", "3")
    assert code == cli.EXIT_NUMERICAL


def test_sweep_failure_rows_flagged():
    code, text = run("sweep", "--r", "0.5", "--samples", "6", "--max-terms", "12")
    assert code == cli.EXIT_NUMERICAL
    table = rows(text)
    assert len(table) == 6 and all(row["error"].startswith("TruncationError") for row in table)


def test_sweep_unwritable_output(tmp_path):
    code, _ = run("sweep", "--r", "0.5", "--samples", "4", "-o", str(tmp_path / "missing" / "x.csv"))
    assert code == cli.EXIT_NUMERICAL


def test_sweep_deterministic_and_nested(tmp_path):
    a = tmp_path / "a.csv"
    assert run("sweep", "--r", "0.1", "--samples", "50", "-o", str(a))[0] == 0
    code, text = run("sweep", "--r", "0.1", "--samples", "100", "--jobs", "2")
    assert code == 0
    coarse = a.read_text().splitlines()
    fine = text.splitlines()
    assert coarse[0] == "z,R,g,K"
    assert coarse[1:] == fine[1::2]
    z = [float(row["z"]) for row in rows(text)]
    assert all(b > a for a, b in zip(z, z[1:]))
    assert all(float(row["R"]) < 2 for row in rows(text))


def test_sweep_abscissae_exact_nesting():
    ctx = cli.get_context(16)
    small = cli.sweep_abscissae(ctx, 0.001, 1000)
    big = cli.sweep_abscissae(ctx, 0.001, 2000)
    assert small == big[::2]


def test_chain_command(tmp_path):
    good = tmp_path / "good.yaml"
    good.write_text("length: 3\nR: {rule: geometric, first: 0.5, ratio: 0.5}\n"
                    "ratio: {rule: geometric, first: 0.05, ratio: 0.05}\ns: {safety: 0.9}\n")
    code, text = run("chain", "--spec", str(good))
    assert code == 0 and "condition (iii)" in text and "FAIL" not in text
    bad = tmp_path / "bad.yaml"
    bad.write_text("length: 3\nR: {rule: power, first: 0.5, exponent: 0.9}\n")
    assert run("chain", "--spec", str(bad))[0] == cli.EXIT_VERIFY
    assert run("chain", "--spec", str(tmp_path / "none.yaml"))[0] == cli.EXIT_USAGE
    garbage = tmp_path / "garbage.yaml"
    garbage.write_text("- 1\n- 2\n")
    assert run("chain", "--spec", str(garbage))[0] == cli.EXIT_USAGE


def test_limit_table_r310_short():
    code, text = run("theorem01", "--part", "2", "--r-values", "1e-2", "1e-4", "--format", "csv")
    assert code == 0
    assert [row["r"] for row in rows(text)] == ["0.01", "0.0001"]


def test_limit_table_sqrt_short():
    code, text = run("theorem01", "--part", "1", "--r-values", "1e-3", "1e-4")
    assert code == 0 and "0.961101313" in text


def test_crosscheck_small():
    code, text = run("crosscheck", "--r-values", "0.1", "--points", "3")
    assert code == 0 and len(text.splitlines()) == 4
    assert run("crosscheck", "--r-values", "0.1", "--points", "2", "--threshold", "1e-20")[0] == cli.EXIT_VERIFY
