import csv
import io
import json
import math
import subprocess
import sys

import pytest

from definetti.cli import main, parse_grid
from definetti.measures import beta_bound_constant

UNIFORM = '{"kind": "beta", "alpha": 1, "beta": 1}'
DIRAC = '{"kind": "atomic", "atoms": [[0.5, 1.0]]}'


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_grid():
    assert parse_grid("20,10,10") == (10, 20)
    assert parse_grid("log:10:1000:3") == (10, 100, 1000)


def test_distance_exact(capsys):
    assert main(["distance", "--measure", UNIFORM, "--n-grid", "1,2"]) == 0
    out = rows(capsys.readouterr().out)
    assert float(out[0]["dw_exact"]) == pytest.approx(0.25, abs=1e-12)
    assert float(out[1]["dw_exact"]) == pytest.approx(5 / 36, abs=1e-12)
    assert out[0]["dw_perturbed"] == ""


def test_distance_perturbed_to_file(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["distance", "--measure", DIRAC, "--n-grid", "4,16", "--mode", "perturbed", "--out", str(out)]) == 0
    for r in rows(out.read_text()):
        assert abs(float(r["dw_perturbed"]) - 1 / math.sqrt(2 * math.pi * int(r["n"]))) <= 1e-8


def test_distance_measure_from_file(tmp_path, capsys):
    path = tmp_path / "m.json"
    path.write_text('{"kind": "singular_power", "gamma": 0.5}')
    assert main(["distance", "--measure", str(path), "--n-grid", "5", "--mode", "both"]) == 0
    (r,) = rows(capsys.readouterr().out)
    assert float(r["dw_perturbed"]) > 0 and r["upper_smooth"] == ""


def test_monte_carlo_mode_needs_seed():
    with pytest.raises(SystemExit):
        main(["distance", "--measure", UNIFORM, "--n-grid", "5", "--mode", "urn_mc"])


def test_monte_carlo_mode_is_reproducible(capsys):
    argv = ["distance", "--measure", UNIFORM, "--n-grid", "5", "--mode", "urn_mc", "--seed", "3",
            "--replications", "20000"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first
    assert float(rows(first)[0]["dw_empirical"]) > 0


def test_rate_fit(tmp_path, capsys):
    fit_path = tmp_path / "fit.json"
    code = main(["rate-fit", "--measure", DIRAC, "--n-grid", "log:100:10000:5", "--fit-out", str(fit_path)])
    assert code == 0
    verdict = json.loads(fit_path.read_text())
    assert abs(verdict["slope"] + 0.5) <= 1e-8
    captured = capsys.readouterr()
    assert json.loads(captured.err)["quantity"] == "dw_perturbed"
    assert len(rows(captured.out)) == 5


def test_urn_sim(capsys):
    argv = ["urn-sim", "--A", "2", "--B", "3", "--n", "5", "--replications", "1000", "--seed", "1"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    header, body = first.split("\n", 1)
    assert json.loads(header[2:])["config"]["seed"] == 1
    assert sum(int(r["count"]) for r in rows(body)) == 1000
    main(argv)
    assert capsys.readouterr().out == first


def test_urn_sim_requires_seed():
    with pytest.raises(SystemExit):
        main(["urn-sim", "--A", "1", "--B", "1", "--n", "2"])


@pytest.mark.parametrize("name", ["chen-check", "binomial-normal-check"])
def test_binomial_normal(name, capsys):
    assert main([name, "--t", "0.5", "--n-grid", "1,4"]) == 0
    out = rows(capsys.readouterr().out)
    assert [r["holds"] for r in out] == ["true", "true"]
    assert float(out[1]["rhs"]) == pytest.approx(0.5)


def test_compare_constant(capsys, tmp_path):
    c = beta_bound_constant(2, 3)
    assert main(["compare-constant", "--measure", '{"kind":"beta","alpha":2,"beta":3}', "--external", repr(2 * c)]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.5, abs=1e-15)
    table = tmp_path / "t.csv"
    table.write_text(f"alpha,beta,external\n1,1,{beta_bound_constant(1, 1)!r}\n2,3,{c!r}\n")
    assert main(["compare-constant", "--table", str(table)]) == 0
    out = rows(capsys.readouterr().out)
    assert [float(r["ratio"]) for r in out] == pytest.approx([1.0, 1.0], abs=1e-15)


def test_compare_constant_rejects_non_beta(capsys):
    assert main(["compare-constant", "--measure", DIRAC, "--external", "1"]) == 2
    assert "Beta" in capsys.readouterr().err


def test_bad_measure_exit_code(capsys):
    assert main(["distance", "--measure", '{"kind": "nope"}', "--n-grid", "3"]) == 2
    assert "unknown measure kind" in capsys.readouterr().err


def test_verify_quick(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert main(["verify", "--quick", "--out", str(out)]) == 0
    results = json.loads(out.read_text())
    assert all(r["status"] == "pass" for r in results)


def test_verify_loose_tolerance_exits_nonzero(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--quick", "--tol", "1e-2", "--out", str(out)]) == 1
    statuses = {r["status"] for r in json.loads(out.read_text())}
    assert "degraded" in statuses


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "definetti.cli", "chen-check", "--t", "0.3", "--n-grid", "4"],
                          capture_output=True, text=True, check=True)
    assert rows(proc.stdout)[0]["holds"] == "true"
