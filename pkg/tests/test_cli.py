import json
import math
import subprocess
import sys

import numpy as np
import pytest

from maginterp import bounds
from maginterp.cli import COLUMNS, FIG_COLUMNS, main
from maginterp.io import parse_potential, read_csv_table, read_potential, write_potential
from maginterp.klt import PotentialGrid


def run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    code = main(list(argv) + ["--out", str(out)])
    return code, (out.read_text() if out.exists() else "")


def table(text):
    meta, cols, rows = read_csv_table(text)
    return meta, cols, [[v if v in ("ok", "failed", "infeasible") else float(v) for v in r] for r in rows]


def test_column_schema_is_pinned(tmp_path):
    code, text = run(tmp_path, "mu-curve", "--steps", "3")
    assert code == 0
    meta, cols, rows = table(text)
    assert cols == COLUMNS["mu-curve"]
    assert len(rows) == 3 and all(r[-1] == "ok" for r in rows)
    assert meta["tool"] == "maginterp" and meta["schema"] == 1
    assert {"params", "solver_config", "grid", "backend"} <= set(meta)


def test_mu_rows_are_consistent(tmp_path, gn3):
    code, text = run(tmp_path, "mu-curve", "--alpha-min", "-0.5", "--alpha-max", "4", "--steps", "4")
    _, cols, rows = table(text)
    ix = {c: i for i, c in enumerate(cols)}
    for r in rows:
        assert r[ix["mu_LT"]] == pytest.approx(bounds.mu_LT(3.0, 1.0, r[0], gn3), rel=1e-13)
        assert r[ix["mu_interp"]] <= r[ix["mu_LT"]] <= r[ix["mu_EL"]] <= r[ix["mu_Gauss"]]
        assert r[ix["log10_LT_over_EL"]] == pytest.approx(math.log10(r[ix["mu_LT"]] / r[ix["mu_EL"]]), abs=1e-12)
        assert r[ix["ordered"]] == 1.0


def test_nu_ratio_signs(tmp_path):
    code, text = run(tmp_path, "nu-curve", "--beta-min", "0.05", "--beta-max", "5", "--steps", "3",
                     "--spacing", "log")
    assert code == 0
    _, cols, rows = table(text)
    ix = {c: i for i, c in enumerate(cols)}
    for r in rows:
        assert r[ix["log10_interp_over_EL"]] <= 0 and r[ix["log10_LT_over_EL"]] <= 0
        assert r[ix["log10_Gauss_over_EL"]] >= 0


def test_output_is_deterministic_across_processes(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.csv"
        subprocess.run([sys.executable, "-m", "maginterp", "xi-curve", "--steps", "7", "--out", str(path)],
                       check=True)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_workers_do_not_change_output(tmp_path):
    _, one = run(tmp_path, "mu-curve", "--steps", "4", name="a.csv")
    _, two = run(tmp_path, "mu-curve", "--steps", "4", "--workers", "2", name="b.csv")
    assert one.replace('"workers": 2', '"workers": 1') == two.replace('"workers": 2', '"workers": 1')


@pytest.mark.parametrize("argv", [
    ["mu-curve", "--alpha-min", "-1"],
    ["mu-curve", "--p", "1.5"],
    ["stability-curve", "--alpha-min", "-2"],
    ["nu-curve", "--beta-min", "0"],
    ["nu-curve", "--p", "3"],
    ["xi-curve", "--B", "0"],
    ["gn", "--d", "3", "--p", "7"],
    ["mu-curve", "--d", "3"],
    ["mu-curve", "--workers", "0"],
])
def test_invalid_input_exits_2_before_solving(tmp_path, argv, capsys):
    code, text = run(tmp_path, *argv)
    assert code == 2 and text == ""
    assert "error" in capsys.readouterr().err


def test_json_and_csv_carry_the_same_numbers(tmp_path):
    _, csv_text = run(tmp_path, "xi-curve", "--steps", "5")
    _, json_text = run(tmp_path, "xi-curve", "--steps", "5", "--format", "json", name="out.json")
    meta, cols, rows = read_csv_table(csv_text)
    doc = json.loads(json_text)
    assert doc["columns"] == cols
    for a, b in zip(rows, doc["rows"]):
        for x, y in zip(a, b):
            assert (x == y) if isinstance(y, str) else float(x) == y
    assert {k: v for k, v in doc["metadata"].items() if k != "format"} == \
           {k: v for k, v in meta.items() if k != "format"}


def test_fig_axes(tmp_path):
    _, text = run(tmp_path, "mu-curve", "--steps", "2", "--fig-axes")
    _, cols, rows = table(text)
    assert cols[-5:-1] == FIG_COLUMNS["mu-curve"]
    s = (2 * math.pi) ** (2 / 3 - 1)
    ix = {c: i for i, c in enumerate(cols)}
    for r in rows:
        assert r[ix["mu_EL_fig"]] == pytest.approx(s * r[ix["mu_EL"]], rel=1e-14)


def test_failed_nodes_keep_their_rows(tmp_path, capsys):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"solver": {"max_steps": 5}}))
    code, text = run(tmp_path, "mu-curve", "--steps", "3", "--config", str(conf))
    assert code == 1
    meta, cols, rows = read_csv_table(text)
    assert len(rows) == 3 and all(r[-1] == "failed" for r in rows)
    assert len(meta["failures"]) == 3
    assert meta["solver_config"]["max_steps"] == 5
    assert "node failed" in capsys.readouterr().err


def test_config_is_overridden_by_flags(tmp_path):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"solver": {"rtol": 1e-9, "r_max": 30}}))
    _, text = run(tmp_path, "xi-curve", "--steps", "2", "--config", str(conf), "--tol", "1e-10")
    meta, _, _ = read_csv_table(text)
    assert meta["solver_config"]["rtol"] == 1e-10 and meta["solver_config"]["r_max"] == 30
    conf.write_text(json.dumps({"solver": {"bogus": 1}}))
    assert run(tmp_path, "xi-curve", "--config", str(conf))[0] == 2


def test_stability_curve_positive_and_resolution_independent(tmp_path):
    _, coarse = run(tmp_path, "stability-curve", "--alpha-min", "-0.5", "--alpha-max", "2", "--steps", "2",
                    name="c.csv")
    conf = tmp_path / "fine.json"
    conf.write_text(json.dumps({"stability": {"fd_step": 0.005}}))
    _, fine = run(tmp_path, "stability-curve", "--alpha-min", "-0.5", "--alpha-max", "2", "--steps", "2",
                  "--config", str(conf), name="f.csv")
    _, cols, a = table(coarse)
    _, _, b = table(fine)
    ix = {c: i for i, c in enumerate(cols)}
    for ra, rb in zip(a, b):
        assert ra[ix["positive"]] == 1.0 and ra[ix["mu_eig"]] > 0
        assert ra[ix["mu_eig"]] == pytest.approx(rb[ix["mu_eig"]], abs=1e-5)


def test_gn_subcommand(tmp_path):
    code, text = run(tmp_path, "gn", "--p", "3")
    _, cols, rows = table(text)
    assert code == 0 and cols == COLUMNS["gn"]
    assert rows[0][2] == pytest.approx(3.596105845145, rel=1e-10)


# ---- klt ---------------------------------------------------------------------

def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_potential_parse_errors_name_the_line(tmp_path, capsys):
    path = _write(tmp_path, "bad.csv", "# d=2 tail=none\nr,phi\n0,1\n0.5,abc\n")
    code = main(["klt", "--potential", path, "--case", "i"])
    assert code == 2
    assert "line 4" in capsys.readouterr().err
    with pytest.raises(Exception, match="line 3"):
        parse_potential("# d=2 tail=none\n0,1\n0,2\n")
    with pytest.raises(Exception, match="header"):
        parse_potential("0,1\n1,2\n")


def test_potential_round_trip(tmp_path):
    pot = PotentialGrid(np.linspace(0, 3, 7), np.linspace(0, 3, 7) ** 2 + 0.1, 3, "power", 2.0, 0.1)
    write_potential(tmp_path / "p.csv", pot)
    back = read_potential(tmp_path / "p.csv")
    assert back.d == 3 and back.tail_model == "power" and back.tail_exponent == 2.0 and back.tail_offset == 0.1
    assert np.array_equal(back.nodes, pot.nodes) and np.array_equal(back.values, pot.values)


def test_klt_nonnegative_potential_gives_the_gap(tmp_path, capsys):
    path = _write(tmp_path, "pos.csv", "# d=2 tail=constant\nr,phi\n0,0.5\n1,0\n2,0.3\n")
    code = main(["klt", "--potential", path, "--case", "i", "--p", "3"])
    out = capsys.readouterr().out
    assert code == 0
    assert "bound_value: 1.0" in out and "input_norm: 0.0" in out


def test_klt_case_iii_engineered(tmp_path, capsys):
    B, gamma = 1.0, 0.6
    s = bounds.xi_optimizer_scale(B, gamma)
    r = np.linspace(0, 12, 12001)
    write_potential(tmp_path / "w.csv", PotentialGrid(r, gamma * s * r * r / 2, 2, "power", 2.0))
    code = main(["klt", "--potential", str(tmp_path / "w.csv"), "--case", "iii", "--gamma", str(gamma)])
    out = capsys.readouterr().out
    value = float(out.split("bound_value: ")[1].split()[0])
    assert code == 0 and value == pytest.approx(s, rel=1e-6)


def test_klt_threshold_sweep(tmp_path, capsys):
    r = np.linspace(0, 6, 301)
    write_potential(tmp_path / "v.csv", PotentialGrid(r, -2 * np.exp(-r * r), 2, "none"))
    code, text = run(tmp_path, "klt", "--potential", str(tmp_path / "v.csv"), "--case", "i-threshold",
                     "--lambda-min", "-1.5", "--lambda-max", "0.5", "--steps", "5")
    assert code == 0
    meta, cols, rows = read_csv_table(text)
    lams = [float(row[0]) for row in rows]
    assert 0.0 in lams
    ok = [float(row[2]) for row in rows if row[-1] == "ok"]
    assert meta["best"]["bound_value"] == pytest.approx(max(ok), rel=1e-14)
    # a "none" tail means phi = 0 far out: lambda > 0 is not admissible
    assert all(row[-1] == "infeasible" for row in rows if float(row[0]) > 0)
    out = capsys.readouterr().out
    assert "best_lambda" in out and "bound_at_lambda_0" in out


def test_klt_sources_are_ordered(tmp_path, capsys):
    r = np.linspace(0, 6, 301)
    write_potential(tmp_path / "v.csv", PotentialGrid(r, -2 * np.exp(-r * r), 2, "none"))
    vals = {}
    for src in ("interp", "LT", "EL"):
        main(["klt", "--potential", str(tmp_path / "v.csv"), "--case", "i", "--source", src, "--curve-steps", "12"])
        out = capsys.readouterr().out
        vals[src] = float(out.split("bound_value: ")[1].split()[0])
    # bounds on -lambda: larger is better
    assert vals["interp"] <= vals["LT"] <= vals["EL"]
