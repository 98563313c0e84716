"""Command-line interface: reports, exit codes and replay."""

import csv
import json

import pytest

from gnt_lab.cli import EXIT_CAP, EXIT_OK, EXIT_PARSE, SCHEMA, main


def run_json(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(list(args) + ["--out", str(out)])
    return code, json.loads(out.read_text())


def test_verify_random_with_oracles(tmp_path):
    code, rep = run_json(["verify", "--system", "random", "--p", "3", "--q", "2", "--trials", "2",
                          "--kronecker", "--classical", "2"], tmp_path)
    assert code == EXIT_OK
    assert rep["schema"] == SCHEMA and rep["status"] == "ok"
    assert rep["summary"]["failed"] == 0 and rep["summary"]["checks"] > 50
    checks = {row["check"] for row in rep["checks"]}
    assert {"gn1", "gn2", "cayley_hamilton", "sigma_kronecker_vs_det"} <= checks
    assert all({"check", "u", "lhs", "rhs", "residual", "tolerance", "pass"} <= set(row) for row in rep["checks"])


def test_replay_is_identical(tmp_path):
    code, _ = run_json(["verify", "--system", "random", "--p", "2", "--q", "2", "--seed", "5"], tmp_path, "a.json")
    assert code == EXIT_OK
    code, rep = run_json(["verify", "--replay", str(tmp_path / "a.json")], tmp_path, "b.json")
    assert code == EXIT_OK and rep["replay"]["identical"]


def test_gnt_from_file(tmp_path):
    path = tmp_path / "sys.json"
    path.write_text(json.dumps({"p": 2, "q": 1, "matrices": [[["1/2", 1], [0, 3]]]}))
    code, rep = run_json(["gnt", "--system", str(path)], tmp_path)
    assert code == EXIT_OK
    sigma = {tuple(e["u"]): e["sigma"] for e in rep["family"]["sigma"]}
    assert sigma[(1,)] == "7/2" and sigma[(2,)] == "3/2"


def test_classical_subcommand(tmp_path):
    code, rep = run_json(["classical", "--system", "random", "--p", "3", "--q", "2", "--r-max", "2"], tmp_path)
    assert code == EXIT_OK and rep["summary"]["failed"] == 0


def test_kappa_table_csv(tmp_path):
    table = tmp_path / "k.csv"
    code, rep = run_json(["kappa-table", "--p", "4", "--q", "1", "--csv", str(table)], tmp_path)
    assert code == EXIT_OK
    rows = list(csv.DictReader(table.open()))
    assert [r["coefficient"] for r in rows] == ["1", "2", "1"]


def test_integrate_refinement(tmp_path):
    table = tmp_path / "ref.csv"
    code, rep = run_json(["integrate", "--geometry", "t2_rotating", "--u", "2", "--check", "main",
                          "--check", "walczak", "--refine", "16,32,64", "--csv", str(table)], tmp_path)
    assert code == EXIT_OK, [r for r in rep["checks"] if not r["pass"]]
    assert any(r["check"].endswith("_order") for r in rep["checks"])
    assert table.exists()


def test_integrate_config_file(tmp_path):
    cfg = tmp_path / "geo.json"
    cfg.write_text(json.dumps({"frame": {"name": "t3_two_angle"}, "m": 16, "fiber": {"group": "SO", "n": 16},
                               "u": [[2, 0]], "checks": ["main", "vanishing"]}))
    code, rep = run_json(["integrate", "--geometry", str(cfg)], tmp_path)
    assert rep["status"] in ("ok", "tolerance_failure")
    assert {r["check"] for r in rep["checks"]} >= {"main"}


@pytest.mark.parametrize("args", [
    ["verify", "--system", "random", "--p", "2"],
    ["verify", "--system", "/nonexistent.json"],
    ["kappa-table", "--p", "4", "--q", "1", "--r", "3"],
])
def test_parse_errors(args, tmp_path):
    code, rep = run_json(args, tmp_path)
    assert code == EXIT_PARSE and rep["status"] == "parse_error"


def test_malformed_multi_index_exits_with_parse_code():
    with pytest.raises(SystemExit) as exc:
        main(["integrate", "--geometry", "t2_rotating", "--u", "1,x"])
    assert exc.value.code == EXIT_PARSE


def test_resolution_refusal(tmp_path):
    code, rep = run_json(["integrate", "--geometry", "t3_two_angle", "--m", "3"], tmp_path)
    assert code == EXIT_CAP and rep["status"] == "cap_refusal"


def test_stdout_report(capsys):
    assert main(["kappa-table", "--p", "2", "--q", "1"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["schema"] == SCHEMA
