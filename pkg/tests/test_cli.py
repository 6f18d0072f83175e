import json

import numpy as np

from hmols import designs as dz
from hmols import formats
from hmols.cli import run
from hmols.fixtures import fixture_path, hmols_pair_2_4, template_3_2_matrix


def test_verify_fixture_exits_zero(capsys):
    assert run(["verify", str(fixture_path("hmols_2_4.grid"))]) == 0
    assert "valid" in capsys.readouterr().out


def test_verify_mutated_fixture_exits_one(tmp_path, capsys):
    pair = hmols_pair_2_4()
    arr = np.array(pair.squares, copy=True)
    arr[0, 2, 0], arr[0, 2, 7] = arr[0, 2, 7], arr[0, 2, 0]
    mutated = dz.HoleyLatinSquareSet.from_arrays(h=2, n=4, holes=pair.holes,
                                                 squares=arr)
    path = tmp_path / "hmols_2_4_mutated.grid"
    path.write_text(formats.grid_dumps(mutated))
    assert run(["verify", str(path)]) == 1
    out = capsys.readouterr().out
    assert "INVALID" in out and "HoleSymbol" in out


def test_verify_json_flag(capsys):
    assert run(["--json", "verify", str(fixture_path("imols_6_2.grid"))]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["valid"] is True and doc["violations"] == []


def test_bound_lambda(capsys):
    assert run(["bound", "lambda", "2", "11"]) == 0
    assert capsys.readouterr().out.strip() == "8"


def test_bound_prime_and_frobenius(capsys):
    assert run(["bound", "prime", "8", "400", "800"]) == 0
    assert capsys.readouterr().out.strip() == "401"
    assert run(["bound", "frobenius", "3", "5", "2", "130"]) == 0
    assert capsys.readouterr().out.strip() == "5 23"
    assert run(["bound", "prime", "100", "2", "50"]) == 3


def test_bound_upper_and_asymptotic(capsys):
    assert run(["bound", "upper", "2", "4"]) == 0
    assert capsys.readouterr().out.strip() == "2"
    assert run(["bound", "asymptotic", "2", "1000", "--delta", "3.0"]) == 0
    assert "asymptotic, not a certificate" in capsys.readouterr().out


def test_usage_error_exits_two(capsys):
    assert run(["bound", "nonsense", "1", "2"]) == 2
    assert run(["no-such-command"]) == 2
    assert run(["verify", "/no/such/file.grid"]) == 2


def test_template_output_matches_fixture(capsys):
    assert run(["template", "3", "2"]) == 0
    rows = [[int(t) for t in line.split()]
            for line in capsys.readouterr().out.strip().splitlines()]
    assert np.array_equal(np.array(rows), template_3_2_matrix())


def test_project_verify_flow(tmp_path, capsys):
    out = tmp_path / "proj.json"
    assert run(["project", "2", "2", "3", "--out", str(out)]) == 0
    assert run(["verify", str(out)]) == 0


def test_search_and_develop_flow(tmp_path, capsys):
    cert = tmp_path / "cert.json"
    assert run(["search", "2", "2", "5", "--cols", "0", "1", "2", "3",
                "--seed", "0", "--out", str(cert)]) == 0
    doc = formats.cert_loads(cert.read_text())
    assert doc["q"] == 5 and doc["col_selection"] == [0, 1, 2, 3]
    out = tmp_path / "htd.json"
    assert run(["develop", str(cert), "--out", str(out)]) == 0
    design = formats.design_loads(out.read_text())
    assert design.k == 4 and dz.verify_design(design).valid


def test_search_verify_recovers_columns(tmp_path, capsys):
    completed = tmp_path / "complete.json"
    assert run(["search", "--verify", str(fixture_path("cert_2_401.json")),
                "--out", str(completed)]) == 0
    doc = formats.cert_loads(completed.read_text())
    assert doc["col_selection"] is not None and len(doc["col_selection"]) == 11


def test_search_exhausted_exit_code(tmp_path):
    assert run(["search", "2", "2", "5", "--cols", "0", "1", "2", "3",
                "--budget", "0"]) == 3


def test_search_bytes_identical_across_jobs(tmp_path):
    outs = []
    for jobs in ("1", "4"):
        out = tmp_path / f"cert{jobs}.json"
        assert run(["--jobs", jobs, "search", "2", "2", "5",
                    "--cols", "0", "1", "2", "3", "--seed", "7",
                    "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_expand_flow(tmp_path):
    proj = tmp_path / "proj.json"
    assert run(["project", "2", "2", "3", "--out", str(proj)]) == 0
    out = tmp_path / "htd.json"
    assert run(["expand", str(proj), "7", "--seed", "1", "--out", str(out)]) == 0
    design = formats.design_loads(out.read_text())
    assert design.group_size == 14 and dz.verify_design(design).valid


def test_convert_round_trip(tmp_path):
    htd_path = tmp_path / "htd.json"
    assert run(["convert", str(fixture_path("hmols_2_4.grid")),
                "--to", "htd", "--out", str(htd_path)]) == 0
    back = tmp_path / "back.grid"
    assert run(["convert", str(htd_path), "--to", "hmols",
                "--out", str(back)]) == 0
    assert back.read_text() == fixture_path("hmols_2_4.grid").read_text()


def test_compose_product_cli(tmp_path):
    a, b, out = (tmp_path / x for x in ("a.json", "b.json", "out.json"))
    a.write_text(formats.design_dumps(dz.td_from_field(3, 2)))
    b.write_text(formats.design_dumps(dz.td_from_field(3, 3)))
    assert run(["compose", "product", str(a), str(b), "--out", str(out)]) == 0
    design = formats.design_loads(out.read_text())
    assert design.group_size == 6 and dz.verify_design(design).valid


def test_plan_and_execute_cli(tmp_path, capsys):
    from hmols import planner as pl
    reg = pl.Registry()
    reg.add(pl.RECIPE, ("cyclotomic",), pl.CONSTRUCTIBLE)
    reg_path = tmp_path / "reg.json"
    reg_path.write_text(reg.to_json())
    plan_path = tmp_path / "plan.json"
    assert run(["plan", "2", "1", "67", "--registry", str(reg_path),
                "--out", str(plan_path)]) == 0
    assert run(["execute", str(plan_path), "--registry", str(reg_path)]) == 0
    assert "valid" in capsys.readouterr().out
    assert run(["plan", "2", "6", "59201", "--registry", str(reg_path)]) == 3
