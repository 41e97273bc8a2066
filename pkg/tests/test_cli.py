import json

import jsonschema
import pytest
from click.testing import CliRunner

from revisos.cli import main
from revisos.parser import parse
from revisos.proofs.serialize import loads, schema

from gen import corpus_path

import pathlib

HERE = pathlib.Path(__file__).parent


@pytest.fixture
def runner():
    return CliRunner()


def corpus(name):
    return str(corpus_path(name))


def write(tmp_path, text, name="f.iso"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


SWAP_UNIT = "def swap :: 1 * (1 + 1) <-> (1 + 1) * 1 = { (x, y) <-> (y, x) }\n"


def test_check_iso1(runner):
    res = runner.invoke(main, ["check", corpus("iso1.iso")])
    assert res.exit_code == 0
    assert "iso1 :: A + (B + C) <-> C + (A + B), OD ok, non-recursive" in res.output


def test_check_cantor_fails(runner):
    res = runner.invoke(main, ["check", corpus("cantor.iso")])
    assert res.exit_code == 1
    assert "not structurally recursive" in res.output + (res.stderr if res.stderr_bytes else "")


def test_check_map_reports_index(runner):
    res = runner.invoke(main, ["check", "--json", corpus("map_swap.iso")])
    assert res.exit_code == 0
    report = json.loads(res.output)
    entry = next(d for d in report["definitions"] if d["name"] == "map_swap")
    assert entry["recursion"] == {"decreasing_index": 1}


def test_run_swap(runner, tmp_path):
    res = runner.invoke(main, ["run", write(tmp_path, SWAP_UNIT), "-e", "swap ((), injl ())"])
    assert res.exit_code == 0 and res.output.strip() == "(injl (), ())"


def test_run_compiled_successor(runner, tmp_path):
    out = tmp_path / "s.iso"
    assert runner.invoke(main, ["rpp", "compile", "S", "-o", str(out)]).exit_code == 0
    res = runner.invoke(main, ["run", str(out), "-e", "rpp (injl ())"])
    assert res.exit_code == 0 and res.output.strip() == "injr (injl (fold (injl ())))"


def test_run_trace_is_json_lines(runner, tmp_path):
    res = runner.invoke(main, ["run", write(tmp_path, SWAP_UNIT), "-e", "swap ((), injl ())",
                               "--system", "explicit", "--trace"])
    assert res.exit_code == 0
    lines = [json.loads(line) for line in res.stderr.splitlines()]
    assert lines and lines[0]["rule"] == "IsoApp"


def test_run_loop_runs_out_of_fuel(runner):
    res = runner.invoke(main, ["run", corpus("loop.iso"), "-e", "loop (fold (injl ()))", "--fuel", "50"])
    assert res.exit_code == 2 and "FuelExhausted" in res.output


def test_missing_file_and_parse_error(runner, tmp_path):
    assert runner.invoke(main, ["check", str(tmp_path / "nope.iso")]).exit_code == 3
    assert runner.invoke(main, ["check", write(tmp_path, "def :: = {")]).exit_code == 3


def test_invert(runner, tmp_path):
    res = runner.invoke(main, ["invert", write(tmp_path, SWAP_UNIT)])
    assert res.exit_code == 0
    assert "{ (y, x) <-> (x, y) }" in res.output
    twice = runner.invoke(main, ["invert", write(tmp_path, res.output, "g.iso")])
    assert parse(twice.output).lookup("swap").iso == parse(SWAP_UNIT).lookup("swap").iso


def test_invert_map_rechecks(runner, tmp_path):
    res = runner.invoke(main, ["invert", corpus("map_swap.iso")])
    assert res.exit_code == 0
    again = runner.invoke(main, ["check", write(tmp_path, res.output)])
    assert again.exit_code == 0, again.output


def test_rpp_commands(runner):
    assert runner.invoke(main, ["rpp", "eval", "It[S]", "2", "3"]).output.strip() == "5 3"
    res = runner.invoke(main, ["rpp", "compile", "Swap"])
    assert "{ (x, y) <-> (y, x) }" in res.output
    res = runner.invoke(main, ["rpp", "test", "If[S,Id,P]", "--trials", "100"])
    assert res.exit_code == 0 and "100/100 agree" in res.output
    assert runner.invoke(main, ["rpp", "eval", "Swap", "1"]).exit_code == 1
    assert runner.invoke(main, ["rpp", "eval", "Sw@p"]).exit_code == 3


def test_rpp_test_is_deterministic(runner):
    a = runner.invoke(main, ["rpp", "test", "It[S]", "--trials", "5", "--seed", "9"]).output
    b = runner.invoke(main, ["rpp", "test", "It[S]", "--trials", "5", "--seed", "9"]).output
    assert a == b


def test_proof_extract_matches_golden(runner):
    res = runner.invoke(main, ["proof", "extract", str(HERE / "fixtures" / "swap_atoms.iso")])
    assert res.exit_code == 0
    assert res.output == (HERE / "golden" / "swap.json").read_text()
    jsonschema.validate(json.loads(res.output), schema())
    raw = runner.invoke(main, ["proof", "extract", "--raw", corpus("map_swap.iso")])
    assert any(n.rule == "ex" for n in loads(raw.output))


def test_proof_validate(runner):
    res = runner.invoke(main, ["proof", "validate", corpus("map_swap.iso"), "--name", "map_swap"])
    assert res.exit_code == 0 and "Valid" in res.output and "ν" in res.output
    res = runner.invoke(main, ["proof", "validate", corpus("loop.iso")])
    assert res.exit_code == 1 and "Invalid" in res.output


def test_proof_simulate(runner, tmp_path):
    res = runner.invoke(main, ["proof", "simulate", write(tmp_path, SWAP_UNIT), "-e", "swap ((), injl ())"])
    assert res.exit_code == 0 and "agreement at every step" in res.output
    res = runner.invoke(main, ["proof", "simulate", corpus("map_swap.iso"), "--json"])
    report = json.loads(res.output)
    assert report["agrees"] and all(c["agrees"] for c in report["checkpoints"])
