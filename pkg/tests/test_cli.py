import dataclasses
import json

import pytest

from macroscope import cli
from macroscope.cli import (
    REPORT_FIELDS,
    ScenarioError,
    load_structure_file,
    parse_scenario,
    resolve_inputs,
    run_scenario,
    scenario_protocols,
    structure_digest,
)
from macroscope.protocols import PROTOCOLS, protocol_by_name


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload) if not isinstance(payload, str) else payload)
    return str(path)


def _scenario(tmp_path, **overrides):
    payload = {
        "id": "demo",
        "function": {"name": "parity"},
        "blindness": "single",
        "structure": {"sets": [[1, 2], [2, 3]]},
        "inputs": {"exhaustive": True},
    }
    payload.update(overrides)
    return _write(tmp_path, "scenario.json", payload)


# ----------------------------------------------------------------- parsing


def test_parse_minimal_constancy_scenario(tmp_path):
    path = _scenario(tmp_path,
                     function={"name": "constancy", "d": 3},
                     inputs={"explicit": [[1, 3, 2]]})
    scenario = parse_scenario(path)
    assert scenario.id == "demo"
    assert scenario.function.kind == "constancy"
    assert scenario.structure.sets == ((1, 2), (2, 3))
    # file symbols are 1-based; the internal alphabet starts at 0
    assert resolve_inputs(scenario)[0].values == (0, 2, 1)


def test_parse_malformed_json_names_position(tmp_path):
    path = _write(tmp_path, "bad.json", '{"id": "x",\n  "oops"\n')
    with pytest.raises(ScenarioError) as err:
        parse_scenario(path)
    assert "bad.json:" in str(err.value)
    assert ":3:" in str(err.value) or ":2:" in str(err.value)


def test_parse_covering_violation_names_index(tmp_path):
    path = _scenario(tmp_path, structure={"n": 3, "sets": [[1], [3]]})
    with pytest.raises(ScenarioError) as err:
        parse_scenario(path)
    assert "index 2" in str(err.value)


def test_parse_zero_epsilon_rejected(tmp_path):
    path = _scenario(tmp_path,
                     function={"name": "average", "epsilon": 0},
                     inputs={"random": 5, "seed": 1})
    with pytest.raises(ScenarioError):
        parse_scenario(path)


def test_parse_random_requires_seed(tmp_path):
    path = _scenario(tmp_path, inputs={"random": 5})
    with pytest.raises(ScenarioError) as err:
        parse_scenario(path)
    assert "seed" in str(err.value)


def test_parse_bad_seed_type(tmp_path):
    path = _scenario(tmp_path, inputs={"random": 5, "seed": "letters"})
    with pytest.raises(ScenarioError) as err:
        parse_scenario(path)
    assert "seed" in str(err.value)


def test_parse_exhaustive_average_rejected(tmp_path):
    path = _scenario(tmp_path, function={"name": "average", "epsilon": 0.5})
    with pytest.raises(ScenarioError):
        parse_scenario(path)


def test_parse_constancy_symbol_out_of_range(tmp_path):
    path = _scenario(tmp_path,
                     function={"name": "constancy", "d": 2},
                     inputs={"explicit": [[1, 3, 1]]})
    with pytest.raises(ScenarioError) as err:
        parse_scenario(path)
    assert "symbol 3" in str(err.value)


def test_parse_k_mismatch(tmp_path):
    path = _scenario(tmp_path, structure={"k": 3, "sets": [[1, 2], [2, 3]]})
    with pytest.raises(ScenarioError) as err:
        parse_scenario(path)
    assert "does not match" in str(err.value)


def test_parse_generated_structure(tmp_path):
    path = _scenario(tmp_path, structure={"kind": "partition", "n": 6, "k": 3})
    assert parse_scenario(path).structure.sets == ((1, 2), (3, 4), (5, 6))
    seeded = _scenario(tmp_path, structure={
        "kind": "random_covering", "n": 6, "k": 3, "seed": 4})
    assert parse_scenario(seeded).structure == parse_scenario(seeded).structure
    missing_seed = _scenario(tmp_path, structure={
        "kind": "random_covering", "n": 6, "k": 3})
    with pytest.raises(ScenarioError):
        parse_scenario(missing_seed)


def test_structure_file_strictness(tmp_path):
    good = _write(tmp_path, "structure.json",
                  {"n": 3, "k": 2, "sets": [[1, 2], [2, 3]]})
    assert load_structure_file(good).sets == ((1, 2), (2, 3))
    wrong_k = _write(tmp_path, "wrong.json",
                     {"n": 3, "k": 3, "sets": [[1, 2], [2, 3]]})
    with pytest.raises(ScenarioError):
        load_structure_file(wrong_k)
    no_n = _write(tmp_path, "non.json", {"k": 1, "sets": [[1]]})
    with pytest.raises(ScenarioError):
        load_structure_file(no_n)


def test_scenario_protocols_rejects_uncomputable(tmp_path):
    path = _scenario(tmp_path,
                     function={"name": "average", "epsilon": 0.5},
                     blindness="double",
                     inputs={"random": 3, "seed": 9})
    with pytest.raises(ScenarioError) as err:
        scenario_protocols(parse_scenario(path))
    assert "average" in str(err.value)


def test_structure_digest_is_stable():
    from macroscope import AllotmentStructure
    a = structure_digest(AllotmentStructure(3, ((2, 1), (3,))))
    b = structure_digest(AllotmentStructure(3, ((1, 2), (3,))))
    assert a == b
    assert len(a) == 16
    assert a != structure_digest(AllotmentStructure(3, ((1, 2), (2, 3))))


# ----------------------------------------------------------------- running


def test_run_scenario_rows_and_order(tmp_path):
    path = _scenario(tmp_path,
                     function={"name": "constancy", "d": 2},
                     structure={"sets": [[1, 2], [2, 3], [4]]},
                     inputs={"exhaustive": True})
    rows, ok = run_scenario(parse_scenario(path))
    # 16 inputs, two compatible single-blind protocols
    assert len(rows) == 32
    assert ok
    assert [r.protocol for r in rows[:2]] == ["sb_constancy", "sb_generic"]
    assert all(r.cost_bits == r.bound_bits for r in rows)
    assert rows == sorted(rows, key=lambda r: (r.scenario_id, r.input_id, r.protocol))
    assert {r.r for r in rows} == {2}


def test_run_command_writes_csv(tmp_path, capsys):
    scenario = _scenario(tmp_path)
    out = str(tmp_path / "report.csv")
    assert cli.main(["run", "--scenario", scenario, "--out", out]) == 0
    lines = open(out).read().splitlines()
    assert lines[0] == ",".join(REPORT_FIELDS)
    assert len(lines) == 1 + 8  # exhaustive over n=3, one compatible protocol
    first = lines[1].split(",")
    assert first[REPORT_FIELDS.index("function")] == "parity"
    assert first[REPORT_FIELDS.index("correct")] == "true"
    assert first[REPORT_FIELDS.index("max_abs_error")] == ""


def test_run_command_writes_json(tmp_path):
    scenario = _scenario(tmp_path,
                         function={"name": "average", "epsilon": 0.1},
                         structure={"sets": [[1, 2], [2, 3]]},
                         inputs={"random": 4, "seed": 7})
    out = str(tmp_path / "report.json")
    assert cli.main(["run", "--scenario", scenario, "--out", out,
                     "--format", "json"]) == 0
    records = json.loads(open(out).read())
    assert len(records) == 4
    assert list(records[0]) == list(REPORT_FIELDS)
    assert all(rec["max_abs_error"] <= 0.1 for rec in records)
    assert all(rec["correct"] is True for rec in records)


def test_run_command_reports_are_deterministic(tmp_path):
    scenario = _scenario(tmp_path,
                         function={"name": "average", "epsilon": 0.25},
                         structure={"kind": "random_covering", "n": 6, "k": 3,
                                    "seed": 2},
                         inputs={"random": 20, "seed": 5})
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    assert cli.main(["run", "--scenario", scenario, "--out", a]) == 0
    assert cli.main(["run", "--scenario", scenario, "--out", b]) == 0
    assert open(a, "rb").read() == open(b, "rb").read()


def test_run_command_flags_cost_mismatch(tmp_path, capsys, monkeypatch):
    proto = protocol_by_name("sb_generic")
    monkeypatch.setitem(PROTOCOLS, "sb_generic",
                        dataclasses.replace(proto, bound=lambda spec: 99))
    scenario = _scenario(tmp_path)
    out = str(tmp_path / "report.csv")
    assert cli.main(["run", "--scenario", scenario, "--out", out]) == 1
    assert "failed" in capsys.readouterr().err


def test_run_command_bad_scenario_path(tmp_path, capsys):
    code = cli.main(["run", "--scenario", str(tmp_path / "absent.json"),
                     "--out", str(tmp_path / "x.csv")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_run_command_config_error_exit(tmp_path, capsys):
    scenario = _scenario(tmp_path, structure={"n": 3, "sets": [[1], [3]]})
    code = cli.main(["run", "--scenario", scenario,
                     "--out", str(tmp_path / "x.csv")])
    assert code == 2
    assert "index 2" in capsys.readouterr().err


# ------------------------------------------------------------------ bounds


def test_bounds_constancy(tmp_path, capsys):
    scenario = _scenario(tmp_path,
                         function={"name": "constancy", "d": 4},
                         structure={"sets": [[1, 2], [2, 3], [4]]},
                         inputs={"exhaustive": True})
    assert cli.main(["bounds", "--scenario", scenario]) == 0
    out = capsys.readouterr().out
    assert "r=2" in out
    assert "sb_constancy" in out and "= 7" in out
    assert "db_constancy" in out and "= 9" in out


def test_bounds_bsf(tmp_path, capsys):
    scenario = _scenario(tmp_path,
                         function={"name": "bsf"},
                         structure={"kind": "partition", "n": 8, "k": 2},
                         inputs={"exhaustive": True})
    assert cli.main(["bounds", "--scenario", scenario]) == 0
    out = capsys.readouterr().out
    assert "sb_bsf" in out and "= 10" in out
    assert "db_bsf" in out and "= 16" in out


def test_bounds_average(tmp_path, capsys):
    scenario = _scenario(tmp_path,
                         function={"name": "average", "epsilon": 0.5},
                         structure={"kind": "partition", "n": 8, "k": 4},
                         inputs={"random": 1, "seed": 0})
    assert cli.main(["bounds", "--scenario", scenario]) == 0
    assert "= 12" in capsys.readouterr().out


# ------------------------------------------------------------------ search


def test_search_command_finds_parity_floor(capsys):
    code = cli.main(["search", "--function", "parity", "--n", "2", "--k", "2",
                     "--structure", "partition", "--blindness", "sb",
                     "--budget", "2"])
    assert code == 0
    out = capsys.readouterr().out
    assert "min cost: 2" in out
    assert "witness:" in out
    assert "player 1:" in out


def test_search_command_reports_exhausted_budget(capsys):
    code = cli.main(["search", "--function", "parity", "--n", "2", "--k", "2",
                     "--structure", "partition", "--blindness", "sb",
                     "--budget", "1"])
    assert code == 0
    assert "min cost: none <= 1" in capsys.readouterr().out


def test_search_command_constancy_sandwich(tmp_path, capsys):
    structure = _write(tmp_path, "overlap.json",
                       {"n": 2, "k": 2, "sets": [[1, 2], [1, 2]]})
    code = cli.main(["search", "--function", "constancy", "--d", "2",
                     "--n", "2", "--k", "2", "--structure", structure,
                     "--blindness", "sb", "--budget", "4"])
    assert code == 0
    out = capsys.readouterr().out
    assert "min cost: 0" in out
    assert "sandwich" in out
    assert "preconditions absent" in out


def test_search_command_sandwich_holds_for_disjoint(capsys):
    code = cli.main(["search", "--function", "constancy", "--d", "2",
                     "--n", "2", "--k", "2", "--structure", "partition",
                     "--blindness", "db", "--budget", "4"])
    assert code == 0
    out = capsys.readouterr().out
    assert "min cost: 2" in out
    assert "sandwich" in out and "holds" in out


def test_search_command_structure_flag_mismatch(tmp_path, capsys):
    structure = _write(tmp_path, "s.json",
                       {"n": 3, "k": 2, "sets": [[1, 2], [2, 3]]})
    code = cli.main(["search", "--function", "parity", "--n", "4", "--k", "2",
                     "--structure", structure, "--blindness", "sb",
                     "--budget", "3"])
    assert code == 2
    assert "flags say" in capsys.readouterr().err


# ------------------------------------------------------------------ verify


def test_verify_command_clean(capsys):
    assert cli.main(["verify", "--protocol", "db_bsf", "--max-n", "3"]) == 0
    out = capsys.readouterr().out
    assert "db_bsf n=3 singletons: 8 inputs, ok" in out


def test_verify_command_constancy_d(capsys):
    assert cli.main(["verify", "--protocol", "db_constancy", "--max-n", "2",
                     "--d", "3"]) == 0
    assert "ok" in capsys.readouterr().out


def test_verify_command_rejects_average(capsys):
    assert cli.main(["verify", "--protocol", "sb_average", "--max-n", "2"]) == 2
    assert "error:" in capsys.readouterr().err


def test_verify_command_unknown_protocol(capsys):
    assert cli.main(["verify", "--protocol", "quantum", "--max-n", "2"]) == 2


def test_verify_command_detects_breakage(capsys, monkeypatch):
    proto = protocol_by_name("sb_bsf")
    monkeypatch.setitem(
        PROTOCOLS, "sb_bsf",
        dataclasses.replace(proto, decode=lambda board, view: 0))
    assert cli.main(["verify", "--protocol", "sb_bsf", "--max-n", "2"]) == 1
    captured = capsys.readouterr()
    assert "wrong outputs" in captured.out
    assert "failed" in captured.err
