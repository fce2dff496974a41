"""Command-line front end: scenario files in, machine-readable reports out.

Exit codes: 0 all runs correct, 1 some run incorrect, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import itertools
import json
import os
import random
import sys
from dataclasses import dataclass
from typing import Optional, Union

from .engine import run_protocol
from .model import (
    AllotmentStructure,
    BinaryVector,
    Blindness,
    DaryVector,
    InputVector,
    MacroscopeError,
    MacroscopeSpec,
    RealVector,
    TargetFunction,
    generate_structure,
    intersection_graph,
    ceil_log2,
)
from .protocols import PROTOCOLS, Protocol, compatible_protocols, protocol_by_name
from .search import SearchSpace, exhaustive_verify, min_cost_search


class ScenarioError(MacroscopeError):
    """A scenario or structure file failed validation; message names the field."""


@dataclass(frozen=True)
class InputsSpec:
    mode: str  # explicit | exhaustive | random
    explicit: tuple[InputVector, ...] = ()
    count: int = 0
    seed: Optional[int] = None


@dataclass(frozen=True)
class Scenario:
    id: str
    function: TargetFunction
    blindness: Blindness
    structure: AllotmentStructure
    inputs: InputsSpec


REPORT_FIELDS = (
    "scenario_id", "function", "protocol", "n", "k", "d_or_epsilon", "blindness",
    "structure_hash", "r", "input_id", "cost_bits", "bound_bits", "correct",
    "max_abs_error",
)


@dataclass(frozen=True)
class ReportRow:
    scenario_id: str
    function: str
    protocol: str
    n: int
    k: int
    d_or_epsilon: Union[int, float, None]
    blindness: str
    structure_hash: str
    r: int
    input_id: int
    cost_bits: int
    bound_bits: int
    correct: bool
    max_abs_error: Optional[float]

    def to_record(self) -> dict:
        return {name: getattr(self, name) for name in REPORT_FIELDS}


def structure_digest(structure: AllotmentStructure) -> str:
    """Stable short digest of the sorted sets, for report rows."""
    canonical = json.dumps(
        {"n": structure.n, "k": structure.k, "sets": [list(s) for s in structure.sets]},
        separators=(",", ":"), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _expect(mapping: dict, key: str, path: str, required: bool = True):
    if key not in mapping:
        if required:
            raise ScenarioError(f"{path}: missing required field {key!r}")
        return None
    return mapping[key]


def _expect_int(value, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ScenarioError(f"{path}: expected an integer, got {value!r}")
    return value


def _parse_function(raw, path: str) -> TargetFunction:
    if not isinstance(raw, dict):
        raise ScenarioError(f"{path}: expected an object with a 'name'")
    name = _expect(raw, "name", path)
    try:
        if name == "parity":
            return TargetFunction.parity()
        if name == "bsf":
            return TargetFunction.bsf()
        if name == "constancy":
            return TargetFunction.constancy(_expect_int(_expect(raw, "d", path), f"{path}.d"))
        if name == "average":
            eps = _expect(raw, "epsilon", path)
            if not isinstance(eps, (int, float)) or isinstance(eps, bool):
                raise ScenarioError(f"{path}.epsilon: expected a number, got {eps!r}")
            return TargetFunction.average(float(eps))
    except MacroscopeError as err:
        if isinstance(err, ScenarioError):
            raise
        raise ScenarioError(f"{path}: {err}") from None
    raise ScenarioError(f"{path}.name: unknown function {name!r}")


def _parse_blindness(raw, path: str) -> Blindness:
    aliases = {"single": Blindness.SINGLE, "sb": Blindness.SINGLE,
               "double": Blindness.DOUBLE, "db": Blindness.DOUBLE}
    if not isinstance(raw, str) or raw not in aliases:
        raise ScenarioError(f"{path}: expected 'single' or 'double', got {raw!r}")
    return aliases[raw]


def _parse_structure(raw, path: str) -> AllotmentStructure:
    if not isinstance(raw, dict):
        raise ScenarioError(f"{path}: expected an object")
    try:
        if "kind" in raw:
            kind = raw["kind"]
            n = _expect_int(_expect(raw, "n", path), f"{path}.n")
            k = _expect_int(_expect(raw, "k", path), f"{path}.k")
            kwargs = {}
            if "m" in raw:
                kwargs["m"] = _expect_int(raw["m"], f"{path}.m")
            if "p" in raw:
                p = raw["p"]
                if not isinstance(p, (int, float)) or isinstance(p, bool):
                    raise ScenarioError(f"{path}.p: expected a number, got {p!r}")
                kwargs["p"] = float(p)
            if kind == "random_covering":
                kwargs["seed"] = _expect_int(_expect(raw, "seed", path), f"{path}.seed")
            if kind == "explicit":
                kwargs["sets"] = _expect(raw, "sets", path)
            return generate_structure(kind, n, k, **kwargs)
        sets = _expect(raw, "sets", path)
        if not isinstance(sets, list) or not all(isinstance(s, list) for s in sets):
            raise ScenarioError(f"{path}.sets: expected a list of lists")
        n = raw.get("n")
        if n is None:
            n = max((j for s in sets for j in s), default=0)
            if n == 0:
                raise ScenarioError(f"{path}.n: required when all sets are empty")
        else:
            n = _expect_int(n, f"{path}.n")
        if "k" in raw and _expect_int(raw["k"], f"{path}.k") != len(sets):
            raise ScenarioError(f"{path}.k: {raw['k']} does not match {len(sets)} sets")
        return AllotmentStructure(n, tuple(tuple(s) for s in sets))
    except ScenarioError:
        raise
    except MacroscopeError as err:
        raise ScenarioError(f"{path}: {err}") from None


def _parse_explicit_input(values, function: TargetFunction, n: int, path: str) -> InputVector:
    if not isinstance(values, list) or len(values) != n:
        raise ScenarioError(f"{path}: expected a list of {n} values")
    try:
        if function.kind in ("parity", "bsf"):
            return BinaryVector(tuple(values))
        if function.kind == "constancy":
            # files carry 1-based symbols 1..d; the alphabet is 0..d-1 inside
            shifted = []
            for v in values:
                v = _expect_int(v, path)
                if not 1 <= v <= function.d:
                    raise ScenarioError(f"{path}: symbol {v} outside 1..{function.d}")
                shifted.append(v - 1)
            return DaryVector(tuple(shifted), function.d)
        return RealVector(tuple(values))
    except ScenarioError:
        raise
    except (MacroscopeError, TypeError) as err:
        raise ScenarioError(f"{path}: {err}") from None


def _parse_inputs(raw, function: TargetFunction, n: int, path: str) -> InputsSpec:
    if not isinstance(raw, dict):
        raise ScenarioError(f"{path}: expected an object")
    modes = [key for key in ("explicit", "exhaustive", "random") if key in raw]
    if len(modes) != 1:
        raise ScenarioError(f"{path}: give exactly one of explicit, exhaustive, random")
    mode = modes[0]
    if mode == "explicit":
        entries = raw["explicit"]
        if not isinstance(entries, list) or not entries:
            raise ScenarioError(f"{path}.explicit: expected a non-empty list")
        vectors = tuple(_parse_explicit_input(v, function, n, f"{path}.explicit[{i}]")
                        for i, v in enumerate(entries))
        return InputsSpec("explicit", explicit=vectors)
    if mode == "exhaustive":
        if raw["exhaustive"] is not True:
            raise ScenarioError(f"{path}.exhaustive: expected true")
        if not function.boolean:
            raise ScenarioError(f"{path}.exhaustive: averaging has no finite input enumeration")
        return InputsSpec("exhaustive")
    count = _expect_int(raw["random"], f"{path}.random")
    if count < 1:
        raise ScenarioError(f"{path}.random: expected a count >= 1, got {count}")
    seed = raw.get("seed")
    if seed is None:
        raise ScenarioError(f"{path}.seed: required whenever inputs are random")
    return InputsSpec("random", count=count, seed=_expect_int(seed, f"{path}.seed"))


def parse_scenario(path: str) -> Scenario:
    """Load and validate one scenario file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as err:
        raise ScenarioError(f"{path}:{err.lineno}:{err.colno}: {err.msg}") from None
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: top level must be an object")
    scenario_id = _expect(data, "id", "scenario")
    if not isinstance(scenario_id, str) or not scenario_id:
        raise ScenarioError("id: expected a non-empty string")
    function = _parse_function(_expect(data, "function", "scenario"), "function")
    blindness = _parse_blindness(_expect(data, "blindness", "scenario"), "blindness")
    structure = _parse_structure(_expect(data, "structure", "scenario"), "structure")
    try:
        MacroscopeSpec(function, structure, blindness)
    except MacroscopeError as err:
        raise ScenarioError(f"structure: {err}") from None
    inputs = _parse_inputs(_expect(data, "inputs", "scenario"), function, structure.n, "inputs")
    return Scenario(scenario_id, function, blindness, structure, inputs)


def load_structure_file(path: str) -> AllotmentStructure:
    """Read a bare structure file: {"n": int, "k": int, "sets": [[...], ...]}."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as err:
        raise ScenarioError(f"{path}:{err.lineno}:{err.colno}: {err.msg}") from None
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: top level must be an object")
    n = _expect_int(_expect(data, "n", "structure"), "structure.n")
    k = _expect_int(_expect(data, "k", "structure"), "structure.k")
    sets = _expect(data, "sets", "structure")
    if not isinstance(sets, list) or len(sets) != k:
        raise ScenarioError(f"structure.sets: expected a list of {k} lists")
    try:
        return AllotmentStructure(n, tuple(tuple(s) for s in sets))
    except MacroscopeError as err:
        raise ScenarioError(f"structure: {err}") from None


def resolve_inputs(scenario: Scenario) -> list[InputVector]:
    """Materialize the scenario's input list, deterministically."""
    function = scenario.function
    n = scenario.structure.n
    spec = scenario.inputs
    if spec.mode == "explicit":
        return list(spec.explicit)
    if spec.mode == "exhaustive":
        from .search import enumeration_ceiling, CeilingExceeded

        alphabet = range(2) if function.kind != "constancy" else range(function.d)
        total = len(alphabet) ** n
        if total > enumeration_ceiling():
            raise CeilingExceeded(
                f"{total} inputs exceed the enumeration ceiling {enumeration_ceiling()}")
        if function.kind == "constancy":
            return [DaryVector(v, function.d) for v in itertools.product(alphabet, repeat=n)]
        return [BinaryVector(v) for v in itertools.product(alphabet, repeat=n)]
    rng = random.Random(spec.seed)
    out: list[InputVector] = []
    for _ in range(spec.count):
        if function.kind == "constancy":
            out.append(DaryVector(tuple(rng.randrange(function.d) for _ in range(n)), function.d))
        elif function.kind == "average":
            out.append(RealVector(tuple(rng.random() for _ in range(n))))
        else:
            out.append(BinaryVector(tuple(rng.randrange(2) for _ in range(n))))
    return out


def scenario_protocols(scenario: Scenario) -> tuple[Protocol, ...]:
    found = compatible_protocols(scenario.function.kind, scenario.blindness)
    if not found:
        raise ScenarioError(
            f"no protocol computes {scenario.function.kind} under "
            f"{scenario.blindness.value} blindness")
    return found


def run_scenario(scenario: Scenario) -> tuple[list[ReportRow], bool]:
    """Run every (protocol, input) pair the scenario implies."""
    spec = MacroscopeSpec(scenario.function, scenario.structure, scenario.blindness)
    inputs = resolve_inputs(scenario)
    digest = structure_digest(scenario.structure)
    r = intersection_graph(scenario.structure).component_count
    d_or_eps = scenario.function.d if scenario.function.kind == "constancy" else scenario.function.epsilon
    rows: list[ReportRow] = []
    all_ok = True
    for protocol in scenario_protocols(scenario):
        for input_id, x in enumerate(inputs):
            result = run_protocol(protocol, spec, x)
            max_err = None
            if not scenario.function.boolean:
                max_err = max(abs(out - result.oracle_value) for out in result.outputs)
            ok = result.correct and result.cost_bits == result.bound_bits
            all_ok = all_ok and ok
            rows.append(ReportRow(
                scenario_id=scenario.id,
                function=scenario.function.kind,
                protocol=protocol.name,
                n=scenario.structure.n,
                k=scenario.structure.k,
                d_or_epsilon=d_or_eps,
                blindness=scenario.blindness.value,
                structure_hash=digest,
                r=r,
                input_id=input_id,
                cost_bits=result.cost_bits,
                bound_bits=result.bound_bits,
                correct=result.correct,
                max_abs_error=max_err,
            ))
    rows.sort(key=lambda row: (row.scenario_id, row.input_id, row.protocol))
    return rows, all_ok


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report(rows: list[ReportRow], path: str, fmt: str) -> None:
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(REPORT_FIELDS)
            for row in rows:
                writer.writerow([_csv_cell(v) for v in (getattr(row, f) for f in REPORT_FIELDS)])
        return
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump([row.to_record() for row in rows], fh, indent=2)
            fh.write("\n")
        return
    raise ScenarioError(f"unknown report format {fmt!r}")


_FORMULAS = {
    "sb_generic": "n*symbol_width",
    "db_generic": "sum_i(n + symbol_width*|S_i|)",
    "sb_constancy": "r*ceil(log2 d) + k",
    "db_constancy": "k*ceil(log2(d+1))",
    "db_bsf": "2k*ceil(log2(n+2))",
    "sb_bsf": "k*(max(1, ceil(log2 n)) + 2)",
    "sb_average": "k*ceil(log2(k/epsilon))",
}


def _run_command(args) -> int:
    scenario = parse_scenario(args.scenario)
    rows, ok = run_scenario(scenario)
    write_report(rows, args.out, args.format)
    print(f"wrote {len(rows)} rows to {args.out}")
    if not ok:
        bad = sum(1 for row in rows if not (row.correct and row.cost_bits == row.bound_bits))
        print(f"{bad} of {len(rows)} rows failed", file=sys.stderr)
        return 1
    return 0


def _bounds_command(args) -> int:
    scenario = parse_scenario(args.scenario)
    structure = scenario.structure
    function = scenario.function
    r = intersection_graph(structure).component_count
    params = ""
    if function.kind == "constancy":
        params = f" d={function.d}"
    elif function.kind == "average":
        params = f" epsilon={function.epsilon}"
    print(f"scenario {scenario.id}: function={function.kind}{params} "
          f"n={structure.n} k={structure.k} r={r}")
    for protocol in PROTOCOLS.values():
        if function.kind not in protocol.function_kinds:
            continue
        spec = MacroscopeSpec(function, structure, protocol.blindness)
        bits = protocol.bound(spec)
        print(f"  {protocol.name:<13} {_FORMULAS[protocol.name]:<32} = {bits}")
    return 0


def _search_command(args) -> int:
    if args.function == "constancy":
        function = TargetFunction.constancy(args.d)
    elif args.function == "parity":
        function = TargetFunction.parity()
    else:
        function = TargetFunction.bsf()
    if args.structure in ("partition", "nof"):
        structure = generate_structure(args.structure, args.n, args.k)
    else:
        structure = load_structure_file(args.structure)
        if structure.n != args.n or structure.k != args.k:
            raise ScenarioError(
                f"structure file has n={structure.n}, k={structure.k}; "
                f"flags say n={args.n}, k={args.k}")
    blindness = Blindness.SINGLE if args.blindness == "sb" else Blindness.DOUBLE
    space = SearchSpace(function, structure, blindness, args.budget)
    result = min_cost_search(space)
    print(f"search function={args.function} n={args.n} k={args.k} "
          f"blindness={blindness.value} budget={args.budget}")
    print(f"explored {result.explored} candidates")
    if result.min_cost is None:
        print(f"min cost: none <= {args.budget}")
    else:
        print(f"min cost: {result.min_cost}")
        print("witness:")
        for player, table in enumerate(result.witness, start=1):
            cells = "; ".join(f"{assignment} -> {message!r}" for assignment, message in table)
            print(f"  player {player}: {cells}")
    if args.function == "constancy":
        r = intersection_graph(structure).component_count
        k = structure.k
        lo = max(k, r * ceil_log2(function.d))
        hi = r * ceil_log2(function.d) + k
        private = all(
            set(s) - set().union(*(set(t) for j, t in enumerate(structure.sets) if j != i))
            for i, s in enumerate(structure.sets)) if k > 1 else bool(structure.sets[0])
        if result.min_cost is None:
            verdict = "no protocol within budget"
        elif lo <= result.min_cost <= hi:
            verdict = "holds"
        elif not private or k < 2:
            verdict = "violated (lower-bound preconditions absent: a player has no private position)"
        else:
            verdict = "VIOLATED"
        print(f"sandwich: max(k, r*ceil(log2 d)) = {lo} <= min_cost <= "
              f"r*ceil(log2 d) + k = {hi}: {verdict}")
    return 0


def _verify_family(n: int) -> list[tuple[str, AllotmentStructure]]:
    family = [("singletons", generate_structure("partition", n, n))]
    if n >= 2:
        family.append(("partition_k2", generate_structure("partition", n, 2)))
        family.append(("chain", AllotmentStructure(n, tuple((i, i + 1) for i in range(1, n)))))
    everything = tuple(range(1, n + 1))
    family.append(("full_overlap_k2", AllotmentStructure(n, (everything, everything))))
    if n >= 3:
        family.append(("nof_k3", generate_structure("nof", n, 3)))
    return family


def _verify_command(args) -> int:
    protocol = protocol_by_name(args.protocol)
    if protocol.function_kinds == frozenset({"average"}):
        raise ScenarioError("averaging is continuous; check it with run over random inputs")
    if "constancy" in protocol.function_kinds and len(protocol.function_kinds) == 1:
        function = TargetFunction.constancy(args.d)
    elif protocol.function_kinds == frozenset({"bsf"}):
        function = TargetFunction.bsf()
    else:
        function = TargetFunction.parity()
    if args.max_n < 1:
        raise ScenarioError(f"--max-n must be >= 1, got {args.max_n}")
    failed = 0
    for n in range(1, args.max_n + 1):
        for label, structure in _verify_family(n):
            spec = MacroscopeSpec(function, structure, protocol.blindness)
            report = exhaustive_verify(protocol, spec)
            ok = report.passed
            failed += 0 if ok else 1
            status = "ok" if ok else (f"{len(report.output_failures)} wrong outputs, "
                                      f"{len(report.cost_failures)} cost mismatches")
            print(f"{protocol.name} n={n} {label}: {report.inputs_checked} inputs, {status}")
    if failed:
        print(f"{failed} structure(s) failed", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="macroscope",
        description="Simulate, verify, and cost one-shot broadcast protocols "
                    "over arbitrary input allotments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run every (protocol, input) pair of a scenario")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out", required=True, help="report file to write")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("verify", help="run a protocol exhaustively over a structure family")
    p.add_argument("--protocol", required=True)
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--d", type=int, default=2, help="alphabet size for constancy protocols")

    p = sub.add_parser("search", help="find the cheapest correct message tables")
    p.add_argument("--function", choices=("parity", "constancy", "bsf"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--structure", required=True,
                   help="structure JSON file, or a kind: partition|nof")
    p.add_argument("--blindness", choices=("sb", "db"), required=True)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--d", type=int, default=2, help="alphabet size for constancy")

    p = sub.add_parser("bounds", help="print formula costs for a scenario, without running")
    p.add_argument("--scenario", required=True)
    return parser


_COMMANDS = {
    "run": _run_command,
    "bounds": _bounds_command,
    "search": _search_command,
    "verify": _verify_command,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except MacroscopeError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
