"""Brute force over discrete inputs: run a protocol on every input, or search
the space of all fixed-length message tables for the cheapest correct one.

Both enumerations are guarded by a ceiling on the number of evaluations
(default 2**20, overridable via the MACROSCOPE_CEILING environment variable)
so a typo in n or the budget fails fast instead of spinning.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Optional

from .engine import encode_uint, run_protocol
from .model import (
    AllotmentStructure,
    BinaryVector,
    Blindness,
    DaryVector,
    MacroscopeError,
    MacroscopeSpec,
    ProtocolError,
    TargetFunction,
)
from .protocols import Protocol

DEFAULT_CEILING = 1 << 20


class CeilingExceeded(MacroscopeError):
    """An enumeration would run past the configured evaluation ceiling."""


def enumeration_ceiling() -> int:
    raw = os.environ.get("MACROSCOPE_CEILING")
    if raw is None:
        return DEFAULT_CEILING
    try:
        value = int(raw)
    except ValueError:
        raise MacroscopeError(f"MACROSCOPE_CEILING must be an integer, got {raw!r}") from None
    if value < 1:
        raise MacroscopeError(f"MACROSCOPE_CEILING must be >= 1, got {value}")
    return value


def _alphabet(function: TargetFunction) -> tuple[int, ...]:
    if function.kind in ("parity", "bsf"):
        return (0, 1)
    if function.kind == "constancy":
        return tuple(range(function.d))
    raise MacroscopeError("averaging inputs are continuous; exhaustive enumeration is undefined")


def _wrap_input(function: TargetFunction, values: tuple[int, ...]):
    if function.kind == "constancy":
        return DaryVector(values, function.d)
    return BinaryVector(values)


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of running one protocol on every input of a spec."""

    protocol: str
    inputs_checked: int
    output_failures: tuple[tuple, ...]  # (input values, player, got, expected)
    cost_failures: tuple[tuple, ...]    # (input values, measured, bound)

    @property
    def passed(self) -> bool:
        return not self.output_failures and not self.cost_failures


def exhaustive_verify(protocol: Protocol, spec: MacroscopeSpec,
                      ceiling: Optional[int] = None) -> VerifyReport:
    """Run the protocol on every input over the instance's alphabet.

    Records every player output that disagrees with the oracle and every run
    whose measured cost differs from the protocol's formula.
    """
    alphabet = _alphabet(spec.function)
    n = spec.structure.n
    total = len(alphabet) ** n
    limit = enumeration_ceiling() if ceiling is None else ceiling
    if total > limit:
        raise CeilingExceeded(
            f"{total} inputs exceed the enumeration ceiling {limit}; shrink n or the alphabet")
    output_failures = []
    cost_failures = []
    for values in itertools.product(alphabet, repeat=n):
        result = run_protocol(protocol, spec, _wrap_input(spec.function, values))
        for player, got in enumerate(result.outputs, start=1):
            if got != result.oracle_value:
                output_failures.append((values, player, got, result.oracle_value))
        if result.cost_bits != result.bound_bits:
            cost_failures.append((values, result.cost_bits, result.bound_bits))
    return VerifyReport(protocol.name, total, tuple(output_failures), tuple(cost_failures))


@dataclass(frozen=True)
class SearchSpace:
    """All fixed-length message-table protocols within a total bit budget.

    A candidate assigns each player a message length b_i with sum <= budget
    and a table mapping each of the player's own-value assignments to a
    message of exactly b_i bits. With the structure fixed, a message can only
    depend on the player's own values in either blindness mode, so the mode is
    recorded for reporting but does not change the candidate space.
    """

    function: TargetFunction
    structure: AllotmentStructure
    blindness: Blindness
    budget: int

    def __post_init__(self) -> None:
        if not self.function.boolean:
            raise MacroscopeError("search is defined for discrete functions only")
        if self.budget < 0:
            raise MacroscopeError(f"budget must be >= 0, got {self.budget}")


@dataclass(frozen=True)
class SearchResult:
    """Cheapest correct candidate found, if any, within the budget.

    witness holds, per player, the (own-values assignment -> message) table
    of the first cheapest correct candidate in enumeration order.
    """

    min_cost: Optional[int]
    witness: Optional[tuple[tuple[tuple[tuple, str], ...], ...]]
    explored: int
    budget: int


def _length_vectors(k: int, budget: int) -> list[tuple[int, ...]]:
    vectors = [v for v in itertools.product(range(budget + 1), repeat=k) if sum(v) <= budget]
    vectors.sort(key=lambda v: (sum(v), v))
    return vectors


def _player_tables(width: int, slots: int) -> list[tuple[str, ...]]:
    # all ways to fill `slots` assignment slots with width-bit messages,
    # ordered like counting in base 2**width with the first slot most significant
    messages = [encode_uint(v, width) for v in range(1 << width)]
    tables = []
    for combo in itertools.product(messages, repeat=slots):
        tables.append(combo)
    return tables


def _solves(tables: tuple[tuple[str, ...], ...], input_count: int,
            f_values: tuple, assign_of_input: list[list[int]], k: int) -> bool:
    # correct iff every (board, own values) class a player can find itself in
    # has one function value
    seen: dict = {}
    for t in range(input_count):
        board = tuple(tables[i][assign_of_input[i][t]] for i in range(k))
        fv = f_values[t]
        for i in range(k):
            key = (i, board, assign_of_input[i][t])
            prev = seen.get(key)
            if prev is None:
                seen[key] = fv
            elif prev != fv:
                return False
    return True


def min_cost_search(space: SearchSpace, ceiling: Optional[int] = None) -> SearchResult:
    """Exhaustively search for the cheapest correct message-table protocol.

    Enumeration order is deterministic: length vectors sorted by
    (total, vector), then tables per player counted in message-value order
    with player 1 outermost. The first correct candidate found is returned;
    its total length is the minimum cost because totals are non-decreasing.
    """
    limit = enumeration_ceiling() if ceiling is None else ceiling
    alphabet = _alphabet(space.function)
    structure = space.structure
    n, k = structure.n, structure.k
    inputs = list(itertools.product(alphabet, repeat=n))
    if len(inputs) > limit:
        raise CeilingExceeded(
            f"{len(inputs)} inputs exceed the enumeration ceiling {limit}")
    f_values = tuple(space.function.evaluate(x) for x in inputs)

    own_spaces = []
    assign_of_input = []
    for i in range(k):
        positions = structure.sets[i]
        own_space = list(itertools.product(alphabet, repeat=len(positions)))
        index_of = {assignment: idx for idx, assignment in enumerate(own_space)}
        own_spaces.append(own_space)
        assign_of_input.append(
            [index_of[tuple(x[j - 1] for j in positions)] for x in inputs])

    explored = 0
    evaluations = 0
    for vector in _length_vectors(k, space.budget):
        candidates = 1
        for i, width in enumerate(vector):
            candidates *= (1 << width) ** len(own_spaces[i])
        evaluations += candidates * len(inputs)
        if evaluations > limit:
            raise CeilingExceeded(
                f"search would exceed the enumeration ceiling {limit} at message "
                f"lengths {vector}; lower the budget or raise MACROSCOPE_CEILING")
        per_player = [_player_tables(width, len(own_spaces[i]))
                      for i, width in enumerate(vector)]
        for combo in itertools.product(*per_player):
            explored += 1
            if _solves(combo, len(inputs), f_values, assign_of_input, k):
                witness = tuple(
                    tuple(zip(own_spaces[i], combo[i])) for i in range(k))
                return SearchResult(sum(vector), witness, explored, space.budget)
    return SearchResult(None, None, explored, space.budget)


def witness_protocol(space: SearchSpace, result: SearchResult) -> Protocol:
    """Wrap a search witness as a runnable protocol.

    The decoder answers with the function value of the (board, own values)
    class, which the search guaranteed to be unique.
    """
    if result.witness is None:
        raise MacroscopeError("no witness to wrap")
    tables = [dict(player_table) for player_table in result.witness]
    alphabet = _alphabet(space.function)
    structure = space.structure
    k = structure.k
    inputs = itertools.product(alphabet, repeat=structure.n)
    answer: dict = {}
    for x in inputs:
        board = tuple(tables[i][tuple(x[j - 1] for j in structure.sets[i])] for i in range(k))
        fv = space.function.evaluate(x)
        for i in range(k):
            answer[(i + 1, board, tuple(x[j - 1] for j in structure.sets[i]))] = fv

    def encode(view):
        return tables[view.player - 1][view.own_sequence()]

    def decode(board, view):
        key = (view.player, tuple(board.message(p) for p in range(1, view.k + 1)),
               view.own_sequence())
        try:
            return answer[key]
        except KeyError:
            raise ProtocolError("board/own-values class never seen during search") from None

    total = result.min_cost

    return Protocol(
        name=f"searched_{space.function.kind}",
        blindness=space.blindness,
        function_kinds=frozenset({space.function.kind}),
        encode=encode,
        decode=decode,
        bound=lambda spec: total,
    )
