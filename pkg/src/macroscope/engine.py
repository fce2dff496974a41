"""Single-round execution: player views, the shared board, and bit accounting.

Every player writes one bitstring simultaneously; afterwards every player must
produce the function value from the board plus its own values. Cost is the
total number of bits written. Board entries are kept separate per player, so
message lengths are never charged to the protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

from .model import (
    AllotmentStructure,
    Blindness,
    CompatibilityError,
    InputVector,
    MacroscopeError,
    MacroscopeSpec,
    ProtocolError,
    TargetFunction,
)

Output = Union[int, float]


def encode_uint(value: int, width: int) -> str:
    """Big-endian fixed-width bitstring for value < 2**width; width 0 encodes 0 as ''."""
    if width < 0:
        raise MacroscopeError(f"width must be >= 0, got {width}")
    if not 0 <= value < (1 << width) and not (width == 0 and value == 0):
        raise MacroscopeError(f"value {value} does not fit in {width} bits")
    if width == 0:
        return ""
    return format(value, f"0{width}b")


def decode_uint(bits: str) -> int:
    """Exact inverse of encode_uint for the string's own width."""
    if bits.strip("01"):
        raise MacroscopeError(f"not a bitstring: {bits!r}")
    return int(bits, 2) if bits else 0


def average_width(k: int, epsilon: float) -> int:
    """Smallest b >= 0 with 2**b >= k / epsilon."""
    target = k / epsilon
    b = max(0, math.ceil(math.log2(target))) if target > 1 else 0
    while (1 << b) < target:
        b += 1
    while b > 0 and (1 << (b - 1)) >= target:
        b -= 1
    return b


@dataclass(frozen=True)
class PlayerView:
    """Everything one player is allowed to see before writing its message.

    structure is the full allotment under single blindness and None under
    double blindness. The target function and the global sizes n and k are
    common knowledge in both modes; they carry no information about how the
    input is split among the other players.
    """

    player: int
    own_indices: tuple[int, ...]
    own_values: dict
    n: int
    k: int
    function: TargetFunction
    blindness: Blindness
    structure: Optional[AllotmentStructure]

    def value(self, index: int):
        return self.own_values[index]

    def own_sequence(self) -> tuple:
        """Own values in ascending position order."""
        return tuple(self.own_values[j] for j in self.own_indices)


@dataclass(frozen=True)
class Blackboard:
    """One bitstring per player, ordered by player number."""

    entries: tuple[tuple[int, str], ...]

    def __post_init__(self) -> None:
        for slot, (player, msg) in enumerate(self.entries, start=1):
            if player != slot:
                raise MacroscopeError("board entries must be exactly players 1..k in order")
            if msg.strip("01"):
                raise ProtocolError(f"player {player} wrote a non-bitstring: {msg!r}")

    def message(self, player: int) -> str:
        if not 1 <= player <= len(self.entries):
            raise MacroscopeError(f"no board entry for player {player}")
        return self.entries[player - 1][1]

    @property
    def total_bits(self) -> int:
        return sum(len(msg) for _, msg in self.entries)


@dataclass(frozen=True)
class RunResult:
    """Outcome of one protocol run on one input."""

    blackboard: Blackboard
    outputs: tuple[Output, ...]
    cost_bits: int
    bound_bits: int
    oracle_value: Output
    correct: bool


def make_views(spec: MacroscopeSpec, x: InputVector) -> tuple[PlayerView, ...]:
    """Split an input among the players, honoring the blindness mode."""
    spec.validate_input(x)
    structure = spec.structure
    shared = structure if spec.blindness is Blindness.SINGLE else None
    views = []
    for i in range(1, structure.k + 1):
        own = structure.sets[i - 1]
        views.append(PlayerView(
            player=i,
            own_indices=own,
            own_values={j: x.values[j - 1] for j in own},
            n=structure.n,
            k=structure.k,
            function=spec.function,
            blindness=spec.blindness,
            structure=shared,
        ))
    return tuple(views)


def check_compatible(protocol, spec: MacroscopeSpec) -> None:
    if spec.function.kind not in protocol.function_kinds:
        raise CompatibilityError(
            f"{protocol.name} computes {sorted(protocol.function_kinds)}, not {spec.function.kind}")
    if protocol.blindness is not spec.blindness:
        raise CompatibilityError(
            f"{protocol.name} requires {protocol.blindness.value} blindness, "
            f"spec is {spec.blindness.value}")


def theoretical_bound(protocol, spec: MacroscopeSpec) -> int:
    """The protocol's exact formula cost on this spec."""
    check_compatible(protocol, spec)
    return protocol.bound(spec)


def run_protocol(protocol, spec: MacroscopeSpec, x: InputVector) -> RunResult:
    """Execute one simultaneous round and grade every player's output.

    Boolean functions must be answered exactly; averaging is correct when
    every player's real output is within epsilon of the true mean.
    """
    check_compatible(protocol, spec)
    views = make_views(spec, x)
    entries = []
    for view in views:
        msg = protocol.encode(view)
        if not isinstance(msg, str):
            raise ProtocolError(f"{protocol.name}: encoder returned {type(msg).__name__}, not str")
        entries.append((view.player, msg))
    board = Blackboard(tuple(entries))
    outputs = tuple(protocol.decode(board, view) for view in views)
    oracle = spec.function.evaluate(x.values)
    if spec.function.boolean:
        correct = all(out == oracle for out in outputs)
    else:
        correct = all(abs(out - oracle) <= spec.function.epsilon for out in outputs)
    return RunResult(
        blackboard=board,
        outputs=outputs,
        cost_bits=board.total_bits,
        bound_bits=protocol.bound(spec),
        oracle_value=oracle,
        correct=correct,
    )
