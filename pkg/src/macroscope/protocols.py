"""The seven constructive broadcast protocols.

Each protocol is a per-player encoder (sees exactly one PlayerView) plus a
per-player decoder (sees the full board and that player's view) plus the exact
formula for its total cost. Message layouts are wire contracts: the recorded
costs only mean something if these layouts stay fixed.

Naming: an sb_ prefix means the protocol needs the full structure to be common
knowledge (single-blind); db_ protocols work when every player knows only its
own positions (double-blind).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

from .engine import (
    Blackboard,
    PlayerView,
    average_width,
    decode_uint,
    encode_uint,
)
from .model import (
    Blindness,
    MacroscopeError,
    MacroscopeSpec,
    ProtocolError,
    ceil_log2,
    component_leaders,
    eval_bsf,
    intersection_graph,
    multiplicity,
    responsibilities,
)

Output = Union[int, float]


@dataclass(frozen=True)
class Protocol:
    """A named protocol: blindness requirement, accepted functions, codec, cost."""

    name: str
    blindness: Blindness
    function_kinds: frozenset[str]
    encode: Callable[[PlayerView], str]
    decode: Callable[[Blackboard, PlayerView], Output]
    bound: Callable[[MacroscopeSpec], int]


# --- generic single-blind: lowest-numbered owner publishes each position ----
#
# Every position has exactly one responsible player (the lowest-numbered one
# that sees it), so the whole input appears on the board exactly once and any
# target function with an evaluator can be applied to the reconstruction.
# Costs n bits on binary inputs, n * ceil(log2 d) on d-ary ones.

def _sb_generic_encode(view: PlayerView) -> str:
    width = view.function.symbol_width
    owned = responsibilities(view.structure, view.player)
    return "".join(encode_uint(view.own_values[j], width) for j in owned)


def _sb_generic_decode(board: Blackboard, view: PlayerView) -> Output:
    width = view.function.symbol_width
    x: list = [None] * view.n
    for p in range(1, view.k + 1):
        msg = board.message(p)
        for slot, j in enumerate(responsibilities(view.structure, p)):
            x[j - 1] = decode_uint(msg[slot * width:(slot + 1) * width])
    if any(v is None for v in x):
        raise ProtocolError("reconstruction left a position unset")
    return view.function.evaluate(tuple(x))


def _sb_generic_bound(spec: MacroscopeSpec) -> int:
    return spec.structure.n * spec.function.symbol_width


# --- generic double-blind: everyone publishes a membership mask plus values --
#
# Without shared structure knowledge a player cannot tell which positions the
# others will publish, so each player prefixes its values with the n-bit
# characteristic vector of its own set. Costs sum_i (n + width * |S_i|),
# at most 2nk on binary inputs.

def _db_generic_encode(view: PlayerView) -> str:
    width = view.function.symbol_width
    own = set(view.own_indices)
    mask = "".join("1" if j in own else "0" for j in range(1, view.n + 1))
    return mask + "".join(encode_uint(view.own_values[j], width) for j in view.own_indices)


def _db_generic_decode(board: Blackboard, view: PlayerView) -> Output:
    width = view.function.symbol_width
    n = view.n
    x: list = [None] * n
    for p in range(1, view.k + 1):
        msg = board.message(p)
        pos = n
        for j0 in range(n):
            if msg[j0] == "1":
                x[j0] = decode_uint(msg[pos:pos + width])
                pos += width
    if any(v is None for v in x):
        raise ProtocolError("reports do not cover every position")
    return view.function.evaluate(tuple(x))


def _db_generic_bound(spec: MacroscopeSpec) -> int:
    width = spec.function.symbol_width
    n = spec.structure.n
    return sum(n + width * len(s) for s in spec.structure.sets)


# --- constancy, single-blind: one flag each, one sample value per component --
#
# Every player reports whether its own portion is constant. Portions of players
# in one connected component of the intersection graph chain together, so a
# single sample value per component decides global constancy. The sample is
# sent by the component's lowest-numbered player (its value at its smallest
# position). Costs r * ceil(log2 d) + k.

def _sb_constancy_encode(view: PlayerView) -> str:
    vals = view.own_sequence()
    flag = "1" if len(set(vals)) <= 1 else "0"
    if view.player in component_leaders(view.structure):
        return flag + encode_uint(view.own_values[view.own_indices[0]], ceil_log2(view.function.d))
    return flag


def _sb_constancy_decode(board: Blackboard, view: PlayerView) -> int:
    width = ceil_log2(view.function.d)
    leaders = component_leaders(view.structure)
    samples = []
    for p in range(1, view.k + 1):
        msg = board.message(p)
        if msg[0] == "0":
            return 0
        if p in leaders:
            samples.append(decode_uint(msg[1:1 + width]))
    return 1 if len(set(samples)) <= 1 else 0


def _sb_constancy_bound(spec: MacroscopeSpec) -> int:
    r = intersection_graph(spec.structure).component_count
    return r * ceil_log2(spec.function.d) + spec.structure.k


# --- constancy, double-blind: value-or-nonconstant code from every player ----
#
# Each player sends one symbol from an alphabet of d + 1 codes: its portion's
# constant value, or the extra code d meaning "not constant". The structure
# covers every position, so all portions constant with one common value is
# exactly global constancy. Costs k * ceil(log2 (d + 1)).

def _db_constancy_encode(view: PlayerView) -> str:
    width = ceil_log2(view.function.d + 1)
    vals = view.own_sequence()
    code = vals[0] if len(set(vals)) <= 1 else view.function.d
    return encode_uint(code, width)


def _db_constancy_decode(board: Blackboard, view: PlayerView) -> int:
    width = ceil_log2(view.function.d + 1)
    codes = {decode_uint(board.message(p)[:width]) for p in range(1, view.k + 1)}
    return 1 if len(codes) == 1 and codes.pop() < view.function.d else 0


def _db_constancy_bound(spec: MacroscopeSpec) -> int:
    return spec.structure.k * ceil_log2(spec.function.d + 1)


# --- step function, double-blind: highest zero and lowest one ---------------
#
# Each player publishes the largest of its positions holding 0 (0 if none) and
# the smallest holding 1 (n + 1 if none). The input is a step exactly when the
# global maximum of the first equals the global minimum of the second minus
# one. Sentinels extend the range to 0..n+1, so each number costs
# ceil(log2 (n + 2)) bits rather than ceil(log2 n): total 2k * ceil(log2 (n + 2)).

def _db_bsf_width(n: int) -> int:
    return ceil_log2(n + 2)


def _db_bsf_encode(view: PlayerView) -> str:
    width = _db_bsf_width(view.n)
    zeros = [j for j in view.own_indices if view.own_values[j] == 0]
    ones = [j for j in view.own_indices if view.own_values[j] == 1]
    last_zero = max(zeros) if zeros else 0
    first_one = min(ones) if ones else view.n + 1
    return encode_uint(last_zero, width) + encode_uint(first_one, width)


def _db_bsf_decode(board: Blackboard, view: PlayerView) -> int:
    width = _db_bsf_width(view.n)
    last_zero = 0
    first_one = view.n + 1
    for p in range(1, view.k + 1):
        msg = board.message(p)
        last_zero = max(last_zero, decode_uint(msg[:width]))
        first_one = min(first_one, decode_uint(msg[width:2 * width]))
    return 1 if last_zero == first_one - 1 else 0


def _db_bsf_bound(spec: MacroscopeSpec) -> int:
    return 2 * spec.structure.k * _db_bsf_width(spec.structure.n)


# --- step function, single-blind: case tag plus one position -----------------
#
# A restriction of a step to any set of positions is constant or has a single
# 0 -> 1 switch in position order. Each player sends a 2-bit case tag
# (constant / single switch / anything else) and a payload of
# max(1, ceil(log2 n)) bits: the constant, or the largest own position holding
# 0 written 0-based, or padding. Any "anything else" tag refutes a step;
# otherwise the tags and payloads pin down the whole input. Costs
# k * (ceil(log2 n) + 2); the payload widens to 1 bit when n = 1 because it
# still has to name one of two constants.

_CASE_CONSTANT = 0
_CASE_STEP = 1
_CASE_MIXED = 2


def _step_payload_width(n: int) -> int:
    return max(1, ceil_log2(n))


def _sb_bsf_encode(view: PlayerView) -> str:
    width = _step_payload_width(view.n)
    vals = view.own_sequence()
    if len(set(vals)) <= 1:
        return encode_uint(_CASE_CONSTANT, 2) + encode_uint(vals[0], width)
    if eval_bsf(vals):
        last_zero = max(j for j in view.own_indices if view.own_values[j] == 0)
        return encode_uint(_CASE_STEP, 2) + encode_uint(last_zero - 1, width)
    return encode_uint(_CASE_MIXED, 2) + "0" * width


def _sb_bsf_decode(board: Blackboard, view: PlayerView) -> int:
    width = _step_payload_width(view.n)
    x: list = [None] * view.n
    for p in range(1, view.k + 1):
        msg = board.message(p)
        case = decode_uint(msg[:2])
        payload = decode_uint(msg[2:2 + width])
        if case == _CASE_MIXED:
            return 0
        for j in view.structure.sets[p - 1]:
            if case == _CASE_CONSTANT:
                x[j - 1] = payload
            else:
                x[j - 1] = 0 if j <= payload + 1 else 1
    if any(v is None for v in x):
        raise ProtocolError("reconstruction left a position unset")
    return eval_bsf(x)


def _sb_bsf_bound(spec: MacroscopeSpec) -> int:
    return spec.structure.k * (_step_payload_width(spec.structure.n) + 2)


# --- averaging, single-blind: quantized weighted contributions ---------------
#
# Position j is seen by multiplicity(j) players, so weighting each value by
# 1 / multiplicity makes the per-player contributions sum exactly to the mean.
# Each contribution lies in [0, 1] and is sent as a b-bit grid cell with
# b = ceil(log2 (k / epsilon)); decoding reads back cell midpoints, putting
# every player's answer within k * 2^-(b+1) <= epsilon / 2 of the mean.
# Costs k * b.

def _quantizer_width(view: PlayerView) -> int:
    return average_width(view.k, view.function.epsilon)


def _contribution(view: PlayerView) -> float:
    total = 0.0
    for j in view.own_indices:
        total += view.own_values[j] / multiplicity(view.structure, j)
    return total / view.n


def _sb_average_encode(view: PlayerView) -> str:
    b = _quantizer_width(view)
    cell = min(math.floor(_contribution(view) * (1 << b)), (1 << b) - 1)
    return encode_uint(cell, b)


def _sb_average_decode(board: Blackboard, view: PlayerView) -> float:
    b = _quantizer_width(view)
    scale = 1 << b
    return sum((decode_uint(board.message(p)) + 0.5) / scale for p in range(1, view.k + 1))


def _sb_average_bound(spec: MacroscopeSpec) -> int:
    return spec.structure.k * average_width(spec.structure.k, spec.function.epsilon)


_BOOLEAN_KINDS = frozenset({"parity", "constancy", "bsf"})

SB_GENERIC = Protocol("sb_generic", Blindness.SINGLE, _BOOLEAN_KINDS,
                      _sb_generic_encode, _sb_generic_decode, _sb_generic_bound)
DB_GENERIC = Protocol("db_generic", Blindness.DOUBLE, _BOOLEAN_KINDS,
                      _db_generic_encode, _db_generic_decode, _db_generic_bound)
SB_CONSTANCY = Protocol("sb_constancy", Blindness.SINGLE, frozenset({"constancy"}),
                        _sb_constancy_encode, _sb_constancy_decode, _sb_constancy_bound)
DB_CONSTANCY = Protocol("db_constancy", Blindness.DOUBLE, frozenset({"constancy"}),
                        _db_constancy_encode, _db_constancy_decode, _db_constancy_bound)
DB_BSF = Protocol("db_bsf", Blindness.DOUBLE, frozenset({"bsf"}),
                  _db_bsf_encode, _db_bsf_decode, _db_bsf_bound)
SB_BSF = Protocol("sb_bsf", Blindness.SINGLE, frozenset({"bsf"}),
                  _sb_bsf_encode, _sb_bsf_decode, _sb_bsf_bound)
SB_AVERAGE = Protocol("sb_average", Blindness.SINGLE, frozenset({"average"}),
                      _sb_average_encode, _sb_average_decode, _sb_average_bound)

PROTOCOLS: dict[str, Protocol] = {p.name: p for p in (
    SB_GENERIC, DB_GENERIC, SB_CONSTANCY, DB_CONSTANCY, DB_BSF, SB_BSF, SB_AVERAGE)}


def protocol_by_name(name: str) -> Protocol:
    try:
        return PROTOCOLS[name]
    except KeyError:
        raise MacroscopeError(
            f"unknown protocol {name!r}; known: {', '.join(PROTOCOLS)}") from None


def compatible_protocols(function_kind: str, blindness: Blindness) -> tuple[Protocol, ...]:
    """All registered protocols that can run a spec with this function and blindness."""
    return tuple(p for p in PROTOCOLS.values()
                 if function_kind in p.function_kinds and p.blindness is blindness)
