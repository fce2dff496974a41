"""Domain model: allotment structures, target functions, input vectors, and
direct oracle evaluation of everything the protocols are supposed to compute."""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence, Union


class MacroscopeError(Exception):
    """Invalid structure, function, input, or protocol configuration."""


class CoveringError(MacroscopeError):
    """An input position belongs to no allotment set."""

    def __init__(self, index: int) -> None:
        super().__init__(f"input index {index} is not covered by any allotment set")
        self.index = index


class CompatibilityError(MacroscopeError):
    """Protocol and macroscope disagree on function kind or blindness."""


class ProtocolError(MacroscopeError):
    """A decoder could not produce an output; signals a protocol bug."""


class Blindness(Enum):
    """What players know about the allotment beyond their own values."""

    SINGLE = "single"  # the full structure is common knowledge
    DOUBLE = "double"  # only the player's own index set, plus n and k


def ceil_log2(q: int) -> int:
    """Smallest w >= 0 with 2**w >= q, for an integer q >= 1."""
    if q < 1:
        raise MacroscopeError(f"ceil_log2 needs q >= 1, got {q}")
    return (q - 1).bit_length()


@dataclass(frozen=True)
class AllotmentStructure:
    """k index sets over input positions {1..n}.

    Player i observes exactly the positions in sets[i-1]. Sets may overlap and
    may be empty; positions are 1-based. Each set is stored deduplicated and
    sorted ascending, so structurally equal allotments compare equal.
    """

    n: int
    sets: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 1:
            raise MacroscopeError(f"n must be an integer >= 1, got {self.n!r}")
        if len(self.sets) < 1:
            raise MacroscopeError("an allotment needs at least one player")
        normalized = []
        for i, s in enumerate(self.sets, start=1):
            indices = sorted(set(s))
            for j in indices:
                if not isinstance(j, int) or isinstance(j, bool) or not 1 <= j <= self.n:
                    raise MacroscopeError(f"set {i}: position {j!r} outside 1..{self.n}")
            normalized.append(tuple(indices))
        object.__setattr__(self, "sets", tuple(normalized))

    @property
    def k(self) -> int:
        return len(self.sets)

    def player_set(self, player: int) -> tuple[int, ...]:
        if not 1 <= player <= self.k:
            raise MacroscopeError(f"player {player} outside 1..{self.k}")
        return self.sets[player - 1]


@dataclass(frozen=True)
class IntersectionGraph:
    """Players as vertices; an edge joins two players whose sets share a position."""

    vertices: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    components: tuple[tuple[int, ...], ...]

    @property
    def component_count(self) -> int:
        return len(self.components)


def uncovered_indices(structure: AllotmentStructure) -> tuple[int, ...]:
    covered = set()
    for s in structure.sets:
        covered.update(s)
    return tuple(j for j in range(1, structure.n + 1) if j not in covered)


def validate_covering(structure: AllotmentStructure) -> bool:
    """True iff every position 1..n appears in at least one set."""
    return not uncovered_indices(structure)


@lru_cache(maxsize=None)
def _multiplicities(structure: AllotmentStructure) -> tuple[int, ...]:
    # counts[j] = number of sets containing position j; counts[0] unused
    counts = [0] * (structure.n + 1)
    for s in structure.sets:
        for j in s:
            counts[j] += 1
    return tuple(counts)


def multiplicity(structure: AllotmentStructure, index: int) -> int:
    """Number of players that see position `index` (0 if uncovered)."""
    if not 1 <= index <= structure.n:
        raise MacroscopeError(f"position {index} outside 1..{structure.n}")
    return _multiplicities(structure)[index]


@lru_cache(maxsize=None)
def _responsibility(structure: AllotmentStructure) -> tuple[tuple[Optional[int], ...], tuple[tuple[int, ...], ...]]:
    # owner[j] = lowest-numbered player seeing position j, None if uncovered
    owner: list[Optional[int]] = [None] * (structure.n + 1)
    for i in range(structure.k, 0, -1):
        for j in structure.sets[i - 1]:
            owner[j] = i
    per_player: list[list[int]] = [[] for _ in range(structure.k)]
    for j in range(1, structure.n + 1):
        if owner[j] is not None:
            per_player[owner[j] - 1].append(j)
    return tuple(owner), tuple(tuple(lst) for lst in per_player)


def responsible_player(structure: AllotmentStructure, index: int) -> int:
    """Lowest-numbered player whose set contains the position."""
    if not 1 <= index <= structure.n:
        raise MacroscopeError(f"position {index} outside 1..{structure.n}")
    owner = _responsibility(structure)[0][index]
    if owner is None:
        raise CoveringError(index)
    return owner


def responsibilities(structure: AllotmentStructure, player: int) -> tuple[int, ...]:
    """Ascending positions the player is responsible for under the lowest-player rule."""
    if not 1 <= player <= structure.k:
        raise MacroscopeError(f"player {player} outside 1..{structure.k}")
    return _responsibility(structure)[1][player - 1]


def evenness(structure: AllotmentStructure) -> Optional[int]:
    """The uniform multiplicity C if every position is seen by exactly C players
    and all sets have equal size; None otherwise."""
    counts = _multiplicities(structure)[1:]
    first = counts[0]
    if any(c != first for c in counts) or first == 0:
        return None
    size = len(structure.sets[0])
    if any(len(s) != size for s in structure.sets):
        return None
    return first


@lru_cache(maxsize=None)
def intersection_graph(structure: AllotmentStructure) -> IntersectionGraph:
    """Graph on players 1..k with an edge wherever two sets intersect."""
    k = structure.k
    parent = list(range(k + 1))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    edges = set()
    as_sets = [set(s) for s in structure.sets]
    for i in range(1, k + 1):
        for j in range(i + 1, k + 1):
            if as_sets[i - 1] & as_sets[j - 1]:
                edges.add((i, j))
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(1, k + 1):
        groups.setdefault(find(i), []).append(i)
    components = tuple(sorted((tuple(sorted(g)) for g in groups.values()), key=lambda c: c[0]))
    return IntersectionGraph(tuple(range(1, k + 1)), frozenset(edges), components)


@lru_cache(maxsize=None)
def component_leaders(structure: AllotmentStructure) -> frozenset[int]:
    """The lowest-numbered player of each connected component."""
    return frozenset(c[0] for c in intersection_graph(structure).components)


def eval_parity(values: Sequence[int]) -> int:
    """1 iff the number of one bits is odd."""
    return sum(values) & 1


def eval_constancy(values: Sequence[int]) -> int:
    """1 iff all coordinates are equal."""
    return 1 if len(set(values)) <= 1 else 0


def eval_bsf(values: Sequence[int]) -> int:
    """1 iff the bits are a block of zeros followed by a block of ones.

    Either block may be empty, so constant vectors count as degenerate steps.
    """
    return 1 if all(values[i] <= values[i + 1] for i in range(len(values) - 1)) else 0


def eval_average(values: Sequence[float]) -> float:
    """Arithmetic mean of the coordinates."""
    import math

    return math.fsum(values) / len(values)


@dataclass(frozen=True)
class TargetFunction:
    """What the players jointly compute; fixes the input alphabet.

    kind is one of parity, constancy, bsf, average. Constancy carries the
    alphabet size d >= 2 (values 0..d-1); average carries the accuracy
    target 0 < epsilon <= 1.
    """

    kind: str
    d: Optional[int] = None
    epsilon: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind in ("parity", "bsf"):
            if self.d is not None or self.epsilon is not None:
                raise MacroscopeError(f"{self.kind} takes no parameters")
        elif self.kind == "constancy":
            if self.epsilon is not None:
                raise MacroscopeError("constancy takes no epsilon")
            if not isinstance(self.d, int) or isinstance(self.d, bool) or self.d < 2:
                raise MacroscopeError(f"constancy needs an integer alphabet size d >= 2, got {self.d!r}")
        elif self.kind == "average":
            if self.d is not None:
                raise MacroscopeError("average takes no d")
            if not isinstance(self.epsilon, (int, float)) or isinstance(self.epsilon, bool) \
                    or not 0 < float(self.epsilon) <= 1:
                raise MacroscopeError(f"average needs 0 < epsilon <= 1, got {self.epsilon!r}")
            object.__setattr__(self, "epsilon", float(self.epsilon))
        else:
            raise MacroscopeError(f"unknown function kind {self.kind!r}")

    @classmethod
    def parity(cls) -> "TargetFunction":
        return cls("parity")

    @classmethod
    def constancy(cls, d: int) -> "TargetFunction":
        return cls("constancy", d=d)

    @classmethod
    def bsf(cls) -> "TargetFunction":
        return cls("bsf")

    @classmethod
    def average(cls, epsilon: float) -> "TargetFunction":
        return cls("average", epsilon=epsilon)

    @property
    def boolean(self) -> bool:
        return self.kind != "average"

    @property
    def symbol_width(self) -> int:
        """Bits needed to write one input symbol verbatim."""
        if self.kind in ("parity", "bsf"):
            return 1
        if self.kind == "constancy":
            return ceil_log2(self.d)
        raise MacroscopeError("average inputs are reals, not fixed-width symbols")

    def evaluate(self, values: Sequence) -> Union[int, float]:
        if self.kind == "parity":
            return eval_parity(values)
        if self.kind == "constancy":
            return eval_constancy(values)
        if self.kind == "bsf":
            return eval_bsf(values)
        return eval_average(values)


@dataclass(frozen=True)
class BinaryVector:
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        for v in self.values:
            if v not in (0, 1) or isinstance(v, bool):
                raise MacroscopeError(f"binary vector entry {v!r} is not a bit")


@dataclass(frozen=True)
class DaryVector:
    values: tuple[int, ...]
    d: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if self.d < 2:
            raise MacroscopeError(f"alphabet size d must be >= 2, got {self.d}")
        for v in self.values:
            if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < self.d:
                raise MacroscopeError(f"entry {v!r} outside alphabet 0..{self.d - 1}")


@dataclass(frozen=True)
class RealVector:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        for v in self.values:
            if not 0.0 <= v <= 1.0:
                raise MacroscopeError(f"entry {v!r} outside [0, 1]")


InputVector = Union[BinaryVector, DaryVector, RealVector]


@dataclass(frozen=True)
class MacroscopeSpec:
    """A target function, an allotment of its input, and a blindness mode."""

    function: TargetFunction
    structure: AllotmentStructure
    blindness: Blindness

    def __post_init__(self) -> None:
        missing = uncovered_indices(self.structure)
        if missing:
            raise CoveringError(missing[0])
        if self.function.kind in ("constancy", "bsf"):
            for i, s in enumerate(self.structure.sets, start=1):
                if not s:
                    # these protocols need every player to see at least one value
                    raise MacroscopeError(
                        f"{self.function.kind} macroscope requires non-empty sets; set {i} is empty")

    def validate_input(self, x: InputVector) -> None:
        kind = self.function.kind
        if kind in ("parity", "bsf"):
            if not isinstance(x, BinaryVector):
                raise MacroscopeError(f"{kind} expects a BinaryVector, got {type(x).__name__}")
        elif kind == "constancy":
            if not isinstance(x, DaryVector):
                raise MacroscopeError(f"constancy expects a DaryVector, got {type(x).__name__}")
            if x.d != self.function.d:
                raise MacroscopeError(f"input alphabet d={x.d} does not match function d={self.function.d}")
        else:
            if not isinstance(x, RealVector):
                raise MacroscopeError(f"average expects a RealVector, got {type(x).__name__}")
        if len(x.values) != self.structure.n:
            raise MacroscopeError(
                f"input length {len(x.values)} does not match n={self.structure.n}")


def _blocks(n: int, k: int) -> list[tuple[int, ...]]:
    base, extra = divmod(n, k)
    blocks, start = [], 1
    for i in range(k):
        size = base + (1 if i < extra else 0)
        blocks.append(tuple(range(start, start + size)))
        start += size
    return blocks


def generate_structure(kind: str, n: int, k: int, *, m: Optional[int] = None,
                       p: float = 0.5, sets=None, seed: int = 0) -> AllotmentStructure:
    """Build an (n, k) allotment structure of the named kind.

    partition         k near-equal contiguous blocks
    nof               player i sees every block except its own (needs 2 <= k <= n)
    even_cyclic       k cyclic windows of size m at stride n // k (needs k | n);
                      even exactly when k*m is a multiple of n
    random_covering   independent inclusion with probability p, then every
                      uncovered position is handed to a seeded-random player
    explicit          the given sets, validated

    Deterministic for fixed (kind, n, k, params, seed).
    """
    if n < 1 or k < 1:
        raise MacroscopeError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    if kind == "partition":
        if k > n:
            raise MacroscopeError(f"partition needs k <= n, got k={k}, n={n}")
        return AllotmentStructure(n, tuple(_blocks(n, k)))
    if kind == "nof":
        if k < 2 or k > n:
            raise MacroscopeError(f"nof needs 2 <= k <= n, got k={k}, n={n}")
        everything = set(range(1, n + 1))
        return AllotmentStructure(n, tuple(tuple(sorted(everything - set(b))) for b in _blocks(n, k)))
    if kind == "even_cyclic":
        if m is None:
            raise MacroscopeError("even_cyclic needs a window size m")
        if n % k != 0:
            raise MacroscopeError(f"even_cyclic needs k to divide n, got k={k}, n={n}")
        if not 1 <= m <= n:
            raise MacroscopeError(f"window size m must be in 1..{n}, got {m}")
        stride = n // k
        return AllotmentStructure(
            n, tuple(tuple(sorted((i * stride + t) % n + 1 for t in range(m))) for i in range(k)))
    if kind == "random_covering":
        if not 0.0 <= p <= 1.0:
            raise MacroscopeError(f"inclusion probability p must be in [0, 1], got {p}")
        rng = random.Random(seed)
        raw = [{j for j in range(1, n + 1) if rng.random() < p} for _ in range(k)]
        covered = set().union(*raw)
        for j in range(1, n + 1):
            if j not in covered:
                raw[rng.randrange(k)].add(j)
        return AllotmentStructure(n, tuple(tuple(sorted(s)) for s in raw))
    if kind == "explicit":
        if sets is None:
            raise MacroscopeError("explicit needs sets")
        structure = AllotmentStructure(n, tuple(tuple(s) for s in sets))
        if structure.k != k:
            raise MacroscopeError(f"expected k={k} sets, got {structure.k}")
        return structure
    raise MacroscopeError(f"unknown structure kind {kind!r}")
