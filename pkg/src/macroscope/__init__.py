"""Simulator, verifier, and cost analyzer for one-shot broadcast protocols
over arbitrary allotments of a shared input."""

from .model import (
    AllotmentStructure,
    BinaryVector,
    Blindness,
    CompatibilityError,
    CoveringError,
    DaryVector,
    InputVector,
    IntersectionGraph,
    MacroscopeError,
    MacroscopeSpec,
    ProtocolError,
    RealVector,
    TargetFunction,
    ceil_log2,
    component_leaders,
    eval_average,
    eval_bsf,
    eval_constancy,
    eval_parity,
    evenness,
    generate_structure,
    intersection_graph,
    multiplicity,
    responsibilities,
    responsible_player,
    uncovered_indices,
    validate_covering,
)
from .engine import (
    Blackboard,
    PlayerView,
    RunResult,
    average_width,
    decode_uint,
    encode_uint,
    make_views,
    run_protocol,
    theoretical_bound,
)
from .protocols import (
    PROTOCOLS,
    Protocol,
    compatible_protocols,
    protocol_by_name,
)
from .search import (
    CeilingExceeded,
    SearchResult,
    SearchSpace,
    VerifyReport,
    enumeration_ceiling,
    exhaustive_verify,
    min_cost_search,
    witness_protocol,
)

__version__ = "0.1.0"
