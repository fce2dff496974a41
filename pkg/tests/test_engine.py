import pytest
from hypothesis import given, strategies as st

from macroscope import (
    AllotmentStructure,
    BinaryVector,
    Blackboard,
    Blindness,
    CompatibilityError,
    MacroscopeError,
    MacroscopeSpec,
    RealVector,
    TargetFunction,
    average_width,
    decode_uint,
    encode_uint,
    make_views,
    protocol_by_name,
    run_protocol,
    theoretical_bound,
)


def test_encode_uint():
    assert encode_uint(5, 3) == "101"
    assert encode_uint(5, 5) == "00101"
    assert encode_uint(0, 4) == "0000"
    assert encode_uint(0, 0) == ""
    with pytest.raises(MacroscopeError):
        encode_uint(4, 2)
    with pytest.raises(MacroscopeError):
        encode_uint(-1, 2)


def test_decode_uint():
    assert decode_uint("101") == 5
    assert decode_uint("") == 0
    with pytest.raises(MacroscopeError):
        decode_uint("21")


@given(st.integers(0, 32).flatmap(
    lambda w: st.tuples(st.just(w), st.integers(0, max(0, 2 ** w - 1)))))
def test_uint_round_trip(wv):
    w, v = wv
    bits = encode_uint(v, w)
    assert len(bits) == w
    assert decode_uint(bits) == v


def test_average_width_examples():
    assert average_width(2, 0.25) == 3
    assert average_width(4, 0.5) == 3
    assert average_width(8, 0.01) == 10
    assert average_width(1, 1.0) == 0
    assert average_width(2, 0.5) == 2
    assert average_width(8, 0.1) == 7


@given(st.integers(1, 64), st.floats(0.001, 1.0))
def test_average_width_is_minimal(k, epsilon):
    b = average_width(k, epsilon)
    assert 2 ** b >= k / epsilon
    if b > 0:
        assert 2 ** (b - 1) < k / epsilon


def _parity_spec(blindness=Blindness.SINGLE):
    return MacroscopeSpec(TargetFunction.parity(),
                          AllotmentStructure(3, ((1, 2), (2, 3))), blindness)


def test_make_views_single_blind():
    views = make_views(_parity_spec(), BinaryVector((1, 0, 1)))
    assert len(views) == 2
    v = views[0]
    assert v.player == 1
    assert v.own_indices == (1, 2)
    assert v.own_values == {1: 1, 2: 0}
    assert v.value(2) == 0
    assert v.own_sequence() == (1, 0)
    assert v.n == 3 and v.k == 2
    assert v.structure is not None
    assert views[1].structure is views[0].structure


def test_make_views_double_blind_hides_structure():
    views = make_views(_parity_spec(Blindness.DOUBLE), BinaryVector((1, 0, 1)))
    assert all(v.structure is None for v in views)
    assert views[1].own_values == {2: 0, 3: 1}
    assert views[1].n == 3 and views[1].k == 2


def test_blackboard_validation():
    b = Blackboard(((1, "10"), (2, "")))
    assert b.message(1) == "10"
    assert b.message(2) == ""
    assert b.total_bits == 2
    with pytest.raises(MacroscopeError):
        Blackboard(((2, "1"), (1, "0")))
    with pytest.raises(MacroscopeError):
        Blackboard(((1, "12"),))
    with pytest.raises(MacroscopeError):
        Blackboard(((1, "0"),)).message(5)


def test_run_protocol_parity_example():
    result = run_protocol(protocol_by_name("sb_generic"), _parity_spec(),
                          BinaryVector((1, 0, 1)))
    assert result.oracle_value == 0
    assert result.outputs == (0, 0)
    assert result.correct
    assert result.cost_bits == 3
    assert result.bound_bits == 3
    assert result.blackboard.message(1) == "10"
    assert result.blackboard.message(2) == "1"


def test_run_protocol_average_grading_is_within_epsilon():
    spec = MacroscopeSpec(TargetFunction.average(0.25),
                          AllotmentStructure(2, ((1,), (2,))), Blindness.SINGLE)
    result = run_protocol(protocol_by_name("sb_average"), spec,
                          RealVector((0.5, 0.25)))
    assert result.oracle_value == pytest.approx(0.375)
    assert result.correct
    assert result.cost_bits == result.bound_bits == 6
    for out in result.outputs:
        assert abs(out - 0.375) <= 0.25


def test_theoretical_bound_examples():
    # r=2 components, d=4, k=3: 2*2 + 3
    constancy = MacroscopeSpec(
        TargetFunction.constancy(4),
        AllotmentStructure(5, ((1, 2), (2, 3), (4, 5))), Blindness.SINGLE)
    assert theoretical_bound(protocol_by_name("sb_constancy"), constancy) == 7

    # d=3, k=2: 2*ceil(log2 4)
    db = MacroscopeSpec(TargetFunction.constancy(3),
                        AllotmentStructure(2, ((1,), (2,))), Blindness.DOUBLE)
    assert theoretical_bound(protocol_by_name("db_constancy"), db) == 4

    parity = _parity_spec()
    assert theoretical_bound(protocol_by_name("sb_generic"), parity) == 3
    assert theoretical_bound(
        protocol_by_name("db_generic"),
        _parity_spec(Blindness.DOUBLE)) == (3 + 2) + (3 + 2)


def test_compatibility_checks():
    with pytest.raises(CompatibilityError):
        run_protocol(protocol_by_name("sb_constancy"), _parity_spec(),
                     BinaryVector((1, 0, 1)))
    with pytest.raises(CompatibilityError):
        run_protocol(protocol_by_name("db_generic"), _parity_spec(),
                     BinaryVector((1, 0, 1)))
    with pytest.raises(CompatibilityError):
        theoretical_bound(protocol_by_name("sb_bsf"),
                          MacroscopeSpec(TargetFunction.average(0.5),
                                         AllotmentStructure(2, ((1,), (2,))),
                                         Blindness.SINGLE))


def test_run_validates_input_shape():
    with pytest.raises(MacroscopeError):
        run_protocol(protocol_by_name("sb_generic"), _parity_spec(),
                     BinaryVector((1, 0)))


def test_encoders_see_only_their_view():
    # identical views on different underlying inputs must produce identical
    # messages; player 2 of the chain cannot distinguish these two inputs
    spec = _parity_spec()
    a = make_views(spec, BinaryVector((0, 1, 1)))[1]
    b = make_views(spec, BinaryVector((1, 1, 1)))[1]
    proto = protocol_by_name("sb_generic")
    assert a.own_values == b.own_values
    assert proto.encode(a) == proto.encode(b)
