import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcp.core import (Broadcast, BroadcastProtocol, Configuration, RendezVous, classify_consensus,
                      enabled_steps, initial_configuration, is_terminal, replay, total_transfer,
                      validate)
from bcp.errors import EmptyConfiguration, ParseError, PopulationTooSmall
from bcp.textfmt import parse_protocol, serialize_protocol


def test_configuration_is_a_multiset():
    C = Configuration({"a": 2, "b": 0})
    assert C == Configuration(["a", "a"])
    assert C.size == 2
    assert C.support == frozenset({"a"})
    assert Configuration({"a": 1, "b": 1}) - {"a": 5} == Configuration({"b": 1})
    assert Configuration({"a": 1}) <= C
    assert hash(C) == hash(Configuration(["a", "a"]))
    with pytest.raises(ValueError):
        Configuration({"a": -1})


def test_configuration_text_round_trip():
    C = Configuration({"x": 3, "(q,0)": 1})
    assert Configuration.from_text(C.to_text()) == C
    with pytest.raises(ValueError):
        Configuration.from_text("x:1 x:2")


def test_power2_shape(power2):
    assert len(power2.states) == 6
    assert len(power2.rendezvous) == 1
    assert len(power2.broadcasts) == 5
    assert validate(power2) == []


def test_enabled_steps_in_transition_order(power2):
    C = initial_configuration(power2, (2,))
    steps = enabled_steps(power2, C)
    assert [tid for tid, _ in steps] == ["s", "t0", "t1"]
    assert dict(steps)["s"] == Configuration({"xbar": 1, "0": 1})
    assert dict(steps)["t0"] == Configuration({"0": 1, "bot": 1})
    assert dict(steps)["t1"] == Configuration({"1": 1, "bot": 1})


def test_population_too_small(power2):
    with pytest.raises(PopulationTooSmall):
        initial_configuration(power2, (1,))


def test_consensus_and_terminal(power2, majority):
    assert classify_consensus(power2, Configuration({"1": 2})) == 1
    assert classify_consensus(power2, Configuration({"1": 1, "x": 1})) is None
    with pytest.raises(EmptyConfiguration):
        classify_consensus(power2, Configuration())
    assert is_terminal(majority, Configuration({"b": 3}))
    assert not is_terminal(majority, Configuration({"A": 1, "B": 1}))


def test_replay(power2):
    C0 = initial_configuration(power2, (2,))
    path = [("s", Configuration({"xbar": 1, "0": 1})), ("sbar", Configuration({"x": 1, "1": 1}))]
    assert replay(power2, C0, path)
    assert not replay(power2, C0, path[1:])


def test_validate_reports_problems():
    P = BroadcastProtocol(states=("a", "b"), rendezvous=(RendezVous(("a", "c"), ("a", "a")),),
                          broadcasts=(Broadcast("a", "b", {"a": "a"}),), alphabet=("x",), leaders={},
                          input_map={"x": "a"}, output_map={"a": 0})
    problems = validate(P)
    assert any("unknown state c" in p for p in problems)
    assert any("not total" in p for p in problems)
    assert any("state b has no output" in p for p in problems)


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_protocol("protocol p\nstates: a\nrv: a b -> a a\n")
    with pytest.raises(ParseError):
        parse_protocol("protocol p\nbogus line\n")


def test_generated_names_parse():
    text = ("protocol p\nstates: (x1,x1,0) {a|p1.(q0,0)} q#inc#0\nalphabet: x\ninput: x -> (x1,x1,0)\n"
            "output1: q#inc#0\nrv: (x1,x1,0) {a|p1.(q0,0)} -> q#inc#0 q#inc#0  # comment\n")
    P = parse_protocol(text)
    assert P.states == ("(x1,x1,0)", "{a|p1.(q0,0)}", "q#inc#0")
    assert P.rendezvous[0].post == ("q#inc#0", "q#inc#0")


def test_round_trip_corpus(power2, majority):
    for P in (power2, majority):
        Q = parse_protocol(serialize_protocol(P))
        assert Q == P
        assert Q.transition_ids == P.transition_ids


names = st.sampled_from(["a", "b", "c"])


@st.composite
def protocols(draw):
    states = ("b", "c", "a")  # index order differs from name order
    rv = draw(st.lists(st.tuples(names, names, names, names), max_size=4))
    bc = draw(st.lists(st.tuples(names, names, st.tuples(names, names, names)), max_size=3))
    return BroadcastProtocol(
        states=states,
        rendezvous=tuple(RendezVous((p, q), (r, s)) for p, q, r, s in rv),
        broadcasts=tuple(Broadcast(p, q, dict(zip(states, f))) for p, q, f in bc),
        alphabet=("x", "y"), leaders=draw(st.dictionaries(names, st.integers(0, 1))),
        input_map={"x": "a", "y": "b"},
        output_map={"a": 0, "b": 1, "c": draw(st.integers(0, 1))})


@settings(max_examples=60, deadline=None)
@given(protocols(), st.integers(0, 3), st.integers(0, 3))
def test_steps_conserve_population(P, x, y):
    try:
        C = initial_configuration(P, (x, y))
    except PopulationTooSmall:
        return
    for _, D in enabled_steps(P, C):
        assert D.size == C.size


@settings(max_examples=60, deadline=None)
@given(protocols())
def test_serialization_round_trip(P):
    assert parse_protocol(serialize_protocol(P)) == P


def test_total_transfer():
    assert total_transfer(("a", "b"), {"a": "b"}) == {"a": "b", "b": "b"}
