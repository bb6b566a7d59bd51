import pytest

from bcp import corpus
from bcp.bounding import tighten, weaken
from bcp.cm import parse_machine
from bcp.compiler import (check_correspondence, cm_to_protocol, compiled_origin, compose_origin,
                          compose_silent, leader_count_violations, origin_violations, pipeline,
                          state_map)
from bcp.core import initial_configuration, validate
from bcp.errors import AlphabetMismatch, NotNBounded
from bcp.oracles import builtin, inputs_up_to
from bcp.verify import build_graph, verify_inputs

geq = builtin("geq")
SMALL = inputs_up_to(2, 4, min_sum=1)


@pytest.fixture(scope="module")
def geq_machine():
    return corpus.load("cm-geq")


@pytest.fixture(scope="module")
def geq_semi(geq_machine):
    return cm_to_protocol(geq_machine)


def test_compiled_shape(geq_machine, geq_semi):
    sm = state_map(geq_machine)
    assert validate(geq_semi) == []
    assert geq_semi.leaders == {sm.leader("q0", 0): 1}
    assert geq_semi.input_map == {"x1": sm.agent("x1", "x1", 0), "x2": sm.agent("x2", "x2", 0)}
    assert all(geq_semi.output_map[s] == sm.decode[s][-1] for s in geq_semi.states)


def test_semi_computation(geq_semi):
    assert verify_inputs(geq_semi, SMALL, geq, mode="semi").passed


@pytest.mark.parametrize("x", SMALL)
def test_correspondence_and_leader(geq_machine, geq_semi, x):
    r = check_correspondence(geq_machine, geq_semi, x)
    assert r.mismatches == 0, (r.forward_missing, r.backward_missing)


def test_leader_uniqueness(geq_machine, geq_semi):
    sm = state_map(geq_machine)
    lead = [s for s in geq_semi.states if sm.is_leader(s)]
    g = build_graph(geq_semi, initial_configuration(geq_semi, (2, 2)))
    assert leader_count_violations(g, lead) == []


def test_origins_never_change(geq_machine, geq_semi):
    assert origin_violations(geq_semi, compiled_origin(state_map(geq_machine))) == []


def test_requires_n_bound():
    with pytest.raises(NotNBounded):
        cm_to_protocol(corpus.load("cm-even-poly"))


def test_bounded_pipeline_semi():
    P = cm_to_protocol(tighten(weaken(corpus.load("cm-geq"))))
    assert verify_inputs(P, inputs_up_to(2, 5, min_sum=1), geq, mode="semi").passed


def test_compose_geq_lt_silent():
    P = pipeline(corpus.load("cm-geq"), corpus.load("cm-lt"))
    assert validate(P) == []
    assert origin_violations(P, compose_origin) == []
    assert verify_inputs(P, inputs_up_to(2, 5, min_sum=1), geq, mode="silent").passed


def test_compose_even_odd_silent():
    P = pipeline(corpus.load("cm-even"), corpus.load("cm-odd"))
    assert verify_inputs(P, [(x,) for x in range(1, 7)], builtin("even"), mode="silent").passed


def test_wrong_negation_is_caught():
    P = pipeline(corpus.load("cm-div3"), corpus.load("cm-even"))
    rep = verify_inputs(P, [(x,) for x in range(1, 7)], builtin("div3"), mode="silent")
    assert not rep.passed


def test_skip_bounding_is_a_bypass():
    pos, neg = corpus.load("cm-geq"), corpus.load("cm-lt")
    assert pipeline(pos, neg, skip_bounding=True) == pipeline(pos, neg)


def test_full_lowering_pipeline():
    P = pipeline(corpus.load("cm-geq"), corpus.load("cm-lt"), skip_bounding=False)
    assert verify_inputs(P, inputs_up_to(2, 2, min_sum=1), geq, mode="silent").passed


def test_alphabet_mismatch():
    with pytest.raises(AlphabetMismatch):
        compose_silent(cm_to_protocol(corpus.load("cm-geq")), cm_to_protocol(corpus.load("cm-odd")))


def test_non_input_counters_start_idle():
    M = parse_machine("cm c\ncounters: x t\ninput-arity: 1\nstates: a b c d\n"
                      "init: a accept: c reject: d\nbound: n\n"
                      "trans: a nonzero(x) b\ntrans: b [dec(x); inc(t)] c\ntrans: a zero(x) d\n")
    P = cm_to_protocol(M)
    assert P.alphabet == ("x",)
    assert verify_inputs(P, [(1,), (2,)], lambda x: 1, mode="semi").passed
