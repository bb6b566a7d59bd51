import pytest

from bcp import corpus
from bcp.cm import (NOP, Bound, CMConfiguration, cm_accepts, cm_check_bounded, cm_check_computes,
                    cm_initial, cm_rejects, cm_step, explore, inc, parse_machine, serialize_machine,
                    validate_machine)
from bcp.errors import ArityMismatch, BoundExceeded, BudgetExceeded, ParseError
from bcp.oracles import builtin, inputs_up_to

MACHINES = ["cm-geq", "cm-lt", "cm-even", "cm-odd", "cm-div3", "cm-even-poly"]


def test_geq_accepts_and_rejects():
    M = corpus.load("cm-geq")
    assert cm_accepts(M, (3, 2)) and not cm_rejects(M, (3, 2))
    assert cm_rejects(M, (1, 2)) and not cm_accepts(M, (1, 2))


def test_step_semantics():
    M = corpus.load("cm-geq")
    assert cm_initial(M, (1, 1)) == CMConfiguration("q0", (1, 1))
    assert cm_step(M, CMConfiguration("q0", (1, 1))) == {CMConfiguration("q1", (1, 1))}
    assert cm_step(M, CMConfiguration("q2", (0, 1))) == set()  # dec of an empty counter blocks
    with pytest.raises(ArityMismatch):
        cm_initial(M, (1,))


@pytest.mark.parametrize("name", MACHINES)
def test_corpus_machines_compute_their_oracle(name):
    M = corpus.load(name)
    rep = cm_check_computes(M, builtin(corpus.oracle_name(name)), inputs_up_to(M.input_arity, 6))
    assert rep.passed, rep.to_jsonl()


@pytest.mark.parametrize("name", MACHINES)
def test_corpus_machines_respect_their_bound(name):
    M = corpus.load(name)
    assert cm_check_bounded(M, inputs_up_to(M.input_arity, 6), M.bound).passed


@pytest.mark.parametrize("name", MACHINES)
def test_round_trip(name):
    M = corpus.load(name)
    N = parse_machine(serialize_machine(M))
    assert N == M
    assert validate_machine(M) == ([], [])


def test_macro_chain_expansion_and_reverse_edges():
    M = parse_machine("cm m\ncounters: x y\ninput-arity: 1\nstates: a b c\n"
                      "init: a accept: b reject: c\nbound: n\ntrans: a [dec(x); inc(y); zero(x)] b\n")
    got = {str(t) for t in M.transitions}
    assert got == {"a dec(x) a#m0#1", "a#m0#1 inc(x) a", "a#m0#1 inc(y) a#m0#2",
                   "a#m0#2 dec(y) a#m0#1", "a#m0#2 zero(x) b"}
    assert inc("x").inverse() == ("dec", "x") and NOP.inverse() == NOP


def test_bound_parse():
    assert Bound.parse("poly 3") == Bound("poly", 3)
    assert str(Bound.parse("weak-n")) == "weak-n"
    with pytest.raises(ParseError):
        Bound.parse("poly x")


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_machine("cm m\ncounters: x\ntrans: a jump(x) b\n")


def test_bound_violation_witness():
    M = parse_machine("cm up\ncounters: x\ninput-arity: 1\nstates: a b c\n"
                      "init: a accept: b reject: c\nbound: n\ntrans: a inc(x) a\n")
    rep = cm_check_bounded(M, [(1,)], "n")
    e = rep.entries[0]
    assert e.verdict == "fail"
    assert [str(c) for c in e.witness] == ["(a, (1))", "(a, (2))"]
    with pytest.raises(BoundExceeded):
        explore(M, (1,))
    with pytest.raises(BudgetExceeded):
        explore(M, (1,), budget=10, enforce_bound=False)


def test_validation_warns_on_halting_exit():
    M = parse_machine("cm h\ncounters: x\ninput-arity: 1\nstates: a b c\n"
                      "init: a accept: b reject: c\nbound: n\ntrans: a nop b\ntrans: b nop c\n")
    errors, warnings = validate_machine(M)
    assert errors == [] and warnings
