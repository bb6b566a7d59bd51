import pytest

from bcp.core import Configuration, initial_configuration, replay
from bcp.errors import BudgetExceeded
from bcp.oracles import builtin
from bcp.verify import (build_graph, check_computes, check_semi, check_silently_computes, decide,
                        verify_inputs)

is_power2 = builtin("power2")
is_majority = builtin("majority")


@pytest.mark.parametrize("x", range(2, 10))
def test_power2_computes(power2, x):
    e = check_computes(power2, (x,), power2_oracle(x))
    assert e.verdict == "pass", e.note


def power2_oracle(x):
    return is_power2((x,))


def test_power2_decide_values(power2):
    assert [decide(power2, (x,)) for x in range(2, 10)] == [1, 0, 1, 0, 0, 0, 1, 0]


def test_power2_bottom_scc_at_two(power2):
    g = build_graph(power2, initial_configuration(power2, (2,)))
    bottoms = g.bottom_sccs()
    assert [[g.config(v) for v in m] for m in bottoms] == [[Configuration({"1": 2})]]


def test_wrong_expectation_gives_replayable_witness(power2):
    e = check_computes(power2, (4,), 0)
    assert e.verdict == "fail"
    assert replay(power2, initial_configuration(power2, (4,)), e.witness)


def test_majority_silent(majority):
    inputs = [(a, b) for a in range(6) for b in range(6) if 2 <= a + b <= 8]
    rep = verify_inputs(majority, inputs, majority_oracle, mode="silent")
    assert rep.passed


def majority_oracle(x):
    return is_majority(x)


def test_power2_is_not_semi_for_zero(power2):
    # power2 reaches terminal 0-consensuses, which semi-computation forbids for output 0
    assert check_semi(power2, (3,), 0).verdict == "fail"
    assert check_semi(power2, (4,), 1).verdict == "pass"


def test_silent_needs_terminal(power2):
    assert check_silently_computes(power2, (4,), 1).verdict == "pass"


def test_budget(power2):
    with pytest.raises(BudgetExceeded):
        build_graph(power2, initial_configuration(power2, (9,)), budget=5)
    rep = verify_inputs(power2, [(9,)], is_power2, budget=5)
    assert rep.entries[0].verdict == "budget"


def test_too_small_is_skipped(power2):
    rep = verify_inputs(power2, [(1,)], is_power2)
    assert rep.entries[0].verdict == "skip" and rep.passed


def test_parallel_report_matches_serial(power2):
    inputs = [(x,) for x in range(2, 9)]
    a = verify_inputs(power2, inputs, is_power2, jobs=1).to_jsonl()
    b = verify_inputs(power2, inputs, is_power2, jobs=3).to_jsonl()
    assert a == b


def test_witness_is_shortest_least(power2):
    g = build_graph(power2, initial_configuration(power2, (4,)))
    target = next(v for v in range(len(g)) if g.config(v) == Configuration({"1": 4}))
    path = g.path_to(target)
    assert [t for t, _ in path] == ["s", "s", "sbar", "s", "sbar", "t1"]
