import warnings

import pytest

from bcp import corpus
from bcp.compiler import origin_violations, pipeline
from bcp.core import Configuration, initial_configuration, replay, validate
from bcp.errors import NoLeaders
from bcp.oracles import builtin, inputs_up_to
from bcp.textfmt import parse_protocol, serialize_protocol
from bcp.transforms import (NotSilentWarning, check_reset_protocol, election_violations,
                            is_single_signal, prune_idle_broadcasts, shifted_input, signal_origin,
                            single_broadcaster_violations, to_leaderless, to_single_broadcaster,
                            to_single_signal)
from bcp.verify import decide, verify_inputs

geq = builtin("geq")


@pytest.fixture(scope="module")
def geq_silent():
    return pipeline(corpus.load("cm-geq"), corpus.load("cm-lt"))


def source_verdicts_match(S, P, inputs, mode="computes"):
    """Re-verify ``S`` against the verdicts of ``P`` under ``S``'s input shift."""
    pairs = [(x, shifted_input(S, x)) for x in inputs]
    pairs = [(x, y) for x, y in pairs if y is not None]
    expected = {x: decide(P, y) for x, y in pairs}
    assert None not in expected.values()
    return verify_inputs(S, list(expected), expected.__getitem__, mode=mode)


def test_leaderless(geq_silent):
    L = to_leaderless(geq_silent)
    assert L.leaders.size == 0 and validate(L) == []
    assert L.metadata["input-shift"] == "x1:-1"
    inputs = inputs_up_to(2, 4, min_sum=2)
    rep = verify_inputs(L, [x for x in inputs if x[0] >= 1 and sum(x) >= 2],
                        lambda x: geq(shifted_input(L, x)), mode="silent")
    assert rep.passed
    assert all(election_violations(L, x) == [] for x in [(2, 1), (3, 1)])


def test_leaderless_identity_without_leaders(power2):
    with pytest.warns(UserWarning):
        assert to_leaderless(power2) is power2
    with pytest.raises(NoLeaders):
        to_leaderless(power2, strict=True)


def test_leaderless_recruits_several_leaders():
    from bcp.core import BroadcastProtocol, RendezVous
    # two leaders l1, l2; output 1 once both have met an input agent
    P = BroadcastProtocol(
        states=("l1", "l2", "m1", "m2", "a", "b"),
        rendezvous=(RendezVous(("l1", "a"), ("m1", "b")), RendezVous(("l2", "a"), ("m2", "b"))),
        broadcasts=(), alphabet=("x",), leaders={"l1": 1, "l2": 1}, input_map={"x": "a"},
        output_map={"l1": 0, "l2": 0, "m1": 1, "m2": 1, "a": 1, "b": 1}, name="two")
    L = to_leaderless(P)
    assert L.metadata["input-shift"] == "x:-2"
    for x in range(2, 6):
        assert decide(L, (x,)) == decide(P, shifted_input(L, (x,)))
        assert election_violations(L, (x,)) == []


@pytest.mark.parametrize("name", ["power2", "majority"])
def test_single_broadcaster(name):
    P = corpus.load(name)
    S = to_single_broadcaster(P)
    assert validate(S) == []
    assert single_broadcaster_violations(S) == []
    senders = {t.sender_pre for t in S.broadcasts}
    assert senders <= set(S.metadata["leader-states"].split())
    inputs = [x for x in inputs_up_to(len(P.alphabet), 7) if sum(shifted_input(S, x)) >= 2]
    assert source_verdicts_match(S, P, inputs).passed


def test_single_broadcaster_without_broadcasts(majority):
    S = to_single_broadcaster(majority)
    assert S.rendezvous == majority.rendezvous and S.broadcasts == ()
    assert S.leaders.size == 0 and "input-shift" not in S.metadata


@pytest.mark.parametrize("name", ["power2", "majority"])
def test_single_signal_corpus(name):
    P = corpus.load(name)
    inputs = [x for x in inputs_up_to(len(P.alphabet), 4) if sum(x) >= 2]
    T = to_single_signal(P, inputs)
    assert validate(T) == [] and is_single_signal(T)
    assert origin_violations(T, signal_origin) == []
    expected = {x: decide(P, x) for x in inputs}
    assert verify_inputs(T, inputs, expected.__getitem__).passed


def test_single_signal_geq_pipeline(geq_silent):
    inputs = inputs_up_to(2, 4, min_sum=2)
    with pytest.warns(NotSilentWarning):
        to_single_signal(geq_silent, inputs[:3])
    S = prune_idle_broadcasts(geq_silent, inputs)
    assert verify_inputs(S, inputs, geq, mode="silent").passed
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        T = to_single_signal(S, inputs)
    assert is_single_signal(T)
    assert verify_inputs(T, inputs, geq).passed


def test_not_silent_warning(power2):
    from bcp.core import BroadcastProtocol, RendezVous
    P = BroadcastProtocol(states=("p", "q"), rendezvous=(RendezVous(("p", "p"), ("q", "q")),
                                                         RendezVous(("q", "q"), ("p", "p"))),
                          broadcasts=(), alphabet=("x",), leaders={}, input_map={"x": "p"},
                          output_map={"p": 1, "q": 1})
    with pytest.warns(NotSilentWarning):
        to_single_signal(P, [(2,)])


def test_transform_outputs_serialize(power2, geq_silent):
    for T in (to_single_signal(power2), to_single_broadcaster(power2), to_leaderless(geq_silent)):
        assert parse_protocol(serialize_protocol(T)) == T


def test_reset_universal(universal_reset):
    rep = check_reset_protocol(universal_reset, [(x,) for x in range(2, 7)])
    assert rep.passed


def test_reset_vacuous_without_broadcasts(majority):
    assert check_reset_protocol(majority, [(1, 2), (2, 2)]).passed


def test_reset_power2_fails_with_replayable_witness(power2):
    e = check_reset_protocol(power2, [(4,)]).entries[0]
    assert e.verdict == "fail"
    C0 = initial_configuration(power2, (4,))
    assert replay(power2, C0, e.witness)
    assert e.witness[-1][1] != C0
    assert power2.transition(e.witness[-1][0]) in power2.broadcasts
    assert e.witness[-1] == ("t0", Configuration({"0": 1, "bot": 3}))
