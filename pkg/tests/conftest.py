import sys

import pytest

from bcp import corpus
from bcp.core import Broadcast, BroadcastProtocol, RendezVous, total_transfer


@pytest.fixture(scope="session")
def power2():
    return corpus.load("power2")


@pytest.fixture(scope="session")
def majority():
    return corpus.load("majority")


def universal_reset_protocol():
    """Leaderless, one input symbol: a rendez-vous moves agents a -> b, and
    the only broadcast sends everyone (sender included) back to a."""
    states = ("a", "b")
    return BroadcastProtocol(
        states=states,
        rendezvous=(RendezVous(("a", "a"), ("b", "b"), "rv"),),
        broadcasts=(Broadcast("b", "a", total_transfer(states, {"b": "a"}), "back"),),
        alphabet=("x",),
        leaders={},
        input_map={"x": "a"},
        output_map={"a": 0, "b": 1},
        name="universal-reset",
    )


@pytest.fixture(scope="session")
def universal_reset():
    return universal_reset_protocol()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
