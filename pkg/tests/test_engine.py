import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcp.core import enabled_steps, initial_configuration
from bcp.engine import Engine, backend_name, get_backend
from bcp.errors import PopulationTooSmall
from bcp.verify import build_graph

from test_core import protocols

compiled_only = pytest.mark.skipif(
    pytest.importorskip("bcp.engine")._compiled is None, reason="compiled kernel not built")


def test_backend_choice(monkeypatch):
    monkeypatch.setenv("BCP_PURE", "1")
    assert backend_name(get_backend()) == "python"
    with pytest.raises(ValueError):
        get_backend("fortran")


@pytest.mark.parametrize("backend", ["python", pytest.param("compiled", marks=compiled_only)])
def test_engine_successors_match_core(power2, backend):
    eng = Engine(power2, backend)
    C = initial_configuration(power2, (4,))
    key = eng.key(C)
    got = [(eng.tids[t], eng.config(k)) for t, k in eng.successors(key)]
    assert got == enabled_steps(power2, C)
    assert eng.config(key) == C


def _graph_signature(g):
    return [(g.config(u), [(t, g.config(v)) for t, v in g.edges(u)]) for u in range(len(g))]


@compiled_only
@settings(max_examples=40, deadline=None)
@given(protocols(), st.integers(0, 3), st.integers(0, 3))
def test_kernels_build_identical_graphs(P, x, y):
    try:
        C0 = initial_configuration(P, (x, y))
    except PopulationTooSmall:
        return
    a = build_graph(P, C0, backend="python")
    b = build_graph(P, C0, backend="compiled")
    assert _graph_signature(a) == _graph_signature(b)
    assert sorted(map(sorted, a.bottom_sccs())) == sorted(map(sorted, b.bottom_sccs()))
    assert list(a.parent_tid) == list(b.parent_tid)


@pytest.mark.parametrize("backend", ["python", pytest.param("compiled", marks=compiled_only)])
def test_initial_key_is_canonical(backend):
    # state names sort differently from state indices here
    from bcp.core import BroadcastProtocol, RendezVous
    P = BroadcastProtocol(states=("z", "a"), rendezvous=(RendezVous(("z", "a"), ("a", "z")),),
                          broadcasts=(), alphabet=("x", "y"), leaders={}, input_map={"x": "z", "y": "a"},
                          output_map={"z": 0, "a": 1})
    C0 = initial_configuration(P, (1, 1))
    g = build_graph(P, C0, backend=backend)
    assert len(g) == 1 and g.edges(0) == [("rv0", 0)]
