"""Exact verification at a fixed population size.

The reachable configuration graph of an initial configuration is built
explicitly and decomposed into strongly connected components.  On a finite
graph a fair execution eventually stays inside one bottom SCC and visits
all of its configurations infinitely often, so:

* a protocol *computes* b from C0 iff every bottom SCC reachable from C0
  contains only b-consensus configurations;
* it *silently* computes b iff every reachable bottom SCC is a single
  terminal b-consensus configuration;
* it *silently semi-computes* with expected value 0 iff no terminal
  configuration is reachable at all.

For rendez-vous-only protocols this is the usual characterisation of fair
executions; applying it to broadcast steps is an assumption of this tool
(the argument only uses finiteness of the graph), cross-checked against
the simulator in the test-suite.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .core import BroadcastProtocol, Configuration, initial_configuration
from .engine import Engine
from .errors import BudgetExceeded, PopulationTooSmall

DEFAULT_BUDGET = 5_000_000
MODES = ("computes", "silent", "semi")


@dataclass
class ConfigGraph:
    """Reachability graph of one initial configuration.

    Node 0 is the initial configuration; nodes are numbered in breadth-first
    discovery order, exploring successors by transition order.  Following
    ``parent`` pointers therefore yields, for every node, the shortest path
    from node 0 whose transition sequence is lexicographically least.
    """

    engine: Engine
    nodes: list
    offsets: Sequence[int]
    targets: Sequence[int]
    tids: Sequence[int]
    parent: Sequence[int]
    parent_tid: Sequence[int]
    comp: Sequence[int] = ()
    ncomp: int = 0
    bottom: list = field(default_factory=list)

    def __len__(self):
        return len(self.nodes)

    @property
    def size(self) -> int:
        return len(self.nodes)

    def config(self, i: int) -> Configuration:
        return self.engine.config(self.nodes[i])

    def configs(self):
        for key in self.nodes:
            yield self.engine.config(key)

    def edges(self, u: int) -> list:
        names = self.engine.tids
        return [(names[self.tids[e]], self.targets[e]) for e in range(self.offsets[u], self.offsets[u + 1])]

    def successor_indices(self, u: int):
        return self.targets[self.offsets[u]:self.offsets[u + 1]]

    def is_terminal(self, u: int) -> bool:
        return all(v == u for v in self.successor_indices(u))

    def consensus(self, u: int):
        return self.engine.consensus(self.nodes[u])

    def components(self) -> list:
        members = [[] for _ in range(self.ncomp)]
        for v in range(len(self.nodes)):
            members[self.comp[v]].append(v)
        return members

    def bottom_sccs(self) -> list:
        return [m for c, m in enumerate(self.components()) if self.bottom[c]]

    def path_to(self, v: int) -> list:
        """Witness path from node 0 to ``v`` as ``(transition id, configuration)``."""
        steps = []
        while v != 0:
            steps.append((self.engine.tids[self.parent_tid[v]], self.config(v)))
            v = self.parent[v]
        steps.reverse()
        return steps


def build_graph(protocol: BroadcastProtocol | Engine, C0: Configuration,
                budget: int = DEFAULT_BUDGET, backend: str | None = None) -> ConfigGraph:
    engine = protocol if isinstance(protocol, Engine) else Engine(protocol, backend)
    k = engine.backend
    nodes, offsets, targets, tids, parent, parent_tid, complete = engine.kernel.explore(engine.key(C0), budget)
    if not complete:
        raise BudgetExceeded(len(nodes), budget)
    g = ConfigGraph(engine, nodes, offsets, targets, tids, parent, parent_tid)
    g.comp, g.ncomp = k.tarjan(len(nodes), offsets, targets)
    g.bottom = k.bottom_components(len(nodes), offsets, targets, g.comp, g.ncomp)
    return g


@dataclass
class ReportEntry:
    input: tuple
    expected: Optional[int]
    mode: str
    verdict: str
    nodes: int = 0
    witness: Optional[list] = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict in ("pass", "skip")

    def to_dict(self) -> dict:
        return {
            "input": list(self.input),
            "expected": self.expected,
            "mode": self.mode,
            "verdict": self.verdict,
            "nodes": self.nodes,
            "witness": None if self.witness is None else [[tid, c.to_text()] for tid, c in self.witness],
            "note": self.note,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(", ", ": "))


@dataclass
class VerificationReport:
    entries: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def to_jsonl(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


def _graph_for(protocol, input, budget, graph):
    if graph is not None:
        return graph
    return build_graph(protocol, initial_configuration(protocol, input), budget)


def _first(candidates):
    return min(candidates) if candidates else None


def _entry(input, expected, mode, g, bad_node):
    if bad_node is None:
        return ReportEntry(tuple(input), expected, mode, "pass", g.size)
    return ReportEntry(tuple(input), expected, mode, "fail", g.size, g.path_to(bad_node))


def check_computes(protocol, input, expected: int, budget: int = DEFAULT_BUDGET,
                   graph: ConfigGraph | None = None) -> ReportEntry:
    g = _graph_for(protocol, input, budget, graph)
    bad = []
    for members in g.bottom_sccs():
        bad.extend(v for v in members if g.consensus(v) != expected)
    return _entry(input, expected, "computes", g, _first(bad))


def _non_silent_nodes(g: ConfigGraph, expected: int) -> list:
    bad = []
    for members in g.bottom_sccs():
        if len(members) == 1 and g.consensus(members[0]) == expected:
            continue
        wrong = [v for v in members if g.consensus(v) != expected]
        bad.extend(wrong or members)
    return bad


def check_silently_computes(protocol, input, expected: int, budget: int = DEFAULT_BUDGET,
                            graph: ConfigGraph | None = None) -> ReportEntry:
    g = _graph_for(protocol, input, budget, graph)
    return _entry(input, expected, "silent", g, _first(_non_silent_nodes(g, expected)))


def check_semi(protocol, input, expected: int, budget: int = DEFAULT_BUDGET,
               graph: ConfigGraph | None = None) -> ReportEntry:
    g = _graph_for(protocol, input, budget, graph)
    if expected == 1:
        return _entry(input, expected, "semi", g, _first(_non_silent_nodes(g, 1)))
    terminals = [m[0] for m in g.bottom_sccs() if len(m) == 1]
    return _entry(input, expected, "semi", g, _first(terminals))


CHECKS = {"computes": check_computes, "silent": check_silently_computes, "semi": check_semi}


def decide(protocol, input, budget: int = DEFAULT_BUDGET, graph: ConfigGraph | None = None) -> Optional[int]:
    """Consensus every fair execution stabilises to, or ``None`` when the
    reachable bottom SCCs do not agree on one."""
    g = _graph_for(protocol, input, budget, graph)
    values = set()
    for members in g.bottom_sccs():
        outs = {g.consensus(v) for v in members}
        if len(outs) != 1 or None in outs:
            return None
        values |= outs
    return values.pop() if len(values) == 1 else None


def _verify_one(args):
    protocol, input, expected, mode, budget = args
    try:
        return CHECKS[mode](protocol, input, expected, budget)
    except BudgetExceeded as exc:
        return ReportEntry(tuple(input), expected, mode, "budget", exc.explored, note=str(exc))
    except PopulationTooSmall as exc:
        return ReportEntry(tuple(input), expected, mode, "skip", 0, note=str(exc))


def verify_inputs(protocol: BroadcastProtocol, inputs, oracle: Callable, mode: str = "computes",
                  budget: int = DEFAULT_BUDGET, jobs: int = 1) -> VerificationReport:
    """Check every input against ``oracle(input)``; entries keep input order.

    Inputs whose exploration exceeds the budget get verdict ``budget``.
    """
    if mode not in CHECKS:
        raise ValueError(f"unknown mode {mode!r}")
    work = [(protocol, tuple(x), int(oracle(tuple(x))), mode, budget) for x in inputs]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(_verify_one, work))
    else:
        entries = [_verify_one(w) for w in work]
    return VerificationReport(entries)
