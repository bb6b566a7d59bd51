"""Configurations, transitions, protocols and the one-step relation.

Everything in here works on state *names*.  The indexed fast path used for
graph exploration lives in :mod:`bcp.engine`; the functions below are the
reference semantics it is tested against.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

from .errors import EmptyConfiguration, NotEnabled, PopulationTooSmall


class Configuration(Mapping):
    """Immutable multiset of states.

    Zero counts are dropped, so two configurations compare equal iff they
    hold the same agents.  Iteration order is sorted by state name.
    """

    __slots__ = ("_counts", "_hash", "_size")

    def __init__(self, counts: Mapping[str, int] | Iterable[str] = ()):
        if isinstance(counts, Mapping):
            items = counts.items()
        else:
            items = Counter(counts).items()
        clean = {}
        for state, n in items:
            if n < 0:
                raise ValueError(f"negative count {n} for state {state!r}")
            if n:
                clean[state] = clean.get(state, 0) + int(n)
        self._counts = {s: clean[s] for s in sorted(clean)}
        self._size = sum(self._counts.values())
        self._hash = None

    def __getitem__(self, state):
        return self._counts[state]

    def get(self, state, default=0):
        return self._counts.get(state, default)

    def __iter__(self):
        return iter(self._counts)

    def __len__(self):
        return len(self._counts)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._counts.items()))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Configuration):
            return self._counts == other._counts
        if isinstance(other, Mapping):
            return self == Configuration(other)
        return NotImplemented

    def __add__(self, other):
        out = dict(self._counts)
        for s, n in Configuration._coerce(other).items():
            out[s] = out.get(s, 0) + n
        return Configuration(out)

    def __sub__(self, other):
        # multiset difference, truncated at zero
        out = dict(self._counts)
        for s, n in Configuration._coerce(other).items():
            if s in out:
                out[s] = max(out[s] - n, 0)
        return Configuration(out)

    def __le__(self, other):
        other = Configuration._coerce(other)
        return all(n <= other.get(s) for s, n in self._counts.items())

    def __ge__(self, other):
        return Configuration._coerce(other) <= self

    @staticmethod
    def _coerce(value):
        return value if isinstance(value, Configuration) else Configuration(value)

    @property
    def size(self) -> int:
        return self._size

    @property
    def support(self) -> frozenset:
        return frozenset(self._counts)

    def agents(self):
        """Expand to a sorted list of states, one entry per agent."""
        return [s for s, n in self._counts.items() for _ in range(n)]

    def to_text(self) -> str:
        return " ".join(f"{s}:{n}" for s, n in self._counts.items())

    @classmethod
    def from_text(cls, text: str) -> "Configuration":
        counts = {}
        for token in text.split():
            state, _, n = token.rpartition(":")
            if not state or not n.isdigit():
                raise ValueError(f"bad configuration entry {token!r}")
            if state in counts:
                raise ValueError(f"state {state!r} listed twice")
            counts[state] = int(n)
        return cls(counts)

    def __repr__(self):
        return "{" + ", ".join(f"{s}:{n}" for s, n in self._counts.items()) + "}"


@dataclass(frozen=True)
class RendezVous:
    pre: tuple
    post: tuple
    name: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "pre", tuple(self.pre))
        object.__setattr__(self, "post", tuple(self.post))


@dataclass(frozen=True)
class Broadcast:
    sender_pre: str
    sender_post: str
    transfer: Mapping
    name: Optional[str] = None

    def __hash__(self):
        return hash((self.sender_pre, self.sender_post, self.name))

    def image(self, state):
        return self.transfer[state]


def total_transfer(states: Iterable[str], partial: Mapping[str, str] = ()) -> dict:
    """Extend a partial transfer map by the identity on every other state."""
    partial = dict(partial)
    return {s: partial.get(s, s) for s in states}


@dataclass(frozen=True)
class BroadcastProtocol:
    """A broadcast consensus protocol (a population protocol when
    ``broadcasts`` is empty)."""

    states: tuple
    rendezvous: tuple
    broadcasts: tuple
    alphabet: tuple
    leaders: Configuration
    input_map: Mapping
    output_map: Mapping
    name: str = "protocol"
    metadata: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "rendezvous", tuple(self.rendezvous))
        object.__setattr__(self, "broadcasts", tuple(self.broadcasts))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        if not isinstance(self.leaders, Configuration):
            object.__setattr__(self, "leaders", Configuration(self.leaders))

    __hash__ = object.__hash__

    @property
    def transitions(self):
        return list(self.rendezvous) + list(self.broadcasts)

    @cached_property
    def transition_ids(self) -> list:
        ids = [t.name or f"rv{i}" for i, t in enumerate(self.rendezvous)]
        ids += [t.name or f"bc{i}" for i, t in enumerate(self.broadcasts)]
        return ids

    @cached_property
    def _by_id(self):
        return dict(zip(self.transition_ids, self.transitions))

    def transition(self, tid: str):
        return self._by_id[tid]

    def output(self, state) -> int:
        return self.output_map[state]


def validate(protocol: BroadcastProtocol) -> list:
    """Return a list of human-readable invariant violations (empty if valid)."""
    problems = []
    Q = set(protocol.states)
    if len(Q) != len(protocol.states):
        dup = [s for s, n in Counter(protocol.states).items() if n > 1]
        problems.append(f"duplicate states: {', '.join(map(str, dup))}")
    if not Q:
        problems.append("state set is empty")
    if not protocol.alphabet:
        problems.append("input alphabet is empty")
    for sym in protocol.alphabet:
        if sym not in protocol.input_map:
            problems.append(f"input map: symbol {sym} has no image")
        elif protocol.input_map[sym] not in Q:
            problems.append(f"input map: {sym} -> unknown state {protocol.input_map[sym]}")
    for state in protocol.states:
        if state not in protocol.output_map:
            problems.append(f"output map: state {state} has no output")
        elif protocol.output_map[state] not in (0, 1):
            problems.append(f"output map: state {state} has output {protocol.output_map[state]!r}")
    for state in protocol.leaders:
        if state not in Q:
            problems.append(f"leaders: unknown state {state}")
    ids = protocol.transition_ids
    for tid, n in Counter(ids).items():
        if n > 1:
            problems.append(f"transition id {tid} used {n} times")
    for tid, t in zip(ids, protocol.rendezvous):
        for s in t.pre + t.post:
            if s not in Q:
                problems.append(f"{tid}: unknown state {s}")
        if len(t.pre) != 2 or len(t.post) != 2:
            problems.append(f"{tid}: rendez-vous needs two pre and two post states")
    for tid, t in zip(ids[len(protocol.rendezvous):], protocol.broadcasts):
        for s in (t.sender_pre, t.sender_post):
            if s not in Q:
                problems.append(f"{tid}: unknown state {s}")
        missing = [s for s in protocol.states if s not in t.transfer]
        if missing:
            problems.append(f"{tid}: transfer not total, missing {', '.join(missing)}")
        for s, img in t.transfer.items():
            if s not in Q:
                problems.append(f"{tid}: transfer maps unknown state {s}")
            elif img not in Q:
                problems.append(f"{tid}: transfer maps {s} to unknown state {img}")
    return problems


def input_population(protocol: BroadcastProtocol, input) -> Configuration:
    """I(X): place ``input[i]`` agents in the image of the i-th symbol."""
    if isinstance(input, Mapping):
        vec = [input.get(sym, 0) for sym in protocol.alphabet]
        unknown = set(input) - set(protocol.alphabet)
        if unknown:
            raise ValueError(f"unknown input symbols: {sorted(unknown)}")
    else:
        vec = list(input)
    if len(vec) != len(protocol.alphabet):
        raise ValueError(f"input has {len(vec)} entries, alphabet has {len(protocol.alphabet)}")
    counts = Counter()
    for sym, n in zip(protocol.alphabet, vec):
        if n < 0:
            raise ValueError("input counts must be non-negative")
        counts[protocol.input_map[sym]] += n
    return Configuration(counts)


def initial_configuration(protocol: BroadcastProtocol, input) -> Configuration:
    C = input_population(protocol, input) + protocol.leaders
    if C.size < 2:
        raise PopulationTooSmall(f"population of size {C.size}; at least 2 agents are required")
    return C


def apply_rendezvous(C: Configuration, t: RendezVous) -> Configuration:
    need = Configuration(t.pre)
    if not need <= C:
        raise NotEnabled(f"rendez-vous {t.pre} -> {t.post} needs {need!r}")
    return C - need + Configuration(t.post)


def apply_broadcast(C: Configuration, t: Broadcast) -> Configuration:
    if C.get(t.sender_pre) < 1:
        raise NotEnabled(f"broadcast from {t.sender_pre} has no sender")
    rest = C - Configuration([t.sender_pre])
    moved = Counter()
    for s, n in rest.items():
        moved[t.transfer[s]] += n
    return Configuration(moved) + Configuration([t.sender_post])


def apply(C: Configuration, t) -> Configuration:
    if isinstance(t, RendezVous):
        return apply_rendezvous(C, t)
    return apply_broadcast(C, t)


def is_enabled(C: Configuration, t) -> bool:
    if isinstance(t, RendezVous):
        return Configuration(t.pre) <= C
    return C.get(t.sender_pre) >= 1


def enabled_steps(protocol: BroadcastProtocol, C: Configuration) -> list:
    """All ``(transition id, successor)`` pairs, in transition order."""
    out = []
    for tid, t in zip(protocol.transition_ids, protocol.transitions):
        if is_enabled(C, t):
            out.append((tid, apply(C, t)))
    return out


def classify_consensus(protocol: BroadcastProtocol, C: Configuration) -> Optional[int]:
    """Return the consensus bit of ``C``, or ``None`` if outputs disagree."""
    if C.size == 0:
        raise EmptyConfiguration("an empty configuration has no consensus")
    outs = {protocol.output_map[s] for s in C}
    return outs.pop() if len(outs) == 1 else None


def is_terminal(protocol: BroadcastProtocol, C: Configuration) -> bool:
    return all(succ == C for _, succ in enabled_steps(protocol, C))


def replay(protocol: BroadcastProtocol, C0: Configuration, path: Sequence) -> bool:
    """Check that ``path`` (pairs of transition id and configuration) is an
    execution of ``protocol`` starting at ``C0``."""
    current = C0
    for tid, expected in path:
        t = protocol.transition(tid)
        if not is_enabled(current, t):
            return False
        current = apply(current, t)
        if current != expected:
            return False
    return True
