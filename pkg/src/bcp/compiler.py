"""Counter machines to broadcast protocols.

``cm_to_protocol`` builds a protocol that silently semi-computes what an
n-bounded machine computes: one leader agent ``(q,b)`` stores the control
state, every other agent ``(x,y,b)`` stores one unit of counter x (or is
``idle``, or flags an ``err``or) and remembers its origin y.  ``b`` is the
agent's opinion.

``compose_silent`` combines protocols that semi-compute a predicate and its
negation into one that silently computes the predicate: agents carry their
origin and a position in either protocol, may defect to ``rst`` and reset
the population to the initial configuration of either side.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .bounding import tighten, weaken
from .cm import CounterMachine, explore
from .core import (Broadcast, BroadcastProtocol, Configuration, RendezVous, initial_configuration,
                   validate)
from .errors import AlphabetMismatch, InvalidProtocol, NotNBounded
from .verify import DEFAULT_BUDGET, ConfigGraph, build_graph


# ------------------------------------------------------------------ compiling

@dataclass
class CompiledStateMap:
    """Names of compiled states and their inverse."""

    positions: tuple  # counters, then idle and err
    origins: tuple
    idle: str
    err: str
    decode: dict = field(default_factory=dict)

    @staticmethod
    def leader(q, b) -> str:
        return f"({q},{b})"

    @staticmethod
    def agent(x, y, b) -> str:
        return f"({x},{y},{b})"

    def is_leader(self, name) -> bool:
        return len(self.decode[name]) == 2


def state_map(M: CounterMachine) -> CompiledStateMap:
    taken = set(M.counters)
    idle, err = "idle", "err"
    while idle in taken:
        idle = "_" + idle
    while err in taken or err == idle:
        err = "_" + err
    sm = CompiledStateMap(tuple(M.counters) + (idle, err), tuple(M.input_counters), idle, err)
    for q in M.states:
        for b in (0, 1):
            sm.decode[sm.leader(q, b)] = (q, b)
    for x in sm.positions:
        for y in sm.origins:
            for b in (0, 1):
                sm.decode[sm.agent(x, y, b)] = (x, y, b)
    if len(sm.decode) != 2 * len(M.states) + 2 * len(sm.positions) * len(sm.origins):
        raise InvalidProtocol(["compiled state names are not injective"])
    return sm


def cm_to_protocol(M: CounterMachine) -> BroadcastProtocol:
    """Protocol silently semi-computing the predicate computed by ``M``.

    Only input counters serve as origins: the other counters start at zero,
    so their units are always drawn from idle agents.
    """
    if M.bound is None or M.bound.kind != "n":
        raise NotNBounded(f"machine {M.name} must declare 'bound: n' (got {M.bound})")
    sm = state_map(M)
    L, A = sm.leader, sm.agent
    B = (0, 1)
    states = [L(q, b) for q in M.states for b in B]
    states += [A(x, y, b) for x in sm.positions for y in sm.origins for b in B]

    def transfer(fn):
        return {s: fn(s) for s in states}

    def rst(s):
        d = sm.decode[s]
        return L(M.init, 0) if len(d) == 2 else A(d[1], d[1], 0)

    def one(s):
        d = sm.decode[s]
        return L(d[0], 1) if len(d) == 2 else A(d[0], d[1], 1)

    f_rst = transfer(rst)
    f_one = transfer(one)
    identity = transfer(lambda s: s)
    f_err = {}
    for x in M.counters:
        f_err[x] = transfer(lambda s, x=x: A(sm.err, *sm.decode[s][1:])
                            if len(sm.decode[s]) == 3 and sm.decode[s][0] == x else s)

    rvs, bcs = [], []
    for q, ins, r in M.transitions:
        x = ins.counter
        if ins.op in ("dec", "inc", "nonzero"):
            before, after = {"dec": (x, sm.idle), "inc": (sm.idle, x), "nonzero": (x, x)}[ins.op]
            for y in sm.origins:
                for b in B:
                    for b2 in B:
                        rvs.append(RendezVous((L(q, b), A(before, y, b2)), (L(r, b), A(after, y, b2))))
        elif ins.op == "zero":
            for b in B:
                bcs.append(Broadcast(L(q, b), L(r, b), f_err[x]))
        else:  # nop moves the leader alone
            for b in B:
                bcs.append(Broadcast(L(q, b), L(r, b), identity))
    for y in sm.origins:
        for b in B:
            bcs.append(Broadcast(A(sm.err, y, b), A(y, y, 0), f_rst))
    for q in M.states:
        if q != M.accept:
            for b in B:
                bcs.append(Broadcast(L(q, b), L(M.init, 0), f_rst))
    for b in B:
        bcs.append(Broadcast(L(M.accept, b), L(M.accept, 1), f_one))

    outputs = {s: sm.decode[s][-1] for s in states}
    P = BroadcastProtocol(
        states=tuple(states),
        rendezvous=tuple(rvs),
        broadcasts=tuple(bcs),
        alphabet=tuple(sm.origins),
        leaders=Configuration({L(M.init, 0): 1}),
        input_map={y: A(y, y, 0) for y in sm.origins},
        output_map=outputs,
        name=f"{M.name}-semi",
        metadata={"compiled-from": M.name},
    )
    _assert_valid(P)
    return P


def _assert_valid(P):
    problems = validate(P)
    if problems:
        raise InvalidProtocol(problems)


# ----------------------------------------------------- invariants of compiled

def leader_count_violations(graph: ConfigGraph, leader_states) -> list:
    """Indices of explored configurations without exactly one leader."""
    ix = graph.engine.index
    lead = {ix[s] for s in leader_states}
    bad = []
    for i, key in enumerate(graph.nodes):
        if sum(1 for a in graph.engine.agents(key) if a in lead) != 1:
            bad.append(i)
    return bad


def origin_violations(P: BroadcastProtocol, origin) -> list:
    """Transitions that change some agent's origin; ``origin(state)``
    returns the origin component (None for states without one)."""
    bad = []
    for tid, t in zip(P.transition_ids, P.transitions):
        if isinstance(t, RendezVous):
            pairs = list(zip(t.pre, t.post))
        else:
            pairs = [(t.sender_pre, t.sender_post)] + list(t.transfer.items())
        for a, b in pairs:
            if origin(a) != origin(b):
                bad.append((tid, a, b))
    return bad


def compiled_origin(sm: CompiledStateMap):
    def origin(s):
        d = sm.decode[s]
        return None if len(d) == 2 else d[1]
    return origin


def project(sm: CompiledStateMap, M: CounterMachine, C: Configuration):
    """Counter projection of a compiled configuration:
    ``(leader position or None, counter values, err count)``."""
    vals = Counter()
    leader = None
    err = 0
    for s, n in C.items():
        d = sm.decode[s]
        if len(d) == 2:
            leader = d[0] if leader is None else "<several>"
        elif d[0] == sm.err:
            err += n
        elif d[0] != sm.idle:
            vals[d[0]] += n
    return leader, tuple(vals[x] for x in M.counters), err


@dataclass
class CorrespondenceResult:
    input: tuple
    cm_configs: int
    protocol_configs: int
    forward_missing: list  # CM configurations with no matching protocol configuration
    backward_missing: list  # protocol configurations (err = 0) with no CM match
    leader_violations: int

    @property
    def mismatches(self) -> int:
        return len(self.forward_missing) + len(self.backward_missing) + self.leader_violations

    @property
    def passed(self) -> bool:
        return self.mismatches == 0


def check_correspondence(M: CounterMachine, P: BroadcastProtocol, input,
                         budget: int = DEFAULT_BUDGET) -> CorrespondenceResult:
    """Joint exhaustive exploration of ``M`` and its compiled protocol.

    Forward: every reachable machine configuration ``(q, v)`` is matched by a
    reachable protocol configuration with leader position q, counter
    projection v and no agent in err.  Backward: every reachable protocol
    configuration without err agents projects onto a reachable machine
    configuration in the leader's control state.
    """
    sm = state_map(M)
    cm_side = {(c.state, c.values) for c in explore(M, input).configs}
    g = build_graph(P, initial_configuration(P, input), budget)
    lead = [s for s in P.states if sm.is_leader(s)]
    leader_bad = leader_count_violations(g, lead)
    clean = set()
    backward = []
    for i in range(len(g)):
        C = g.config(i)
        q, vals, err = project(sm, M, C)
        if err:
            continue
        clean.add((q, vals))
        if (q, vals) not in cm_side:
            backward.append(C)
    forward = sorted(c for c in cm_side if c not in clean)
    return CorrespondenceResult(tuple(input), len(cm_side), len(g), forward, backward, len(leader_bad))


# ---------------------------------------------------------------- composition

def agent_reach(P: BroadcastProtocol, starts: dict) -> dict:
    """Over-approximate, for every origin, the states an agent starting in
    ``starts[origin]`` can ever occupy."""
    everywhere = set(starts.values())
    changed = True
    while changed:
        changed = False
        for t in P.rendezvous:
            if t.pre[0] in everywhere and t.pre[1] in everywhere:
                for s in t.post:
                    if s not in everywhere:
                        everywhere.add(s)
                        changed = True
        for t in P.broadcasts:
            if t.sender_pre in everywhere:
                new = {t.sender_post} | {t.transfer[s] for s in everywhere}
                if not new <= everywhere:
                    everywhere |= new
                    changed = True
    out = {}
    for o, start in starts.items():
        mine = {start}
        changed = True
        while changed:
            changed = False
            for t in P.rendezvous:
                (a, b), (a2, b2) = t.pre, t.post
                if a in mine and b in everywhere and a2 not in mine:
                    mine.add(a2)
                    changed = True
                if b in mine and a in everywhere and b2 not in mine:
                    mine.add(b2)
                    changed = True
            for t in P.broadcasts:
                if t.sender_pre in mine and t.sender_post not in mine:
                    mine.add(t.sender_post)
                    changed = True
                if t.sender_pre in everywhere:
                    new = {t.transfer[s] for s in mine}
                    if not new <= mine:
                        mine |= new
                        changed = True
        out[o] = mine
    return out


def leader_list(P: BroadcastProtocol) -> list:
    order = {s: i for i, s in enumerate(P.states)}
    return sorted(P.leaders.agents(), key=lambda s: order[s])


def _renamed(P: BroadcastProtocol, prefix: str) -> BroadcastProtocol:
    ren = {s: prefix + s for s in P.states}
    return BroadcastProtocol(
        states=tuple(ren[s] for s in P.states),
        rendezvous=tuple(RendezVous(tuple(ren[s] for s in t.pre), tuple(ren[s] for s in t.post), t.name)
                         for t in P.rendezvous),
        broadcasts=tuple(Broadcast(ren[t.sender_pre], ren[t.sender_post],
                                   {ren[a]: ren[b] for a, b in t.transfer.items()}, t.name)
                         for t in P.broadcasts),
        alphabet=P.alphabet,
        leaders=Configuration({ren[s]: n for s, n in P.leaders.items()}),
        input_map={a: ren[q] for a, q in P.input_map.items()},
        output_map={ren[s]: v for s, v in P.output_map.items()},
        name=P.name,
        metadata=dict(P.metadata),
    )


def compose_name(origin: str, position: str) -> str:
    return "{" + origin + "|" + position + "}"


def compose_silent(p1: BroadcastProtocol, p0: BroadcastProtocol, name: str | None = None) -> BroadcastProtocol:
    """Silently compute the predicate semi-computed by ``p1`` whose negation
    ``p0`` semi-computes.

    Leaders get origins ``@0, @1, ...`` matched by position in each side's
    sorted leader list, so both sides need the same number of leaders.  A
    rendez-vous that changes nothing and a broadcast whose sender keeps its
    state get no defecting variant: such steps stay enabled in terminal
    configurations and a defection there would break silence.
    """
    if tuple(p1.alphabet) != tuple(p0.alphabet):
        raise AlphabetMismatch(f"alphabets differ: {p1.alphabet} vs {p0.alphabet}")
    if p1.leaders.size != p0.leaders.size:
        raise InvalidProtocol([f"leader counts differ: {p1.leaders.size} vs {p0.leaders.size}"])
    if set(p1.states) & set(p0.states):
        p1, p0 = _renamed(p1, "p1."), _renamed(p0, "p0.")
    sides = {1: p1, 0: p0}
    rst = "rst"
    while rst in p1.states or rst in p0.states:
        rst = "_" + rst
    origins = list(p1.alphabet) + [f"@{j}" for j in range(p1.leaders.size)]
    init = {}
    for i, P in sides.items():
        lead = leader_list(P)
        init[i] = {a: P.input_map[a] for a in P.alphabet}
        init[i].update({f"@{j}": s for j, s in enumerate(lead)})
    reach = {i: agent_reach(P, init[i]) for i, P in sides.items()}

    states, outputs, side_of = [], {}, {}
    for o in origins:
        for i in (1, 0):
            P = sides[i]
            for q in P.states:
                if q in reach[i][o]:
                    s = compose_name(o, q)
                    states.append(s)
                    # p0 reaching consensus 1 means the predicate is false
                    outputs[s] = P.output_map[q] if i == 1 else 1 - P.output_map[q]
                    side_of[s] = (o, i, q)
        s = compose_name(o, rst)
        states.append(s)
        outputs[s] = 0
        side_of[s] = (o, None, rst)
    exists = set(states)
    N = compose_name

    rvs, bcs = [], []
    for i in (1, 0):
        P = sides[i]
        for t in P.rendezvous:
            (q, r), (q2, r2) = t.pre, t.post
            for x in origins:
                if q not in reach[i][x]:
                    continue
                for y in origins:
                    if r not in reach[i][y]:
                        continue
                    rvs.append(RendezVous((N(x, q), N(y, r)), (N(x, q2), N(y, r2))))
                    if (q, r) != (q2, r2):
                        rvs.append(RendezVous((N(x, q), N(y, r)), (N(x, rst), N(y, r2))))
        for t in P.broadcasts:
            f = {}
            for s in states:
                o, side, p = side_of[s]
                img = N(o, t.transfer[p]) if side == i else s
                f[s] = img if img in exists else s
            for x in origins:
                if t.sender_pre not in reach[i][x]:
                    continue
                bcs.append(Broadcast(N(x, t.sender_pre), N(x, t.sender_post), f))
                if t.sender_pre != t.sender_post:
                    bcs.append(Broadcast(N(x, t.sender_pre), N(x, rst), f))
    for i in (1, 0):
        f_i = {s: N(side_of[s][0], init[i][side_of[s][0]]) for s in states}
        for o in origins:
            bcs.append(Broadcast(N(o, rst), N(o, init[i][o]), f_i))

    P = BroadcastProtocol(
        states=tuple(states),
        rendezvous=tuple(rvs),
        broadcasts=tuple(bcs),
        alphabet=p1.alphabet,
        leaders=Configuration(Counter(N(f"@{j}", s) for j, s in enumerate(leader_list(p0)))),
        input_map={a: N(a, p0.input_map[a]) for a in p0.alphabet},
        output_map=outputs,
        name=name or f"{p1.name}+{p0.name}",
        metadata={"composed-from": f"{p1.name} {p0.name}"},
    )
    _assert_valid(P)
    return P


def compose_origin(state: str):
    """Origin component of a composed state name."""
    return state[1:].split("|", 1)[0]


def lower_to_n(M: CounterMachine, skip_bounding: bool | None = None) -> CounterMachine:
    """Bring ``M`` into the n-bounded class; see :func:`pipeline` for
    ``skip_bounding``."""
    if skip_bounding is True or (skip_bounding is None and M.bound is not None and M.bound.kind == "n"):
        return M
    return tighten(M) if M.bound is not None and M.bound.kind == "weak-n" else tighten(weaken(M))


def pipeline(pos: CounterMachine, neg: CounterMachine, skip_bounding: bool | None = None,
             name: str | None = None) -> BroadcastProtocol:
    """Machines for a predicate and its negation to one protocol silently
    computing the predicate.

    ``skip_bounding=None`` lowers a machine only when it is not already
    declared n-bounded; ``True`` never lowers; ``False`` always lowers.
    """
    p1 = cm_to_protocol(lower_to_n(pos, skip_bounding))
    p0 = cm_to_protocol(lower_to_n(neg, skip_bounding))
    return compose_silent(p1, p0, name=name or f"{pos.name}-silent")
