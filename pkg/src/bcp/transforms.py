"""Protocol-to-protocol transformations and the reset-subclass check.

* ``to_leaderless`` removes leaders by electing one agent of a chosen input
  symbol, which then recruits the remaining leaders from the same symbol.
* ``to_single_broadcaster`` lets a single leader perform every broadcast
  on behalf of the agent that wants to broadcast.
* ``to_single_signal`` makes every broadcast use one "freeze" transfer
  and replays the effect of the original broadcast by rendez-vous.
* ``check_reset_protocol`` tests whether every reachable broadcast step
  restores the initial configuration.
"""

from __future__ import annotations

import warnings
from collections import Counter

from .compiler import agent_reach, leader_list
from .core import (Broadcast, BroadcastProtocol, Configuration, RendezVous, initial_configuration,
                   validate)
from .textfmt import split_top
from .errors import BudgetExceeded, InvalidProtocol, NoLeaders, PopulationTooSmall
from .verify import (DEFAULT_BUDGET, ReportEntry, VerificationReport, build_graph,
                     check_silently_computes, decide)


class NotSilentWarning(UserWarning):
    """The input of a transformation that needs silence was not silent on
    some checked input."""


def _fresh(name, taken):
    while name in taken:
        name = "_" + name
    taken.add(name)
    return name


def _extend(transfer, new_states, extra=None):
    f = dict(transfer)
    for s in new_states:
        f[s] = s
    if extra:
        f.update(extra)
    return f


def _finish(P):
    problems = validate(P)
    if problems:
        raise InvalidProtocol(problems)
    return P


# ------------------------------------------------------------------ leaderless

def to_leaderless(P: BroadcastProtocol, symbol: str | None = None, strict: bool = False) -> BroadcastProtocol:
    """Leaderless protocol whose agents of ``symbol`` (default: the first
    input symbol) elect and recruit the |L| leaders.

    The output computes ``phi(alpha - |L| e_symbol)`` on inputs with at
    least |L| agents of ``symbol``; the shift is recorded in the metadata
    key ``input-shift``.  A leaderless input is returned unchanged with a
    warning, or rejected with :class:`NoLeaders` when ``strict``.
    """
    if P.leaders.size == 0:
        if strict:
            raise NoLeaders(f"{P.name} has no leaders")
        warnings.warn(f"{P.name} has no leaders; returned unchanged", stacklevel=2)
        return P
    sym = symbol or P.alphabet[0]
    if sym not in P.alphabet:
        raise ValueError(f"unknown input symbol {sym!r}")
    lead = leader_list(P)
    k = len(lead)
    taken = set(P.states)
    pre = {a: _fresh(f"pre[{a}]", taken) for a in P.alphabet}
    pool = _fresh("pool", taken)
    boot = [_fresh(f"boot{j}", taken) for j in range(1, k + 1)]
    hold = {q: _fresh(f"hold[{q}]", taken) for q in dict.fromkeys(lead[1:])}
    new = list(pre.values()) + [pool] + boot + list(hold.values())
    states = tuple(P.states) + tuple(new)

    rvs = list(P.rendezvous)
    bcs = [Broadcast(t.sender_pre, t.sender_post, _extend(t.transfer, new), t.name) for t in P.broadcasts]
    taken_ids = set(P.transition_ids)
    elect = _extend(total_identity(P.states), new, {pre[sym]: pool})
    bcs.append(Broadcast(pre[sym], boot[0], elect, _fresh("elect", taken_ids)))
    for j in range(1, k):
        rvs.append(RendezVous((boot[j - 1], pool), (boot[j], hold[lead[j]]), _fresh(f"recruit{j}", taken_ids)))
    release = {pool: P.input_map[sym]}
    release.update({pre[a]: P.input_map[a] for a in P.alphabet})
    release.update({h: q for q, h in hold.items()})
    bcs.append(Broadcast(boot[-1], lead[0], _extend(total_identity(P.states), new, release),
                         _fresh("release", taken_ids)))

    outputs = dict(P.output_map)
    outputs.update({pre[a]: P.output_map[P.input_map[a]] for a in P.alphabet})
    outputs[pool] = P.output_map[P.input_map[sym]]
    outputs.update({b: P.output_map[lead[0]] for b in boot})
    outputs.update({h: P.output_map[q] for q, h in hold.items()})
    meta = dict(P.metadata)
    meta["input-shift"] = f"{sym}:-{k}"
    meta["bootstrap-states"] = " ".join(boot)
    return _finish(BroadcastProtocol(
        states=states, rendezvous=tuple(rvs), broadcasts=tuple(bcs), alphabet=P.alphabet,
        leaders=Configuration(), input_map=dict(pre), output_map=outputs,
        name=f"{P.name}-leaderless", metadata=meta))


def election_violations(P: BroadcastProtocol, input, budget: int = DEFAULT_BUDGET) -> list:
    """Reachable configurations of a ``to_leaderless`` output with more
    than one agent in the bootstrap states."""
    boot = set(P.metadata.get("bootstrap-states", "").split())
    g = build_graph(P, initial_configuration(P, input), budget)
    return [C for C in g.configs() if sum(n for s, n in C.items() if s in boot) > 1]


def total_identity(states):
    return {s: s for s in states}


def parse_shift(P: BroadcastProtocol) -> dict:
    """Input shift recorded by a transformation, as ``{symbol: delta}``."""
    text = P.metadata.get("input-shift", "")
    out = {}
    for item in text.split():
        sym, _, delta = item.rpartition(":")
        out[sym] = int(delta)
    return out


def shifted_input(P: BroadcastProtocol, input) -> tuple | None:
    """Input of the source protocol that ``input`` of the transformed ``P``
    stands for, or None when the shift would make it negative."""
    shift = parse_shift(P)
    out = []
    for sym, n in zip(P.alphabet, input):
        n += shift.get(sym, 0)
        if n < 0:
            return None
        out.append(n)
    return tuple(out)


# ----------------------------------------------------------- single broadcaster

def to_single_broadcaster(P: BroadcastProtocol) -> BroadcastProtocol:
    """Protocol in which only the leader states ``lead[...]`` broadcast.

    The leader simulates one ordinary agent in state p as ``lead[p]``.  An
    agent in q wanting to fire ``t: q -> q'; f`` meets the leader, parks in
    ``aux[t]`` while the leader moves to ``lead[p|t]``, and the leader then
    broadcasts ``f`` extended with ``aux[t] -> q'``.  An existing leader is
    reused; otherwise one extra agent of the first input symbol is added
    (recorded as ``input-shift``).  Without broadcasts only the unused leader
    states are added.
    """
    taken = set(P.states)
    has_leader = P.leaders.size > 0
    if has_leader:
        start = leader_list(P)[0]
    else:
        start = P.input_map[P.alphabet[0]]
    pos = sorted(agent_reach(P, {"lead": start})["lead"] if P.broadcasts else (), key=P.states.index)
    lead = {p: _fresh(f"lead[{p}]", taken) for p in pos}
    tids = P.transition_ids[len(P.rendezvous):]
    busy = {}
    aux = {}
    for tid, t in zip(tids, P.broadcasts):
        aux[tid] = _fresh(f"aux[{tid}]", taken)
        for p in pos:
            busy[(p, tid)] = _fresh(f"lead[{p}|{tid}]", taken)
    new = list(lead.values()) + list(busy.values()) + list(aux.values())
    states = tuple(P.states) + tuple(new)

    rvs = list(P.rendezvous)
    for t in P.rendezvous:
        (q1, q2), (r1, r2) = t.pre, t.post
        if q1 in lead and r1 in lead:
            rvs.append(RendezVous((lead[q1], q2), (lead[r1], r2)))
        if q2 in lead and r2 in lead:
            rvs.append(RendezVous((q1, lead[q2]), (r1, lead[r2])))
    bcs = []
    for tid, t in zip(tids, P.broadcasts):
        own = _extend(t.transfer, new)
        delegated = _extend(t.transfer, new, {aux[tid]: t.sender_post})
        if t.sender_pre in lead and t.sender_post in lead:
            bcs.append(Broadcast(lead[t.sender_pre], lead[t.sender_post], own))
        for p in pos:
            if t.transfer[p] not in lead:
                continue
            rvs.append(RendezVous((t.sender_pre, lead[p]), (aux[tid], busy[(p, tid)])))
            bcs.append(Broadcast(busy[(p, tid)], lead[t.transfer[p]], delegated))

    outputs = dict(P.output_map)
    outputs.update({lead[p]: P.output_map[p] for p in pos})
    outputs.update({busy[(p, tid)]: P.output_map[p] for (p, tid) in busy})
    outputs.update({aux[tid]: P.output_map[t.sender_pre] for tid, t in zip(tids, P.broadcasts)})
    meta = dict(P.metadata)
    leaders = Counter(P.leaders)
    if P.broadcasts:
        if has_leader:
            leaders[start] -= 1
        else:
            meta["input-shift"] = f"{P.alphabet[0]}:+1"
        leaders[lead[start]] += 1
    meta["leader-states"] = " ".join(list(lead.values()) + list(busy.values()))
    return _finish(BroadcastProtocol(
        states=states, rendezvous=tuple(rvs), broadcasts=tuple(bcs), alphabet=P.alphabet,
        leaders=Configuration(leaders), input_map=dict(P.input_map), output_map=outputs,
        name=f"{P.name}-single-broadcaster", metadata=meta))


def broadcasters(P: BroadcastProtocol) -> set:
    return {t.sender_pre for t in P.broadcasts}


def single_broadcaster_violations(P: BroadcastProtocol) -> list:
    """Structural problems: a broadcast sent from outside the leader
    states, a transition moving an agent into or out of them, or not
    exactly one leader."""
    leader_states = set(P.metadata.get("leader-states", "").split())
    bad = []
    for tid, t in zip(P.transition_ids, P.transitions):
        if isinstance(t, Broadcast):
            if t.sender_pre not in leader_states:
                bad.append(f"{tid}: sender {t.sender_pre} is not a leader state")
            if t.sender_post not in leader_states:
                bad.append(f"{tid}: sender leaves the leader states")
            for s, img in t.transfer.items():
                if (s in leader_states) != (img in leader_states):
                    bad.append(f"{tid}: transfer moves {s} across the leader states")
        else:
            for a, b in zip(t.pre, t.post):
                if (a in leader_states) != (b in leader_states):
                    bad.append(f"{tid}: {a} -> {b} crosses the leader states")
    if P.broadcasts and sum(n for s, n in P.leaders.items() if s in leader_states) != 1:
        bad.append("expected exactly one agent in the leader states")
    return bad


# ---------------------------------------------------------------- single signal

def _silence_check(P, inputs, budget):
    nrv = len(P.rendezvous)
    for x in inputs:
        try:
            g = build_graph(P, initial_configuration(P, x), budget)
        except PopulationTooSmall:
            continue
        except BudgetExceeded:
            warnings.warn(f"silence of {P.name} not checked at {x}: budget exceeded", NotSilentWarning,
                          stacklevel=3)
            continue
        b = decide(P, x, budget, graph=g)
        if b is None or not check_silently_computes(P, x, b, budget, graph=g).passed:
            warnings.warn(f"{P.name} is not silent at input {x}; the single-signal "
                          "construction relies on silence", NotSilentWarning, stacklevel=3)
            return False
        for u in range(len(g)):
            if g.is_terminal(u) and any(g.tids[e] >= nrv for e in range(g.offsets[u], g.offsets[u + 1])):
                warnings.warn(f"{P.name} has a broadcast enabled in a terminal configuration at input {x}; "
                              "the single-signal output can restart from there forever "
                              "(see prune_idle_broadcasts)", NotSilentWarning, stacklevel=3)
                return False
    return True


def prune_idle_broadcasts(P: BroadcastProtocol, inputs, budget: int = DEFAULT_BUDGET) -> BroadcastProtocol:
    """Drop every broadcast that fires somewhere on ``inputs`` but never
    changes the configuration there.

    The evidence is empirical: the result agrees with ``P`` on the explored
    inputs, and elsewhere only if those broadcasts are idle in general.
    """
    nrv = len(P.rendezvous)
    fired, moved = set(), set()
    for x in inputs:
        try:
            g = build_graph(P, initial_configuration(P, x), budget)
        except PopulationTooSmall:
            continue
        for u in range(len(g)):
            for e in range(g.offsets[u], g.offsets[u + 1]):
                t = g.tids[e]
                if t >= nrv:
                    fired.add(t)
                    if g.targets[e] != u:
                        moved.add(t)
    idle = fired - moved
    if not idle:
        return P
    ids = P.transition_ids
    meta = dict(P.metadata)
    meta["pruned-broadcasts"] = " ".join(ids[t] for t in sorted(idle))
    return _finish(BroadcastProtocol(
        states=P.states, rendezvous=P.rendezvous,
        broadcasts=tuple(Broadcast(t.sender_pre, t.sender_post, t.transfer, t.name or ids[nrv + i])
                         for i, t in enumerate(P.broadcasts) if nrv + i not in idle),
        alphabet=P.alphabet, leaders=P.leaders, input_map=P.input_map, output_map=P.output_map,
        name=P.name, metadata=meta))


def to_single_signal(P: BroadcastProtocol, check_inputs=(), budget: int = DEFAULT_BUDGET) -> BroadcastProtocol:
    """Single-signal protocol computing what the silent protocol ``P``
    computes.

    States are ``[q|r]`` (position q, origin r), ``[q|r|@t]`` (broadcaster
    replaying t), ``[q|r|frozen]``, ``[q|r|err]`` and ``[r|r|reset]``.
    Origins are the initial states; positions are restricted to those an
    agent of that origin can reach.  Silence is checked on ``check_inputs``
    and a :class:`NotSilentWarning` is issued when it fails.
    """
    _silence_check(P, check_inputs, budget)
    origins = list(dict.fromkeys([P.input_map[a] for a in P.alphabet] + leader_list(P)))
    reach = agent_reach(P, {r: r for r in origins})
    tids = P.transition_ids[len(P.rendezvous):]

    def nm(*parts):
        return "[" + "|".join(parts) + "]"

    normal, marked, sending = {}, {}, {}
    states, pos_of = [], {}
    for r in origins:
        for q in P.states:
            if q in reach[r]:
                normal[(q, r)] = nm(q, r)
    for r in origins:
        for q in P.states:
            if q not in reach[r]:
                continue
            for mark in ("frozen", "err"):
                marked[(q, r, mark)] = nm(q, r, mark)
        marked[(r, r, "reset")] = nm(r, r, "reset")
        for tid, t in zip(tids, P.broadcasts):
            if t.sender_pre in reach[r]:
                sending[(t.sender_post, r, tid)] = nm(t.sender_post, r, "@" + tid)
    for (q, r), s in normal.items():
        pos_of[s] = q
    for (q, r, _), s in list(marked.items()) + list(sending.items()):
        pos_of[s] = q
    states = list(normal.values()) + list(sending.values()) + list(marked.values())
    if len(set(states)) != len(states):
        raise InvalidProtocol(["single-signal state names are not injective"])

    freeze = {}
    for (q, r), s in normal.items():
        freeze[s] = marked[(q, r, "frozen")]
    for key, s in list(sending.items()) + list(marked.items()):
        freeze[s] = marked[(key[0], key[1], "err")]

    rvs, bcs = [], []
    # simulated rendez-vous
    for t in P.rendezvous:
        (q1, q2), (p1, p2) = t.pre, t.post
        for r1 in origins:
            if (q1, r1) not in normal:
                continue
            for r2 in origins:
                if (q2, r2) in normal:
                    rvs.append(RendezVous((normal[(q1, r1)], normal[(q2, r2)]),
                                          (normal[(p1, r1)], normal[(p2, r2)])))
    for tid, t in zip(tids, P.broadcasts):
        for r in origins:
            if (t.sender_pre, r) in normal:
                # initiation
                bcs.append(Broadcast(normal[(t.sender_pre, r)], sending[(t.sender_post, r, tid)], freeze))
        for (q1, r1, t1), s in sending.items():
            if t1 != tid:
                continue
            for (q2, r2), n2 in normal.items():
                # receiver's response
                rvs.append(RendezVous((s, marked[(q2, r2, "frozen")]), (s, normal[(t.transfer[q2], r2)])))
            for (q2, r2), n2 in normal.items():
                # completion
                rvs.append(RendezVous((s, n2), (normal[(q1, r1)], n2)))
    for (q, r, mark), s in marked.items():
        if mark == "err":
            bcs.append(Broadcast(s, marked[(r, r, "reset")], freeze))
    abnormal = list(sending.items()) + list(marked.items())
    for r in origins:
        rs = marked[(r, r, "reset")]
        for key, s in abnormal:
            rvs.append(RendezVous((rs, s), (rs, normal[(key[1], key[1])])))
        for s in states:
            rvs.append(RendezVous((rs, s), (normal[(r, r)], s)))
    for (q, r, mark), s in marked.items():
        if mark == "frozen":
            for other in states:
                rvs.append(RendezVous((s, other), (marked[(q, r, "err")], other)))

    outputs = {s: P.output_map[pos_of[s]] for s in states}
    return _finish(BroadcastProtocol(
        states=tuple(states), rendezvous=tuple(rvs), broadcasts=tuple(bcs), alphabet=P.alphabet,
        leaders=Configuration(Counter(normal[(q, q)] for q in P.leaders.agents())),
        input_map={a: normal[(P.input_map[a], P.input_map[a])] for a in P.alphabet},
        output_map=outputs, name=f"{P.name}-single-signal", metadata=dict(P.metadata)))


def signal_origin(state: str):
    """Origin component of a ``to_single_signal`` state name."""
    parts = split_top(state[1:-1], "|")
    return parts[1] if len(parts) > 1 else None


def is_single_signal(P: BroadcastProtocol) -> bool:
    """All broadcasts use one transfer function."""
    if not P.broadcasts:
        return True
    first = P.broadcasts[0].transfer
    return all(t.transfer is first or dict(t.transfer) == dict(first) for t in P.broadcasts)


# ------------------------------------------------------------------ reset check

def check_reset_protocol(P: BroadcastProtocol, inputs, budget: int = DEFAULT_BUDGET) -> VerificationReport:
    """Per input: every broadcast step from every reachable configuration
    must lead back to the initial configuration.  A failing entry's witness
    is an execution ending with the offending broadcast step."""
    nrv = len(P.rendezvous)
    report = VerificationReport()
    for x in inputs:
        x = tuple(x)
        try:
            g = build_graph(P, initial_configuration(P, x), budget)
        except BudgetExceeded as exc:
            report.entries.append(ReportEntry(x, None, "reset", "budget", exc.explored or 0, note=str(exc)))
            continue
        except PopulationTooSmall as exc:
            report.entries.append(ReportEntry(x, None, "reset", "skip", 0, note=str(exc)))
            continue
        found = None
        for u in range(len(g)):
            for e in range(g.offsets[u], g.offsets[u + 1]):
                if g.tids[e] >= nrv and g.targets[e] != 0:
                    found = (u, g.tids[e], g.targets[e])
                    break
            if found:
                break
        if found is None:
            report.entries.append(ReportEntry(x, None, "reset", "pass", len(g)))
        else:
            u, tid, v = found
            witness = g.path_to(u) + [(P.transition_ids[tid], g.config(v))]
            note = f"{P.transition_ids[tid]} from {g.config(u).to_text()} reaches {g.config(v).to_text()}"
            report.entries.append(ReportEntry(x, None, "reset", "fail", len(g), witness, note))
    return report
