"""Line-oriented text format for broadcast protocols.

    protocol <name>
    states: q1 q2 ...
    alphabet: A1 A2 ...
    input: A1 -> q1 ; A2 -> q2
    leaders: q3:1 q4:2
    output1: q5 q6
    rv [id]: p q -> p' q'
    bc [id]: q -> r ; p1 -> p1', p2 -> p2'
    meta: key = value

A ``#`` starts a comment when it begins a line or follows whitespace, so
generated names such as ``q1#inc#0`` survive.  Commas, semicolons and
arrows only separate at bracket depth zero, so ``(x1,x1,0)`` is one name.
"""

from __future__ import annotations

import re

from .core import Broadcast, BroadcastProtocol, Configuration, RendezVous, total_transfer
from .errors import ParseError

_OPEN = "([{"
_CLOSE = ")]}"
_ID_RE = re.compile(r"^[A-Za-z0-9_.\-\[\]{}|+^@!]+$")


def strip_comment(line: str) -> str:
    for i, ch in enumerate(line):
        if ch == "#" and (i == 0 or line[i - 1].isspace()):
            return line[:i]
    return line


def split_top(text: str, sep: str) -> list:
    """Split ``text`` on ``sep`` occurrences outside brackets."""
    parts, depth, start, i = [], 0, 0, 0
    while i < len(text):
        ch = text[i]
        if ch in _OPEN:
            depth += 1
        elif ch in _CLOSE:
            depth -= 1
        elif depth == 0 and text.startswith(sep, i):
            parts.append(text[start:i])
            i += len(sep)
            start = i
            continue
        i += 1
    parts.append(text[start:])
    return parts


def check_name(name: str, what: str = "state", line=None) -> str:
    bad = (
        not name
        or any(c.isspace() for c in name)
        or ":" in name
        or ";" in name
        or "->" in name
        or len(split_top(name, ",")) > 1
        or name.startswith("#")
    )
    if bad:
        raise ParseError(f"invalid {what} name {name!r}", line)
    return name


def logical_lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw).strip()
        if line:
            yield no, line


def _split_key(line, no):
    if line.startswith("protocol ") or line == "protocol":
        return "protocol", None, line[len("protocol"):].strip()
    key, sep, rest = line.partition(":")
    if not sep:
        raise ParseError(f"expected 'key: value', got {line!r}", no)
    words = key.split()
    if not words:
        raise ParseError("missing key", no)
    label = None
    if len(words) == 2 and words[0] in ("rv", "bc"):
        label = words[1]
        if not _ID_RE.match(label):
            raise ParseError(f"invalid transition id {label!r}", no)
    elif len(words) != 1:
        raise ParseError(f"unexpected key {key.strip()!r}", no)
    return words[0], label, rest.strip()


def parse_protocol(text: str) -> BroadcastProtocol:
    name = None
    states = None
    alphabet = None
    inputs = {}
    leaders = {}
    output1 = []
    rvs, bcs = [], []
    meta = {}
    seen = set()

    def known(s, no):
        if states is None:
            raise ParseError("'states:' must come before its first use", no)
        if s not in state_set:
            raise ParseError(f"unknown state {s!r}", no)
        return s

    state_set = set()
    for no, line in logical_lines(text):
        key, label, rest = _split_key(line, no)
        if key in ("protocol", "states", "alphabet", "input", "leaders", "output1"):
            if key in seen:
                raise ParseError(f"duplicate '{key}' section", no)
            seen.add(key)
        if key == "protocol":
            if not rest:
                raise ParseError("protocol needs a name", no)
            name = rest
        elif key == "states":
            states = [check_name(s, "state", no) for s in rest.split()]
            for s in states:
                if s in state_set:
                    raise ParseError(f"duplicate state declaration {s!r}", no)
                state_set.add(s)
        elif key == "alphabet":
            alphabet = [check_name(a, "symbol", no) for a in rest.split()]
            if len(set(alphabet)) != len(alphabet):
                raise ParseError("duplicate input symbol", no)
        elif key == "input":
            for entry in split_top(rest, ";"):
                lhs, arrow, rhs = entry.partition("->")
                if not arrow:
                    raise ParseError(f"bad input entry {entry.strip()!r}", no)
                sym, q = lhs.strip(), rhs.strip()
                if alphabet is None or sym not in alphabet:
                    raise ParseError(f"unknown input symbol {sym!r}", no)
                if sym in inputs:
                    raise ParseError(f"input symbol {sym!r} mapped twice", no)
                inputs[sym] = known(q, no)
        elif key == "leaders":
            for token in rest.split():
                q, _, n = token.rpartition(":")
                if not n.isdigit():
                    raise ParseError(f"bad leader entry {token!r}", no)
                known(q, no)
                if q in leaders:
                    raise ParseError(f"leader state {q!r} listed twice", no)
                leaders[q] = int(n)
        elif key == "output1":
            output1 = [known(q, no) for q in rest.split()]
        elif key == "rv":
            lhs, *more = split_top(rest, "->")
            if len(more) != 1:
                raise ParseError("rendez-vous needs exactly one '->'", no)
            pre, post = lhs.split(), more[0].split()
            if len(pre) != 2 or len(post) != 2:
                raise ParseError("rendez-vous needs two states on each side", no)
            rvs.append(RendezVous(tuple(known(s, no) for s in pre),
                                  tuple(known(s, no) for s in post), label))
        elif key == "bc":
            head, *tail = split_top(rest, ";")
            if len(tail) > 1:
                raise ParseError("broadcast has more than one ';'", no)
            sender = split_top(head, "->")
            if len(sender) != 2:
                raise ParseError("broadcast needs 'q -> r' before ';'", no)
            q, r = sender[0].strip(), sender[1].strip()
            partial = {}
            if tail and tail[0].strip():
                for entry in split_top(tail[0], ","):
                    parts = split_top(entry, "->")
                    if len(parts) != 2:
                        raise ParseError(f"bad transfer entry {entry.strip()!r}", no)
                    a, b = known(parts[0].strip(), no), known(parts[1].strip(), no)
                    if a in partial:
                        raise ParseError(f"transfer entry for {a!r} given twice", no)
                    partial[a] = b
            bcs.append(Broadcast(known(q, no), known(r, no), total_transfer(states, partial), label))
        elif key == "meta":
            k, eq, v = rest.partition("=")
            if not eq:
                raise ParseError("meta entries read 'meta: key = value'", no)
            meta[k.strip()] = v.strip()
        else:
            raise ParseError(f"unknown key {key!r}", no)

    for required, value in (("protocol", name), ("states", states), ("alphabet", alphabet)):
        if value is None:
            raise ParseError(f"missing '{required}' section")
    missing = [a for a in alphabet if a not in inputs]
    if missing:
        raise ParseError(f"input map misses symbols {missing}")
    outputs = {s: 0 for s in states}
    for s in output1:
        outputs[s] = 1
    return BroadcastProtocol(
        states=tuple(states),
        rendezvous=tuple(rvs),
        broadcasts=tuple(bcs),
        alphabet=tuple(alphabet),
        leaders=Configuration(leaders),
        input_map={a: inputs[a] for a in alphabet},
        output_map=outputs,
        name=name,
        metadata=meta,
    )


def serialize_protocol(p: BroadcastProtocol) -> str:
    lines = [f"protocol {p.name}"]
    lines.append("states: " + " ".join(p.states))
    lines.append("alphabet: " + " ".join(p.alphabet))
    lines.append("input: " + " ; ".join(f"{a} -> {p.input_map[a]}" for a in p.alphabet))
    if p.leaders.size:
        order = {s: i for i, s in enumerate(p.states)}
        items = sorted(p.leaders.items(), key=lambda kv: order.get(kv[0], len(order)))
        lines.append("leaders: " + " ".join(f"{s}:{n}" for s, n in items))
    lines.append("output1: " + " ".join(s for s in p.states if p.output_map.get(s) == 1))
    for k, v in p.metadata.items():
        lines.append(f"meta: {k} = {v}")
    for i, t in enumerate(p.rendezvous):
        label = f"rv {t.name}" if t.name else "rv"
        lines.append(f"{label}: {t.pre[0]} {t.pre[1]} -> {t.post[0]} {t.post[1]}")
    for i, t in enumerate(p.broadcasts):
        label = f"bc {t.name}" if t.name else "bc"
        moves = [f"{s} -> {t.transfer[s]}" for s in p.states if t.transfer.get(s, s) != s]
        line = f"{label}: {t.sender_pre} -> {t.sender_post}"
        if moves:
            line += " ; " + ", ".join(moves)
        lines.append(line)
    return "\n".join(line.rstrip() for line in lines) + "\n"


def load_protocol(path) -> BroadcastProtocol:
    with open(path, encoding="utf-8") as fh:
        return parse_protocol(fh.read())


def save_protocol(p: BroadcastProtocol, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_protocol(p))
