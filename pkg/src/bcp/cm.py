"""Counter machines: model, text format, semantics and exhaustive checks.

Text format::

    cm <name>
    counters: x1 x2 z
    input-arity: 2
    states: q0 qa qr q1
    init: q0    accept: qa    reject: qr
    bound: n                     # n | weak-n | poly <c>
    trans: q0 nonzero(x1) q1
    trans: q1 [dec(x1); inc(z)] q0

A bracketed list of k instructions is shorthand for a chain of k single
transitions through fresh states ``<src>#m<j>#<i>``; each of the first
k-1 steps gets a reverse edge (inc/dec swapped, tests become nop), so a
chain that blocks half way can always back out.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

from .errors import ArityMismatch, BoundExceeded, BudgetExceeded, ParseError
from .textfmt import logical_lines

OPS = ("inc", "dec", "zero", "nonzero", "nop")
BOUND_KINDS = ("n", "weak-n", "poly")
DEFAULT_CM_BUDGET = 2_000_000

_INS_RE = re.compile(r"^(inc|dec|zero|nonzero)\(\s*([^()\s]+)\s*\)$|^nop$")
_NAME_RE = re.compile(r"^[^\s:;\[\]()]+$")


class Instruction(NamedTuple):
    op: str
    counter: Optional[str] = None

    def __str__(self):
        return "nop" if self.op == "nop" else f"{self.op}({self.counter})"

    def inverse(self) -> "Instruction":
        if self.op == "inc":
            return Instruction("dec", self.counter)
        if self.op == "dec":
            return Instruction("inc", self.counter)
        return NOP


NOP = Instruction("nop")


def inc(x):
    return Instruction("inc", x)


def dec(x):
    return Instruction("dec", x)


def zero(x):
    return Instruction("zero", x)


def nonzero(x):
    return Instruction("nonzero", x)


def parse_instruction(text: str, line=None) -> Instruction:
    m = _INS_RE.match(text.strip())
    if not m:
        raise ParseError(f"bad instruction {text.strip()!r}", line)
    if m.group(1) is None:
        return NOP
    return Instruction(m.group(1), m.group(2))


class Bound(NamedTuple):
    kind: str  # n | weak-n | poly
    degree: int = 1

    def __str__(self):
        return f"poly {self.degree}" if self.kind == "poly" else self.kind

    @classmethod
    def parse(cls, text: str, line=None) -> "Bound":
        words = text.split()
        if words == ["n"]:
            return cls("n", 1)
        if words == ["weak-n"]:
            return cls("weak-n", 1)
        if len(words) == 2 and words[0] == "poly" and words[1].isdigit() and int(words[1]) >= 1:
            return cls("poly", int(words[1]))
        raise ParseError(f"bad bound {text!r}; expected n, weak-n or poly <c>", line)

    @property
    def poly_degree(self) -> int:
        """Degree c with the bound implying n^c-boundedness (weak-n is not
        of this form)."""
        if self.kind == "n":
            return 1
        if self.kind == "poly":
            return self.degree
        raise ValueError("weak-n is not a polynomial sum bound")


class Transition(NamedTuple):
    src: str
    ins: Instruction
    dst: str

    def __str__(self):
        return f"{self.src} {self.ins} {self.dst}"


@dataclass(frozen=True)
class CounterMachine:
    name: str
    states: tuple
    counters: tuple
    input_arity: int
    transitions: tuple
    init: str
    accept: str
    reject: str
    bound: Optional[Bound] = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for attr in ("states", "counters", "transitions"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))

    __hash__ = object.__hash__

    @property
    def k(self) -> int:
        return len(self.counters)

    @property
    def input_counters(self) -> tuple:
        return self.counters[: self.input_arity]


class CMConfiguration(NamedTuple):
    state: str
    values: tuple

    @property
    def size(self) -> int:
        return sum(self.values)

    def __str__(self):
        return f"({self.state}, ({', '.join(map(str, self.values))}))"


def validate_machine(M: CounterMachine) -> tuple:
    """Return ``(errors, warnings)``."""
    errors, warnings = [], []
    Q = set(M.states)
    X = set(M.counters)
    if len(Q) != len(M.states):
        errors.append("duplicate control states")
    if len(X) != len(M.counters):
        errors.append("duplicate counters")
    if not 0 <= M.input_arity <= len(M.counters):
        errors.append(f"input arity {M.input_arity} not in 0..{len(M.counters)}")
    for role, q in (("init", M.init), ("accept", M.accept), ("reject", M.reject)):
        if q not in Q:
            errors.append(f"{role} state {q} is not a control state")
    if M.accept == M.reject:
        errors.append("accepting and rejecting states coincide")
    for t in M.transitions:
        for q in (t.src, t.dst):
            if q not in Q:
                errors.append(f"transition {t}: unknown state {q}")
        if t.ins.op not in OPS:
            errors.append(f"transition {t}: unknown instruction")
        elif t.ins.op != "nop" and t.ins.counter not in X:
            errors.append(f"transition {t}: unknown counter {t.ins.counter}")
    for q in (M.accept, M.reject):
        if any(t.src == q for t in M.transitions):
            warnings.append(f"halting state {q} has outgoing transitions")
    return errors, warnings


# ---------------------------------------------------------------- text format

class _Builder:
    """Accumulates transitions, expanding instruction chains."""

    def __init__(self):
        self.transitions = []
        self._seen = set()
        self.fresh = []
        self._chains = {}

    def add(self, src, ins, dst):
        t = Transition(src, ins, dst)
        if t not in self._seen:
            self._seen.add(t)
            self.transitions.append(t)

    def chain(self, src, instructions, dst, tag=None):
        instructions = list(instructions)
        if len(instructions) == 1:
            self.add(src, instructions[0], dst)
            return
        if tag is None:
            j = self._chains.get(src, 0)
            self._chains[src] = j + 1
            tag = f"m{j}"
        mids = [f"{src}#{tag}#{i}" for i in range(1, len(instructions))]
        self.fresh.extend(mids)
        path = [src] + mids + [dst]
        for i, ins in enumerate(instructions):
            self.add(path[i], ins, path[i + 1])
            if i < len(instructions) - 1:
                self.add(path[i + 1], ins.inverse(), path[i])


def _parse_ins_list(text, line):
    text = text.strip()
    if text.startswith("["):
        if not text.endswith("]"):
            raise ParseError("unterminated instruction list", line)
        items = [s for s in text[1:-1].split(";")]
        if any(not s.strip() for s in items):
            raise ParseError("empty instruction in list", line)
        return [parse_instruction(s, line) for s in items]
    return [parse_instruction(text, line)]


def parse_machine(text: str) -> CounterMachine:
    name = counters = arity = states = bound = None
    roles = {}
    meta = {}
    b = _Builder()
    pending = []
    for no, line in logical_lines(text):
        if line.startswith("cm ") or line == "cm":
            if name is not None:
                raise ParseError("duplicate 'cm' header", no)
            name = line[2:].strip()
            if not name:
                raise ParseError("cm needs a name", no)
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        if not sep:
            raise ParseError(f"expected 'key: value', got {line!r}", no)
        rest = rest.strip()
        if key == "counters":
            if counters is not None:
                raise ParseError("duplicate 'counters' section", no)
            counters = rest.split()
        elif key == "input-arity":
            if not rest.isdigit():
                raise ParseError("input-arity must be a natural number", no)
            arity = int(rest)
        elif key == "states":
            if states is not None:
                raise ParseError("duplicate 'states' section", no)
            states = rest.split()
        elif key in ("init", "accept", "reject"):
            found = re.findall(r"(init|accept|reject):\s*(\S+)", line)
            if not found:
                raise ParseError(f"bad {key} line", no)
            for role, q in found:
                if role in roles:
                    raise ParseError(f"duplicate {role} state", no)
                roles[role] = q
        elif key == "bound":
            bound = Bound.parse(rest, no)
        elif key == "meta":
            k, eq, v = rest.partition("=")
            if not eq:
                raise ParseError("meta entries read 'meta: key = value'", no)
            meta[k.strip()] = v.strip()
        elif key == "trans":
            parts = rest.split(None, 1)
            if len(parts) != 2:
                raise ParseError("trans needs 'src instruction dst'", no)
            src, body = parts
            body, _, dst = body.rstrip().rpartition(" ")
            if not body:
                raise ParseError("trans needs 'src instruction dst'", no)
            pending.append((no, src, _parse_ins_list(body, no), dst))
        else:
            raise ParseError(f"unknown key {key!r}", no)
    for what, value in (("cm", name), ("counters", counters), ("states", states)):
        if value is None:
            raise ParseError(f"missing '{what}' section")
    for role in ("init", "accept", "reject"):
        if role not in roles:
            raise ParseError(f"missing '{role}' state")
    for s in list(states) + list(counters):
        if not _NAME_RE.match(s):
            raise ParseError(f"invalid name {s!r}")
    if len(set(states)) != len(states):
        raise ParseError("duplicate control state")
    if len(set(counters)) != len(counters):
        raise ParseError("duplicate counter")
    if arity is None:
        arity = len(counters)
    if arity > len(counters):
        raise ParseError("input-arity exceeds number of counters")
    declared = set(states)
    for no, src, ins, dst in pending:
        for q in (src, dst):
            if q not in declared:
                raise ParseError(f"unknown state {q!r}", no)
        for i in ins:
            if i.op != "nop" and i.counter not in counters:
                raise ParseError(f"unknown counter {i.counter!r}", no)
        b.chain(src, ins, dst)
    clash = declared.intersection(b.fresh)
    if clash:
        raise ParseError(f"generated state names clash with declared ones: {sorted(clash)}")
    M = CounterMachine(name, tuple(states) + tuple(b.fresh), tuple(counters), arity,
                       tuple(b.transitions), roles["init"], roles["accept"], roles["reject"],
                       bound, meta)
    errors, _ = validate_machine(M)
    if errors:
        raise ParseError("; ".join(errors))
    return M


def serialize_machine(M: CounterMachine) -> str:
    lines = [f"cm {M.name}",
             "counters: " + " ".join(M.counters),
             f"input-arity: {M.input_arity}",
             "states: " + " ".join(M.states),
             f"init: {M.init}    accept: {M.accept}    reject: {M.reject}"]
    if M.bound is not None:
        lines.append(f"bound: {M.bound}")
    for k, v in M.metadata.items():
        lines.append(f"meta: {k} = {v}")
    lines.extend(f"trans: {t}" for t in M.transitions)
    return "\n".join(lines) + "\n"


def load_machine(path) -> CounterMachine:
    with open(path, encoding="utf-8") as fh:
        return parse_machine(fh.read())


def save_machine(M: CounterMachine, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_machine(M))


# ------------------------------------------------------------------ semantics

def cm_initial(M: CounterMachine, input) -> CMConfiguration:
    input = tuple(int(v) for v in input)
    if len(input) != M.input_arity:
        raise ArityMismatch(f"machine takes {M.input_arity} inputs, got {len(input)}")
    if any(v < 0 for v in input):
        raise ValueError("inputs must be non-negative")
    return CMConfiguration(M.init, input + (0,) * (M.k - M.input_arity))


class _Indexed:
    """Transitions grouped by source, counters by position."""

    def __init__(self, M: CounterMachine):
        cix = {x: i for i, x in enumerate(M.counters)}
        self.out = {}
        for t in M.transitions:
            self.out.setdefault(t.src, []).append((t.ins.op, cix.get(t.ins.counter), t.dst))

    def successors(self, conf):
        q, v = conf
        result = []
        for op, i, r in self.out.get(q, ()):
            if op == "nop":
                result.append((r, v))
            elif op == "inc":
                result.append((r, v[:i] + (v[i] + 1,) + v[i + 1:]))
            elif op == "dec":
                if v[i] > 0:
                    result.append((r, v[:i] + (v[i] - 1,) + v[i + 1:]))
            elif op == "zero":
                if v[i] == 0:
                    result.append((r, v))
            elif v[i] > 0:
                result.append((r, v))
        return result


def cm_step(M: CounterMachine, config) -> set:
    q, v = config
    return {CMConfiguration(r, w) for r, w in _Indexed(M).successors((q, tuple(v)))}


def counter_cap(M: CounterMachine, n: int, slack: int = 0):
    """``(sum_cap, each_cap)`` implied by the declared bound, or Nones."""
    if M.bound is None:
        return None, None
    if M.bound.kind == "weak-n":
        return None, n + slack
    return n ** M.bound.poly_degree + slack, None


@dataclass
class CMGraph:
    configs: list
    succ: list
    parent: list

    def __len__(self):
        return len(self.configs)

    def path_to(self, v: int) -> list:
        out = []
        while v != -1:
            out.append(self.configs[v])
            v = self.parent[v]
        return out[::-1]


def explore(M: CounterMachine, input, budget: int = DEFAULT_CM_BUDGET, slack: int = 0,
            enforce_bound: bool = True) -> CMGraph:
    """Breadth-first reachable configurations of ``M`` on ``input``.

    With ``enforce_bound`` and a declared bound, reaching a configuration
    outside it raises :class:`BudgetExceeded` (the declaration is what
    makes exploration finite).
    """
    start = cm_initial(M, input)
    n = sum(start.values)
    sum_cap, each_cap = counter_cap(M, n, slack) if enforce_bound else (None, None)
    ix = _Indexed(M)
    c0 = (start.state, start.values)
    index = {c0: 0}
    configs, succ, parent = [c0], [], [-1]
    u = 0
    while u < len(configs):
        edges = []
        for c in ix.successors(configs[u]):
            v = index.get(c)
            if v is None:
                vals = c[1]
                if (sum_cap is not None and sum(vals) > sum_cap) or \
                        (each_cap is not None and max(vals, default=0) > each_cap):
                    raise BoundExceeded(CMConfiguration(*c), M.bound)
                if len(configs) >= budget:
                    raise BudgetExceeded(len(configs), budget)
                v = len(configs)
                index[c] = v
                configs.append(c)
                parent.append(u)
            edges.append(v)
        succ.append(edges)
        u += 1
    return CMGraph([CMConfiguration(q, w) for q, w in configs], succ, parent)


def cm_reachable(M: CounterMachine, input, budget: int = DEFAULT_CM_BUDGET) -> set:
    return set(explore(M, input, budget).configs)


def _co_reach(g: CMGraph, targets) -> list:
    preds = [[] for _ in range(len(g))]
    for u, vs in enumerate(g.succ):
        for v in vs:
            preds[v].append(u)
    seen = [False] * len(g)
    queue = deque()
    for t in targets:
        seen[t] = True
        queue.append(t)
    while queue:
        v = queue.popleft()
        for u in preds[v]:
            if not seen[u]:
                seen[u] = True
                queue.append(u)
    return seen


def _decide(M, input, budget):
    g = explore(M, input, budget)
    accepts = any(c.state == M.accept for c in g.configs)
    if accepts:
        return g, True, False
    seen = _co_reach(g, [i for i, c in enumerate(g.configs) if c.state == M.reject])
    return g, False, all(seen)


def cm_accepts(M: CounterMachine, input, budget: int = DEFAULT_CM_BUDGET) -> bool:
    return _decide(M, input, budget)[1]


def cm_rejects(M: CounterMachine, input, budget: int = DEFAULT_CM_BUDGET) -> bool:
    return _decide(M, input, budget)[2]


@dataclass
class CMEntry:
    input: tuple
    expected: Optional[int]
    verdict: str  # pass | fail | budget
    accepts: Optional[bool] = None
    rejects: Optional[bool] = None
    nodes: int = 0
    witness: Optional[list] = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "input": list(self.input),
            "expected": self.expected,
            "verdict": self.verdict,
            "accepts": self.accepts,
            "rejects": self.rejects,
            "nodes": self.nodes,
            "witness": None if self.witness is None else [str(c) for c in self.witness],
            "note": self.note,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(", ", ": "))


@dataclass
class CMReport:
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


def cm_check_computes(M: CounterMachine, oracle: Callable, inputs,
                      budget: int = DEFAULT_CM_BUDGET) -> CMReport:
    """Per input: accept iff ``oracle`` says 1, reject iff it says 0."""
    report = CMReport()
    for x in inputs:
        x = tuple(x)
        expected = int(oracle(x))
        try:
            g, acc, rej = _decide(M, x, budget)
        except BudgetExceeded as exc:
            report.entries.append(CMEntry(x, expected, "budget", note=str(exc)))
            continue
        ok = acc if expected == 1 else rej
        witness = None
        if not ok:
            # accepting run when rejection was expected, otherwise nothing finite to show
            if acc:
                witness = g.path_to(next(i for i, c in enumerate(g.configs) if c.state == M.accept))
        report.entries.append(CMEntry(x, expected, "pass" if ok else "fail", acc, rej, len(g), witness))
    return report


def _violates(values, kind, n, c):
    if kind == "n":
        return sum(values) > n
    if kind == "weak-n":
        return max(values, default=0) > n
    return sum(values) > n ** c


def cm_check_bounded(M: CounterMachine, inputs, bound, budget: int = DEFAULT_CM_BUDGET) -> CMReport:
    """Explore every reachable configuration and check ``bound`` ('n',
    'weak-n', ``('poly', c)`` or a :class:`Bound`).  A failing entry carries
    the path to the first violating configuration in breadth-first order."""
    if isinstance(bound, str):
        bound = Bound.parse(bound)
    elif not isinstance(bound, Bound):
        bound = Bound(*bound)
    report = CMReport()
    ix = _Indexed(M)
    for x in inputs:
        x = tuple(x)
        start = cm_initial(M, x)
        n = start.size
        c0 = (start.state, start.values)
        index = {c0: 0}
        configs, parent = [c0], [-1]
        bad = 0 if _violates(start.values, bound.kind, n, bound.degree) else None
        u = 0
        verdict = None
        while bad is None and u < len(configs):
            for c in ix.successors(configs[u]):
                if c in index:
                    continue
                if len(configs) >= budget:
                    verdict = "budget"
                    break
                index[c] = len(configs)
                configs.append(c)
                parent.append(u)
                if _violates(c[1], bound.kind, n, bound.degree):
                    bad = len(configs) - 1
                    break
            if verdict:
                break
            u += 1
        if verdict == "budget":
            report.entries.append(CMEntry(x, None, "budget", nodes=len(configs),
                                          note=f"budget {budget} exhausted"))
        elif bad is None:
            report.entries.append(CMEntry(x, None, "pass", nodes=len(configs)))
        else:
            g = CMGraph([CMConfiguration(q, w) for q, w in configs], [], parent)
            report.entries.append(CMEntry(x, None, "fail", nodes=len(configs), witness=g.path_to(bad),
                                          note=f"{g.configs[bad]} exceeds bound {bound}"))
    return report


def cm_run(M: CounterMachine, input, budget: int = DEFAULT_CM_BUDGET) -> dict:
    """Summary used by ``bcp cm run``."""
    g, acc, rej = _decide(M, input, budget)
    return {"input": list(input), "accepts": acc, "rejects": rej, "nodes": len(g)}
