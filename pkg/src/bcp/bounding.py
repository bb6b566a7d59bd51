"""Lowering passes between counter-machine bound classes.

``weaken`` turns an n^c-bounded machine into a weakly n-bounded one by
storing every counter in base n+1 over c digit counters.  Two auxiliary
counters hold the constants n (``z^n``) and 0 (``z^0``); every gadget
starts and ends with those values.

``tighten`` turns a weakly n-bounded machine into an n-bounded one with a
counter ``y{S}`` per subset S of the counters; ``y{S}`` contributes its
value to every counter in S, and the sum over all subset counters stays n.

Generated control states are named ``<src>#<gadget>#<k>``.  Multi-step
instruction chains put decrements first, so a chain never raises a counter
above its final value on the way.
"""

from __future__ import annotations

from itertools import combinations

from .cm import (NOP, Bound, CounterMachine, Transition, dec, inc, nonzero,
                 validate_machine, zero)
from .errors import CounterCountTooLarge, MissingBoundDeclaration

MAX_TIGHTEN_COUNTERS = 8


class _Gen:
    """Builds the transition list of a lowered machine."""

    def __init__(self, taken):
        self.taken = set(taken)
        self.states = []
        self.transitions = []
        self._seen = set()
        self._next = {}

    def fresh(self, src: str, gadget: str) -> str:
        key = (src, gadget)
        k = self._next.get(key, 0)
        while True:
            name = f"{src}#{gadget}#{k}"
            k += 1
            if name not in self.taken:
                break
        self._next[key] = k
        self.taken.add(name)
        self.states.append(name)
        return name

    def add(self, src, ins, dst):
        t = Transition(src, ins, dst)
        if t not in self._seen:
            self._seen.add(t)
            self.transitions.append(t)

    def chain(self, src, instructions, dst):
        """Instruction chain, decrements first; every step but the last can
        be undone."""
        instructions = sorted(instructions, key=lambda i: i.op != "dec")
        path = [src] + [self.fresh(src, "m") for _ in instructions[1:]] + [dst]
        for i, ins in enumerate(instructions):
            self.add(path[i], ins, path[i + 1])
            if i < len(instructions) - 1:
                self.add(path[i + 1], ins.inverse(), path[i])

    def zero_chain(self, q, tests, r):
        """Sequential zero-tests from q to r; each intermediate state can
        return to q with a nop."""
        prev = q
        for i, x in enumerate(tests):
            nxt = r if i == len(tests) - 1 else self.fresh(q, "zero")
            self.add(prev, zero(x), nxt)
            if nxt != r:
                self.add(nxt, NOP, q)
            prev = nxt


def _fresh_counter(name, taken):
    while name in taken:
        name = "_" + name
    return name


def digit(x: str, i: int) -> str:
    return f"{x}^{i}"


def to_digits(value: int, n: int, c: int) -> tuple:
    """Base-(n+1) digits of ``value``, most significant first."""
    if value < 0 or value > (n + 1) ** c - 1:
        raise ValueError(f"{value} is not representable with {c} digits in base {n + 1}")
    out = []
    for _ in range(c):
        value, d = divmod(value, n + 1)
        out.append(d)
    return tuple(reversed(out))


def from_digits(digits, n: int) -> int:
    value = 0
    for d in digits:
        value = value * (n + 1) + d
    return value


def weaken(M: CounterMachine) -> CounterMachine:
    """n^c-bounded machine to an equivalent weakly n-bounded machine."""
    if M.bound is None:
        raise MissingBoundDeclaration(f"machine {M.name} declares no bound")
    if M.bound.kind == "weak-n":
        raise MissingBoundDeclaration("weaken needs an n or poly <c> declaration, got weak-n")
    c = M.bound.poly_degree
    X = M.counters
    digits = {x: [digit(x, i) for i in range(c)] for x in X}
    counters = [digits[x][0] for x in X] + [digits[x][i] for i in range(1, c) for x in X]
    zn = _fresh_counter("z^n", set(counters))
    z0 = _fresh_counter("z^0", set(counters) | {zn})
    counters += [zn, z0]
    g = _Gen(M.states)

    def set_zero(d, s, t):
        g.add(s, dec(d), s)
        g.add(s, zero(d), t)

    def set_n(d, s, t, src):
        g.add(s, dec(d), s)
        a = g.fresh(src, "setn")
        g.add(s, zero(d), a)
        g.chain(a, [dec(zn), inc(d), inc(z0)], a)
        b = g.fresh(src, "setn")
        g.add(a, zero(zn), b)
        g.chain(b, [dec(z0), inc(zn)], b)
        g.add(b, zero(z0), t)

    def equals_n(d, s, yes, no, src):
        g.chain(s, [dec(d), dec(zn), inc(z0)], s)
        a = g.fresh(src, "eqn")
        g.add(s, zero(d), a)
        for target in (yes, no):
            b = g.fresh(src, "eqn")
            g.add(a, zero(zn) if target == yes else nonzero(zn), b)
            g.chain(b, [dec(z0), inc(d), inc(zn)], b)
            g.add(b, zero(z0), target)

    # initialisation: z^n <- sum of the inputs, inputs restored
    start = g.fresh(M.init, "init")
    cur = start
    for x in M.input_counters:
        d = digits[x][0]
        g.chain(cur, [dec(d), inc(z0), inc(zn)], cur)
        back = g.fresh(M.init, "init")
        g.add(cur, zero(d), back)
        g.chain(back, [dec(z0), inc(d)], back)
        nxt = g.fresh(M.init, "init")
        g.add(back, zero(z0), nxt)
        cur = nxt
    g.add(cur, NOP, M.init)

    for t in M.transitions:
        q, ins, r = t
        if ins.op == "nop":
            g.add(q, NOP, r)
            continue
        ds = digits[ins.counter]
        if ins.op == "zero":
            g.zero_chain(q, ds, r)
        elif ins.op == "nonzero":
            for d in ds:
                g.add(q, nonzero(d), r)
        elif ins.op == "inc":
            entry = g.fresh(q, "inc")
            g.add(q, NOP, entry)
            for i, d in enumerate(ds):
                yes, no = g.fresh(q, "inc"), g.fresh(q, "inc")
                equals_n(d, entry, yes, no, q)
                g.add(no, inc(d), r)
                entry = g.fresh(q, "inc") if i < c - 1 else g.fresh(q, "overflow")
                set_zero(d, yes, entry)
        else:  # dec: borrow from the lowest nonzero digit
            g.add(q, dec(ds[0]), r)
            scan = q
            for i in range(1, c):
                nxt = g.fresh(q, "dec")
                g.add(scan, zero(ds[i - 1]), nxt)
                g.add(nxt, NOP, q)
                after = g.fresh(q, "dec")
                g.add(nxt, dec(ds[i]), after)
                # lower digits are all zero here; refill them with n
                for j in range(i - 1, -1, -1):
                    tgt = r if j == 0 else g.fresh(q, "dec")
                    set_n(ds[j], after, tgt, q)
                    after = tgt
                scan = nxt
    out = CounterMachine(
        name=f"{M.name}-weak",
        states=M.states + tuple(g.states),
        counters=tuple(counters),
        input_arity=M.input_arity,
        transitions=tuple(g.transitions),
        init=start,
        accept=M.accept,
        reject=M.reject,
        bound=Bound("weak-n"),
        metadata={"source": M.name, "pass": f"weaken c={c}"},
    )
    _check(out)
    return out


def subset_name(S) -> str:
    return "y{" + ",".join(S) + "}"


def represent(values, counters, n: int) -> dict:
    """One subset-counter representation of ``values`` (each at most n):
    layer the counters by value, like a staircase."""
    if any(v > n or v < 0 for v in values):
        raise ValueError("every value must lie in 0..n")
    order = sorted(range(len(values)), key=lambda i: -values[i])
    levels = [values[i] for i in order] + [0]
    rep = {(): n - levels[0]} if order else {(): n}
    for j in range(len(order)):
        S = tuple(counters[i] for i in sorted(order[: j + 1]))
        rep[S] = levels[j] - levels[j + 1]
    return {subset_name(S): a for S, a in rep.items() if a}


def represented_values(rep: dict, counters) -> tuple:
    """Counter values encoded by a subset-counter assignment."""
    out = []
    for x in counters:
        total = 0
        for name, a in rep.items():
            members = name[2:-1].split(",") if name != "y{}" else []
            if x in members:
                total += a
        out.append(total)
    return tuple(out)


def tighten(M: CounterMachine, max_counters: int = MAX_TIGHTEN_COUNTERS) -> CounterMachine:
    """Weakly n-bounded machine to an equivalent n-bounded machine."""
    if M.bound is None:
        raise MissingBoundDeclaration(f"machine {M.name} declares no bound")
    if M.bound.kind == "poly" and M.bound.degree > 1:
        raise MissingBoundDeclaration("tighten needs a weak-n or n declaration")
    X = M.counters
    if len(X) > max_counters:
        raise CounterCountTooLarge(f"{len(X)} counters would need 2^{len(X)} subset counters "
                                   f"(limit {max_counters} counters)")
    subsets = [S for size in range(len(X) + 1) for S in combinations(X, size)]
    inputs = [(x,) for x in M.input_counters]
    rest = [S for S in subsets if S not in inputs]
    counters = [subset_name(S) for S in inputs + rest]
    containing = {x: [S for S in subsets if x in S] for x in X}
    g = _Gen(M.states)

    def add_x(S, x):
        return tuple(y for y in X if y in S or y == x)

    def drop_x(S, x):
        return tuple(y for y in S if y != x)

    for q, ins, r in M.transitions:
        if ins.op == "nop":
            g.add(q, NOP, r)
        elif ins.op == "zero":
            g.zero_chain(q, [subset_name(S) for S in containing[ins.counter]], r)
        elif ins.op == "nonzero":
            for S in containing[ins.counter]:
                g.add(q, nonzero(subset_name(S)), r)
        elif ins.op == "inc":
            for S in subsets:
                if ins.counter not in S:
                    g.chain(q, [dec(subset_name(S)), inc(subset_name(add_x(S, ins.counter)))], r)
        else:
            for S in containing[ins.counter]:
                g.chain(q, [dec(subset_name(S)), inc(subset_name(drop_x(S, ins.counter)))], r)
    out = CounterMachine(
        name=f"{M.name}-tight",
        states=M.states + tuple(g.states),
        counters=tuple(counters),
        input_arity=M.input_arity,
        transitions=tuple(g.transitions),
        init=M.init,
        accept=M.accept,
        reject=M.reject,
        bound=Bound("n"),
        metadata={"source": M.name, "pass": "tighten"},
    )
    _check(out)
    return out


def _check(M):
    errors, _ = validate_machine(M)
    if errors:
        raise AssertionError("lowering produced an invalid machine: " + "; ".join(errors))
