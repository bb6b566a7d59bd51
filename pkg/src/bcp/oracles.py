"""Builtin predicates and input-range parsing for the command line."""

from __future__ import annotations

import re
from itertools import product

from .errors import UnknownName


def _pad(x, k):
    """Missing trailing components count as zero, so a builtin can be
    evaluated on an input of a different arity (and then usually fails)."""
    return tuple(x) + (0,) * (k - len(x))


def _power2(x):
    return int(x[0] > 1 and x[0] & (x[0] - 1) == 0)


def _majority(x):
    x = _pad(x, 2)
    return int(x[1] >= x[0])


def _geq(x):
    x = _pad(x, 2)
    return int(x[0] >= x[1])


def _lt(x):
    x = _pad(x, 2)
    return int(x[0] < x[1])


def _even(x):
    return int(x[0] % 2 == 0)


def _odd(x):
    return int(x[0] % 2 == 1)


def _div3(x):
    return int(x[0] % 3 == 0)


BUILTINS = {
    "power2": (_power2, 1, "x > 1 and x is a power of two"),
    "majority": (_majority, 2, "x1 >= x0"),
    "geq": (_geq, 2, "x1 >= x2"),
    "lt": (_lt, 2, "x1 < x2"),
    "even": (_even, 1, "x is even"),
    "odd": (_odd, 1, "x is odd"),
    "div3": (_div3, 1, "x is divisible by 3"),
}


def builtin(name: str):
    """Oracle callable for a builtin name; ``threshold:k`` tests whether
    the input sum is at least k."""
    if name.startswith("threshold:"):
        try:
            k = int(name.split(":", 1)[1])
        except ValueError:
            raise UnknownName(f"bad threshold {name!r}; expected threshold:<int>") from None
        return lambda x: int(sum(x) >= k)
    if name not in BUILTINS:
        raise UnknownName(f"unknown builtin oracle {name!r}; known: {', '.join(sorted(BUILTINS))}, threshold:k")
    return BUILTINS[name][0]


def builtin_arity(name: str):
    """Input arity of a builtin, or None if any arity is accepted."""
    if name.startswith("threshold:"):
        return None
    builtin(name)
    return BUILTINS[name][1]


_TUPLE = r"\(\s*\d+(?:\s*,\s*\d+)*\s*\)"
_ITEM = re.compile(rf"^\s*(?P<a>\d+|{_TUPLE})\s*(?:\.\.\s*(?P<b>\d+|{_TUPLE}))?\s*$")


def _vec(text):
    return tuple(int(v) for v in text.strip("() ").split(","))


def _split_items(text):
    items, depth, cur = [], 0, ""
    for ch in text:
        depth += ch == "("
        depth -= ch == ")"
        if (ch in ", ;" and depth == 0) and cur.strip():
            items.append(cur)
            cur = ""
        elif not (ch in ", ;" and depth == 0):
            cur += ch
    if cur.strip():
        items.append(cur)
    return items


def parse_inputs(text: str, arity: int | None = None, max_sum: int | None = None) -> list:
    """Inputs described by ``text``: a comma or space separated list of
    single inputs (``5`` or ``(1,2)``) and ranges (``2..9`` or
    ``(0,0)..(3,3)``, a rectangle).  Duplicates are dropped, order kept."""
    out = []
    for item in _split_items(text):
        m = _ITEM.match(item)
        if not m:
            raise ValueError(f"cannot parse input range {item!r}")
        lo = _vec(m["a"])
        hi = _vec(m["b"]) if m["b"] else lo
        if len(lo) != len(hi):
            raise ValueError(f"range ends of different arity in {item!r}")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"empty range {item!r}")
        out.extend(product(*(range(a, b + 1) for a, b in zip(lo, hi))))
    if arity is not None:
        bad = [x for x in out if len(x) != arity]
        if bad:
            raise ValueError(f"input {bad[0]} has arity {len(bad[0])}, expected {arity}")
    if max_sum is not None:
        out = [x for x in out if sum(x) <= max_sum]
    return list(dict.fromkeys(out))


def inputs_up_to(arity: int, max_sum: int, min_sum: int = 0) -> list:
    """All inputs of the given arity with component sum in min_sum..max_sum."""
    return [x for x in product(range(max_sum + 1), repeat=arity) if min_sum <= sum(x) <= max_sum]
