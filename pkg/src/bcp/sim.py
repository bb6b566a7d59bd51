"""Randomised fair-execution simulator.

At every step one enabled step is chosen uniformly at random.  On a finite
configuration graph this scheduler produces a fair execution with
probability one, but any finite prefix proves nothing: the ``stabilized``
verdict is a heuristic (the last ``window`` configurations were all
b-consensuses).  Only ``terminal`` is sound.

Randomness comes from :class:`random.Random` (MT19937) seeded with the
integer seed; a step is drawn with ``randrange(len(enabled))``, i.e.
``getrandbits(k)`` with rejection where ``k = len(enabled).bit_length()``.
Enabled steps are listed in transition declaration order.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .core import BroadcastProtocol, Configuration, initial_configuration
from .engine import Engine
from .errors import PopulationTooSmall

DEFAULT_MAX_STEPS = 1_000_000


def default_window(protocol: BroadcastProtocol, C0: Configuration) -> int:
    return 10 * len(protocol.states) * C0.size


@dataclass
class SimTrace:
    seed: int
    steps: list = field(default_factory=list)  # (transition id or None, Configuration)
    verdict: str = "budget-exhausted"  # stabilized | terminal | budget-exhausted
    value: Optional[int] = None
    at_step: Optional[int] = None
    heuristic: bool = False
    taken: int = 0  # steps executed, also when not recorded

    @property
    def final(self) -> Configuration:
        return self.steps[-1][1]

    @property
    def length(self) -> int:
        return self.taken

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            "verdict": self.verdict,
            "value": self.value,
            "at_step": self.at_step,
            "steps": self.length,
            "heuristic": self.heuristic,
        }

    def to_text(self) -> str:
        """One line per step: ``<step#> <transition-id> <configuration>``;
        step 0 carries the pseudo transition ``init``."""
        lines = []
        for i, (tid, C) in enumerate(self.steps):
            lines.append(f"{i} {tid or 'init'} {C.to_text()}")
        return "\n".join(lines) + "\n"


def simulate(protocol: BroadcastProtocol, input, seed: int, max_steps: int = DEFAULT_MAX_STEPS,
             quiescence_window: Optional[int] = None, record: bool = True,
             engine: Optional[Engine] = None) -> SimTrace:
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    C0 = initial_configuration(protocol, input)
    window = quiescence_window if quiescence_window is not None else default_window(protocol, C0)
    if window < 1:
        raise ValueError("quiescence_window must be at least 1")
    engine = engine or Engine(protocol)
    rng = random.Random(seed)
    trace = SimTrace(seed=seed)
    key = engine.key(C0)
    trace.steps.append((None, C0))
    run_value, run_start = engine.consensus(key), 0
    for step in range(max_steps + 1):
        succ = engine.successors(key)
        if all(s == key for _, s in succ):
            trace.verdict, trace.value, trace.at_step = "terminal", engine.consensus(key), step
            break
        if run_value is not None and step - run_start + 1 >= window:
            trace.verdict, trace.value, trace.at_step = "stabilized", run_value, run_start
            trace.heuristic = True
            break
        if step == max_steps:
            break
        tid, key = succ[rng.randrange(len(succ))]
        trace.taken += 1
        value = engine.consensus(key)
        if value is None or value != run_value:
            run_start = step + 1
        run_value = value
        if record:
            trace.steps.append((engine.tids[tid], engine.config(key)))
    if not record:
        trace.steps.append((None, engine.config(key)))
    return trace


@dataclass
class SimSummary:
    input: tuple
    seed: int
    verdict: str
    value: Optional[int]
    at_step: Optional[int]
    steps: int
    error: str = ""

    def to_dict(self) -> dict:
        return {"input": list(self.input), "seed": self.seed, "verdict": self.verdict,
                "value": self.value, "at_step": self.at_step, "steps": self.steps,
                "error": self.error}


def _one(args):
    protocol, input, seed, max_steps, window = args
    try:
        t = simulate(protocol, input, seed, max_steps, window, record=False)
    except PopulationTooSmall as exc:
        return SimSummary(tuple(input), seed, "error", None, None, 0, str(exc))
    return SimSummary(tuple(input), seed, t.verdict, t.value, t.at_step, t.length)


def batch_simulate(protocol: BroadcastProtocol, inputs, seeds, max_steps: int = DEFAULT_MAX_STEPS,
                   quiescence_window: Optional[int] = None, jobs: int = 1) -> list:
    """Run every (input, seed) pair; results are ordered input-major."""
    work = [(protocol, tuple(x), s, max_steps, quiescence_window) for x in inputs for s in seeds]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_one, work))
    return [_one(w) for w in work]
