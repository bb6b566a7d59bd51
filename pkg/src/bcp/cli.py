"""``bcp`` command line.

Exit codes: 0 success, 1 a check failed, 2 usage or parse error,
3 exploration budget exceeded.  Reports are JSON lines with a fixed key
order, one record per input, written to ``-o`` or standard output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, corpus
from .bounding import tighten, weaken
from .cm import (Bound, cm_check_bounded, cm_check_computes, cm_run, load_machine, save_machine,
                 serialize_machine, validate_machine)
from .compiler import cm_to_protocol, lower_to_n, pipeline
from .core import validate
from .errors import BCPError, BudgetExceeded, ParseError, UnknownName
from .oracles import builtin, parse_inputs
from .sim import DEFAULT_MAX_STEPS, batch_simulate, simulate
from .textfmt import load_protocol, save_protocol, serialize_protocol
from .transforms import (check_reset_protocol, prune_idle_broadcasts, to_leaderless,
                         to_single_broadcaster, to_single_signal)
from .verify import DEFAULT_BUDGET, MODES, verify_inputs

OK, FAILED, USAGE, BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


def resolve(path: str) -> Path:
    """A path on disk; ``corpus/<file>`` and bare catalog names fall back
    to the bundled corpus."""
    p = Path(path)
    if p.exists():
        return p
    candidate = corpus.CORPUS_DIR / p.name
    if p.parent.name in ("corpus", "") and candidate.exists():
        return candidate
    if p.parent == Path(".") and p.name in corpus.catalog():
        return corpus.path(p.name)
    raise UsageError(f"no such file: {path}")


def read_protocol(path):
    return load_protocol(resolve(path))


def read_machine(path):
    return load_machine(resolve(path))


def emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _inputs(args, arity):
    if not args.inputs:
        raise UsageError("--inputs is required")
    try:
        return parse_inputs(args.inputs, arity, getattr(args, "max_sum", None))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _oracle(args):
    if not args.builtin:
        raise UsageError("--builtin is required")
    return builtin(args.builtin)


def _report_code(entries) -> int:
    verdicts = [e.verdict for e in entries]
    if any(v == "fail" for v in verdicts):
        return FAILED
    if any(v == "budget" for v in verdicts):
        return BUDGET
    return OK


# ------------------------------------------------------------------ commands

def cmd_validate(args) -> int:
    path = resolve(args.file)
    if path.suffix == ".cm":
        errors, warns = validate_machine(load_machine(path))
    else:
        errors, warns = validate(load_protocol(path)), []
    for w in warns:
        print(f"warning: {w}", file=sys.stderr)
    for e in errors:
        print(f"error: {e}", file=sys.stderr)
    if not errors:
        print(f"{path.name}: ok")
    return FAILED if errors else OK


def cmd_simulate(args) -> int:
    P = read_protocol(args.file)
    inputs = _inputs(args, len(P.alphabet))
    if args.seeds:
        seeds = [x[0] for x in parse_inputs(args.seeds, 1)]
    else:
        seeds = [args.seed]
    if args.trace:
        if len(inputs) != 1 or len(seeds) != 1:
            raise UsageError("--trace needs exactly one input and one seed")
        t = simulate(P, inputs[0], seeds[0], args.max_steps, args.window)
        Path(args.trace).write_text(t.to_text(), encoding="utf-8")
        results = [t.summary() | {"input": list(inputs[0])}]
    else:
        results = [s.to_dict() for s in batch_simulate(P, inputs, seeds, args.max_steps, args.window, args.jobs)]
    emit("".join(json.dumps(r, separators=(", ", ": ")) + "\n" for r in results), args.output)
    return OK


def cmd_verify(args) -> int:
    P = read_protocol(args.file)
    oracle = _oracle(args)
    report = verify_inputs(P, _inputs(args, len(P.alphabet)), oracle, args.mode, args.budget, args.jobs)
    emit(report.to_jsonl(), args.output)
    return _report_code(report)


def cmd_cm(args) -> int:
    M = read_machine(args.file)
    inputs = _inputs(args, M.input_arity)
    if args.cm_command == "run":
        lines = [json.dumps(cm_run(M, x, args.budget), separators=(", ", ": ")) + "\n" for x in inputs]
        emit("".join(lines), args.output)
        return OK
    if args.cm_command == "check":
        report = cm_check_computes(M, _oracle(args), inputs, args.budget)
    else:
        bound = args.bound or (str(M.bound) if M.bound else None)
        if bound is None:
            raise UsageError("machine declares no bound; pass --bound")
        report = cm_check_bounded(M, inputs, Bound.parse(bound), args.budget)
    emit(report.to_jsonl(), args.output)
    return _report_code(report)


def cmd_bound(args) -> int:
    M = read_machine(args.file)
    out = weaken(M) if args.bound_command == "weaken" else tighten(M)
    if args.output:
        save_machine(out, args.output)
    else:
        sys.stdout.write(serialize_machine(out))
    print(f"{out.name}: {len(out.states)} states, {len(out.counters)} counters, "
          f"{len(out.transitions)} transitions", file=sys.stderr)
    return OK


def cmd_compile(args) -> int:
    pos = read_machine(args.file)
    if args.neg:
        P = pipeline(pos, read_machine(args.neg), skip_bounding=True if args.skip_bounding else None)
        mode = args.mode or "silent"
    else:
        P = cm_to_protocol(lower_to_n(pos, True if args.skip_bounding else None))
        mode = args.mode or "semi"
    if args.output:
        save_protocol(P, args.output)
    print(f"{P.name}: {len(P.states)} states, {len(P.rendezvous)} rendez-vous, "
          f"{len(P.broadcasts)} broadcasts", file=sys.stderr)
    if not args.verify:
        return OK
    report = verify_inputs(P, _inputs(args, len(P.alphabet)), _oracle(args), mode, args.budget, args.jobs)
    emit(report.to_jsonl(), args.report)
    return _report_code(report)


def cmd_transform(args) -> int:
    P = read_protocol(args.file)
    if args.prune_idle:
        P = prune_idle_broadcasts(P, _inputs(args, len(P.alphabet)), args.budget)
    if args.leaderless:
        out = to_leaderless(P, args.symbol)
    elif args.single_broadcaster:
        out = to_single_broadcaster(P)
    else:
        check = _inputs(args, len(P.alphabet)) if args.inputs else ()
        out = to_single_signal(P, check, args.budget)
    if args.output:
        save_protocol(out, args.output)
    else:
        sys.stdout.write(serialize_protocol(out))
    print(f"{out.name}: {len(out.states)} states, {len(out.rendezvous)} rendez-vous, "
          f"{len(out.broadcasts)} broadcasts", file=sys.stderr)
    return OK


def cmd_check_reset(args) -> int:
    P = read_protocol(args.file)
    report = check_reset_protocol(P, _inputs(args, len(P.alphabet)), args.budget)
    emit(report.to_jsonl(), args.output)
    return _report_code(report)


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    def globals_(parser, default):
        parser.add_argument("--jobs", type=int, default=default(1), help="worker processes (default 1)")
        parser.add_argument("--budget", type=int, default=default(DEFAULT_BUDGET),
                            help=f"maximum explored configurations per input (default {DEFAULT_BUDGET})")

    # subcommands accept the global flags too, without overriding them
    common = argparse.ArgumentParser(add_help=False)
    globals_(common, lambda v: argparse.SUPPRESS)
    p = argparse.ArgumentParser(prog="bcp", description="Broadcast consensus protocol workbench")
    globals_(p, lambda v: v)
    p.add_argument("--version", action="version", version=f"bcp {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help, parents=[common])
        sp.set_defaults(fn=fn)
        return sp

    def inputs(sp, required=True):
        sp.add_argument("--inputs", required=required, help="e.g. 2..9 or \"(0,0)..(3,3)\"")
        sp.add_argument("--max-sum", type=int, help="drop inputs whose sum exceeds this")

    sp = add("validate", cmd_validate, "check a protocol or counter machine")
    sp.add_argument("file")

    sp = add("simulate", cmd_simulate, "random fair executions")
    sp.add_argument("file")
    inputs(sp)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--seeds", help="seed range, e.g. 0..9")
    sp.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    sp.add_argument("--window", type=int, help="quiescence window (default 10*|Q|*n)")
    sp.add_argument("--trace", help="write the full trace of a single run here")
    sp.add_argument("-o", "--output")

    sp = add("verify", cmd_verify, "exhaustive verification against a builtin oracle")
    sp.add_argument("file")
    sp.add_argument("--mode", choices=MODES, default="computes")
    sp.add_argument("--builtin", required=True)
    inputs(sp)
    sp.add_argument("-o", "--output")

    sp = add("cm", cmd_cm, "counter machine tools")
    cms = sp.add_subparsers(dest="cm_command", required=True)
    for name, help in (("run", "decide acceptance"), ("check", "compare with an oracle"),
                       ("bound", "check a bound declaration")):
        c = cms.add_parser(name, help=help, parents=[common])
        c.add_argument("file")
        inputs(c)
        c.add_argument("-o", "--output")
        if name == "check":
            c.add_argument("--builtin", required=True)
        if name == "bound":
            c.add_argument("--bound", help="n, weak-n or 'poly c' (default: the declaration)")
    sp = add("bound", cmd_bound, "lower a counter machine's bound class")
    bs = sp.add_subparsers(dest="bound_command", required=True)
    for name in ("weaken", "tighten"):
        c = bs.add_parser(name, parents=[common])
        c.add_argument("file")
        c.add_argument("-o", "--output")

    sp = add("compile", cmd_compile, "compile counter machines to a protocol")
    sp.add_argument("file")
    sp.add_argument("--neg", help="machine for the negated predicate")
    sp.add_argument("--skip-bounding", action="store_true")
    sp.add_argument("-o", "--output")
    sp.add_argument("--verify", action="store_true")
    sp.add_argument("--mode", choices=MODES)
    sp.add_argument("--builtin")
    inputs(sp, required=False)
    sp.add_argument("--report", help="write the verification report here")

    sp = add("transform", cmd_transform, "protocol transformations")
    sp.add_argument("file")
    which = sp.add_mutually_exclusive_group(required=True)
    which.add_argument("--leaderless", action="store_true")
    which.add_argument("--single-broadcaster", action="store_true")
    which.add_argument("--single-signal", action="store_true")
    sp.add_argument("--symbol", help="input symbol supplying the leaders (--leaderless)")
    sp.add_argument("--prune-idle", action="store_true",
                    help="first drop broadcasts that never change the configuration on --inputs")
    inputs(sp, required=False)
    sp.add_argument("-o", "--output")

    sp = add("check-reset", cmd_check_reset, "check the reset-protocol property")
    sp.add_argument("file")
    inputs(sp)
    sp.add_argument("-o", "--output")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (UsageError, UnknownName, ParseError, ValueError) as exc:
        print(f"bcp: error: {exc}", file=sys.stderr)
        return USAGE
    except BudgetExceeded as exc:
        print(f"bcp: budget exceeded: {exc}", file=sys.stderr)
        return BUDGET
    except BCPError as exc:
        print(f"bcp: error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
