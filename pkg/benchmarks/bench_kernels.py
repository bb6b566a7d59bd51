"""Time graph exploration with the compiled and the pure-Python kernel.

    python benchmarks/bench_kernels.py [--repeat N] [--quick]

Both kernels must produce the same graph; the script checks node and edge
counts and reports the best of N wall-clock timings for each.
"""

import argparse
import time

from bcp import corpus
from bcp.bounding import tighten, weaken
from bcp.compiler import cm_to_protocol, pipeline
from bcp.core import initial_configuration
from bcp.engine import Engine, _compiled
from bcp.verify import build_graph


def workloads(quick):
    power2 = corpus.load("power2")
    majority = corpus.load("majority")
    silent = pipeline(corpus.load("cm-geq"), corpus.load("cm-lt"))
    lowered = cm_to_protocol(tighten(weaken(corpus.load("cm-geq"))))
    yield "power2 x=16", power2, (16,)
    yield "majority (8,8)", majority, (8, 8)
    yield "geq-silent (3,3)", silent, (3, 3)
    yield "geq-lowered (2,3)" if quick else "geq-lowered (3,3)", lowered, (2, 3) if quick else (3, 3)


def best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller last workload")
    args = ap.parse_args(argv)
    if _compiled is None:
        raise SystemExit("compiled kernel not built; run: pip install -e . --no-build-isolation")
    print(f"{'workload':<22}{'nodes':>10}{'edges':>11}{'python s':>11}{'compiled s':>12}{'speedup':>9}")
    for label, P, x in workloads(args.quick):
        C0 = initial_configuration(P, x)
        res = {}
        for backend in ("python", "compiled"):
            eng = Engine(P, backend)
            res[backend] = best(lambda: build_graph(eng, C0, budget=10_000_000), args.repeat)
        (tp, gp), (tc, gc) = res["python"], res["compiled"]
        assert (len(gp), len(gp.targets)) == (len(gc), len(gc.targets)), "kernels disagree"
        print(f"{label:<22}{len(gc):>10}{len(gc.targets):>11}{tp:>11.3f}{tc:>12.3f}{tp / tc:>8.1f}x")


if __name__ == "__main__":
    main()
