import importlib.util
from pathlib import Path

import pytest

from bcp.engine import _compiled


@pytest.mark.skipif(_compiled is None, reason="compiled kernel not built")
def test_benchmark_runs_and_kernels_agree(capsys):
    path = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    bench = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(bench)
    bench.main(["--repeat", "1", "--quick"])
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 5 and all(line.endswith("x") for line in lines[1:])
