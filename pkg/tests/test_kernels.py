from __future__ import annotations

import random
import runpy
from pathlib import Path

import pytest

from monodef import _kernels as K
from monodef._kernels import _pykernels as py
from monodef.rng import derive_seed, named_rng

compiled = K.compiled_backend
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")


def random_dag(rng: random.Random, n: int, p: float) -> list[int]:
    rows = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                rows[i] |= 1 << j
    return rows


def test_backend_name():
    assert K.BACKEND in ("python", "cython")


@needs_compiled
@pytest.mark.parametrize("n", [0, 1, 5, 63, 64, 65, 130])
def test_closure_backends_agree(n):
    rng = random.Random(n)
    for _ in range(5):
        succ = random_dag(rng, n, 0.05)
        up = py.closure(succ)
        assert compiled.closure(succ) == up
        assert compiled.transpose(up) == py.transpose(up)
        assert compiled.order_violation(up) is None and py.order_violation(up) is None


@needs_compiled
def test_cycle_reported_by_both():
    succ = [0b10, 0b100, 0b1]
    for mod in (py, compiled):
        with pytest.raises(ValueError):
            mod.closure(succ)


@needs_compiled
@pytest.mark.parametrize("n", [4, 40, 70])
def test_mub_backends_agree(n):
    rng = random.Random(n + 1)
    up = py.closure(random_dag(rng, n, 0.2))
    down = py.transpose(up)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    assert compiled.mub_table(up, down, pairs) == py.mub_table(up, down, pairs)
    for i, j in pairs[:50]:
        assert compiled.mub_bits(up, down, i, j) == py.mub_bits(up, down, i, j)


def test_iter_bits():
    assert list(py.iter_bits(0b101001)) == [0, 3, 5]
    assert list(py.iter_bits(0)) == []


def test_order_violation_finds_missing_transitivity():
    up = [0b010, 0b100, 0]
    kind, _ = py.order_violation(up)
    assert kind == "transitive"


def test_named_streams_are_independent_and_stable():
    assert derive_seed(1, "a") == derive_seed(1, "a")
    assert derive_seed(1, "a") != derive_seed(1, "b") != derive_seed(2, "a")
    assert named_rng(3, "x").random() == named_rng(3, "x").random()
    assert 0 <= derive_seed(9, "z") < 2 ** 64


def test_benchmark_script_agrees_and_reports_speedups():
    if K.compiled_backend is None:
        pytest.skip("compiled kernels not built")
    path = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_kernels.py"
    rows = runpy.run_path(str(path))["bench"]([8, 24], 1, 0, number=3)
    assert {r["kernel"] for r in rows} == {"closure", "transpose", "order_violation", "mub_table"}
    assert all(r["python"] > 0 and r["compiled"] > 0 for r in rows)
