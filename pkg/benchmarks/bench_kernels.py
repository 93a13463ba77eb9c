"""Compare the compiled order kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py --sizes 16 64 256 --repeat 5

Both backends get identical inputs; their outputs are checked for equality
before anything is timed.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import timeit
from itertools import combinations

from monodef._kernels import compiled_backend, python_backend


def random_dag(rng: random.Random, n: int, p: float) -> list[int]:
    """Successor rows of a random DAG compatible with the index order."""
    rows = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                rows[i] |= 1 << j
    return rows


def workloads(n: int, seed: int):
    rng = random.Random(seed)
    succ = random_dag(rng, n, min(0.5, 4.0 / n))
    up = python_backend.closure(succ)
    down = python_backend.transpose(up)
    pairs = [(i, j) for i, j in combinations(range(n), 2)
             if up[i] & up[j] and not (up[i] >> j & 1 or up[j] >> i & 1)]
    return {
        "closure": lambda K: K.closure(succ),
        "transpose": lambda K: K.transpose(up),
        "order_violation": lambda K: K.order_violation(up),
        "mub_table": lambda K: K.mub_table(up, down, pairs),
    }, len(pairs)


def bench(sizes, repeat: int, seed: int, number: int | None = None) -> list[dict]:
    rows = []
    for n in sizes:
        jobs, npairs = workloads(n, seed)
        for name, job in jobs.items():
            if job(python_backend) != job(compiled_backend):
                raise SystemExit(f"backends disagree on {name} at n={n}")
            row = {"kernel": name, "n": n, "pairs": npairs if name == "mub_table" else None}
            for label, K in (("python", python_backend), ("compiled", compiled_backend)):
                t = timeit.Timer(lambda: job(K))
                loops = number or t.autorange()[0]
                row[label] = min(t.repeat(repeat, loops)) / loops
            row["speedup"] = row["python"] / row["compiled"]
            rows.append(row)
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--sizes", type=int, nargs="+", default=[16, 64, 256])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--number", type=int, help="loops per timing (default: automatic)")
    parser.add_argument("--json", action="store_true", help="print rows as JSON")
    args = parser.parse_args(argv)
    if compiled_backend is None:
        print("compiled kernels are not available (not built, or MONODEF_PURE_PYTHON is set)", file=sys.stderr)
        return 1
    rows = bench(args.sizes, args.repeat, args.seed, args.number)
    if args.json:
        print(json.dumps(rows, indent=1))
        return 0
    print(f"{'kernel':<16}{'n':>6}{'python ms':>12}{'compiled ms':>13}{'speedup':>9}")
    for r in rows:
        print(f"{r['kernel']:<16}{r['n']:>6}{r['python'] * 1e3:>12.3f}{r['compiled'] * 1e3:>13.3f}"
              f"{r['speedup']:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
