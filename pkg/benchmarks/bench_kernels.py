"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--rows 1000000] [--classes 6] [--repeat 3]

Reports best-of-N wall time for the measure kernel and the CSV formatter, and
checks that both backends produce the same numbers.
"""

import argparse
import time

import numpy as np

from deltadiv import kernels
from deltadiv.experiments import OPTIONAL_MEASURES, columns_for, compute_block, _kind
from deltadiv.sampling import SamplerConfig, block_rng, sample_simplex_rows


def best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=10**6)
    ap.add_argument("--classes", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = block_rng(0, 0)
    P = sample_simplex_rows(rng, args.rows, args.classes)
    Q = sample_simplex_rows(rng, args.rows, args.classes)
    block = compute_block(SamplerConfig(m=args.classes, count=args.rows), 0, block_size=args.rows)
    cols = columns_for(OPTIONAL_MEASURES)
    arrays = [block.columns[c] for c in cols]
    kinds = [_kind(c) for c in cols]

    found = kernels.backends()
    results = {}
    for name, mod in found.items():
        results[name] = mod.batch_measures(P, Q)
        t_measure = best(lambda: mod.batch_measures(P, Q), args.repeat)
        t_format = best(lambda: mod.format_rows(arrays, kinds), args.repeat)
        print(f"{name:7s} batch_measures {t_measure:7.3f}s   format_rows {t_format:7.3f}s   ({args.rows} rows, m={args.classes})")

    if len(found) > 1:
        a, b = results["numpy"], results["cython"]
        worst = max(float(np.nanmax(np.abs(a[k] - b[k]))) for k in a if a[k].dtype.kind == "f")
        same_text = found["numpy"].format_rows(arrays, kinds) == found["cython"].format_rows(arrays, kinds)
        print(f"max abs difference between backends: {worst:.3g}; identical CSV text: {same_text}")
    else:
        print("compiled backend not built; only the numpy backend was timed")


if __name__ == "__main__":
    main()
