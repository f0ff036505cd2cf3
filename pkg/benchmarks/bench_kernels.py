"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""
import argparse
import json
import sys
import timeit

import numpy as np

from smoothcert import kernels


def cases(rng):
    p = rng.uniform(0, 1, 1_000_000)
    x = rng.normal(0, 3, 1_000_000)
    pts = rng.uniform(-1.2, 1.2, (500_000, 8))
    shift = rng.uniform(-0.3, 0.3, 8)
    rows = rng.standard_normal((2000, 4096))
    w = rng.standard_normal(8)
    return {
        "ndtr (1e6)": lambda be: kernels.ndtr(x, be),
        "ndtri (1e6)": lambda be: kernels.ndtri(p, be),
        "box_counts (5e5 x 8)": lambda be: kernels.box_counts(pts, shift, 1.0, be),
        "max_abs_rows (2000 x 4096)": lambda be: kernels.max_abs_rows(rows, be),
        "halfspace_labels (5e5 x 8)": lambda be: kernels.halfspace_labels(pts, w, 0.1, be),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None, help="also write results here")
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled backend not built; run `pip install -e . --no-build-isolation` first", file=sys.stderr)
    results = []
    for name, fn in cases(np.random.default_rng(0)).items():
        row = {"kernel": name}
        for be in backends:
            fn(be)  # warm up
            row[be] = min(timeit.repeat(lambda: fn(be), number=1, repeat=args.repeat))
        if "compiled" in row:
            row["speedup"] = row["python"] / row["compiled"]
        results.append(row)

    print(f"{'kernel':30s} " + " ".join(f"{b:>12s}" for b in backends) + ("    speedup" if len(backends) > 1 else ""))
    for row in results:
        line = f"{row['kernel']:30s} " + " ".join(f"{row[b] * 1e3:10.2f}ms" for b in backends)
        if "speedup" in row:
            line += f"   {row['speedup']:7.2f}x"
        print(line)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
