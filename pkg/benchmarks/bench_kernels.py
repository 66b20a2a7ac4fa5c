"""Compare the compiled and pure-Python kernels.

Run ``python3 benchmarks/bench_kernels.py [--segments N]``. Prints the time
of each backend for grid-accelerated blockage, brute-force blockage and the
sector activation loop, and checks that every backend agrees.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from rfisim.kernels import backends
from rfisim.scenario import synthetic_city


def random_segments(scn, n, rng):
    x0, y0, x1, y1 = scn.area.bounds
    lo, hi = np.array([x0, y0, 0.0]), np.array([x1, y1, 0.0])
    a = rng.uniform(lo, hi, (n, 3))
    b = a + rng.normal(0.0, 150.0, (n, 3))
    a[:, 2] = rng.uniform(1.5, 15.0, n)
    b[:, 2] = rng.uniform(1.5, 60.0, n)
    return a, b


def timed(fn, repeat=3):
    best, out = np.inf, None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--segments", type=int, default=20000)
    ap.add_argument("--links", type=int, default=200000)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    scn = synthetic_city()
    bs = scn.buildings
    a, b = random_segments(scn, args.segments, rng)
    n_brute = min(args.segments, 2000)

    n_sec = 3000
    order = rng.permutation(args.links)
    accept = (rng.random(args.links) < 0.7).astype(np.uint8)
    tx = rng.integers(0, n_sec, args.links)
    rx = rng.integers(-1, n_sec, args.links)

    print(f"{len(bs)} buildings, {args.segments} segments ({n_brute} for brute force), {args.links} links")
    print(f"{'kernel':<22}{'backend':<10}{'seconds':>10}{'per item (us)':>16}")
    ref = {}
    for name, impl in backends().items():
        rows = [
            ("blockage (grid)", args.segments, lambda: bs.segments_blocked(a, b, backend=name)),
            ("blockage (brute)", n_brute, lambda: bs.brute_force_blocked(a[:n_brute], b[:n_brute], backend=name)),
            ("sector activation", args.links, lambda: impl.activate_links(order, accept, tx, rx, n_sec)),
        ]
        for label, n, fn in rows:
            t, out = timed(fn, repeat=1 if name == "python" else 3)
            out = np.asarray(out)
            if label in ref:
                assert np.array_equal(ref[label], out), f"{label}: backends disagree"
            else:
                ref[label] = out
            print(f"{label:<22}{name:<10}{t:>10.4f}{1e6 * t / n:>16.2f}")
    grid, brute = ref["blockage (grid)"][:n_brute], ref["blockage (brute)"]
    assert np.array_equal(grid, brute), "grid and brute-force blockage disagree"
    print(f"all backends agree; blocked fraction {ref['blockage (grid)'].mean():.3f}")


if __name__ == "__main__":
    main()
