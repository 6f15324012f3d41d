"""Compare the compiled kernels against the pure NumPy fallback.

Times the hot kernels on sizes typical for long tracking sequences and
prints one table row per kernel.  Also checks that both backends return
bit-identical results on the benchmark inputs before timing them.

Run from the repository root after installing the package:

    python benchmarks/bench_backends.py
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from trackpost import _kernels_py

try:
    from trackpost import _ckernels
except ImportError:
    _ckernels = None


def _make_inputs(frames: int, seed: int):
    rng = np.random.default_rng(seed)
    xywh = rng.uniform(1.0, 500.0, size=(frames, 4))
    present = (rng.uniform(size=frames) > 0.05).astype(np.uint8)
    present[0] = 1
    gt_xywh = xywh + rng.uniform(-5.0, 5.0, size=(frames, 4))
    gt_xywh[:, 2:] = np.maximum(gt_xywh[:, 2:], 1.0)
    gt_present = (rng.uniform(size=frames) > 0.05).astype(np.uint8)
    overlaps = rng.uniform(size=frames)
    thresholds = np.arange(21) / 20.0
    bits = (rng.uniform(size=4096 * 16) > 0.5).astype(np.uint8)
    values, counts = _kernels_py.rle_encode(bits)
    return {
        "sequential_sum": (overlaps,),
        "ratio_deltas": (xywh, present),
        "overlap_values": (xywh, present, gt_xywh, gt_present),
        "success_rates": (overlaps, thresholds),
        "rle_decode": (values, counts, bits.size),
        "rle_encode": (bits,),
    }


def _check_equal(name, got, want) -> None:
    if isinstance(got, tuple):
        for g, w in zip(got, want):
            _check_equal(name, g, w)
        return
    got_arr = np.asarray(got)
    want_arr = np.asarray(want)
    if got_arr.tobytes() != want_arr.tobytes():
        raise SystemExit(f"backend mismatch in {name}")


def _time(func, args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        func(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--frames", type=int, default=100_000)
    parser.add_argument("--repeats", type=int, default=7)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    inputs = _make_inputs(args.frames, args.seed)
    if _ckernels is None:
        print("compiled kernels not available; timing the fallback only",
              file=sys.stderr)

    header = f"{'kernel':<16} {'python':>12} {'cython':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, call_args in inputs.items():
        py_func = getattr(_kernels_py, name)
        py_time = _time(py_func, call_args, args.repeats)
        if _ckernels is None:
            print(f"{name:<16} {py_time * 1e3:>10.3f}ms {'-':>12} {'-':>9}")
            continue
        c_func = getattr(_ckernels, name)
        _check_equal(name, c_func(*call_args), py_func(*call_args))
        c_time = _time(c_func, call_args, args.repeats)
        ratio = py_time / c_time if c_time > 0 else float("inf")
        print(f"{name:<16} {py_time * 1e3:>10.3f}ms {c_time * 1e3:>10.3f}ms "
              f"{ratio:>8.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
