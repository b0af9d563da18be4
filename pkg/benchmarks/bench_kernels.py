"""Benchmark the compiled kernels against the NumPy fallback.

Runs both backends on identical seeded batches for the diagonal and linear
layers, checks they agree numerically, and reports wall-clock timings.

Usage: python benchmarks/bench_kernels.py [--batch 512] [--dims 768]
       [--emb 64] [--repeats 20] [--seed 0]
"""

import argparse
import time

import numpy as np

from stylokit._kernels import _pykernels

try:
    from stylokit._kernels import _ckernels
except ImportError:
    _ckernels = None


def _time(fn, args, repeats):
    fn(*args)  # warmup
    start = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - start) / repeats


def run(batch, dims, emb, repeats, seed):
    rng = np.random.default_rng(seed)
    anchors = rng.uniform(0, 1, (batch, dims))
    positives = np.clip(anchors + rng.normal(0, 0.05, (batch, dims)), 0, 1)
    negatives = rng.uniform(0, 1, (batch, dims))
    margin = 1.0

    cases = [
        ("diagonal", "diagonal_batch", rng.uniform(0.5, 1.5, dims)),
        ("linear", "linear_batch", rng.uniform(-0.1, 0.1, (dims, emb))),
    ]
    print(f"batch={batch} dims={dims} emb={emb} repeats={repeats} seed={seed}")
    for label, fn_name, weights in cases:
        args = (weights, anchors, positives, negatives, margin)
        py_fn = getattr(_pykernels, fn_name)
        py_time = _time(py_fn, args, repeats)
        line = f"{label:9s} python {py_time * 1e3:9.3f} ms"
        if _ckernels is not None:
            cy_fn = getattr(_ckernels, fn_name)
            cy_time = _time(cy_fn, args, repeats)
            py_out = py_fn(*args)
            cy_out = cy_fn(*args)
            assert np.isclose(py_out[0], cy_out[0], rtol=1e-10), "loss mismatch"
            assert np.allclose(py_out[1], cy_out[1], rtol=1e-10, atol=1e-12), "gradient mismatch"
            line += f"  cython {cy_time * 1e3:9.3f} ms  speedup {py_time / cy_time:5.2f}x"
        else:
            line += "  (compiled backend not built)"
        print(line)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--batch", type=int, default=512)
    parser.add_argument("--dims", type=int, default=768)
    parser.add_argument("--emb", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    run(args.batch, args.dims, args.emb, args.repeats, args.seed)


if __name__ == "__main__":
    main()
