"""Compare the compiled and pure-numpy kernel backends.

Run with ``python3 benchmarks/bench_kernels.py``; prints one line per kernel with the
median time of each backend and the speedup.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from bellsampling import _pykernels
from bellsampling.circuit import random_all_to_all_clifford
from bellsampling.noise import NoiseSpec, depolarizing

try:
    from bellsampling import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None


def _cases(rng: np.random.Generator):
    rows = rng.integers(0, 2**63, size=(256, 8), dtype=np.uint64)
    basis, piv = _pykernels.gf2_rref(rows.copy(), 512)
    vecs = rng.integers(0, 2**63, size=(4096, 8), dtype=np.uint64)
    a = rng.integers(0, 2**63, size=(4096, 8), dtype=np.uint64)
    b = rng.integers(0, 2**63, size=(4096, 8), dtype=np.uint64)
    mask = rng.integers(0, 2**63, size=8, dtype=np.uint64)
    x = rng.integers(0, 2**63, size=(48, 1563), dtype=np.uint64)
    z = rng.integers(0, 2**63, size=(48, 1563), dtype=np.uint64)
    cnot = np.array([[1, 0, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 0, 1]], dtype=np.uint8)
    q = np.array([3, 17], dtype=np.int64)
    pos = rng.choice(100000, size=2000, replace=False).astype(np.int64)
    src = rng.integers(0, 2**63, size=(64, 1563), dtype=np.uint64)
    sel = rng.integers(0, 2, size=(64, 48)).astype(bool)
    return {
        "gf2_rref 256x512": lambda k: k.gf2_rref(rows.copy(), 512),
        "gf2_reduce 4096 vecs": lambda k: k.gf2_reduce(vecs, basis, piv),
        "and_parity 4096 rows": lambda k: k.and_parity(a, b, mask),
        "frame_linear CNOT 1e5 shots": lambda k: k.frame_linear(x, z, q, cnot),
        "xor_bits 2000 positions": lambda k: k.xor_bits(x, 5, pos),
        "xor_rows_masked 64->48 rows": lambda k: k.xor_rows_masked(x.copy(), src, sel),
    }


def _median(fn, repeat: int) -> float:
    return float(np.median(timeit.repeat(fn, number=1, repeat=repeat)))


def bench_sampler(M: int, repeat: int) -> float:
    from bellsampling.stabilizer import bell_sample_clifford

    C = random_all_to_all_clifford(12, 12, seed=0)
    noise = NoiseSpec(depolarizing(0.01))
    return _median(lambda: bell_sample_clifford(C, noise, M, 0), repeat)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    cases = _cases(np.random.default_rng(0))
    print(f"{'kernel':32s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, fn in cases.items():
        tp = _median(lambda: fn(_pykernels), args.repeat) * 1e3
        if _ckernels is None:
            print(f"{name:32s} {tp:12.3f} {'n/a':>12s} {'n/a':>8s}")
            continue
        tc = _median(lambda: fn(_ckernels), args.repeat) * 1e3
        print(f"{name:32s} {tp:12.3f} {tc:12.3f} {tp / tc:8.1f}")
    from bellsampling import kernels

    t = bench_sampler(100000, max(1, args.repeat // 2))
    print(f"end-to-end Bell sampling n=12, 12 layers, M=1e5 ({kernels.BACKEND} backend): {t:.2f} s")


if __name__ == "__main__":
    main()
