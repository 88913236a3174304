"""Compare the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs on the same inputs under both backends; the script checks
that the outputs agree and prints the median wall time and the speedup.
"""

import argparse
import statistics
import time

import numpy as np

from qencbench import _pykernels

try:
    from qencbench import _ckernels
except ImportError:
    _ckernels = None


def _time(fn, repeat):
    out, times = None, []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, statistics.median(times)


def case_phase_diagonal(rng):
    n = 12
    pairs = [(1 << i) | (1 << j) for i in range(n) for j in range(i + 1, n)]
    masks = np.array([1 << i for i in range(n)] + pairs, dtype=np.int64)
    coeffs = rng.normal(size=masks.size)
    return "phase_diagonal n=12", lambda m: m.phase_diagonal(masks, coeffs, n)


def case_anneal(rng):
    n, sweeps = 30, 2000
    lin = -rng.random(n)
    j = np.triu(rng.random((n, n)), 1)
    j = j + j.T
    x0 = rng.integers(0, 2, n).astype(np.uint8)
    temps = np.geomspace(2.0, 2e-4, sweeps)
    u = rng.random((sweeps, n))
    return f"anneal n={n} sweeps={sweeps}", lambda m: m.anneal(lin, j, x0, temps, u)


def case_smo(rng):
    n = 200
    x = rng.normal(size=(n, 5))
    y = np.where(x[:, 0] + 0.5 * rng.normal(size=n) > 0, 1.0, -1.0)
    d2 = ((x[:, None, :] - x[None, :, :]) ** 2).sum(-1)
    k = np.exp(-0.5 * d2)

    def run(m):
        a, g = np.zeros(n), -np.ones(n)
        it, ok = m.smo(k, y, 1.0, 1e-3, 1_000_000, a, g)
        return a
    return f"smo n={n}", run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; only the fallback is available")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':<28} {'cython (s)':>12} {'python (s)':>12} {'speedup':>9}  agree")
    for make in (case_phase_diagonal, case_anneal, case_smo):
        name, fn = make(rng)
        rc, tc = _time(lambda: fn(_ckernels), args.repeat)
        rp, tp = _time(lambda: fn(_pykernels), max(1, args.repeat // 2))
        rc = rc[0] if isinstance(rc, tuple) else rc
        rp = rp[0] if isinstance(rp, tuple) else rp
        agree = np.allclose(np.asarray(rc, dtype=float), np.asarray(rp, dtype=float),
                            rtol=1e-9, atol=1e-12)
        print(f"{name:<28} {tc:12.5f} {tp:12.5f} {tp / tc:9.1f}  {agree}")


if __name__ == "__main__":
    main()
