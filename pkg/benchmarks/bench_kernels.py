"""Compare the compiled kernel core against the numpy fallback.

Times the three kernels on the matrix shapes the pipeline actually
produces: full unitaries, small masked submatrices (the residual-sweep
hot path), and banded residuals. Run as a script:

    python benchmarks/bench_kernels.py [--sizes 16,64,256]
"""

import argparse
import time

import numpy as np

from roekit._kernels import _py

try:
    from roekit._kernels import _cy
except ImportError:
    _cy = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def haar_unitary(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return np.ascontiguousarray(q * (np.diag(r) / np.abs(np.diag(r)))[None, :])


def bench(sizes, repeats):
    rng = np.random.default_rng(0)
    backends = [("py", _py)] + ([("cy", _cy)] if _cy else [])
    header = f"{'kernel':<28}{'n':>6}" + "".join(f"{name:>12}" for name, _ in backends)
    if _cy:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        u = haar_unitary(rng, n)
        rows = np.arange(0, n, 2, dtype=np.intp)
        cols = np.arange(0, max(1, n // 4), dtype=np.intp)
        dist = np.abs(np.subtract.outer(
            np.arange(float(n)), np.arange(float(n))))
        cases = [
            ("power_norm(full unitary)", lambda impl: impl.power_norm(u)),
            ("power_norm_sub(half rows)",
             lambda impl: impl.power_norm_sub(u, rows, cols)),
            ("power_norm_band(r=n/4)",
             lambda impl: impl.power_norm_band(u, dist, n / 4)),
        ]
        for label, call in cases:
            times = [timeit(lambda impl=impl: call(impl), repeats)
                     for _, impl in backends]
            row = f"{label:<28}{n:>6}"
            for t in times:
                row += f"{t * 1e3:>10.3f}ms"
            if _cy:
                row += f"{times[0] / times[1]:>9.1f}x"
            print(row)
        for _, impl in backends[1:]:
            v_py = _py.power_norm(u)[0]
            v = impl.power_norm(u)[0]
            assert abs(v - v_py) <= 1e-12 * max(1.0, v_py), "backend mismatch"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="16,64,256",
                        help="comma-separated matrix sizes")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    if _cy is None:
        print("compiled backend unavailable; timing the fallback only")
    bench(sizes, args.repeats)


if __name__ == "__main__":
    main()
