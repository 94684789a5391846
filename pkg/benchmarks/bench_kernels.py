"""Benchmark: compiled quadric kernels vs the pure-Python fallback.

Times the three hot paths behind the variety solver on representative
workloads (the two-player stationary system on the rebit sphere, and a
random dense system at the two-qubit complex size):

  * batched residual evaluation,
  * full damped Gauss-Newton solves from random sphere starts,
  * a predictor-corrector tracing loop.

Run:  python benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from nashstates._kernels import _quadric_py, available_backends
from nashstates.qpd import qpd_rebit_system
from nashstates.variety import (
    QuadricSystem,
    estimate_local_dimension,
    random_start_search,
    trace_component,
)


def _random_system(seed: int, n: int = 8, n_forms: int = 6) -> QuadricSystem:
    rng = np.random.default_rng(seed)
    forms = rng.standard_normal((n_forms, n, n))
    forms = 0.5 * (forms + forms.transpose(0, 2, 1))
    return QuadricSystem(n, forms, "complex_phase")


def _bench(fn, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _workloads(impl, repeats: int) -> dict[str, float]:
    rng = np.random.default_rng(0)
    sys8 = _random_system(1)
    v = rng.standard_normal(8)
    v /= np.linalg.norm(v)

    def residuals():
        for _ in range(20000):
            impl.quadric_values(sys8.forms, v)

    starts = rng.standard_normal((300, 8))
    starts /= np.linalg.norm(starts, axis=1, keepdims=True)

    def solves():
        for s in starts:
            impl.gauss_newton(sys8.forms, None, s, 1e-10, 100)

    return {
        "residual evaluation (20k calls)": _bench(residuals, repeats),
        "gauss-newton (300 starts)": _bench(solves, repeats),
    }


def _trace_workload(repeats: int) -> float:
    # uses whichever backend nashstates selected at import time
    system = qpd_rebit_system()
    pts = random_start_search(system, 40, seed=3)
    start = next(p for p in pts
                 if estimate_local_dimension(system, p).est_dim == 1)

    def trace():
        trace_component(system, start, 0.02, 600)

    return _bench(trace, repeats)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = {"python": _quadric_py}
    if "cython" in available_backends():
        from nashstates._kernels import _quadric_cy
        backends["cython"] = _quadric_cy
    else:
        print("compiled backend unavailable; timing the fallback only")

    results = {name: _workloads(impl, args.repeats)
               for name, impl in backends.items()}

    width = max(len(k) for k in next(iter(results.values())))
    header = f"{'workload':<{width}}" + "".join(f"{n:>14}" for n in results)
    if len(results) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for key in next(iter(results.values())):
        line = f"{key:<{width}}"
        for name in results:
            line += f"{results[name][key] * 1e3:>12.2f}ms"
        if len(results) == 2:
            line += f"{results['python'][key] / results['cython'][key]:>9.1f}x"
        print(line)

    import nashstates
    print(f"\nend-to-end trace (selected backend = {nashstates.kernel_backend()}):"
          f" {_trace_workload(args.repeats) * 1e3:.2f}ms")


if __name__ == "__main__":
    main()
