"""Time the compiled and pure-Python block kernels on the same workload.

    python3 benchmarks/bench_kernels.py [--samples 16000] [--order 15] [--repeat 5]

Also checks that both backends produce bit-identical error signals.
"""
import argparse
import time

import numpy as np

from ancbench import _backend, _kernels_py
from ancbench.filters import make_filter
from ancbench.signals import Signal

try:
    from ancbench import _kernels as _compiled
except ImportError:
    _compiled = None


def time_backend(module, algorithm, desired, reference, order, repeat):
    _backend.kernels = module
    best = float("inf")
    out = None
    for _ in range(repeat):
        filt = make_filter(algorithm, order, 0.05)
        start = time.perf_counter()
        out = filt.process_block(desired, reference).error.samples
        best = min(best, time.perf_counter() - start)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--samples", type=int, default=16000)
    p.add_argument("--order", type=int, default=15)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)

    rng = np.random.default_rng(0)
    r = rng.standard_normal(args.samples) * 0.35
    d = np.sin(0.05 * np.arange(args.samples)) * 0.5 + np.convolve(r, [0.9, 0.3])[: args.samples]
    desired, reference = Signal(d, 8000), Signal(r, 8000)

    backends = {"python": _kernels_py}
    if _compiled is not None:
        backends["cython"] = _compiled
    else:
        print("compiled kernels not built; timing the Python fallback only")

    original = _backend.kernels
    try:
        print(f"{'algorithm':<10}" + "".join(f"{name:>14}" for name in backends) + f"{'speedup':>10}  identical")
        for algorithm in ("lms", "nlms", "rls"):
            times, outs = {}, {}
            for name, module in backends.items():
                times[name], outs[name] = time_backend(module, algorithm, desired, reference, args.order, args.repeat)
            row = f"{algorithm:<10}" + "".join(f"{times[n] * 1e3:>12.2f}ms" for n in backends)
            if "cython" in times:
                same = np.array_equal(outs["python"], outs["cython"])
                row += f"{times['python'] / times['cython']:>9.1f}x  {same}"
            print(row)
    finally:
        _backend.kernels = original


if __name__ == "__main__":
    main()
