"""Compare the compiled and numpy kernel backends.

Run with ``python benchmarks/bench_kernels.py``. The end-to-end timing runs the
argument-principle count in a subprocess per backend, since the backend is
chosen at import.
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from pvstab import _pykernels

try:
    from pvstab import _ckernels
except ImportError:
    _ckernels = None

PARAMS = (0.3, -0.2, 1.0, 0.0, 0.0, 1.0, 0.5, 0.05)

END_TO_END = """
import time
from pvstab import kernels, lopatinski
from pvstab.background import BackgroundState
s = BackgroundState(H2=1.0, Hv3=1.0, E1=0.5, eps=0.05)
t = time.perf_counter()
for k in range(4):
    lopatinski.count_unstable_zeros(s, (1.0, 0.25 * k))
print(kernels.BACKEND, (time.perf_counter() - t) / 4)
"""


def best(fn, repeat=5, number=1):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000, help="array length")
    ap.add_argument("--scalar-calls", type=int, default=20_000)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    g = np.abs(rng.normal(size=args.n))
    g[: args.n // 10] = 0.0
    d, e2, e3 = rng.normal(size=(3, args.n))
    eta = np.hypot(e2, e3)
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels is not None else [])

    print(f"{'kernel':<28}{'backend':<10}{'time':>12}")
    rows = {}
    for name, mod in backends:
        rows[("delta_array", name)] = best(lambda: mod.delta_array(PARAMS, g, d, e2, e3))
        rows[("sigma_array", name)] = best(lambda: mod.sigma_array(g, d, eta, 0.05))
        m = args.scalar_calls

        def scalar_loop():
            f = mod.delta_scalar
            for i in range(m):
                f(PARAMS, g[i], d[i], e2[i], e3[i])

        rows[("delta_scalar x%d" % m, name)] = best(scalar_loop, repeat=3)
    for (kernel, name), t in rows.items():
        print(f"{kernel:<28}{name:<10}{t * 1e3:>10.2f}ms")
    if _ckernels is not None:
        for kernel in sorted({k for k, _ in rows}):
            print(f"speedup {kernel}: {rows[(kernel, 'python')] / rows[(kernel, 'cython')]:.1f}x")

    print("end to end (one contour count):")
    for pure in ("1", "0"):
        env = dict(os.environ, PVSTAB_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
        backend, secs = out.stdout.split()
        print(f"  {backend:<8}{float(secs) * 1e3:>10.1f}ms")


if __name__ == "__main__":
    main()
