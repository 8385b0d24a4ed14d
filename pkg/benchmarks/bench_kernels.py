"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Times the three hot kernels on 8-qubit (256 x 256) density matrices, then a
full exact GHZ sweep with each backend forced through ``ENTPUMP_BACKEND``.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from entpump import kernels
from entpump.lindblad import jump_operators
from entpump.qmat import H, random_density
from entpump.tables import GHZ

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

SWEEP = (
    "import time; from entpump.experiments import ExperimentConfig, sweep; "
    "t = time.perf_counter(); sweep(ExperimentConfig('ghz', p_grid=(0.0, 0.25, 0.5, 0.75, 1.0))); "
    "print(time.perf_counter() - t)"
)


def kernel_cases(n: int = 8):
    rng = np.random.default_rng(1)
    rho = random_density(n, rng)
    t1 = np.array([3], dtype=np.int64)
    t2 = np.array([2, 6], dtype=np.int64)
    small = random_density(4, rng)
    jumps = np.array(jump_operators(GHZ, (0, 0, 0, 0)))
    zero = np.zeros((16, 16), dtype=complex)
    rates = np.ones(len(jumps))
    return {
        "apply_gate 1q": lambda k: k.apply_gate(rho, H, t1, n),
        "apply_gate 2q": lambda k: k.apply_gate(rho, CNOT, t2, n),
        "depolarize 2q": lambda k: k.depolarize(rho, t2, 0.01, n),
        "lindblad_rk4 x200": lambda k: k.lindblad_rk4(small, zero, jumps, rates, 0.01, 200),
    }


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)

    available = kernels.backends()
    print(f"backends available: {', '.join(sorted(available))} (default: {kernels.BACKEND})")
    print(f"{'kernel':<20}" + "".join(f"{name:>14}" for name in sorted(available)) + "   speedup")
    for label, fn in kernel_cases().items():
        times = {}
        for name, mod in sorted(available.items()):
            fn(mod)
            times[name] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        speed = times["python"] / times["compiled"] if "compiled" in times else float("nan")
        print(f"{label:<20}" + "".join(f"{times[k] * 1e3:>12.3f}ms" for k in sorted(times)) + f"   {speed:6.1f}x")

    print("\nfull GHZ exact sweep (5 grid points):")
    for name in sorted(available):
        env = dict(os.environ, ENTPUMP_BACKEND=name)
        out = subprocess.run([sys.executable, "-c", SWEEP], env=env, capture_output=True, text=True, check=True)
        print(f"  {name:<10} {float(out.stdout):.3f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
