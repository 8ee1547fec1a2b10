"""Time the compiled and pure-Python jet evaluators on the same programs.

Usage: python benchmarks/bench_kernels.py [--repeats N] [--points N]
"""
import argparse
import timeit

import numpy as np

from gencontact import kernels, structures
from gencontact.fields import compile_exprs, parse_expr


def workloads():
    """(label, program) pairs: small built-in blocks and a larger composite one."""
    xyz = structures.HEISENBERG
    big = [f"sin(x*y + {k}) * exp(0.1*z) / (2 + x^2) + cos(y - {k}*z)^3" for k in range(9)]
    blocks = [("contact form (3)", structures.HEIS_ETA),
              ("heisenberg g (3x3)", [e for row in structures.HEIS_G for e in row]),
              ("composite (9 outputs)", big)]
    return [(label, compile_exprs([parse_expr(e, xyz) for e in exprs], xyz)) for label, exprs in blocks]


def time_backend(program, backend, points, repeats):
    def work():
        for p in points:
            program.run(p, backend)

    return min(timeit.repeat(work, number=1, repeat=repeats)) / len(points)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--points", type=int, default=2000)
    args = ap.parse_args(argv)
    points = np.random.default_rng(0).uniform(-1, 1, (args.points, 3))
    backends = sorted(kernels.BACKENDS)
    if "compiled" not in backends:
        print("compiled extension not built; timing the python backend only")
    print(f"{'workload':24s}" + "".join(f"{b + ' (us)':>16s}" for b in backends) + f"{'speedup':>10s}")
    for label, program in workloads():
        t = {b: time_backend(program, b, points, args.repeats) for b in backends}
        speed = f"{t['python'] / t['compiled']:9.1f}x" if "compiled" in t else ""
        print(f"{label:24s}" + "".join(f"{1e6 * t[b]:16.2f}" for b in backends) + f"{speed:>10s}")


if __name__ == "__main__":
    main()
