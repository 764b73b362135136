"""Compare the compiled and pure-Python integrator kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Micro timings call each backend directly; the end-to-end timing runs an
exit-time computation in a subprocess per backend (the backend is chosen at
import, so the fallback is forced with DIPOLEJET_PURE_PYTHON=1).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from dipolejet.kernels import available_backends
from dipolejet.potential import GaussianBumps, PolynomialPotential, SumPotential

Q = SumPotential([
    PolynomialPotential({(1, 0): 0.1, (0, 1): 0.2, (0, 2): 0.05, (1, 2): 0.01}),
    GaussianBumps([((0.3, 0.5), 0.03, 0.4), ((-0.2, 1.2), -0.02, 0.3)]),
])
Y = (0.0, 0.0, 0.05, -0.3)

E2E = """
import time, numpy as np
from dipolejet.geometry import Circle
from dipolejet.potential import GaussianBumps, PolynomialPotential, SumPotential
from dipolejet.dynamics import ExitSolver
from dipolejet.kernels import BACKEND
Q = SumPotential([PolynomialPotential({(1, 0): 0.1, (0, 1): 0.2, (0, 2): 0.05, (1, 2): 0.01}),
                  GaussianBumps([((0.3, 0.5), 0.03, 0.4), ((-0.2, 1.2), -0.02, 0.3)])])
solver = ExitSolver(Q, Circle((0, 1), 1), tol=1e-12)
t0 = time.perf_counter()
for k in range(%d):
    tau, _ = solver.run((0.0, 0.0), (0.3 + 0.01 * k, -0.02))
    assert tau > 0
print(BACKEND, time.perf_counter() - t0)
"""


def micro(mod, repeat):
    pp = mod.make_pack(Q.poly_rows(), Q.gauss_rows())
    f0 = mod.rhs(Y, pp, pp)
    out = {}
    for name, fn in (
        ("rhs", lambda: mod.rhs(Y, pp, pp)),
        ("step", lambda: mod.step(Y, f0, 1e-2, 1e-12, 1e-12, pp, pp)),
        ("advance", lambda: mod.advance(Y, 1e-2, pp, pp)),
    ):
        n = 2000
        t = min(timeit.repeat(fn, number=n, repeat=repeat)) / n
        out[name] = t
    return out


def end_to_end(pure, n):
    env = dict(os.environ)
    if pure:
        env["DIPOLEJET_PURE_PYTHON"] = "1"
    else:
        env.pop("DIPOLEJET_PURE_PYTHON", None)
    r = subprocess.run([sys.executable, "-c", E2E % n], env=env, capture_output=True, text=True, check=True)
    name, t = r.stdout.split()
    return name, float(t)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--launches", type=int, default=20)
    args = ap.parse_args()
    backends = available_backends()
    rows = {name: micro(mod, args.repeat) for name, mod in backends.items()}
    print(f"{'kernel':10s}" + "".join(f"{b:>14s}" for b in rows) + ("   speedup" if len(rows) > 1 else ""))
    for k in ("rhs", "step", "advance"):
        line = f"{k:10s}" + "".join(f"{rows[b][k] * 1e6:12.2f}us" for b in rows)
        if "cython" in rows:
            line += f"   {rows['python'][k] / rows['cython'][k]:7.1f}x"
        print(line)
    if "cython" in backends:
        a = np.asarray(backends["python"].advance(Y, 0.05, *[backends["python"].make_pack(Q.poly_rows(), Q.gauss_rows())] * 2))
        b = np.asarray(backends["cython"].advance(Y, 0.05, *[backends["cython"].make_pack(Q.poly_rows(), Q.gauss_rows())] * 2))
        print(f"max |python - cython| after one step: {np.abs(a - b).max():.2e}")
    times = {}
    for pure in ([False, True] if "cython" in backends else [True]):
        name, t = end_to_end(pure, args.launches)
        times[name] = t
        print(f"{args.launches} exit-time solves, {name:7s}: {t:.3f} s")
    if len(times) == 2:
        print(f"end-to-end speedup: {times['python'] / times['cython']:.1f}x")


if __name__ == "__main__":
    main()
