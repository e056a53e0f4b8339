"""Throughput of the compiled chain kernel against the pure-Python fallback.

Both backends run the same adaptive chain on the same pre-drawn randomness;
the script checks that their outputs agree bit for bit and reports steps per
second.  Usage: python3 benchmarks/bench_backends.py [--steps N] [--repeat R]
"""

import argparse
import time

import numpy as np

from asmcmc import _core
from asmcmc.adapt import StepSchedule
from asmcmc.kernel import advance
from asmcmc.proposal import ProposalModel
from asmcmc.rng import ChainStream
from asmcmc.targets import ExponentialPower, Gaussian, UniformBall


def time_backend(target, model, W, U, eta, backend, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = advance(target, model, target.mode, 0.5, W, U, eta, 0.234, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _core.compiled_backend is None:
        raise SystemExit("compiled kernel not built; run pip install -e . --no-build-isolation")
    cases = [Gaussian([0.0]), Gaussian([0.0] * 4), ExponentialPower(4.0, 1.0, 1),
             UniformBall([0.0, 0.0], 1.0)]
    print(f"{'target':<22}{'dim':>4}{'compiled s':>12}{'python s':>11}{'speedup':>9}"
          f"{'Msteps/s':>10}  identical")
    for t in cases:
        m = ProposalModel.gaussian(t.dim)
        st = ChainStream(1)
        W = m.unit_increments(st, args.steps)
        U = st.uniforms(args.steps)
        eta = StepSchedule().etas(2, args.steps)
        tc, a = time_backend(t, m, W, U, eta, "compiled", args.repeat)
        tp, b = time_backend(t, m, W, U, eta, "python", 1)
        same = a[1] == b[1] and all(np.array_equal(u, v) for u, v in zip(a[2:], b[2:]))
        print(f"{t.name:<22}{t.dim:>4}{tc:>12.3f}{tp:>11.3f}{tp / tc:>9.1f}"
              f"{args.steps / tc / 1e6:>10.2f}  {same}")


if __name__ == "__main__":
    main()
