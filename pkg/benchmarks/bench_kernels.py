"""Compiled vs pure-Python kernels on the codec and trellis hot loops.

    python3 benchmarks/bench_kernels.py [--n 65536] [--repeat 5]
"""

import argparse
import time

import numpy as np

from crstego import _backend
from crstego.baselines import stc_embed, stc_spec_for
from crstego.coder import embed_symbols, extract_symbols
from crstego.solver import solve_lambda
from crstego.types import CostMap, TERNARY


def best_of(fn, repeat):
    t = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        t.append(time.perf_counter() - t0)
    return min(t), out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1 << 16)
    ap.add_argument("--stc-n", type=int, default=1 << 14)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n = args.n
    c = rng.random(n)
    costs = CostMap(np.stack([c, np.zeros(n), c], axis=1), TERNARY)
    model = solve_lambda(costs, 0.4 * n)
    bits = rng.integers(0, 2, 2 * n, dtype=np.uint8)

    sn = args.stc_n
    spec = stc_spec_for(sn, sn // 4, 7)
    x = rng.integers(0, 2, sn, dtype=np.uint8)
    rho = rng.random(sn)
    msg = rng.integers(0, 2, sn // 4, dtype=np.uint8)

    print(f"{'kernel':<10}{'backend':<9}{'size':>8}{'seconds':>12}")
    ref = {}
    for name in sorted(_backend.BACKENDS):
        dt, (sym, _) = best_of(lambda: embed_symbols(model, bits, backend=name), args.repeat)
        print(f"{'embed':<10}{name:<9}{n:>8}{dt:>12.5f}")
        dx, _ = best_of(lambda: extract_symbols(model, sym, -1, backend=name), args.repeat)
        print(f"{'extract':<10}{name:<9}{n:>8}{dx:>12.5f}")
        ds, y = best_of(lambda: stc_embed(x, rho, spec, msg, name), 1 if name == "python" else args.repeat)
        print(f"{'stc h=7':<10}{name:<9}{sn:>8}{ds:>12.5f}")
        ref[name] = (sym.tobytes(), y.tobytes())
    if len(ref) > 1:
        print("backends agree:", len(set(ref.values())) == 1)


if __name__ == "__main__":
    main()
