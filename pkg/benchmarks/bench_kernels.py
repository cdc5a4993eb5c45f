"""Compare the numba and numpy kernels on realistic sizes.

    python3 benchmarks/bench_kernels.py [--repeat N]

Reports best-of-N wall time per kernel and checks both paths agree.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from genfield import _kernels
from genfield.colombeau import catalog_net
from genfield.fock import FockBasis


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_ladder(repeat: int):
    # 27 modes (d=3, K=3) with n_max=3: 4060 basis states
    basis = FockBasis(27, 3)
    args = (basis.states, basis._codes_sorted, basis._order, basis._powers, 5)
    ref = _kernels.ladder_entries_numpy(*args)
    fast = _kernels.ladder_entries_numba(*args)
    for a, b in zip(ref, fast):
        assert np.array_equal(np.sort(a), np.sort(b))
    t_np = best_of(lambda: [_kernels.ladder_entries_numpy(*args[:-1], m) for m in range(27)], repeat)
    t_nb = best_of(lambda: [_kernels.ladder_entries_numba(*args[:-1], m) for m in range(27)], repeat)
    return "ladder_entries (27 modes, dim 4060)", t_np, t_nb


def bench_sup(repeat: int):
    net = catalog_net("delta_gaussian")
    x = np.linspace(-12, 12, 400_001)
    d = np.ascontiguousarray(net.derivs(x, 0.01, 3))
    assert abs(_kernels.weighted_sup_numpy(x, d, 2, 3) - _kernels.weighted_sup_numba(x, d, 2, 3)) < 1e-9
    t_np = best_of(lambda: _kernels.weighted_sup_numpy(x, d, 2, 3), repeat)
    t_nb = best_of(lambda: _kernels.weighted_sup_numba(x, d, 2, 3), repeat)
    return "weighted_sup (400k points, l=3)", t_np, t_nb


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; only the numpy path is available")
        return
    # warm the JIT before timing
    bench_ladder(1)
    bench_sup(1)
    print(f"{'kernel':40s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}")
    for name, t_np, t_nb in (bench_ladder(args.repeat), bench_sup(args.repeat)):
        print(f"{name:40s} {1e3 * t_np:11.3f} {1e3 * t_nb:11.3f} {t_np / t_nb:8.2f}")


if __name__ == "__main__":
    main()
