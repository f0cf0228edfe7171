"""Time the compiled BEKK recursions against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--sizes 1000 12000] [--repeat 3]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from spillnet.bekk import _core_py
from spillnet.bekk.model import BekkParams, _h0_vec, initial_covariance, simulate_pair

try:
    from spillnet.bekk import _core
except ImportError:  # extension not built
    _core = None

PARAMS = BekkParams(
    mu=np.zeros(2),
    phi=np.zeros((2, 2)),
    c_lower=np.array([[0.3, 0.0], [0.05, 0.3]]),
    a=np.array([[0.30, 0.10], [0.05, 0.25]]),
    b=np.array([[0.90, -0.05], [0.03, 0.92]]),
)


def _cases(T: int):
    theta = PARAMS.to_vector()
    r = simulate_pair(PARAMS, T, seed=0)
    h0 = _h0_vec(initial_covariance(r))
    z = np.random.default_rng(1).standard_normal((T, 2))
    return {
        "loglik": lambda m: m.loglik_score(theta, r, h0, False),
        "loglik+score": lambda m: m.loglik_score(theta, r, h0, True),
        "filter": lambda m: m.filter_covariances(theta, r, h0),
        "simulate": lambda m: m.simulate_path(theta, z, h0),
    }


def _best(fn, module, repeat: int) -> float:
    number = 1
    while timeit.timeit(lambda: fn(module), number=number) < 0.2 and number < 1000:
        number *= 2
    return min(timeit.repeat(lambda: fn(module), number=number, repeat=repeat)) / number


def _agree(a, b) -> float:
    a, b = (x if isinstance(x, tuple) else (x,) for x in (a, b))
    return max(float(np.max(np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
                            / np.maximum(1.0, np.abs(np.asarray(y, dtype=float)))))
               for x, y in zip(a, b))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 12000])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _core is None:
        print("compiled extension not built; run `python setup.py build_ext --inplace` first")
        return 1
    print(f"{'kernel':<14}{'T':>7}{'compiled ms':>14}{'python ms':>12}{'speedup':>9}{'max rel diff':>14}")
    for T in args.sizes:
        for name, fn in _cases(T).items():
            fast = _best(fn, _core, args.repeat)
            slow = _best(fn, _core_py, args.repeat)
            diff = _agree(fn(_core), fn(_core_py))
            print(f"{name:<14}{T:>7}{fast * 1e3:>14.3f}{slow * 1e3:>12.3f}{slow / fast:>9.1f}{diff:>14.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
