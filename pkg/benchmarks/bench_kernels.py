"""Compare the compiled and pure-numpy kernel backends.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``.  Each backend
is timed on the same inputs and the maximum relative deviation between
their results is reported alongside.
"""
from __future__ import annotations

import argparse
import importlib
import timeit

import numpy as np

from optosqueeze import _pykernels
from optosqueeze.floquet import lift, _generator
from optosqueeze.model import PhysParams, build_model, matched_drives


def _cases():
    p = PhysParams(omega_m=20.0, kappa_out=1.0, gamma_m=2e-5, n_th=10.0)
    model = build_model(p, matched_drives(p, 1e5))
    omegas = np.linspace(-5.0, 5.0, 2001)
    fm = lift(model)
    ks = fm.harmonics(4)
    big = _generator(fm, ks)
    size = big.shape[0]
    w = np.linspace(-1.0, 1.0, 200)
    mats = -big[None] - 1j * w[:, None, None] * np.eye(size)[None]
    rhs = np.broadcast_to(np.eye(size, 4, dtype=complex), (w.size, size, 4)).copy()
    return {
        "lti_response (4x4, 2001 freqs)": lambda k: k.lti_response(model.drift, model.in_map, omegas),
        f"solve_batch ({size}x{size}, 200 systems)": lambda k: k.solve_batch(mats, rhs),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    backends = {"python": _pykernels}
    try:
        backends["cython"] = importlib.import_module("optosqueeze._ckernels")
    except ImportError:
        print("compiled backend not built; timing the numpy backend only")
    for label, fn in _cases().items():
        results, times = {}, {}
        for name, mod in backends.items():
            results[name] = fn(mod)
            times[name] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        line = ", ".join(f"{n} {t * 1e3:8.2f} ms" for n, t in times.items())
        if len(results) == 2:
            a, b = results["python"], results["cython"]
            dev = np.max(np.abs(a - b)) / np.max(np.abs(a))
            line += f", speedup {times['python'] / times['cython']:.2f}x, max rel dev {dev:.1e}"
        print(f"{label:40s} {line}")


if __name__ == "__main__":
    main()
