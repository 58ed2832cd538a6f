"""Benchmark the numba kernels against the pure-numpy fallback.

Times the four hot amplitude operations at several register sizes, plus an
end-to-end stored-gate iteration, and prints a side-by-side table.  Run:

    python benchmarks/bench_kernels.py [--repeats N] [--max-qubits N]
"""
import argparse
import time

import numpy as np

from qsc.kernels import numpy_impl

try:
    from qsc.kernels import numba_impl
    HAVE_NUMBA = True
except ImportError:
    numba_impl = None
    HAVE_NUMBA = False


def run_once(backend, amps, mat1, mat2, targets):
    out = backend.apply_1q(amps, mat1, 3)
    out = backend.apply_kq(out, mat2, targets)
    p = backend.prob_one(out, 1)
    backend.collapse_remove(out, 1, 0, 1.0 / np.sqrt(max(1.0 - p, 1e-12)))


def time_backend(backend, n_qubits, repeats):
    rng = np.random.default_rng(0)
    amps = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    amps = (amps / np.linalg.norm(amps)).astype(np.complex128)
    mat1 = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    mat2 = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
    targets = np.array([0, n_qubits - 1], dtype=np.int64)
    run_once(backend, amps, mat1, mat2, targets)  # warm the JIT / caches
    t0 = time.perf_counter()
    for _ in range(repeats):
        run_once(backend, amps, mat1, mat2, targets)
    return (time.perf_counter() - t0) / repeats


def time_iteration(repeats):
    """End-to-end: H stored as a transistor and iterated 4 times."""
    from qsc.core import RngPolicy, single_qubit
    from qsc.seqexec import iterate_gate
    from qsc.transistor import Wire

    iterate_gate(Wire(1), single_qubit("0"), 4, RngPolicy.seeded(0))
    t0 = time.perf_counter()
    for seed in range(repeats):
        iterate_gate(Wire(1), single_qubit("0"), 4, RngPolicy.seeded(seed))
    return (time.perf_counter() - t0) / repeats


def main():
    cli = argparse.ArgumentParser()
    cli.add_argument("--repeats", type=int, default=20)
    cli.add_argument("--max-qubits", type=int, default=20)
    args = cli.parse_args()

    sizes = [q for q in (10, 14, 16, 18, 20) if q <= args.max_qubits]
    print(f"{'qubits':>6} | {'numpy (ms)':>12} | {'numba (ms)':>12} | {'speedup':>8}")
    print("-" * 48)
    for n in sizes:
        t_np = time_backend(numpy_impl, n, args.repeats) * 1e3
        if HAVE_NUMBA:
            t_nb = time_backend(numba_impl, n, args.repeats) * 1e3
            print(f"{n:>6} | {t_np:>12.3f} | {t_nb:>12.3f} | {t_np / t_nb:>7.2f}x")
        else:
            print(f"{n:>6} | {t_np:>12.3f} | {'n/a':>12} | {'n/a':>8}")
    t_loop = time_iteration(args.repeats) * 1e3
    from qsc.kernels import BACKEND_NAME
    print(f"\nstored-gate loop (H^4, {BACKEND_NAME} backend): {t_loop:.3f} ms/run")
    if HAVE_NUMBA:
        print("select the fallback with QSC_KERNELS=numpy")


if __name__ == "__main__":
    main()
