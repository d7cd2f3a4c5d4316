"""Compare the compiled and numpy gradient kernels.

    python3 benchmarks/bench_kernels.py [--samples N] [--repeat R]
"""
import argparse
import timeit

import numpy as np

from snapvar import gates, kernels


def _inputs(d, t, n, rng):
    lam, v = gates.displacement_basis(d)
    alphas = rng.uniform(0, 2 * np.pi, (n, t))
    thetas = rng.uniform(0, 2 * np.pi, (n, t, d))
    obs = np.diag(np.arange(d - 1, -1, -1)).astype(complex)
    psi = np.eye(d, dtype=complex)[:1]
    return lam, v, alphas, thetas, obs, psi


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    names = sorted(kernels.BACKENDS)
    print(f"backends: {', '.join(names)} (active: {kernels.BACKEND})")
    print(f"{'kernel':<8} {'d':>3} {'T':>3} " + " ".join(f"{n + ' [ms]':>14}" for n in names) + f" {'speedup':>8}")
    for d, t in [(2, 5), (4, 10), (8, 15), (12, 15)]:
        lam, v, al, th, obs, psi = _inputs(d, t, args.samples, rng)
        jobs = {
            "state": lambda impl: impl.state_grads(v, lam, al, th, 3, 1, obs, psi, np.ones(1)),
            "gate": lambda impl: impl.gate_grads(v, lam, al, th, 3, 1, np.eye(d, dtype=complex)),
        }
        for kname, job in jobs.items():
            ms = {}
            for n in names:
                impl = kernels.BACKENDS[n]
                ms[n] = 1e3 * min(timeit.repeat(lambda: job(impl), number=1, repeat=args.repeat))
            speed = ms["python"] / ms["cython"] if "cython" in ms else float("nan")
            cols = " ".join(f"{ms[n]:>14.2f}" for n in names)
            print(f"{kname:<8} {d:>3} {t:>3} {cols} {speed:>8.1f}x")
    h = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    h = h + h.conj().T
    for n in names:
        ms = 1e3 * min(timeit.repeat(lambda: kernels.BACKENDS[n].jacobi_eigh(h, 1e-12, 100), number=5, repeat=3)) / 5
        print(f"jacobi d=16 {n}: {ms:.3f} ms")


if __name__ == "__main__":
    main()
