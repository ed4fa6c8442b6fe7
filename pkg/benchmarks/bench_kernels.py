"""Compare the compiled and pure-Python kernel backends.

Times each pointwise kernel on unit-modulus data and one full Strang step
(two potential half steps around an FFT pair) per backend.

Usage::

    python benchmarks/bench_kernels.py --n 16384 --repeat 200
"""

from __future__ import annotations

import argparse
import time

import numpy as np
import scipy.fft as sfft

from fluortoa import kernels
from fluortoa.propagator import LaserProfile, kinetic_phase, omega_at, potential_matrix
from fluortoa.units import SPECIES
from fluortoa.wavepacket import Grid


def _time(fn, repeat: int) -> float:
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def bench(n: int, repeat: int, rounds: int = 5) -> list[tuple[str, str, float]]:
    cs = SPECIES["Cs133"]
    grid = Grid.from_extent(-8.0, 8.0, n)
    profile = LaserProfile(omega0=1.24 * cs.gamma_internal)
    dt = 1e-4
    half = [np.ascontiguousarray(a) for a in
            potential_matrix(omega_at(profile, grid.x), cs.gamma_internal, dt / 2)]
    phase = np.ascontiguousarray(kinetic_phase(grid, dt, cs.hbar_over_m))
    rng = np.random.default_rng(0)
    psi0 = np.exp(1j * rng.uniform(0, 2 * np.pi, (2, n))) / np.sqrt(2 * n)

    calls = {}
    for name, mod in kernels.BACKENDS.items():
        def step(psi, mod=mod):
            mod.apply_potential(psi, *half)
            out = sfft.fft(psi, axis=-1)
            mod.apply_phase(out, phase)
            psi[:] = sfft.ifft(out, axis=-1, overwrite_x=True)
            mod.apply_potential(psi, *half)

        calls[name, "apply_potential"] = lambda psi, mod=mod: mod.apply_potential(psi, *half)
        calls[name, "apply_phase"] = lambda psi, mod=mod: mod.apply_phase(psi, phase)
        calls[name, "populations"] = lambda psi, mod=mod: mod.populations(psi)
        calls[name, "edge_density"] = lambda psi, mod=mod: mod.edge_density(psi, 8)
        calls[name, "strang_step"] = step

    # backends alternate within each round so warm-up and clock drift hit both;
    # each timing starts from fresh state since repeated damping reaches subnormals
    best = dict.fromkeys(calls, float("inf"))
    for _ in range(rounds):
        for key, fn in calls.items():
            psi = psi0.copy()
            best[key] = min(best[key], _time(lambda fn=fn, psi=psi: fn(psi), repeat))
    rows = [(name, kernel, best[name, kernel]) for name, kernel in sorted(calls)]
    return rows


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=16384, help="grid points (power of two)")
    parser.add_argument("--repeat", type=int, default=200, help="calls per timing")
    args = parser.parse_args(argv)
    rows = bench(args.n, args.repeat)
    print(f"n = {args.n}, default backend: {kernels.BACKEND}")
    print(f"{'backend':<8} {'kernel':<16} {'time (us)':>10}")
    for backend, kernel, t in rows:
        print(f"{backend:<8} {kernel:<16} {t * 1e6:>10.1f}")
    if "cython" in kernels.BACKENDS:
        times = {(b, k): t for b, k, t in rows}
        print("speed-up of the compiled backend:")
        for kernel in ("apply_potential", "apply_phase", "populations", "strang_step"):
            print(f"  {kernel:<16} {times['python', kernel] / times['cython', kernel]:6.2f}x")


if __name__ == "__main__":
    main()
