"""Benchmark: compiled RK4 stepping kernel vs the NumPy/SciPy fallback.

Two workloads:
  * raw kernel: repeated RK4 steps on the superoperator of one cavity
    window at the reference decoherence point (the hot loop itself);
  * full run: the complete dissipative schedule at the reference corner.

Usage: python benchmarks/bench_kernel.py [--repeat N]
"""

import argparse
import time

import numpy as np

from qutricav.dynamics import (
    IntegratorConfig,
    coherent_superoperator,
    dissipator_superoperator,
    run_schedule_lindblad,
    segment_hamiltonian,
    step_count,
)
from qutricav.experiments import derive_rates
from qutricav.hamiltonians import collapse_operators
from qutricav.hilbert import SubsystemLayout
from qutricav.kernel import available_backends, rk4_evolve
from qutricav.protocol import (
    EQUAL_WEIGHTS,
    CavityWindow,
    ProtocolParams,
    build_schedule,
    initial_state,
    segment_duration,
    segment_scale,
)


def bench_raw(backend: str, repeat: int) -> tuple[float, int]:
    layout = SubsystemLayout()
    params = ProtocolParams.reference()
    rates = derive_rates(30.0, 2.5)
    cfg = IntegratorConfig()
    seg = CavityWindow(1, 3 * np.pi / 2)
    generator = (
        dissipator_superoperator(collapse_operators(rates, layout), layout.dim)
        + coherent_superoperator(segment_hamiltonian(seg, params, layout))
    ).tocsr()
    duration = segment_duration(seg, params)
    n = step_count(duration, segment_scale(seg, params), cfg)
    psi = initial_state(EQUAL_WEIGHTS, layout)
    y0 = np.outer(psi, psi.conj()).reshape(-1)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        rk4_evolve(generator, y0, duration / n, n, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, n


def bench_full_run(backend: str, repeat: int) -> float:
    layout = SubsystemLayout()
    params = ProtocolParams.reference()
    rates = derive_rates(30.0, 2.5)
    cfg = IntegratorConfig()
    schedule = build_schedule()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        run_schedule_lindblad(
            EQUAL_WEIGHTS, schedule, params, rates, cfg, layout, backend=backend
        )
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3,
                        help="repetitions per measurement (best-of)")
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")

    raw = {}
    for b in backends:
        raw[b], n_steps = bench_raw(b, args.repeat)
        rate = n_steps / raw[b]
        print(f"raw kernel   [{b:>8}]: {raw[b] * 1e3:8.2f} ms "
              f"for {n_steps} steps ({rate:,.0f} steps/s)")
    full = {}
    for b in backends:
        full[b] = bench_full_run(b, args.repeat)
        print(f"full run     [{b:>8}]: {full[b] * 1e3:8.2f} ms")
    if len(backends) == 2:
        print(f"speedup (python/compiled): raw {raw['python'] / raw['compiled']:.2f}x, "
              f"full run {full['python'] / full['compiled']:.2f}x")


if __name__ == "__main__":
    main()
