"""Experiment harness: fidelity sweeps, the timing budget, and run records.

Configs carry human units (MHz, microseconds, nanoseconds) and convert to
angular rad/s and seconds exactly once when a run starts; a frequency entry
of 100 MHz means an angular frequency of 2*pi*1e8 rad/s. Sweep grids run in
T-major order and the output is byte-identical for the physics columns
regardless of worker count (wall-clock columns inherently vary).
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .dynamics import (
    IntegrationError,
    IntegratorConfig,
    LindbladRunResult,
    ReducedDiagnostics,
    fidelity,
    reduced_diagnostics,
    run_schedule_lindblad,
)
from .hamiltonians import DecoherenceRates
from .hilbert import SubsystemLayout
from .kernel import backend_name
from .linalg import partial_trace
from .protocol import (
    ProtocolParams,
    Schedule,
    WeightVector,
    build_schedule,
    schedule_digest,
    target_state,
    total_time,
)
from .tolerances import DEFAULT, Tolerances

TWO_PI = 2.0 * np.pi
_EQUAL = 1.0 / np.sqrt(3.0)


@dataclass(frozen=True)
class SimulationConfig:
    """One experiment's knobs, in boundary (human) units."""

    g1_mhz: float = 100.0
    g2_mhz: float = 100.0
    omega10_mhz: float = 100.0
    omega21_mhz: float = 100.0
    tau_d_ns: float = 1.5
    n_cavity: int = 3
    alpha: complex = _EQUAL
    beta: complex = _EQUAL
    gamma: complex = _EQUAL
    t_us: float = 30.0
    kappa_inv_us: float = 2.5
    t_grid_us: tuple[float, ...] = (5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    kappa_inv_grid_us: tuple[float, ...] = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
    max_phase_step: float = 0.005
    hard_step_cap_ns: float = 0.25
    schedule_mode: str = "serial"
    seed: int = 42
    workers: int = 1
    fidelity_traced: bool = False
    check_convergence: bool = False

    def __post_init__(self) -> None:
        for name in ("g1_mhz", "g2_mhz", "omega10_mhz", "omega21_mhz"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.tau_d_ns < 0:
            raise ValueError("tau_d_ns must be non-negative")
        if self.n_cavity < 2:
            raise ValueError("n_cavity must keep at least 2 Fock levels")
        if self.t_us <= 0 or self.kappa_inv_us <= 0:
            raise ValueError("T and kappa_inv must be positive")
        for name in ("t_grid_us", "kappa_inv_grid_us"):
            grid = getattr(self, name)
            if len(grid) == 0:
                raise ValueError(f"{name} must not be empty")
            if any(v <= 0 for v in grid):
                raise ValueError(f"{name} entries must be positive")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValueError(f"{name} must be strictly increasing")
        if self.schedule_mode not in ("serial", "concurrent"):
            raise ValueError("schedule_mode must be 'serial' or 'concurrent'")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    # -- conversions to internal units -------------------------------------

    def protocol_params(self) -> ProtocolParams:
        return ProtocolParams(
            g1=TWO_PI * self.g1_mhz * 1e6,
            g2=TWO_PI * self.g2_mhz * 1e6,
            omega10=TWO_PI * self.omega10_mhz * 1e6,
            omega21=TWO_PI * self.omega21_mhz * 1e6,
            tau_d=self.tau_d_ns * 1e-9,
        )

    def weights(self) -> WeightVector:
        return WeightVector(self.alpha, self.beta, self.gamma).normalized()

    def layout(self) -> SubsystemLayout:
        return SubsystemLayout(self.n_cavity)

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(
            max_phase_step=self.max_phase_step,
            hard_step_cap=self.hard_step_cap_ns * 1e-9,
            check_convergence=self.check_convergence,
        )

    def schedule(self) -> Schedule:
        return build_schedule(self.schedule_mode, self.tau_d_ns * 1e-9)

    def config_hash(self) -> str:
        payload = {k: repr(v) for k, v in sorted(asdict(self).items())}
        canonical = json.dumps(payload, sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()

    @classmethod
    def reference(cls) -> "SimulationConfig":
        return cls()


def derive_rates(t_us: float, kappa_inv_us: float) -> DecoherenceRates:
    """Decoherence rates from the lifetime scaling used in the sweeps.

    Lifetimes in microseconds: level-1 relaxation 2T, level-2 relaxation 5T
    through the weak direct path and T through the cascade, both dephasing
    times T; cavity lifetime ``kappa_inv_us``. Identical for both qutrits.
    """
    if t_us <= 0 or kappa_inv_us <= 0:
        raise ValueError("T and kappa_inv must be positive")
    us = 1e-6
    g10 = 1.0 / (2.0 * t_us * us)
    g20 = 1.0 / (5.0 * t_us * us)
    g21 = 1.0 / (t_us * us)
    gphi = 1.0 / (t_us * us)
    return DecoherenceRates(
        kappa=1.0 / (kappa_inv_us * us),
        gamma10=(g10, g10),
        gamma21=(g21, g21),
        gamma20=(g20, g20),
        gamma_phi1=(gphi, gphi),
        gamma_phi2=(gphi, gphi),
    )


# ---------------------------------------------------------------------------
# Single runs
# ---------------------------------------------------------------------------

@dataclass
class SingleRunResult:
    t_us: float
    kappa_inv_us: float
    fidelity: float
    wall_s: float
    run: LindbladRunResult
    diagnostics: ReducedDiagnostics


def run_single(
    cfg: SimulationConfig,
    t_us: float | None = None,
    kappa_inv_us: float | None = None,
    tol: Tolerances = DEFAULT,
) -> SingleRunResult:
    """One dissipative run at the given (or the config's) grid point."""
    t_us = cfg.t_us if t_us is None else t_us
    kappa_inv_us = cfg.kappa_inv_us if kappa_inv_us is None else kappa_inv_us
    layout = cfg.layout()
    w = cfg.weights()
    rates = derive_rates(t_us, kappa_inv_us)
    started = time.perf_counter()
    run = run_schedule_lindblad(
        w, cfg.schedule(), cfg.protocol_params(), rates, cfg.integrator(),
        layout, tol,
    )
    f = _config_fidelity(cfg, run.rho, w, layout, tol)
    wall = time.perf_counter() - started
    return SingleRunResult(
        t_us=t_us,
        kappa_inv_us=kappa_inv_us,
        fidelity=f,
        wall_s=wall,
        run=run,
        diagnostics=reduced_diagnostics(run.rho, layout),
    )


def _config_fidelity(
    cfg: SimulationConfig,
    rho: np.ndarray,
    w: WeightVector,
    layout: SubsystemLayout,
    tol: Tolerances,
) -> float:
    """Fidelity against the ideal output, full-system by default.

    The default target includes the cavity vacuum factor: the ideal output
    leaves the cavity empty, so photon loss or leftover photons count as
    error. The traced variant drops the cavity first (sensitivity analysis).
    """
    if not cfg.fidelity_traced:
        return fidelity(rho, target_state(w, layout, tol), tol)
    rho_qq = partial_trace(rho, layout.dims, [0, 1])
    target_qq = np.zeros(9, dtype=complex)
    target_qq[0] = w.alpha   # |00>
    target_qq[4] = w.beta    # |11>
    target_qq[8] = w.gamma   # |22>
    return fidelity(rho_qq, target_qq, tol)


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    t_us: float
    kappa_inv_us: float
    fidelity: float
    wall_s: float


@dataclass
class SweepResult:
    rows: list[SweepRow]
    config: SimulationConfig
    config_hash: str
    schedule_digest: str
    kernel_backend: str
    artifact_version: str = __version__

    def fidelity_grid(self) -> np.ndarray:
        """Fidelities as a (len(T grid), len(kappa grid)) array."""
        nt = len(self.config.t_grid_us)
        nk = len(self.config.kappa_inv_grid_us)
        return np.array([r.fidelity for r in self.rows]).reshape(nt, nk)


def _sweep_point(cfg: SimulationConfig, t_us: float, k_us: float) -> SweepRow:
    try:
        r = run_single(cfg, t_us, k_us)
    except IntegrationError as exc:
        raise IntegrationError(
            f"grid point T={t_us:g} us, kappa_inv={k_us:g} us: {exc}"
        ) from exc
    return SweepRow(t_us, k_us, r.fidelity, r.wall_s)


def run_sweep(cfg: SimulationConfig) -> SweepResult:
    """Fidelity over the (T, kappa_inv) grid, rows in T-major order.

    Grid points are independent runs; with ``workers > 1`` they execute in
    a process pool but rows are always assembled in grid order, so the
    physics output does not depend on scheduling.
    """
    points = [
        (t, k) for t in cfg.t_grid_us for k in cfg.kappa_inv_grid_us
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_sweep_point, cfg, t, k) for t, k in points]
            rows = [f.result() for f in futures]
    else:
        rows = [_sweep_point(cfg, t, k) for t, k in points]
    return SweepResult(
        rows=rows,
        config=cfg,
        config_hash=cfg.config_hash(),
        schedule_digest=schedule_digest(cfg.schedule()),
        kernel_backend=backend_name(),
    )


# ---------------------------------------------------------------------------
# Timing budget
# ---------------------------------------------------------------------------

@dataclass
class TimingReport:
    """Serial time budget of one run, all terms in seconds."""

    pulse_01_time: float
    pulse_12_time: float
    cavity_q1_time: float
    cavity_q2_time: float
    retune_time: float
    total: float
    lifetime_ratios: dict[str, float]

    @property
    def terms_ns(self) -> tuple[float, ...]:
        return tuple(
            1e9 * v
            for v in (
                self.pulse_01_time,
                self.pulse_12_time,
                self.cavity_q1_time,
                self.cavity_q2_time,
                self.retune_time,
            )
        )


def timing_report(cfg: SimulationConfig) -> TimingReport:
    """Break the total operation time into its five terms.

    Also reports each decoherence lifetime (at the config's T and kappa_inv)
    as a multiple of the total operation time; large ratios are what make
    high fidelity possible.
    """
    p = cfg.protocol_params()
    terms = {
        "pulse_01_time": 7 * np.pi / (4 * p.omega10),
        "pulse_12_time": 13 * np.pi / (4 * p.omega21),
        "cavity_q1_time": 4 * np.pi / p.g1,
        "cavity_q2_time": 2 * np.pi / p.g2,
        "retune_time": 8 * p.tau_d,
    }
    total = total_time(p.g1, p.g2, p.omega10, p.omega21, p.tau_d)
    us = 1e-6
    lifetimes = {
        "gamma10_inv": 2.0 * cfg.t_us * us,
        "gamma20_inv": 5.0 * cfg.t_us * us,
        "gamma21_inv": cfg.t_us * us,
        "gamma_phi1_inv": cfg.t_us * us,
        "gamma_phi2_inv": cfg.t_us * us,
        "kappa_inv": cfg.kappa_inv_us * us,
    }
    ratios = {k: v / total for k, v in lifetimes.items()}
    return TimingReport(total=total, lifetime_ratios=ratios, **terms)


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.10g}"


def write_csv(result: SweepResult, path: str) -> None:
    """CSV rows in T-major order; floats carry 10 significant digits."""
    lines = ["T_us,kappa_inv_us,fidelity,wall_s"]
    for r in result.rows:
        lines.append(
            f"{_fmt(r.t_us)},{_fmt(r.kappa_inv_us)},{_fmt(r.fidelity)},{_fmt(r.wall_s)}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_heatmap(result: SweepResult, path: str) -> None:
    """Whitespace triples with blank lines between T blocks (grid-plot layout)."""
    lines: list[str] = []
    last_t = None
    for r in result.rows:
        if last_t is not None and r.t_us != last_t:
            lines.append("")
        lines.append(f"{_fmt(r.t_us)} {_fmt(r.kappa_inv_us)} {_fmt(r.fidelity)}")
        last_t = r.t_us
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def config_echo(cfg: SimulationConfig) -> dict:
    echo = asdict(cfg)
    for key in ("alpha", "beta", "gamma"):
        val = complex(echo[key])
        echo[key] = {"re": val.real, "im": val.imag}
    for key in ("t_grid_us", "kappa_inv_grid_us"):
        echo[key] = list(echo[key])
    return echo


def sweep_record(result: SweepResult) -> dict:
    """JSON-ready run record; timestamps live only in the metadata field."""
    return {
        "artifact_version": result.artifact_version,
        "config": config_echo(result.config),
        "config_hash": result.config_hash,
        "schedule_digest": result.schedule_digest,
        "kernel_backend": result.kernel_backend,
        "rows": [
            {
                "T_us": r.t_us,
                "kappa_inv_us": r.kappa_inv_us,
                "fidelity": r.fidelity,
                "wall_s": r.wall_s,
            }
            for r in result.rows
        ],
        "metadata": {"created_unix": time.time()},
    }


def single_run_record(cfg: SimulationConfig, result: SingleRunResult) -> dict:
    d = result.diagnostics
    return {
        "artifact_version": __version__,
        "config": config_echo(cfg),
        "config_hash": cfg.config_hash(),
        "schedule_digest": schedule_digest(cfg.schedule()),
        "kernel_backend": backend_name(),
        "T_us": result.t_us,
        "kappa_inv_us": result.kappa_inv_us,
        "fidelity": result.fidelity,
        "total_steps": result.run.total_steps,
        "physicality": {
            "worst_trace_error": result.run.worst_trace_error,
            "worst_herm_error": result.run.worst_herm_error,
            "min_eigenvalue": result.run.min_eigenvalue,
        },
        "diagnostics": {
            "cavity_vacuum_population": d.cavity_vacuum_population,
            "cavity_populations": d.cavity_populations,
            "qutrit1_populations": d.qutrit1_populations,
            "qutrit2_populations": d.qutrit2_populations,
            "purity_q1": d.purity_q1,
            "purity_q2": d.purity_q2,
            "purity_cavity": d.purity_cavity,
        },
        "metadata": {"created_unix": time.time(), "wall_s": result.wall_s},
    }


def write_json(record: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")
