"""Propagation of states and density matrices through schedules.

Unitary segments use the eigendecomposition propagator. Dissipative runs
integrate the master equation

    drho/dt = -i[H, rho] + sum_k ( C_k rho C_k^dag - {C_k^dag C_k, rho}/2 )

with classical fixed-step RK4 on the vectorized density matrix. The
generator is assembled once per segment as a sparse superoperator (row-major
vectorization, so ``vec(A rho B) = (A kron B^T) vec(rho)``) and handed to the
stepping kernel. Step sizes are phase-controlled: the strongest active drive
advances at most ``max_phase_step`` radians per step, which makes runs
deterministic and reproducible across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import protocol
from .hamiltonians import DecoherenceRates, PulseParams, collapse_operators, h_cavity, h_pulse
from .hilbert import CAVITY, Q1, Q2, SubsystemLayout
from .kernel import rk4_evolve
from .linalg import dagger, hermiticity_error, matexp, partial_trace
from .protocol import (
    CavityWindow,
    ProtocolParams,
    PulseSegment,
    Schedule,
    Segment,
    WeightVector,
    segment_duration,
    segment_scale,
)
from .tolerances import DEFAULT, Tolerances


class IntegrationError(RuntimeError):
    """The integrator produced an unphysical density matrix."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 controls.

    ``max_phase_step`` bounds drive-phase advance per step (radians);
    ``hard_step_cap`` bounds the raw step size, which is what limits steps
    during drive-free retuning idles. ``check_convergence`` additionally
    integrates every segment at half step and records the deviation.
    """

    max_phase_step: float = 0.005
    hard_step_cap: float = 0.25e-9
    check_convergence: bool = False

    def __post_init__(self) -> None:
        if self.max_phase_step <= 0 or self.hard_step_cap <= 0:
            raise ValueError("integrator step controls must be positive")


@dataclass(frozen=True)
class BoundaryDiagnostics:
    """Physicality record taken at one segment boundary."""

    label: str
    trace_error: float
    herm_error: float
    min_eigenvalue: float
    convergence_error: float = 0.0


@dataclass
class LindbladRunResult:
    rho: np.ndarray
    boundaries: list[BoundaryDiagnostics]
    total_steps: int

    @property
    def worst_trace_error(self) -> float:
        return max((b.trace_error for b in self.boundaries), default=0.0)

    @property
    def worst_herm_error(self) -> float:
        return max((b.herm_error for b in self.boundaries), default=0.0)

    @property
    def min_eigenvalue(self) -> float:
        return min((b.min_eigenvalue for b in self.boundaries), default=0.0)


def density_from_state(state: np.ndarray) -> np.ndarray:
    return np.outer(state, state.conj())


def propagate_unitary(
    state: np.ndarray, h: np.ndarray, t: float, tol: Tolerances = DEFAULT
) -> np.ndarray:
    """Exact unitary evolution of a pure state or density matrix."""
    u = matexp(h, t, tol=tol)
    if state.ndim == 1:
        return u @ state
    return u @ state @ dagger(u)


def lindblad_rhs(
    rho: np.ndarray,
    h: np.ndarray | None,
    channels: list[tuple[np.ndarray, str]],
) -> np.ndarray:
    """Dense master-equation right-hand side (reference implementation).

    The sparse superoperator path is what production runs use; this direct
    form exists as the independent cross-check and for small experiments.
    """
    if h is not None:
        drho = -1j * (h @ rho - rho @ h)
    else:
        drho = np.zeros_like(rho)
    for c, _ in channels:
        cd = dagger(c)
        cdc = cd @ c
        drho += c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc)
    return drho


def dissipator_superoperator(
    channels: list[tuple[np.ndarray, str]], dim: int
) -> sp.csr_matrix:
    """Sparse superoperator of all jump channels (no coherent part)."""
    d2 = dim * dim
    eye = sp.identity(dim, dtype=complex, format="csr")
    total = sp.csr_matrix((d2, d2), dtype=complex)
    for c, _ in channels:
        cs = sp.csr_matrix(c)
        cdc = sp.csr_matrix(dagger(c) @ c)
        total = total + sp.kron(cs, cs.conj(), format="csr")
        total = total - 0.5 * sp.kron(cdc, eye, format="csr")
        total = total - 0.5 * sp.kron(eye, cdc.T, format="csr")
    return total


def coherent_superoperator(h: np.ndarray) -> sp.csr_matrix:
    """Sparse superoperator of the commutator ``-i[H, .]``."""
    dim = h.shape[0]
    eye = sp.identity(dim, dtype=complex, format="csr")
    hs = sp.csr_matrix(h)
    return -1j * (sp.kron(hs, eye, format="csr") - sp.kron(eye, hs.T, format="csr"))


def segment_hamiltonian(
    segment: Segment,
    params: ProtocolParams,
    layout: SubsystemLayout,
    tol: Tolerances = DEFAULT,
) -> np.ndarray | None:
    """Physical-strength generator of a segment (None for idles)."""
    if isinstance(segment, CavityWindow):
        return h_cavity(params.coupling(segment.qutrit), segment.qutrit, layout, tol)
    if isinstance(segment, PulseSegment):
        rabi = params.rabi(segment.transition)
        pulse = PulseParams(
            segment.transition, rabi, segment.phase, segment.angle / rabi
        )
        return h_pulse(pulse, segment.qutrit, layout, tol)
    return None


def step_count(duration: float, scale: float, cfg: IntegratorConfig) -> int:
    """Number of RK4 steps: phase-limited, then capped by the hard step size."""
    if duration <= 0:
        return 0
    n = 1
    if scale > 0:
        n = max(n, math.ceil(scale * duration / cfg.max_phase_step))
    n = max(n, math.ceil(duration / cfg.hard_step_cap))
    return n


def _hermitize(rho: np.ndarray) -> np.ndarray:
    return 0.5 * (rho + rho.conj().T)


def _boundary_check(
    rho: np.ndarray,
    label: str,
    tol: Tolerances,
    convergence_error: float = 0.0,
) -> tuple[np.ndarray, BoundaryDiagnostics]:
    """Hermitize and validate a density matrix at a segment boundary."""
    herm_err = hermiticity_error(rho)
    rho = _hermitize(rho)
    trace_err = abs(float(np.trace(rho).real) - 1.0)
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    diag = BoundaryDiagnostics(label, trace_err, herm_err, min_eig, convergence_error)
    if trace_err > 10 * tol.trace or min_eig < -10 * tol.psd:
        raise IntegrationError(
            f"unphysical density matrix after {label}: trace error "
            f"{trace_err:.3e}, min eigenvalue {min_eig:.3e} "
            "(step size too large?)"
        )
    return rho, diag


def _evolve_piece(
    rho: np.ndarray,
    generator: sp.csr_matrix,
    duration: float,
    scale: float,
    cfg: IntegratorConfig,
    backend: str | None,
) -> tuple[np.ndarray, int, float]:
    """Integrate one constant-generator span; returns (rho, steps, conv_err)."""
    dim = rho.shape[0]
    n = step_count(duration, scale, cfg)
    if n == 0:
        return rho, 0, 0.0
    dt = duration / n
    y = rk4_evolve(generator, rho.reshape(-1), dt, n, backend=backend)
    conv_err = 0.0
    if cfg.check_convergence:
        y_half = rk4_evolve(generator, rho.reshape(-1), dt / 2, 2 * n, backend=backend)
        conv_err = float(np.max(np.abs(y - y_half)))
    return y.reshape(dim, dim), n, conv_err


def integrate_segment(
    rho: np.ndarray,
    segment: Segment,
    params: ProtocolParams,
    rates: DecoherenceRates,
    cfg: IntegratorConfig,
    layout: SubsystemLayout,
    dissipator: sp.csr_matrix | None = None,
    tol: Tolerances = DEFAULT,
    backend: str | None = None,
) -> tuple[np.ndarray, BoundaryDiagnostics]:
    """Lindblad-evolve through a single segment and validate the result.

    ``dissipator`` may carry the precomputed jump superoperator so repeated
    calls within one run skip reassembly; passing None rebuilds it.
    """
    if dissipator is None:
        channels = collapse_operators(rates, layout, tol)
        dissipator = dissipator_superoperator(channels, layout.dim)
    h = segment_hamiltonian(segment, params, layout, tol)
    generator = dissipator if h is None else dissipator + coherent_superoperator(h)
    duration = segment_duration(segment, params)
    scale = segment_scale(segment, params)
    rho_out, _, conv = _evolve_piece(rho, generator.tocsr(), duration, scale, cfg, backend)
    return _boundary_check(rho_out, _segment_label(segment), tol, conv)


def _segment_label(segment: Segment) -> str:
    if isinstance(segment, CavityWindow):
        return f"CAV q={segment.qutrit} angle={segment.angle:.4f}"
    if isinstance(segment, PulseSegment):
        return (
            f"PUL q={segment.qutrit} tr={segment.transition} "
            f"phi={segment.phase:+.4f} angle={segment.angle:.4f}"
        )
    return f"IDL t={segment.duration:.3e}"


def _coherent_key(segment: Segment) -> tuple | None:
    if isinstance(segment, CavityWindow):
        return ("cav", segment.qutrit)
    if isinstance(segment, PulseSegment):
        return ("pul", segment.qutrit, segment.transition, segment.phase)
    return None


def run_schedule_lindblad(
    w: WeightVector,
    schedule: Schedule,
    params: ProtocolParams,
    rates: DecoherenceRates,
    cfg: IntegratorConfig,
    layout: SubsystemLayout | None = None,
    tol: Tolerances = DEFAULT,
    backend: str | None = None,
) -> LindbladRunResult:
    """Integrate the master equation through a whole schedule.

    Starts from the pure product input of the sequence. Dissipation acts in
    every span, including retuning idles. Concurrent blocks are split at
    their tracks' internal segment ends; each resulting span evolves under
    the sum of the active generators (the tracks' supports are disjoint).
    The density matrix is re-Hermitized and physicality-checked at every
    segment boundary.
    """
    if layout is None:
        layout = SubsystemLayout()
    channels = collapse_operators(rates, layout, tol)
    dissipator = dissipator_superoperator(channels, layout.dim)
    coherent_cache: dict[tuple, sp.csr_matrix] = {}

    def generator_for(segments: list[Segment]) -> tuple[sp.csr_matrix, float]:
        gen = dissipator
        scale = 0.0
        for seg in segments:
            key = _coherent_key(seg)
            if key is None:
                continue
            if key not in coherent_cache:
                h = segment_hamiltonian(seg, params, layout, tol)
                coherent_cache[key] = coherent_superoperator(h)
            gen = gen + coherent_cache[key]
            scale = max(scale, segment_scale(seg, params))
        return gen.tocsr(), scale

    rho = density_from_state(protocol.initial_state(w, layout, tol))
    boundaries: list[BoundaryDiagnostics] = []
    total_steps = 0

    for blk in schedule.blocks:
        for t0, t1, active, ending in _block_spans(blk, params):
            gen, scale = generator_for(active)
            rho, n, conv = _evolve_piece(rho, gen, t1 - t0, scale, cfg, backend)
            total_steps += n
            label = "; ".join(_segment_label(s) for s in ending) or "span"
            rho, diag = _boundary_check(rho, label, tol, conv)
            boundaries.append(diag)
    return LindbladRunResult(rho=rho, boundaries=boundaries, total_steps=total_steps)


def _block_spans(blk: protocol.Block, params: ProtocolParams):
    """Split a block's parallel tracks into constant-Hamiltonian spans.

    Yields (t_start, t_end, active segments, segments ending at t_end); span
    edges are exactly the segment boundaries of all tracks, so every segment
    boundary coincides with a span end.
    """
    track_edges: list[list[tuple[float, float, Segment]]] = []
    cuts = {0.0}
    for track in blk.tracks:
        t = 0.0
        spans = []
        for seg in track:
            d = segment_duration(seg, params)
            spans.append((t, t + d, seg))
            t += d
            cuts.add(t)
        track_edges.append(spans)
    ordered = sorted(cuts)
    for t0, t1 in zip(ordered, ordered[1:]):
        if t1 - t0 <= 0:
            continue
        active = []
        ending = []
        for spans in track_edges:
            for s0, s1, seg in spans:
                if s0 <= t0 and t1 <= s1:
                    active.append(seg)
                    if abs(s1 - t1) < 1e-18:
                        ending.append(seg)
        yield t0, t1, active, ending


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def fidelity(rho: np.ndarray, ideal: np.ndarray, tol: Tolerances = DEFAULT) -> float:
    """sqrt(<psi|rho|psi>) against a normalized pure target."""
    if rho.shape != (ideal.size, ideal.size):
        raise ValueError(
            f"dimension mismatch: rho {rho.shape} vs state of size {ideal.size}"
        )
    val = complex(np.vdot(ideal, rho @ ideal))
    if abs(val.imag) > tol.imag:
        raise ValueError(
            f"expectation has imaginary part {val.imag:.3e}; density matrix invalid"
        )
    return float(np.sqrt(min(1.0, max(0.0, val.real))))


def purity(rho: np.ndarray) -> float:
    return float(np.trace(rho @ rho).real)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy (natural log) from the eigenvalues of a density matrix."""
    eigs = np.linalg.eigvalsh(rho)
    eigs = eigs[eigs > 1e-15]
    return float(-np.sum(eigs * np.log(eigs)))


@dataclass
class ReducedDiagnostics:
    cavity_vacuum_population: float
    cavity_populations: list[float]
    qutrit1_populations: list[float]
    qutrit2_populations: list[float]
    purity_q1: float
    purity_q2: float
    purity_cavity: float


def reduced_diagnostics(
    rho: np.ndarray, layout: SubsystemLayout
) -> ReducedDiagnostics:
    """Populations and purities of the three reduced subsystems."""
    axes = {Q1: 0, Q2: 1, CAVITY: 2}
    reduced = {
        name: partial_trace(rho, layout.dims, [ax]) for name, ax in axes.items()
    }
    cav = reduced[CAVITY]
    return ReducedDiagnostics(
        cavity_vacuum_population=float(cav[0, 0].real),
        cavity_populations=[float(cav[n, n].real) for n in range(layout.n_cavity)],
        qutrit1_populations=[float(reduced[Q1][i, i].real) for i in range(3)],
        qutrit2_populations=[float(reduced[Q2][i, i].real) for i in range(3)],
        purity_q1=purity(reduced[Q1]),
        purity_q2=purity(reduced[Q2]),
        purity_cavity=purity(cav),
    )
