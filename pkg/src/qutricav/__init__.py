"""qutricav: resonant cavity-mediated entanglement of two transmon qutrits.

Simulates the nine-stage pulse-and-exchange sequence that maps a weighted
qutrit-1 input onto the entangled two-qutrit state alpha|00> + beta|11> +
gamma|22>, both ideally (closed forms cross-checked against exact
propagators) and with dissipation (fixed-step Lindblad integration), and
reproduces the fidelity-versus-decoherence sweep and the timing budget.
"""

__version__ = "0.1.0"

from .hamiltonians import CouplingParams, DecoherenceRates, PulseParams
from .hilbert import SubsystemLayout
from .protocol import (
    ProtocolParams,
    Schedule,
    WeightVector,
    build_schedule,
    ideal_run,
    target_state,
    total_time,
)
from .dynamics import IntegratorConfig, fidelity, run_schedule_lindblad
from .experiments import SimulationConfig, derive_rates, run_sweep, timing_report

__all__ = [
    "__version__",
    "CouplingParams",
    "DecoherenceRates",
    "PulseParams",
    "SubsystemLayout",
    "ProtocolParams",
    "Schedule",
    "WeightVector",
    "build_schedule",
    "ideal_run",
    "target_state",
    "total_time",
    "IntegratorConfig",
    "fidelity",
    "run_schedule_lindblad",
    "SimulationConfig",
    "derive_rates",
    "run_sweep",
    "timing_report",
]
