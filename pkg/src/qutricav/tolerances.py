"""Central numerical-tolerance table.

Every threshold used by the kernels, the protocol checks, and the Lindblad
engine lives here so an entire run can be tightened or relaxed from one
place (and overridden from a config file via ``tol_<field>`` keys).
"""

from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass(frozen=True)
class Tolerances:
    """Default thresholds; all are absolute unless noted."""

    herm: float = 1e-10          # max |M - M^dag| accepted as Hermitian
    unitary: float = 1e-10       # max |U^dag U - I| for propagators
    norm: float = 1e-12          # state-vector normalization slack
    trace: float = 1e-8          # density-matrix trace drift per segment
    psd: float = 1e-8            # allowed negative eigenvalue magnitude
    eig_sum: float = 1e-9        # |sum(eigenvalues) - trace| contract
    oracle: float = 1e-10        # closed-form vs matrix-exponential agreement
    chain: float = 1e-10         # pulse-chain arrow amplitude error
    checkpoint: float = 1e-9     # per-stage state assertions (global phase fixed)
    overlap: float = 1e-9        # allowed final-overlap deficit of the ideal run
    domain: float = 1e-9         # stray support threshold for closed-form cavity maps
    imag: float = 1e-8           # allowed imaginary part in fidelity expectation
    max_dim: int = 256           # hard cap on any operator dimension


DEFAULT = Tolerances()

_FIELD_NAMES = {f.name for f in fields(Tolerances)}


def with_overrides(base: Tolerances, overrides: dict[str, float]) -> Tolerances:
    """Return a copy of ``base`` with the given fields replaced."""
    unknown = set(overrides) - _FIELD_NAMES
    if unknown:
        raise KeyError(f"unknown tolerance fields: {sorted(unknown)}")
    values = {f.name: getattr(base, f.name) for f in fields(Tolerances)}
    values.update(overrides)
    return Tolerances(**values)
