"""Interaction-picture Hamiltonians and Lindblad collapse channels.

All generators use the hbar = 1 convention and carry angular-frequency
units (rad/s). Resonance is exact: carrier frequencies never appear, only
coupling strengths, Rabi frequencies, and pulse phases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import (
    SubsystemLayout,
    cavity_annihilation,
    embed,
    qutrit_id,
    transition_matrix,
)
from .linalg import dagger
from .tolerances import DEFAULT, Tolerances

# Transition tags for the two driven qutrit transitions.
TR_01 = "01"
TR_12 = "12"
TRANSITIONS = (TR_01, TR_12)


@dataclass(frozen=True)
class CouplingParams:
    """Cavity coupling strengths for the two qutrits (angular rad/s)."""

    g1: float
    g2: float

    def __post_init__(self) -> None:
        if self.g1 <= 0 or self.g2 <= 0:
            raise ValueError("coupling constants must be strictly positive")

    def g(self, qutrit: int) -> float:
        return self.g1 if qutrit == 1 else self.g2


@dataclass(frozen=True)
class PulseParams:
    """Rectangular resonant drive on one qutrit transition.

    ``rabi`` is the Rabi angular frequency (rad/s), ``phase`` the pulse's
    initial phase (radians), ``duration`` the pulse length in seconds. The
    rotation angle is ``rabi * duration``.
    """

    transition: str
    rabi: float
    phase: float
    duration: float

    def __post_init__(self) -> None:
        if self.transition not in TRANSITIONS:
            raise ValueError(f"transition must be one of {TRANSITIONS}")
        if self.rabi <= 0:
            raise ValueError("Rabi frequency must be strictly positive")
        if self.duration < 0:
            raise ValueError("pulse duration must be non-negative")


@dataclass(frozen=True)
class DecoherenceRates:
    """Photon decay plus per-qutrit relaxation and dephasing rates (1/s).

    Tuples are indexed by qutrit (entry 0 -> qutrit 1). ``gamma10`` relaxes
    level 1, ``gamma21``/``gamma20`` relax level 2 through the two decay
    paths, and ``gamma_phi1``/``gamma_phi2`` dephase levels 1 and 2.
    """

    kappa: float = 0.0
    gamma10: tuple[float, float] = (0.0, 0.0)
    gamma21: tuple[float, float] = (0.0, 0.0)
    gamma20: tuple[float, float] = (0.0, 0.0)
    gamma_phi1: tuple[float, float] = (0.0, 0.0)
    gamma_phi2: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        rates = (self.kappa, *self.gamma10, *self.gamma21, *self.gamma20,
                 *self.gamma_phi1, *self.gamma_phi2)
        if any(r < 0 for r in rates):
            raise ValueError("decoherence rates must be non-negative")

    @classmethod
    def zero(cls) -> "DecoherenceRates":
        return cls()


def h_cavity(
    g: float,
    qutrit: int,
    layout: SubsystemLayout,
    tol: Tolerances = DEFAULT,
) -> np.ndarray:
    """Resonant exchange between the cavity and one qutrit's 0<->1 transition.

    Returns ``g * (a^dag |0><1| + a |1><0|)`` on the full space. States with
    the target qutrit in level 2 are annihilated by construction, so that
    whole sector is left untouched by the generated evolution.
    """
    target = qutrit_id(qutrit)
    a = cavity_annihilation(layout, tol)
    sigma_minus = embed(transition_matrix(0, 1), target, layout, tol)
    half = g * (dagger(a) @ sigma_minus)
    return half + dagger(half)


def h_pulse(
    pulse: PulseParams,
    qutrit: int,
    layout: SubsystemLayout,
    tol: Tolerances = DEFAULT,
) -> np.ndarray:
    """Resonant microwave drive on one qutrit transition.

    Returns ``rabi * (e^{i phase} |i><j| + h.c.)`` with (i, j) = (0, 1) or
    (1, 2); identity on the cavity, the untargeted qutrit, and the
    undriven level.
    """
    target = qutrit_id(qutrit)
    i, j = (0, 1) if pulse.transition == TR_01 else (1, 2)
    lower = embed(transition_matrix(i, j), target, layout, tol)
    half = pulse.rabi * np.exp(1j * pulse.phase) * lower
    return half + dagger(half)


def collapse_operators(
    rates: DecoherenceRates,
    layout: SubsystemLayout,
    tol: Tolerances = DEFAULT,
) -> list[tuple[np.ndarray, str]]:
    """Square-root-rate-scaled jump operators, tagged with their channel kind.

    With all rates positive this yields 11 channels: one photon decay, three
    relaxation paths per qutrit, and two dephasing projectors per qutrit.
    Zero-rate channels are dropped. Dephasing enters as a plain Lindblad
    channel with a projector operator, which reproduces the sandwich form
    exactly because projectors are idempotent.
    """
    channels: list[tuple[np.ndarray, str]] = []
    if rates.kappa > 0:
        channels.append(
            (np.sqrt(rates.kappa) * cavity_annihilation(layout, tol), "photon-decay")
        )
    for q in (1, 2):
        target = qutrit_id(q)
        idx = q - 1
        relaxations = (
            (rates.gamma10[idx], (0, 1), f"relax-10-q{q}"),
            (rates.gamma21[idx], (1, 2), f"relax-21-q{q}"),
            (rates.gamma20[idx], (0, 2), f"relax-20-q{q}"),
        )
        for rate, (lo, hi), kind in relaxations:
            if rate > 0:
                op = embed(transition_matrix(lo, hi), target, layout, tol)
                channels.append((np.sqrt(rate) * op, kind))
        dephasings = (
            (rates.gamma_phi1[idx], 1, f"dephase-1-q{q}"),
            (rates.gamma_phi2[idx], 2, f"dephase-2-q{q}"),
        )
        for rate, level, kind in dephasings:
            if rate > 0:
                op = embed(transition_matrix(level, level), target, layout, tol)
                channels.append((np.sqrt(rate) * op, kind))
    return channels
