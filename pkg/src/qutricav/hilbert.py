"""Tripartite composite space: two qutrits and one truncated cavity mode.

Subsystem ordering is fixed as (qutrit 1, qutrit 2, cavity), and the flat
basis index of the level triple ``(q1, q2, n)`` is
``((q1 * 3) + q2) * n_cavity + n``. Every serialized state and operator in
the package uses this ordering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DimensionError, kron
from .tolerances import DEFAULT, Tolerances

QUTRIT_DIM = 3

# Subsystem identifiers, in layout order.
Q1 = "q1"
Q2 = "q2"
CAVITY = "cavity"
SUBSYSTEMS = (Q1, Q2, CAVITY)


@dataclass(frozen=True)
class SubsystemLayout:
    """Dimensions of the (qutrit 1, qutrit 2, cavity) product space.

    ``n_cavity`` counts retained Fock levels; the default 3 keeps vacuum, one
    photon, and one guard level. The protocol never populates the guard level
    ideally, so it exposes truncation or leakage errors instead of hiding
    them. At least two levels are required (the exchange needs one photon).
    """

    n_cavity: int = 3

    def __post_init__(self) -> None:
        if self.n_cavity < 2:
            raise DimensionError("cavity truncation must keep at least 2 Fock levels")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (QUTRIT_DIM, QUTRIT_DIM, self.n_cavity)

    @property
    def dim(self) -> int:
        return QUTRIT_DIM * QUTRIT_DIM * self.n_cavity

    def axis(self, subsystem: str) -> int:
        try:
            return SUBSYSTEMS.index(subsystem)
        except ValueError:
            raise DimensionError(f"unknown subsystem {subsystem!r}") from None

    def flat_index(self, q1: int, q2: int, n: int) -> int:
        """Flat basis index of the level triple (bijective onto 0..dim-1)."""
        self._check_label(q1, q2, n)
        return (q1 * QUTRIT_DIM + q2) * self.n_cavity + n

    def label_of(self, index: int) -> tuple[int, int, int]:
        """Inverse of :meth:`flat_index`."""
        if not 0 <= index < self.dim:
            raise DimensionError(f"basis index {index} out of range 0..{self.dim - 1}")
        pair, n = divmod(index, self.n_cavity)
        q1, q2 = divmod(pair, QUTRIT_DIM)
        return q1, q2, n

    def _check_label(self, q1: int, q2: int, n: int) -> None:
        if not (0 <= q1 < QUTRIT_DIM and 0 <= q2 < QUTRIT_DIM):
            raise DimensionError(f"qutrit levels ({q1},{q2}) must be in 0..2")
        if not 0 <= n < self.n_cavity:
            raise DimensionError(
                f"photon number {n} outside retained Fock levels 0..{self.n_cavity - 1}"
            )


def basis_ket(q1: int, q2: int, n: int, layout: SubsystemLayout) -> np.ndarray:
    """Product basis state |q1, q2, n>."""
    ket = np.zeros(layout.dim, dtype=complex)
    ket[layout.flat_index(q1, q2, n)] = 1.0
    return ket


def embed(
    local: np.ndarray,
    target: str,
    layout: SubsystemLayout,
    tol: Tolerances = DEFAULT,
) -> np.ndarray:
    """Lift a single-subsystem operator to the full space: I x ... x A x ... x I."""
    axis = layout.axis(target)
    d = layout.dims[axis]
    if local.shape != (d, d):
        raise DimensionError(
            f"operator shape {local.shape} does not match subsystem "
            f"{target!r} of dimension {d}"
        )
    out = np.eye(1, dtype=complex)
    for i, dim in enumerate(layout.dims):
        factor = local if i == axis else np.eye(dim, dtype=complex)
        out = kron(out, factor, tol)
    return out


def lowering_operator(n_levels: int) -> np.ndarray:
    """Truncated annihilation operator with <n-1|a|n> = sqrt(n)."""
    a = np.zeros((n_levels, n_levels), dtype=complex)
    for n in range(1, n_levels):
        a[n - 1, n] = np.sqrt(n)
    return a


def cavity_annihilation(layout: SubsystemLayout, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Photon annihilation operator embedded on the cavity slot."""
    return embed(lowering_operator(layout.n_cavity), CAVITY, layout, tol)


def transition_matrix(i: int, j: int) -> np.ndarray:
    """Single-qutrit |i><j|."""
    if not (0 <= i < QUTRIT_DIM and 0 <= j < QUTRIT_DIM):
        raise DimensionError(f"qutrit levels ({i},{j}) must be in 0..2")
    m = np.zeros((QUTRIT_DIM, QUTRIT_DIM), dtype=complex)
    m[i, j] = 1.0
    return m


def qutrit_transition(
    i: int,
    j: int,
    target: str,
    layout: SubsystemLayout,
    tol: Tolerances = DEFAULT,
) -> np.ndarray:
    """|i><j| on the chosen qutrit, embedded on the full space."""
    if target not in (Q1, Q2):
        raise DimensionError(f"qutrit transition target must be {Q1!r} or {Q2!r}")
    return embed(transition_matrix(i, j), target, layout, tol)


def qutrit_id(j: int) -> str:
    """Map qutrit number 1|2 to its subsystem identifier."""
    if j == 1:
        return Q1
    if j == 2:
        return Q2
    raise DimensionError(f"qutrit number must be 1 or 2, got {j}")
