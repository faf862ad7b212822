"""Dense complex linear algebra used by every other module.

All operators are plain ``numpy.ndarray`` with ``dtype=complex128`` in
row-major order; states are 1-D arrays of amplitudes. Dimensions stay tiny
(at most a few tens), so everything is dense and eigendecomposition-based.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .tolerances import DEFAULT, Tolerances


class DimensionError(ValueError):
    """Operator or state dimensions are inconsistent or exceed the cap."""


class NonHermitianError(ValueError):
    """An operation that requires a Hermitian input received one that is not."""


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return m.conj().T


def hermiticity_error(m: np.ndarray) -> float:
    """Max absolute entry of ``M - M^dag`` (0 for exactly Hermitian input)."""
    return float(np.max(np.abs(m - m.conj().T)))


def _ensure_finite(m: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(m)):
        raise FloatingPointError(f"{what} produced non-finite entries")
    return m


def kron(a: np.ndarray, b: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Kronecker product with a dimension-cap guard.

    The cap catches misconfigured layouts before they allocate huge dense
    matrices; raise it through the tolerance table if genuinely needed.
    """
    rows = a.shape[0] * b.shape[0]
    cols = (a.shape[1] if a.ndim == 2 else 1) * (b.shape[1] if b.ndim == 2 else 1)
    if max(rows, cols) > tol.max_dim:
        raise DimensionError(
            f"kron result {rows}x{cols} exceeds the configured cap {tol.max_dim}"
        )
    return _ensure_finite(np.kron(a, b), "kron")


def matexp(
    h: np.ndarray,
    t: float,
    scale: float = 1.0,
    tol: Tolerances = DEFAULT,
) -> np.ndarray:
    """Unitary propagator ``exp(-i * h * scale * t)`` of a Hermitian generator.

    Computed by Hermitian eigendecomposition rather than scaling-and-squaring:
    the dimensions here are tiny, Hermiticity is guaranteed at call sites, and
    the eigenbasis route keeps the result exactly unitary up to rounding.

    Parameters
    ----------
    h : ndarray
        Square Hermitian generator, in angular-frequency units when ``t`` is
        a time in seconds (``scale=1``), or dimensionless with the angle
        supplied through ``t*scale``.
    t, scale : float
        The product ``t*scale`` is the evolution angle in radians.
    """
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionError(f"matexp needs a square matrix, got shape {h.shape}")
    herm = hermiticity_error(h)
    hscale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    if herm > tol.herm * hscale:
        raise NonHermitianError(
            f"matexp input deviates from Hermitian by {herm:.3e}"
        )
    w, v = np.linalg.eigh(h)
    phases = np.exp(-1j * w * (t * scale))
    u = (v * phases) @ v.conj().T
    return _ensure_finite(u, "matexp")


def hermitian_eigenvalues(m: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix."""
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    herm = hermiticity_error(m)
    hscale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if herm > tol.herm * hscale:
        raise NonHermitianError(f"input deviates from Hermitian by {herm:.3e}")
    return np.linalg.eigvalsh(m)


def partial_trace(
    rho: np.ndarray,
    dims: Sequence[int],
    keep: Iterable[int],
) -> np.ndarray:
    """Reduced operator on the ``keep`` subsystems (indices into ``dims``).

    Subsystem ordering of the result follows the original ordering. The trace
    of the input is preserved exactly.
    """
    dims = tuple(int(d) for d in dims)
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if not keep:
        raise DimensionError("keep set must not be empty")
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {n} subsystems")
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise DimensionError(
            f"density matrix shape {rho.shape} does not match layout dimension {total}"
        )
    reshaped = rho.reshape(dims + dims)
    # Trace out the dropped axes pairwise, highest axis first so indices stay valid.
    traced = reshaped
    for ax in sorted(set(range(n)) - set(keep), reverse=True):
        traced = np.trace(traced, axis1=ax, axis2=ax + traced.ndim // 2)
    kept_dim = int(np.prod([dims[k] for k in keep]))
    return traced.reshape(kept_dim, kept_dim)


def unitarity_error(u: np.ndarray) -> float:
    """Max absolute entry of ``U^dag U - I``."""
    eye = np.eye(u.shape[0], dtype=complex)
    return float(np.max(np.abs(u.conj().T @ u - eye)))


def norm_error(state: np.ndarray) -> float:
    """Deviation of the squared-amplitude sum from 1."""
    return abs(float(np.vdot(state, state).real) - 1.0)
