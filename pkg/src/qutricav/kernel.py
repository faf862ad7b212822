"""Backend selection for the RK4 stepping kernel.

Tries the compiled extension first and falls back to the NumPy/SciPy
implementation; override with ``QUTRICAV_KERNEL=python|compiled``. Both
backends implement identical arithmetic, so results differ at most by
floating-point rounding.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.sparse import csr_matrix

from . import _kernel_py

_FORCED = os.environ.get("QUTRICAV_KERNEL", "auto").lower()

_compiled = None
if _FORCED in ("auto", "compiled"):
    try:
        from . import _kernel_cy as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None
        if _FORCED == "compiled":
            raise ImportError(
                "QUTRICAV_KERNEL=compiled but the extension is not built; "
                "reinstall with a C toolchain or unset the variable"
            )

_ACTIVE = "compiled" if _compiled is not None else "python"


def backend_name() -> str:
    """Name of the backend serving :func:`rk4_evolve`."""
    return _ACTIVE


def available_backends() -> tuple[str, ...]:
    return ("python", "compiled") if _compiled is not None else ("python",)


def _as_csr_parts(matrix: csr_matrix):
    m = matrix.tocsr()
    m.sort_indices()
    return (
        np.ascontiguousarray(m.indptr, dtype=np.int32),
        np.ascontiguousarray(m.indices, dtype=np.int32),
        np.ascontiguousarray(m.data, dtype=np.complex128),
    )


def rk4_evolve(
    matrix: csr_matrix,
    y0: np.ndarray,
    dt: float,
    n_steps: int,
    backend: str | None = None,
) -> np.ndarray:
    """Advance ``y' = A y`` by ``n_steps`` RK4 steps with the chosen backend."""
    name = backend or _ACTIVE
    if name == "compiled":
        if _compiled is None:
            raise ValueError("compiled kernel backend is not available")
        indptr, indices, data = _as_csr_parts(matrix)
        y = np.ascontiguousarray(y0, dtype=np.complex128)
        return _compiled.rk4_csr(indptr, indices, data, y, float(dt), int(n_steps))
    if name == "python":
        return _kernel_py.rk4_evolve(matrix, y0, float(dt), int(n_steps))
    raise ValueError(f"unknown kernel backend {name!r}")
