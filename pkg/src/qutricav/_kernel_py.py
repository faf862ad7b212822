"""Pure NumPy/SciPy fallback for the RK4 stepping kernel.

Same arithmetic as the compiled version: classical fixed-step RK4 applied
to the vectorized density matrix with a sparse generator. Kept dependency-
light so installs without a working C toolchain lose only speed.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix

BACKEND = "python"


def rk4_evolve(
    matrix: csr_matrix,
    y0: np.ndarray,
    dt: float,
    n_steps: int,
) -> np.ndarray:
    """Advance ``y' = A y`` by ``n_steps`` classical RK4 steps of size ``dt``."""
    y = np.array(y0, dtype=complex, copy=True)
    half = 0.5 * dt
    sixth = dt / 6.0
    for _ in range(n_steps):
        k1 = matrix @ y
        k2 = matrix @ (y + half * k1)
        k3 = matrix @ (y + half * k2)
        k4 = matrix @ (y + dt * k3)
        y += sixth * (k1 + 2.0 * (k2 + k3) + k4)
    return y
