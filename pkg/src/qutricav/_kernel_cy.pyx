# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 stepping kernel over a CSR sparse generator.

The inner loop of every dissipative run lives here: four sparse
matrix-vector products per step, thousands of steps per segment sweep.
Arithmetic matches the NumPy fallback so both backends interchange freely.
"""

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


cdef inline void _csr_matvec(
    const int[::1] indptr,
    const int[::1] indices,
    const double complex[::1] data,
    const double complex[::1] x,
    double complex[::1] out,
) noexcept nogil:
    cdef Py_ssize_t i, p
    cdef double complex acc
    cdef Py_ssize_t n = out.shape[0]
    for i in range(n):
        acc = 0
        for p in range(indptr[i], indptr[i + 1]):
            acc = acc + data[p] * x[indices[p]]
        out[i] = acc


def rk4_csr(
    int[::1] indptr,
    int[::1] indices,
    double complex[::1] data,
    double complex[::1] y0,
    double dt,
    Py_ssize_t n_steps,
):
    """Advance ``y' = A y`` by ``n_steps`` classical RK4 steps of size ``dt``."""
    cdef Py_ssize_t n = y0.shape[0]
    y_arr = np.array(y0, dtype=np.complex128, copy=True)
    k1_arr = np.empty(n, dtype=np.complex128)
    k2_arr = np.empty(n, dtype=np.complex128)
    k3_arr = np.empty(n, dtype=np.complex128)
    k4_arr = np.empty(n, dtype=np.complex128)
    tmp_arr = np.empty(n, dtype=np.complex128)

    cdef double complex[::1] y = y_arr
    cdef double complex[::1] k1 = k1_arr
    cdef double complex[::1] k2 = k2_arr
    cdef double complex[::1] k3 = k3_arr
    cdef double complex[::1] k4 = k4_arr
    cdef double complex[::1] tmp = tmp_arr

    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0
    cdef Py_ssize_t s, i

    with nogil:
        for s in range(n_steps):
            _csr_matvec(indptr, indices, data, y, k1)
            for i in range(n):
                tmp[i] = y[i] + half * k1[i]
            _csr_matvec(indptr, indices, data, tmp, k2)
            for i in range(n):
                tmp[i] = y[i] + half * k2[i]
            _csr_matvec(indptr, indices, data, tmp, k3)
            for i in range(n):
                tmp[i] = y[i] + dt * k3[i]
            _csr_matvec(indptr, indices, data, tmp, k4)
            for i in range(n):
                y[i] = y[i] + sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])

    return y_arr
