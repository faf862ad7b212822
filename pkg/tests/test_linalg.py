"""Dense kernel checks: Kronecker products, propagators, traces."""

import numpy as np
import pytest

from qutricav.linalg import (
    DimensionError,
    NonHermitianError,
    dagger,
    hermitian_eigenvalues,
    kron,
    matexp,
    norm_error,
    partial_trace,
    unitarity_error,
)
from qutricav.tolerances import Tolerances

from conftest import random_density, random_hermitian, random_state


def test_kron_identity_case():
    assert np.array_equal(kron(np.eye(2, dtype=complex), np.eye(3, dtype=complex)),
                          np.eye(6))


def test_kron_block_placement():
    # |0><1| on a qutrit, tensored with I2: ones at (0,2) and (1,3) only.
    op = np.zeros((3, 3), dtype=complex)
    op[0, 1] = 1.0
    out = kron(op, np.eye(2, dtype=complex))
    expected = np.zeros((6, 6), dtype=complex)
    expected[0, 2] = 1.0
    expected[1, 3] = 1.0
    assert np.array_equal(out, expected)


def test_kron_mixed_product_rule(rng):
    # Brute-force both sides of (A kron B)(C kron D) = (AC) kron (BD).
    for _ in range(20):
        a, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in "ac")
        b, d = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in "bd")
        lhs = kron(a, b) @ kron(c, d)
        rhs = kron(a @ c, b @ d)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_kron_associative_and_bilinear(rng):
    for _ in range(10):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        c = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) < 1e-12
        x, y = rng.normal(size=2)
        lhs = kron(x * a + y * b, c)
        rhs = x * kron(a, c) + y * kron(b, c)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_kron_dimension_cap():
    big = np.eye(20, dtype=complex)
    with pytest.raises(DimensionError):
        kron(big, big)  # 400 > 256
    # and the cap is configurable
    kron(big, big, Tolerances(max_dim=512))


def test_matexp_zero_matrix_is_identity():
    out = matexp(np.zeros((4, 4), dtype=complex), t=3.7)
    assert np.max(np.abs(out - np.eye(4))) < 1e-15


def test_matexp_half_exchange_is_minus_i_swap():
    # Analytic 2x2 oracle: exp(-i g t sigma_x) = cos(gt) I - i sin(gt) sigma_x,
    # so gt = pi/2 gives -i times the basis swap.
    g = 2.0
    h = g * np.array([[0, 1], [1, 0]], dtype=complex)
    t = (np.pi / 2) / g
    u = matexp(h, t)
    expected = -1j * np.array([[0, 1], [1, 0]], dtype=complex)
    assert np.max(np.abs(u - expected)) < 1e-12


def test_matexp_inverse_composition(rng):
    for n in (2, 5, 9):
        h = random_hermitian(rng, n)
        u = matexp(h, 0.83)
        u_inv = matexp(h, -0.83)
        assert np.max(np.abs(u @ u_inv - np.eye(n))) < 1e-10


def test_matexp_unitarity(rng):
    for _ in range(20):
        h = random_hermitian(rng, 7)
        assert unitarity_error(matexp(h, 1.3)) < 1e-10


def test_matexp_scale_argument():
    h = np.array([[0, 1], [1, 0]], dtype=complex)
    assert np.allclose(matexp(h, 0.25, scale=2.0), matexp(h, 0.5))


def test_matexp_rejects_bad_input(rng):
    with pytest.raises(DimensionError):
        matexp(np.zeros((2, 3), dtype=complex), 1.0)
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    with pytest.raises(NonHermitianError):
        matexp(m, 1.0)


def test_partial_trace_product_state(rng):
    rho_a = random_density(rng, 3)
    rho_b = random_density(rng, 4)
    combined = np.kron(rho_a, rho_b)
    assert np.max(np.abs(partial_trace(combined, (3, 4), [0]) - rho_a)) < 1e-12
    assert np.max(np.abs(partial_trace(combined, (3, 4), [1]) - rho_b)) < 1e-12


def test_partial_trace_preserves_trace(rng):
    rho = random_density(rng, 12)
    for keep in ([0], [1], [0, 1], [1, 2]):
        reduced = partial_trace(rho, (2, 3, 2), keep)
        assert abs(np.trace(reduced) - np.trace(rho)) < 1e-12


def test_partial_trace_maximally_entangled_qutrits():
    # (|00> + |11> + |22>)/sqrt(3): either reduction is maximally mixed.
    psi = np.zeros(9, dtype=complex)
    psi[[0, 4, 8]] = 1 / np.sqrt(3)
    rho = np.outer(psi, psi.conj())
    for keep in ([0], [1]):
        reduced = partial_trace(rho, (3, 3), keep)
        assert np.max(np.abs(reduced - np.eye(3) / 3)) < 1e-12


def test_partial_trace_positivity(rng):
    for _ in range(10):
        rho = random_density(rng, 12)
        reduced = partial_trace(rho, (3, 4), [0])
        assert np.linalg.eigvalsh(reduced)[0] >= -1e-10


def test_partial_trace_errors(rng):
    rho = random_density(rng, 6)
    with pytest.raises(DimensionError):
        partial_trace(rho, (2, 3), [])
    with pytest.raises(DimensionError):
        partial_trace(rho, (2, 3), [5])
    with pytest.raises(DimensionError):
        partial_trace(rho, (2, 2), [0])


def test_hermitian_eigenvalues_known_cases():
    assert np.allclose(hermitian_eigenvalues(np.eye(3, dtype=complex)), [1, 1, 1])
    d = np.diag([0.5, 0.2, 0.3]).astype(complex)
    assert np.allclose(hermitian_eigenvalues(d), [0.2, 0.3, 0.5])


def test_hermitian_eigenvalues_sum_is_trace(rng):
    for _ in range(20):
        h = random_hermitian(rng, 8)
        eigs = hermitian_eigenvalues(h)
        assert np.all(np.diff(eigs) >= -1e-12)
        assert abs(np.sum(eigs) - np.trace(h).real) < 1e-10


def test_hermitian_eigenvalues_rejects_non_hermitian(rng):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    with pytest.raises(NonHermitianError):
        hermitian_eigenvalues(m)


def test_double_dagger_exact(rng):
    m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    assert np.array_equal(dagger(dagger(m)), m)


def test_norm_error(rng):
    assert norm_error(random_state(rng, 10)) < 1e-14
    assert norm_error(np.array([2.0 + 0j, 0.0])) == pytest.approx(3.0)
