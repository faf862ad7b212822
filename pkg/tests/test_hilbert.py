"""Composite-space construction: basis labeling, embedding, ladder operators."""

import numpy as np
import pytest

from qutricav.hilbert import (
    CAVITY,
    Q1,
    Q2,
    SubsystemLayout,
    basis_ket,
    cavity_annihilation,
    embed,
    lowering_operator,
    qutrit_transition,
    transition_matrix,
)
from qutricav.linalg import DimensionError, dagger


def test_layout_dimensions():
    lay = SubsystemLayout()
    assert lay.dims == (3, 3, 3)
    assert lay.dim == 27
    assert SubsystemLayout(5).dim == 45
    with pytest.raises(DimensionError):
        SubsystemLayout(1)


def test_flat_index_examples(layout):
    assert layout.flat_index(0, 0, 0) == 0
    assert layout.flat_index(2, 1, 1) == 22
    with pytest.raises(DimensionError):
        layout.flat_index(3, 0, 0)
    with pytest.raises(DimensionError):
        layout.flat_index(0, 0, 3)


def test_flat_index_is_bijective(layout):
    seen = set()
    for q1 in range(3):
        for q2 in range(3):
            for n in range(layout.n_cavity):
                idx = layout.flat_index(q1, q2, n)
                assert layout.label_of(idx) == (q1, q2, n)
                seen.add(idx)
    assert seen == set(range(layout.dim))


def test_basis_ket_examples(layout):
    e0 = basis_ket(0, 0, 0, layout)
    assert e0[0] == 1 and np.count_nonzero(e0) == 1
    e22 = basis_ket(2, 1, 1, layout)
    assert e22[22] == 1 and np.count_nonzero(e22) == 1


def test_basis_is_orthonormal(layout):
    # Gram matrix of the full enumeration must be the identity.
    kets = [
        basis_ket(q1, q2, n, layout)
        for q1 in range(3) for q2 in range(3) for n in range(layout.n_cavity)
    ]
    gram = np.array([[np.vdot(a, b) for b in kets] for a in kets])
    assert np.max(np.abs(gram - np.eye(layout.dim))) < 1e-14


def test_embed_identity(layout):
    out = embed(np.eye(3, dtype=complex), Q1, layout)
    assert np.array_equal(out, np.eye(27))


def test_embed_acts_on_target_only(layout):
    op = embed(transition_matrix(0, 1), Q2, layout)
    assert np.allclose(op @ basis_ket(0, 1, 0, layout), basis_ket(0, 0, 0, layout))
    # spectator levels ride along unchanged
    assert np.allclose(op @ basis_ket(2, 1, 1, layout), basis_ket(2, 0, 1, layout))


def test_embedded_operators_on_different_subsystems_commute(layout, rng):
    for _ in range(10):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        ea, eb = embed(a, Q1, layout), embed(b, Q2, layout)
        # exact up to BLAS rounding in the complex products
        assert np.max(np.abs(ea @ eb - eb @ ea)) < 1e-13


def test_embed_preserves_operator_norm(layout, rng):
    for target in (Q1, Q2, CAVITY):
        d = layout.dims[layout.axis(target)]
        local = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        before = np.linalg.svd(local, compute_uv=False)[0]
        after = np.linalg.svd(embed(local, target, layout), compute_uv=False)[0]
        assert abs(before - after) < 1e-10


def test_embed_dimension_mismatch(layout):
    with pytest.raises(DimensionError):
        embed(np.eye(2, dtype=complex), Q1, layout)
    with pytest.raises(DimensionError):
        embed(np.eye(3, dtype=complex), "bogus", layout)


def test_lowering_operator_matrix_elements():
    a = lowering_operator(4)
    for n in range(1, 4):
        assert a[n - 1, n] == pytest.approx(np.sqrt(n))
    assert np.count_nonzero(a) == 3


def test_cavity_annihilation_action(layout):
    a = cavity_annihilation(layout)
    assert np.allclose(a @ basis_ket(0, 0, 1, layout), basis_ket(0, 0, 0, layout))
    assert np.allclose(a @ basis_ket(0, 0, 0, layout), 0.0)
    assert np.allclose(a @ basis_ket(1, 2, 2, layout),
                       np.sqrt(2) * basis_ket(1, 2, 1, layout))


def test_cavity_commutator_truncation(layout):
    # [a, a-dag] equals the identity except the top retained Fock level,
    # where truncation flips the diagonal entry to -(n_cavity - 1).
    a_local = lowering_operator(layout.n_cavity)
    comm = a_local @ dagger(a_local) - dagger(a_local) @ a_local
    expected = np.diag([1.0, 1.0, -2.0]).astype(complex)
    assert np.max(np.abs(comm - expected)) < 1e-14


def test_qutrit_transition_examples(layout):
    sigma = qutrit_transition(0, 1, Q1, layout)
    for x in range(3):
        for n in range(3):
            assert np.allclose(sigma @ basis_ket(1, x, n, layout),
                               basis_ket(0, x, n, layout))
    proj = qutrit_transition(1, 1, Q2, layout)
    assert np.max(np.abs(proj @ proj - proj)) == 0.0


def test_qutrit_transition_adjoint_relation(layout):
    for i in range(3):
        for j in range(3):
            assert np.array_equal(
                dagger(qutrit_transition(i, j, Q1, layout)),
                qutrit_transition(j, i, Q1, layout),
            )
    assert np.allclose(
        qutrit_transition(1, 2, Q1, layout) @ qutrit_transition(2, 1, Q1, layout),
        qutrit_transition(1, 1, Q1, layout),
    )


def test_qutrit_transition_rejects_bad_levels(layout):
    with pytest.raises(DimensionError):
        qutrit_transition(0, 3, Q1, layout)
    with pytest.raises(DimensionError):
        qutrit_transition(0, 1, CAVITY, layout)
