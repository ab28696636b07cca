import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pauliscope.circuits import sample_haar_unitary
from pauliscope.opsim import (
    GateMatrix,
    OperatorState,
    apply_depolarizing,
    apply_depolarizing_support,
    apply_gate,
    hs_norm_sq,
    init_local_pauli,
)
from pauliscope.pauli import PAULI_MATRICES, encode_pauli, pauli_transform

from conftest import random_hermitian


def embedded_unitary(u, support, n):
    """Reference full-space embedding with support[m] as bit m."""
    w = len(support)
    full = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(2**n):
        gi = sum(((i >> support[m]) & 1) << m for m in range(w))
        base = i
        for m in range(w):
            base &= ~(1 << support[m])
        for gj in range(2**w):
            j = base
            for m in range(w):
                j |= ((gj >> m) & 1) << support[m]
            full[i, j] = u[gi, gj]
    return full


def test_init_local_pauli():
    op = init_local_pauli(2, 0, "Z")
    coeffs = pauli_transform(op)
    assert coeffs.values[encode_pauli("ZI").index] == 1.0
    assert np.count_nonzero(coeffs.values) == 1
    assert np.array_equal(
        init_local_pauli(1, 0, "X").matrix, np.array([[0, 1], [1, 0]], dtype=complex)
    )
    assert abs(hs_norm_sq(init_local_pauli(3, 1, "Y")) - 1.0) < 1e-14
    assert abs(np.trace(init_local_pauli(3, 2, "Z").matrix)) == 0.0


def test_init_guards():
    with pytest.raises(ValueError):
        init_local_pauli(2, 2, "Z")
    with pytest.raises(ValueError):
        init_local_pauli(2, 0, "W")
    with pytest.raises(ValueError, match="guard"):
        init_local_pauli(14, 0, "Z")


def test_gate_matrix_validation(rng):
    with pytest.raises(ValueError, match="unitary"):
        GateMatrix((0, 1), np.ones((4, 4)))
    with pytest.raises(ValueError):
        GateMatrix((0, 0), np.eye(4))
    with pytest.raises(ValueError):
        GateMatrix((0, 1), np.eye(2))


def test_identity_gate_is_noop(rng):
    h = random_hermitian(3, rng)
    op = OperatorState(3, h.copy())
    apply_gate(op, GateMatrix((1, 2), np.eye(4)))
    assert np.allclose(op.matrix, h, atol=1e-14)


def test_hadamard_conjugation():
    had = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    op = init_local_pauli(1, 0, "Z")
    apply_gate(op, GateMatrix((0,), had))
    assert np.allclose(op.matrix, PAULI_MATRICES["X"], atol=1e-14)


@pytest.mark.parametrize("support", [(0,), (2,), (0, 1), (1, 2), (0, 2), (2, 0)])
def test_gate_matches_embedded_conjugation(support, rng):
    n = 3
    u = sample_haar_unitary(2 ** len(support), rng)
    h = random_hermitian(n, rng)
    op = OperatorState(n, h.copy())
    apply_gate(op, GateMatrix(support, u))
    full = embedded_unitary(u, support, n)
    assert np.max(np.abs(op.matrix - full @ h @ full.conj().T)) < 1e-11


def test_gate_preserves_norm_and_trace(rng):
    h = random_hermitian(4, rng)
    op = OperatorState(4, h.copy())
    before = hs_norm_sq(op)
    trace_before = np.trace(op.matrix)
    apply_gate(op, GateMatrix((1, 2), sample_haar_unitary(4, rng)))
    assert abs(hs_norm_sq(op) - before) < 1e-10 * before
    assert abs(np.trace(op.matrix) - trace_before) < 1e-10


def test_depolarizing_examples():
    op = init_local_pauli(1, 0, "X")
    apply_depolarizing(op, 0.1, [0])
    assert np.allclose(op.matrix, 0.9 * PAULI_MATRICES["X"], atol=1e-15)
    assert abs(hs_norm_sq(op) - 0.81) < 1e-14

    ident = OperatorState(2, np.eye(4, dtype=complex))
    apply_depolarizing(ident, 0.7, [0, 1])
    assert np.allclose(ident.matrix, np.eye(4), atol=1e-14)

    zz = OperatorState(2, np.kron(PAULI_MATRICES["Z"], PAULI_MATRICES["Z"]))
    apply_depolarizing(zz, 0.2, [0])
    coeffs = pauli_transform(zz)
    assert abs(coeffs.values[encode_pauli("ZZ").index] - 0.8) < 1e-14


def test_depolarizing_rejects_bad_gamma(rng):
    op = OperatorState(2, random_hermitian(2, rng))
    with pytest.raises(ValueError):
        apply_depolarizing(op, 1.2, [0])
    with pytest.raises(ValueError):
        apply_depolarizing(op, -0.1, [0])
    with pytest.raises(ValueError):
        apply_depolarizing(op, 0.1, [5])


def test_depolarizing_pauli_picture(rng):
    for n in (2, 4):
        h = random_hermitian(n, rng)
        gamma, site = 0.23, n - 1
        op = OperatorState(n, h.copy())
        apply_depolarizing(op, gamma, [site])
        got = pauli_transform(op).values
        want = pauli_transform(h).values.copy()
        idx = np.arange(4**n)
        want[(idx >> (2 * site)) & 3 != 0] *= 1 - gamma
        assert np.max(np.abs(got - want)) < 1e-10


def test_joint_support_depolarizing_rule(rng):
    n = 3
    h = random_hermitian(n, rng)
    gamma = 0.31
    for support in [(0, 1), (0, 2), (0, 1, 2)]:
        op = OperatorState(n, h.copy())
        apply_depolarizing_support(op, gamma, support)
        got = pauli_transform(op).values
        want = pauli_transform(h).values.copy()
        idx = np.arange(4**n)
        hit = np.zeros(4**n, dtype=bool)
        for s in support:
            hit |= (idx >> (2 * s)) & 3 != 0
        want[hit] *= 1 - gamma
        assert np.max(np.abs(got - want)) < 1e-10


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31), gamma=st.floats(0.0, 1.0))
def test_depolarizing_site_order_commutes(seed, gamma):
    rng = np.random.default_rng(seed)
    h = random_hermitian(3, rng)
    a = OperatorState(3, h.copy())
    b = OperatorState(3, h.copy())
    apply_depolarizing(a, gamma, [0, 2, 1])
    apply_depolarizing(b, gamma, [1, 0, 2])
    assert np.max(np.abs(a.matrix - b.matrix)) < 1e-12


def test_depolarizing_contracts_norm(rng):
    h = random_hermitian(3, rng)
    op = OperatorState(3, h.copy())
    before = hs_norm_sq(op)
    trace_before = np.trace(op.matrix)
    apply_depolarizing(op, 0.4, [1])
    assert hs_norm_sq(op) <= before + 1e-12
    assert abs(np.trace(op.matrix) - trace_before) < 1e-10
    # identity-supported operator is a fixed point, no contraction
    ident = OperatorState(2, np.eye(4, dtype=complex))
    norm0 = hs_norm_sq(ident)
    apply_depolarizing(ident, 0.5, [0, 1])
    assert abs(hs_norm_sq(ident) - norm0) < 1e-14
