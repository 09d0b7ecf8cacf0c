import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qubit_nlb import linalg
from qubit_nlb.linalg import SX, SY, SZ
from qubit_nlb.nlbreak import PureInputSpec, example_i_channel, output_T_matrix
from qubit_nlb.state import singlet

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


def test_kron_identity_and_diagonal():
    assert np.allclose(linalg.kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.allclose(linalg.kron(SZ, SZ), np.diag([1, -1, -1, 1]))


def test_kron_sx_sx_is_antidiagonal():
    expected = np.fliplr(np.eye(4))
    assert np.array_equal(linalg.kron(SX, SX), expected)


def test_kron_rejects_wrong_shape():
    with pytest.raises(ValueError):
        linalg.kron(np.eye(3), np.eye(2))


def test_eig_hermitian_examples():
    w, _ = linalg.eig_hermitian(np.diag([1.0, 3.0]))
    assert np.allclose(w, [3, 1])
    w, _ = linalg.eig_hermitian(SX)
    assert np.allclose(w, [1, -1])
    T = np.array([[np.trace(singlet() @ np.kron(a, b)).real for b in (SX, SY, SZ)] for a in (SX, SY, SZ)])
    w, _ = linalg.eig_hermitian(T.T @ T)
    assert np.allclose(w, [1, 1, 1])


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(ValueError):
        linalg.eig_hermitian(np.array([[0, 1], [0, 0]]))


@settings(max_examples=50, deadline=None)
@given(arrays(float, (4, 4), elements=finite), arrays(float, (4, 4), elements=finite))
def test_eig_hermitian_reconstructs(re, im):
    m = (re + 1j * im) + (re + 1j * im).conj().T
    w, v = linalg.eig_hermitian(m)
    assert np.all(np.diff(w) <= 0)
    assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - m)) <= 1e-10 * max(1.0, np.abs(m).max())


def test_eig_general_real_examples():
    assert np.allclose(linalg.eig_general_real(np.eye(4)), [1, 1, 1, 1])
    assert np.allclose(linalg.eig_general_real(np.diag([2.0, 4, 1, 3])), [4, 3, 2, 1])


def test_eig_general_real_ampdamp_c_matrix():
    from qubit_nlb.channel import choi_state
    from qubit_nlb.nlbreak import amplitude_damping
    from qubit_nlb.state import c_matrix

    w = linalg.eig_general_real(c_matrix(choi_state(amplitude_damping(0.3))))
    assert np.max(np.abs(w - 0.7)) <= 1e-10


def test_eig_general_real_jordan_block_clustering():
    # a 2x2 Jordan block is split by ~sqrt(eps) in floating point; clustering restores it
    j = np.array([[0.7, 1, 0, 0], [0, 0.7, 0, 0], [0, 0, 0.3, 0], [0, 0, 0, 0.1]])
    q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(4, 4)))
    m = q @ j @ q.T
    w = linalg.eig_general_real(m)
    assert np.allclose(w, [0.7, 0.7, 0.3, 0.1], atol=1e-12)


def test_partial_transpose_examples():
    ket00 = np.zeros((4, 4), complex)
    ket00[0, 0] = 1
    assert np.allclose(linalg.partial_transpose_B(ket00), ket00)
    assert np.allclose(linalg.partial_transpose_B(np.eye(4) / 4), np.eye(4) / 4)
    assert np.isclose(np.linalg.eigvalsh(linalg.partial_transpose_B(singlet()))[0], -0.5)


@settings(max_examples=50, deadline=None)
@given(arrays(float, (4, 4), elements=finite), arrays(float, (4, 4), elements=finite))
def test_partial_transpose_is_involution(re, im):
    m = re + 1j * im
    assert np.array_equal(linalg.partial_transpose_B(linalg.partial_transpose_B(m)), m)


def test_partial_traces_of_product():
    a = np.array([[0.7, 0.1], [0.1, 0.3]])
    b = np.array([[0.4, -0.2j], [0.2j, 0.6]])
    assert np.allclose(linalg.partial_trace_B(np.kron(a, b)), a)
    assert np.allclose(linalg.partial_trace_A(np.kron(a, b)), b)
    assert np.allclose(linalg.swap_factors(np.kron(a, b)), np.kron(b, a))


def test_singular_values_examples():
    assert np.allclose(linalg.singular_values(np.eye(3)), [1, 1, 1])
    assert np.allclose(linalg.singular_values(np.diag([0.8, -0.5, 0.1])), [0.8, 0.5, 0.1])
    T = output_T_matrix(example_i_channel(), PureInputSpec(0.4, (1.2, 1.4, 3.5))).T
    sv = linalg.singular_values(T)
    assert abs(sv[0] ** 2 + sv[1] ** 2 - 1.01094) <= 1e-4


@settings(max_examples=100, deadline=None)
@given(arrays(float, (3, 3), elements=finite))
def test_singular_values_match_gram_eigenvalues(m):
    sv = linalg.singular_values(m)
    w, _ = linalg.eig_hermitian(m.T @ m)
    assert np.all(sv >= 0) and np.all(np.diff(sv) <= 0)
    assert np.max(np.abs(sv**2 - w)) <= 1e-10 * max(1.0, np.abs(m).max() ** 2)


@settings(max_examples=50, deadline=None)
@given(st.tuples(*[st.floats(0, 2 * np.pi) for _ in range(3)]))
def test_su2_lift_matches_rotation(angles):
    o = linalg.euler_zyz(*angles)
    u = linalg.su2_zyz(*angles)
    assert np.allclose(linalg.rotation_of_unitary(u), o, atol=1e-12)
    assert np.allclose(linalg.rotation_of_unitary(linalg.unitary_of_rotation(o)), o, atol=1e-12)
