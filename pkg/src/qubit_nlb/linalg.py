"""Small dense linear algebra helpers for 2x2 / 4x4 complex and 3x3 / 4x4 real matrices.

Everything here is a thin, validated layer over :mod:`numpy.linalg`. Two-qubit
operators use the ordering ``|00>, |01>, |10>, |11>`` (first factor outer).
"""

from __future__ import annotations

import numpy as np

HERM_TOL = 1e-9
IMAG_TOL = 1e-8
CLUSTER_TOL = 1e-6

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, SX, SY, SZ)

# PAULI_PRODUCTS[i, j] = sigma_i (x) sigma_j, with sigma_0 = identity
PAULI_PRODUCTS = np.array([[np.kron(a, b) for b in PAULIS] for a in PAULIS])

MINKOWSKI = np.diag([1.0, -1.0, -1.0, -1.0])


def _square(m, sizes, name="matrix"):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in sizes:
        raise ValueError(f"{name} must be square with dimension in {sizes}, got shape {m.shape}")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product of two 2x2 matrices (rows of ``a`` outer)."""
    a = _square(a, (2,), "a")
    b = _square(b, (2,), "b")
    return np.kron(a, b)


def is_hermitian(m, tol: float = HERM_TOL) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def eig_hermitian(m, tol: float = HERM_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns ``(values, vectors)`` with values in descending order and the
    matching orthonormal eigenvectors as columns of ``vectors``.
    """
    m = _square(m, (2, 3, 4))
    if not is_hermitian(m, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    herm = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(herm)
    return w[::-1].copy(), v[:, ::-1].copy()


def _cluster_average(w: np.ndarray, tol: float) -> np.ndarray:
    # Individual eigenvalues of a (near-)defective cluster are only accurate to
    # sqrt(eps); the cluster mean is accurate to eps.
    n = len(w)
    labels = list(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            if abs(w[i] - w[j]) <= tol * max(1.0, abs(w[i]), abs(w[j])):
                old, new = labels[j], labels[i]
                labels = [new if x == old else x for x in labels]
    out = w.copy()
    for lab in set(labels):
        idx = [k for k in range(n) if labels[k] == lab]
        out[idx] = w[idx].mean()
    return out


def eig_general_real(m, cluster_tol: float = CLUSTER_TOL) -> np.ndarray:
    """Eigenvalues of a real 4x4 matrix, sorted by descending real part.

    Eigenvalues closer than ``cluster_tol`` (relative) are replaced by their
    mean, which removes the spurious splitting of Jordan blocks. Pass
    ``cluster_tol=0`` to get the raw LAPACK output.
    """
    m = _square(m, (3, 4))
    if np.iscomplexobj(m):
        raise ValueError("expected a real matrix")
    w = np.linalg.eigvals(m.astype(float)).astype(complex)
    if cluster_tol > 0:
        w = _cluster_average(w, cluster_tol)
    order = np.argsort(-w.real, kind="stable")
    return w[order]


def singular_values(m) -> np.ndarray:
    """Singular values of a real 3x3 matrix, descending."""
    m = _square(m, (3,))
    return np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)


def partial_transpose_B(rho) -> np.ndarray:
    """Transpose on the second tensor factor of a 4x4 operator."""
    rho = _square(rho, (4,), "rho")
    return rho.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def partial_trace_B(rho) -> np.ndarray:
    """Trace out the second qubit."""
    rho = _square(rho, (4,), "rho")
    return np.einsum("ijkj->ik", rho.reshape(2, 2, 2, 2))


def partial_trace_A(rho) -> np.ndarray:
    """Trace out the first qubit."""
    rho = _square(rho, (4,), "rho")
    return np.einsum("ijil->jl", rho.reshape(2, 2, 2, 2))


def swap_factors(rho) -> np.ndarray:
    rho = _square(rho, (4,), "rho")
    return rho.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)


def rotation_of_unitary(u) -> np.ndarray:
    """SO(3) matrix ``O`` with ``u sigma_j u^dag = sum_i O[i, j] sigma_i``."""
    u = _square(u, (2,), "unitary")
    o = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            o[i, j] = 0.5 * np.trace(PAULIS[i + 1] @ u @ PAULIS[j + 1] @ u.conj().T).real
    return o


def unitary_of_rotation(o) -> np.ndarray:
    """An SU(2) element whose adjoint action is the rotation ``o`` (sign is arbitrary)."""
    from scipy.spatial.transform import Rotation

    o = _square(o, (3,), "rotation")
    x, y, z, w = Rotation.from_matrix(o).as_quat()
    return w * I2 - 1j * (x * SX + y * SY + z * SZ)


def rz(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def euler_zyz(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Rotation ``Rz(alpha) Ry(beta) Rz(gamma)``."""
    return rz(alpha) @ ry(beta) @ rz(gamma)


def su2_zyz(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Half-angle SU(2) lift of :func:`euler_zyz`."""

    def ez(a):
        return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])

    c, s = np.cos(beta / 2), np.sin(beta / 2)
    eyb = np.array([[c, -s], [s, c]], dtype=complex)
    return ez(alpha) @ eyb @ ez(gamma)
