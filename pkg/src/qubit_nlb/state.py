"""Two-qubit state analysis: CHSH violation, local filtering and hidden nonlocality.

States are plain 4x4 complex ``numpy`` arrays. Functions that require a
physical density matrix call :func:`validate_state` first.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from . import linalg
from .linalg import MINKOWSKI, PAULI_PRODUCTS

STATE_TOL = 1e-9
NORM_FLOOR = 1e-12
DEGENERATE_FLOOR = 1e-12
HIDDEN_REL_TOL = 1e-12
NEGATIVE_CLAMP = 1e-8

# Maps A (x) A* to the Lorentz action on (sigma_0, ..., sigma_3)
_MAGIC = np.array(
    [[1, 0, 0, 1], [0, 1, 1, 0], [0, 1j, -1j, 0], [1, 0, 0, -1]], dtype=complex
) / np.sqrt(2)


class InvalidStateError(ValueError):
    pass


class FilterError(ValueError):
    pass


class SpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class CorrelationTensors:
    r: np.ndarray
    s: np.ndarray
    T: np.ndarray
    R: np.ndarray

    def to_csv(self) -> str:
        """Rows ``i,j,R_ij`` of the 4x4 matrix R; r and s sit in its first column and row."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "j", "R_ij"])
        for i in range(4):
            for j in range(4):
                w.writerow([i, j, repr(float(self.R[i, j]))])
        return buf.getvalue()


@dataclass(frozen=True)
class CSpectrum:
    values: np.ndarray
    ratio: float


class HiddenNonlocality(NamedTuple):
    violates: bool
    optimal_violation: float
    ratio: float


class Filter(NamedTuple):
    a: np.ndarray
    b: np.ndarray


def validate_state(rho, tol: float = STATE_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidStateError(f"two-qubit state must be 4x4, got {rho.shape}")
    if not linalg.is_hermitian(rho, tol):
        raise InvalidStateError("state is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise InvalidStateError(f"state trace is {np.trace(rho).real:.3g}, expected 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] < -tol:
        raise InvalidStateError("state has a negative eigenvalue")
    return rho


def pure_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(4)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def phi_plus() -> np.ndarray:
    return pure_state([1, 0, 0, 1])


def singlet() -> np.ndarray:
    return pure_state([0, 1, -1, 0])


def correlation_matrix(rho) -> np.ndarray:
    """``R[i, j] = Tr(rho sigma_i (x) sigma_j)`` for i, j = 0..3 (no validation)."""
    rho = np.asarray(rho, dtype=complex)
    return np.einsum("ijab,ba->ij", PAULI_PRODUCTS, rho).real


def state_from_correlations(R) -> np.ndarray:
    return np.einsum("ij,ijab->ab", np.asarray(R, dtype=float), PAULI_PRODUCTS) / 4


def correlation_tensors(rho) -> CorrelationTensors:
    R = correlation_matrix(validate_state(rho))
    return CorrelationTensors(r=R[1:, 0].copy(), s=R[0, 1:].copy(), T=R[1:, 1:].copy(), R=R)


def m_value_of_T(T) -> float:
    """Sum of the two largest eigenvalues of ``T^T T``."""
    sv = linalg.singular_values(T)
    return float(sv[0] ** 2 + sv[1] ** 2)


def horodecki_M(rho) -> float:
    """Horodecki M-value; CHSH is violated iff it exceeds 1, optimally by ``2 sqrt(M)``."""
    return m_value_of_T(correlation_tensors(rho).T)


def chsh_operator(a, a2, b, b2) -> np.ndarray:
    def dot(v):
        v = np.asarray(v, dtype=float)
        return sum(v[k] * linalg.PAULIS[k + 1] for k in range(3))

    b, b2 = np.asarray(b, dtype=float), np.asarray(b2, dtype=float)
    return np.kron(dot(a), dot(b + b2)) + np.kron(dot(a2), dot(b - b2))


def chsh_value(rho, a, a2, b, b2) -> float:
    return float(np.trace(np.asarray(rho) @ chsh_operator(a, a2, b, b2)).real)


def _unit(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def chsh_bruteforce(rho, resolution: int = 20) -> float:
    """Maximal CHSH expectation found by direct search over measurement directions.

    Bob's directions ``b, b'`` are searched on a ``resolution``-point grid per
    spherical angle, followed by a Nelder-Mead polish of the best grid point.
    For fixed ``b, b'`` the optimal Alice settings are the normalized vectors
    ``T (b +- b')``. The returned number is ``Tr(rho B_CHSH)`` evaluated on the
    full 4x4 Bell operator.
    """
    if resolution < 2:
        raise ValueError("grid needs at least two points per angle")
    rho = validate_state(rho)
    T = correlation_matrix(rho)[1:, 1:]
    th = np.linspace(0, np.pi, resolution)
    ph = np.linspace(0, 2 * np.pi, resolution, endpoint=False)
    TH, PH = np.meshgrid(th, ph, indexing="ij")
    angles = np.stack([TH.ravel(), PH.ravel()], axis=1)
    Tb = _unit(angles[:, 0], angles[:, 1]) @ T.T
    plus = np.linalg.norm(Tb[:, None, :] + Tb[None, :, :], axis=-1)
    minus = np.linalg.norm(Tb[:, None, :] - Tb[None, :, :], axis=-1)
    i, j = np.unravel_index(np.argmax(plus + minus), plus.shape)

    def neg(x):
        b, b2 = _unit(x[0], x[1]), _unit(x[2], x[3])
        return -(np.linalg.norm(T @ (b + b2)) + np.linalg.norm(T @ (b - b2)))

    x0 = np.concatenate([angles[i], angles[j]])
    res = minimize(neg, x0, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 20000})
    x = res.x if res.fun <= neg(x0) else x0
    b, b2 = _unit(x[0], x[1]), _unit(x[2], x[3])

    def direction(v):
        n = np.linalg.norm(v)
        return v / n if n > 0 else np.array([0.0, 0.0, 1.0])

    a, a2 = direction(T @ (b + b2)), direction(T @ (b - b2))
    return chsh_value(rho, a, a2, b, b2)


def apply_filter(rho, a, b=None, norm_floor: float = NORM_FLOOR) -> np.ndarray:
    """Normalized ``(A (x) B) rho (A (x) B)^dag``.

    ``a`` may also be a :class:`Filter`, in which case ``b`` is omitted.
    """
    if isinstance(a, Filter):
        a, b = a
    rho = validate_state(rho)
    f = np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    out = f @ rho @ f.conj().T
    norm = np.trace(out).real
    if norm <= norm_floor:
        raise FilterError(f"filter annihilates the state (norm {norm:.3g})")
    return out / norm


def lorentz_of_filter(a) -> np.ndarray:
    """Proper orthochronous Lorentz matrix ``T (A (x) A*) T^dag / |det A|`` of a filter."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (2, 2):
        raise ValueError("filter must be 2x2")
    det = abs(np.linalg.det(a))
    if det <= NORM_FLOOR:
        raise FilterError("filter is singular")
    lor = _MAGIC @ np.kron(a, a.conj()) @ _MAGIC.conj().T / det
    return lor.real


def c_matrix(rho) -> np.ndarray:
    R = correlation_matrix(rho)
    return MINKOWSKI @ R @ MINKOWSKI @ R.T


def c_spectrum(rho) -> CSpectrum:
    """Descending eigenvalues of ``M R M R^T`` with ``M = diag(1, -1, -1, -1)``."""
    rho = validate_state(rho)
    w = linalg.eig_general_real(c_matrix(rho))
    if np.max(np.abs(w.imag)) > linalg.IMAG_TOL:
        raise SpectrumError(f"C matrix has complex eigenvalues {w}")
    vals = w.real
    if vals.min() < -NEGATIVE_CLAMP:
        raise SpectrumError(f"C matrix has negative eigenvalues {vals}")
    vals = np.clip(vals, 0.0, None)
    ratio = 0.0 if vals[0] < DEGENERATE_FLOOR else float((vals[1] + vals[2]) / vals[0])
    return CSpectrum(values=vals, ratio=ratio)


def hidden_nonlocality(rho) -> HiddenNonlocality:
    """Whether some local filtering makes ``rho`` violate CHSH, and the best violation reachable."""
    spec = c_spectrum(rho)
    lam0, lam1, lam2 = spec.values[:3]
    if lam0 < DEGENERATE_FLOOR:
        return HiddenNonlocality(False, 0.0, 0.0)
    violates = bool(lam1 + lam2 > lam0 * (1 + HIDDEN_REL_TOL))
    return HiddenNonlocality(violates, float(2 * np.sqrt(spec.ratio)), spec.ratio)


def state_to_json(rho) -> str:
    rho = np.asarray(rho, dtype=complex).reshape(16)
    return json.dumps({"rho": [[z.real, z.imag] for z in rho]})


def state_from_json(text: str) -> np.ndarray:
    data = json.loads(text)
    entries = data["rho"] if isinstance(data, dict) else data
    if len(entries) != 16:
        raise InvalidStateError("state JSON needs 16 complex entries")
    rho = np.array([complex(re, im) for re, im in entries]).reshape(4, 4)
    return validate_state(rho)
