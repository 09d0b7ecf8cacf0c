"""Qubit channels in canonical affine form.

A channel is stored as a translation ``t`` and a diagonal scaling ``lam`` of
the Bloch ball, optionally sandwiched between two single-qubit unitaries::

    channel(rho) = post . canonical(t, lam) . pre (rho)

Analysis routines also accept a bare 4x4 transfer matrix wherever a channel
is expected (see :func:`as_transfer_matrix`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import linalg
from .linalg import PAULI_PRODUCTS

CP_TOL = 1e-10

# Pauli coefficients of |Phi+><Phi+| = 1/4 sum_i c_i sigma_i (x) sigma_i
_PHI_PLUS_SIGNS = np.array([1.0, 1.0, -1.0, 1.0])


class ChannelError(ValueError):
    """Raised for channels that fail validation (e.g. not completely positive)."""


def _vec3(x, name):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (3,):
        raise ValueError(f"{name} must have three components")
    return x


@dataclass(frozen=True, eq=False)
class QubitChannel:
    t: np.ndarray
    lam: np.ndarray
    pre_unitary: np.ndarray | None = field(default=None)
    post_unitary: np.ndarray | None = field(default=None)

    def __post_init__(self):
        t = _vec3(self.t, "t")
        lam = _vec3(self.lam, "lambda")
        t.setflags(write=False)
        lam.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "lam", lam)
        for name in ("pre_unitary", "post_unitary"):
            u = getattr(self, name)
            if u is None:
                continue
            u = np.array(u, dtype=complex)
            if u.shape != (2, 2) or np.max(np.abs(u @ u.conj().T - np.eye(2))) > 1e-9:
                raise ValueError(f"{name} must be a 2x2 unitary")
            u.setflags(write=False)
            object.__setattr__(self, name, u)

    @property
    def is_canonical(self) -> bool:
        return self.pre_unitary is None and self.post_unitary is None

    def canonical(self) -> "QubitChannel":
        return QubitChannel(self.t, self.lam)

    def __repr__(self):
        extra = "" if self.is_canonical else ", with unitaries"
        return f"QubitChannel(t={self.t.tolist()}, lambda={self.lam.tolist()}{extra})"

    def to_dict(self) -> dict:
        d = {"t": self.t.tolist(), "lambda": self.lam.tolist()}
        for name in ("pre_unitary", "post_unitary"):
            u = getattr(self, name)
            if u is not None:
                d[name] = [[[z.real, z.imag] for z in row] for row in u]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "QubitChannel":
        try:
            t, lam = d["t"], d["lambda"]
        except (KeyError, TypeError) as exc:
            raise ValueError("channel spec needs 't' and 'lambda' entries") from exc
        units = {}
        for name in ("pre_unitary", "post_unitary"):
            if d.get(name) is not None:
                units[name] = np.array([[complex(re, im) for re, im in row] for row in d[name]])
        return cls(t, lam, **units)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "QubitChannel":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_transfer_matrix(cls, m) -> "QubitChannel":
        """Canonicalize an arbitrary trace-preserving transfer matrix.

        Uses a signed SVD of the 3x3 block, ``block = O1 diag(lam) O2`` with
        proper rotations ``O1``, ``O2``; the translation becomes ``O1^T t``.
        """
        m = _check_transfer(m)
        u, s, vt = np.linalg.svd(m[1:, 1:])
        if np.linalg.det(u) < 0:
            u[:, 2] *= -1
            s[2] *= -1
        if np.linalg.det(vt) < 0:
            vt[2, :] *= -1
            s[2] *= -1
        t = u.T @ m[1:, 0]
        return cls(t, s, pre_unitary=linalg.unitary_of_rotation(vt),
                   post_unitary=linalg.unitary_of_rotation(u))


ChannelLike = Union[QubitChannel, np.ndarray]


def _check_transfer(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (4, 4):
        raise ValueError("transfer matrix must be 4x4")
    if np.max(np.abs(m[0] - [1, 0, 0, 0])) > 1e-12:
        raise ValueError("transfer matrix first row must be (1, 0, 0, 0)")
    return m


def _rotation_block(u) -> np.ndarray:
    out = np.eye(4)
    if u is not None:
        out[1:, 1:] = linalg.rotation_of_unitary(u)
    return out


def transfer_matrix(ch: QubitChannel) -> np.ndarray:
    """4x4 affine Bloch-space matrix of the channel, first row ``(1, 0, 0, 0)``."""
    m = np.diag(np.concatenate([[1.0], ch.lam]))
    m[1:, 0] = ch.t
    return _rotation_block(ch.post_unitary) @ m @ _rotation_block(ch.pre_unitary)


def as_transfer_matrix(ch: ChannelLike) -> np.ndarray:
    if isinstance(ch, QubitChannel):
        return transfer_matrix(ch)
    return _check_transfer(ch)


def apply_to_bloch(ch: ChannelLike, bloch_in) -> np.ndarray:
    v = np.asarray(bloch_in, dtype=float)
    if v.shape != (4,) or abs(v[0] - 1.0) > 1e-12:
        raise ValueError("input must be an affine Bloch vector (1, x, y, z)")
    return as_transfer_matrix(ch) @ v


def _from_correlations(r4: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ijab->ab", r4, PAULI_PRODUCTS) / 4


def _choi_unchecked(ch: ChannelLike) -> np.ndarray:
    # Choi correlations R = diag(c) M^T for channel acting on the second factor
    r4 = _PHI_PLUS_SIGNS[:, None] * as_transfer_matrix(ch).T
    return _from_correlations(r4)


def is_completely_positive(ch: ChannelLike, tol: float = CP_TOL) -> bool:
    choi = _choi_unchecked(ch)
    return bool(np.linalg.eigvalsh(choi)[0] >= -tol)


def require_cp(ch: ChannelLike, tol: float = CP_TOL) -> None:
    if not is_completely_positive(ch, tol):
        raise ChannelError(f"channel is not completely positive: {ch!r}")


def choi_state(ch: ChannelLike) -> np.ndarray:
    """``(I (x) ch)(|Phi+><Phi+|)``; the channel acts on the second qubit."""
    require_cp(ch)
    return _choi_unchecked(ch)


def is_unital(ch: ChannelLike, tol: float = 1e-12) -> bool:
    if isinstance(ch, QubitChannel) and ch.is_canonical:
        return bool(np.linalg.norm(ch.t) <= tol)
    return bool(np.linalg.norm(as_transfer_matrix(ch)[1:, 0]) <= tol)


def is_entanglement_breaking(ch: ChannelLike, tol: float = CP_TOL) -> bool:
    """Separability of the Choi state, decided by the PPT test (exact for 2x2)."""
    choi = choi_state(ch)
    return bool(np.linalg.eigvalsh(linalg.partial_transpose_B(choi))[0] >= -tol)


def apply_one_sided(ch: ChannelLike, rho) -> np.ndarray:
    """``(I (x) ch)(rho)`` computed in the Pauli basis."""
    from .state import correlation_matrix, validate_state

    require_cp(ch)
    rho = validate_state(rho)
    r4 = correlation_matrix(rho) @ as_transfer_matrix(ch).T
    return _from_correlations(r4)


def compose(second: ChannelLike, first: ChannelLike) -> np.ndarray:
    """Transfer matrix of ``second . first``."""
    require_cp(second)
    require_cp(first)
    return as_transfer_matrix(second) @ as_transfer_matrix(first)


def identity_channel() -> QubitChannel:
    return QubitChannel([0, 0, 0], [1, 1, 1])


def depolarizing(strength: float = 1.0) -> QubitChannel:
    """Depolarizing channel shrinking the Bloch ball by ``1 - strength``."""
    if not 0 <= strength <= 1:
        raise ValueError("strength must lie in [0, 1]")
    s = 1.0 - strength
    return QubitChannel([0, 0, 0], [s, s, s])
