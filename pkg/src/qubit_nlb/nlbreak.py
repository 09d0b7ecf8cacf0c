"""Nonlocality-breaking classification of qubit channels.

Three notions are decided here:

* NLB-MES: the Choi state satisfies CHSH (``M <= 1``).
* violation on pure inputs: the largest ``M`` over all pure two-qubit inputs,
  found by a grid sweep over Schmidt weight and Euler angles.
* strong NLB: the Choi state shows no hidden CHSH nonlocality under local filtering.

It also holds the named channel families used throughout the package.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import linalg
from .channel import (
    ChannelLike,
    QubitChannel,
    apply_one_sided,
    as_transfer_matrix,
    choi_state,
    require_cp,
)
from .state import hidden_nonlocality, horodecki_M, m_value_of_T, pure_state

NLB_TOL = 1e-12
TWO_PI = 2 * np.pi


# --- channel families -------------------------------------------------------

def amplitude_damping(p: float) -> QubitChannel:
    if not 0 <= p <= 1:
        raise ValueError(f"damping probability must lie in [0, 1], got {p}")
    s = math.sqrt(1 - p)
    return QubitChannel([0, 0, p], [s, s, 1 - p])


def extremal_channel(u: float, v: float) -> QubitChannel:
    """Two-angle family spanning the closure of the extreme qubit channels."""
    if not (0 <= u < TWO_PI and 0 <= v < np.pi):
        raise ValueError("need u in [0, 2pi) and v in [0, pi)")
    cu, cv = math.cos(u), math.cos(v)
    return QubitChannel([0, 0, math.sin(u) * math.sin(v)], [cu, cv, cu * cv])


def genuine_hidden_family(q: float) -> QubitChannel:
    """Channel whose Choi state is ``q |psi-><psi-| + (1-q) |0><0| (x) I/2`` (factors swapped)."""
    if not 0 <= q <= 1:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    return QubitChannel([0, 0, 1 - q], [-q, q, -q])


def example_i_channel() -> QubitChannel:
    r = 1 / math.sqrt(2)
    return QubitChannel([-0.12, 0.047, -0.210], [r, r, 0.5])


def example_ii_channel() -> QubitChannel:
    return QubitChannel([0.28, 0.01, -0.1], [0.7, 0.71, 0.7])


def nonunital_snlb_example() -> QubitChannel:
    return QubitChannel([0, 0, 0.29], [1 / math.sqrt(2), 1 / math.sqrt(10), 0.5])


def ampdamp_distillation_filters(p: float, n: float = 1e3):
    """Filters driving the amplitude-damping Choi state towards a maximally entangled state.

    ``A = diag(sqrt(1-p), 1/n)`` on the reference qubit and ``B = diag(1/n, 1)``
    on the channel output; the limit ``n -> inf`` is a Bell state.
    """
    from .state import Filter

    return Filter(np.diag([math.sqrt(1 - p), 1 / n]), np.diag([1 / n, 1.0]))


# --- pure inputs --------------------------------------------------------------

@dataclass(frozen=True)
class PureInputSpec:
    schmidt_lambda: float
    euler: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not 0 <= self.schmidt_lambda <= 1:
            raise ValueError("Schmidt weight must lie in [0, 1]")
        wrapped = tuple(float(a) % TWO_PI for a in self.euler)
        if len(wrapped) != 3:
            raise ValueError("need three Euler angles")
        object.__setattr__(self, "euler", wrapped)

    @property
    def rotation(self) -> np.ndarray:
        return linalg.euler_zyz(*self.euler)

    def to_dict(self) -> dict:
        return {"lambda": self.schmidt_lambda, "euler": list(self.euler)}


class OutputCorrelations(NamedTuple):
    T: np.ndarray
    r: np.ndarray
    s: np.ndarray


def _canonical(ch: QubitChannel) -> QubitChannel:
    if not isinstance(ch, QubitChannel) or not ch.is_canonical:
        raise ValueError("closed-form output correlations need a canonical channel")
    require_cp(ch)
    return ch


def output_T_matrix(ch: QubitChannel, spec: PureInputSpec) -> OutputCorrelations:
    """Correlations of the channel output on a pure input, in closed form.

    ``T = diag(a, a, 1) R diag(l1, -l2, l3) + e3 (2 lam - 1) t^T`` with
    ``a = 2 sqrt(lam (1 - lam))`` and ``R`` the Z-Y-Z Euler rotation of ``spec``.
    The matching input state is :func:`pure_input_state`.
    """
    ch = _canonical(ch)
    lam = spec.schmidt_lambda
    a = 2 * math.sqrt(lam * (1 - lam))
    d = np.array([ch.lam[0], -ch.lam[1], ch.lam[2]])
    rd = spec.rotation * d
    T = rd * np.array([a, a, 1.0])[:, None]
    T[2] += (2 * lam - 1) * ch.t
    r = np.array([0.0, 0.0, 2 * lam - 1])
    s = ch.t + (2 * lam - 1) * rd[2]
    return OutputCorrelations(T, r, s)


def pure_input_state(spec: PureInputSpec) -> np.ndarray:
    """``(I (x) V^T)(sqrt(lam)|00> + sqrt(1-lam)|11>)`` with ``V`` the SU(2) lift of the Euler angles."""
    lam = spec.schmidt_lambda
    phi = np.array([math.sqrt(lam), 0, 0, math.sqrt(1 - lam)], dtype=complex)
    v = linalg.su2_zyz(*spec.euler)
    return pure_state(np.kron(np.eye(2), v.T) @ phi)


def output_state(ch: ChannelLike, spec: PureInputSpec) -> np.ndarray:
    return apply_one_sided(ch, pure_input_state(spec))


# --- classifications -------------------------------------------------------------

def breaks_mes_nonlocality(ch: ChannelLike) -> bool:
    """True iff the Choi state satisfies CHSH; for canonical channels the two largest ``lam_i^2`` sum to <= 1."""
    return horodecki_M(choi_state(ch)) <= 1 + NLB_TOL


def is_strongly_nlb(ch: ChannelLike) -> bool:
    return not hidden_nonlocality(choi_state(ch)).violates


def verify_mesbreak_implies_maxmixed_local(ch: ChannelLike, sigma) -> bool:
    from .linalg import partial_trace_B
    from .state import validate_state

    if not breaks_mes_nonlocality(ch):
        raise ValueError("channel does not break nonlocality of the maximally entangled state")
    sigma = validate_state(sigma)
    if np.max(np.abs(partial_trace_B(sigma) - np.eye(2) / 2)) > 1e-9:
        raise ValueError("state's reduction on the untouched qubit is not maximally mixed")
    return horodecki_M(apply_one_sided(ch, sigma)) <= 1 + 1e-9


def lemma4_check(A, B) -> bool:
    """For PD ``A, B`` with ``eig(B) <= 1`` and top-two eigenvalues of ``A`` summing to <= 1,
    check that the top-two eigenvalues of ``AB`` also sum to <= 1."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    for name, m in (("A", A), ("B", B)):
        if m.shape != (3, 3) or np.max(np.abs(m - m.T)) > 1e-12:
            raise ValueError(f"{name} must be a symmetric 3x3 matrix")
        if np.linalg.eigvalsh(m)[0] <= 0:
            raise ValueError(f"{name} must be positive definite")
    ea = np.linalg.eigvalsh(A)[::-1]
    if np.linalg.eigvalsh(B)[-1] > 1 + 1e-12 or ea[0] + ea[1] > 1 + 1e-12:
        raise ValueError("eigenvalue preconditions violated")
    prod = np.sort(np.linalg.eigvals(A @ B).real)[::-1]
    return bool(prod[0] + prod[1] <= 1 + 1e-10)


# --- sweeps ----------------------------------------------------------------------

@dataclass
class SweepResult:
    best_M: float
    best_spec: PureInputSpec
    grid_meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"best_M": self.best_M, "best_spec": self.best_spec.to_dict(), "grid": self.grid_meta}


def angle_grid(step: float) -> np.ndarray:
    """``0, step, 2 step, ...`` below ``2 pi``, plus the endpoint ``2 pi``."""
    if step <= 0:
        raise ValueError("angle step must be positive")
    pts = np.arange(0.0, TWO_PI, step)
    if TWO_PI - pts[-1] > 1e-12:
        pts = np.append(pts, TWO_PI)
    return pts


def lambda_grid(step: float) -> np.ndarray:
    if step <= 0:
        raise ValueError("lambda step must be positive")
    n = round(1 / step)
    if abs(n * step - 1) < 1e-9:
        return np.linspace(0.0, 1.0, n + 1)
    pts = np.arange(0.0, 1.0, step)
    return np.append(pts, 1.0)


def _rotation_batch(angles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    A, B, G = np.meshgrid(angles, angles, angles, indexing="ij")
    eul = np.stack([A.ravel(), B.ravel(), G.ravel()], axis=1)
    ca, sa = np.cos(eul[:, 0]), np.sin(eul[:, 0])
    cb, sb = np.cos(eul[:, 1]), np.sin(eul[:, 1])
    cg, sg = np.cos(eul[:, 2]), np.sin(eul[:, 2])
    # Rz(a) Ry(b) Rz(g), written out
    R = np.empty((len(eul), 3, 3))
    R[:, 0, 0] = ca * cb * cg - sa * sg
    R[:, 0, 1] = -ca * cb * sg - sa * cg
    R[:, 0, 2] = ca * sb
    R[:, 1, 0] = sa * cb * cg + ca * sg
    R[:, 1, 1] = -sa * cb * sg + ca * cg
    R[:, 1, 2] = sa * sb
    R[:, 2, 0] = -sb * cg
    R[:, 2, 1] = sb * sg
    R[:, 2, 2] = cb
    return R, eul


def _sym3_m_values(s00, s11, s22, s01, s02, s12) -> np.ndarray:
    """``tr(S) - min eig(S)`` for symmetric 3x3 ``S`` given by its entries (closed form)."""
    tr = s00 + s11 + s22
    q = tr / 3
    p1 = s01 * s01 + s02 * s02 + s12 * s12
    d0, d1, d2 = s00 - q, s11 - q, s22 - q
    p = np.sqrt((d0 * d0 + d1 * d1 + d2 * d2 + 2 * p1) / 6)
    safe = np.where(p > 0, p, 1.0)
    det = d0 * (d1 * d2 - s12 * s12) - s01 * (s01 * d2 - s12 * s02) + s02 * (s01 * s12 - d1 * s02)
    r = np.clip(det / (2 * safe**3), -1.0, 1.0)
    lmin = np.where(p > 0, q + 2 * p * np.cos(np.arccos(r) / 3 + 2 * np.pi / 3), q)
    return tr - lmin


def max_M_over_pure_inputs(
    ch: QubitChannel,
    angle_step: float = 0.1,
    lambda_step: float = 0.05,
    refine_top: int = 32,
) -> SweepResult:
    """Largest M-value of the channel output over a grid of pure inputs.

    The grid covers Euler angles in ``[0, 2 pi]`` and Schmidt weights in
    ``[0, 1]``, endpoints included. Candidates are screened with a vectorized
    closed-form M and the best ``refine_top`` are re-evaluated with an SVD.
    """
    ch = _canonical(ch)
    angles = angle_grid(angle_step)
    lams = lambda_grid(lambda_step)
    R, eul = _rotation_batch(angles)
    d = np.array([ch.lam[0], -ch.lam[1], ch.lam[2]])
    RD = R * d[None, None, :]
    # T^T T = a^2 (x0 x0^T + x1 x1^T) + w w^T, with x_k the rows of R D and w = x2 + (2 lam - 1) t
    x0, x1, x2 = RD[:, 0, :], RD[:, 1, :], RD[:, 2, :]
    pairs = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]
    upper = [x0[:, i] * x0[:, j] + x1[:, i] * x1[:, j] for i, j in pairs]
    cands = []
    for lam in lams:
        a2 = 4 * lam * (1 - lam)
        w = x2 + (2 * lam - 1) * ch.t
        m = _sym3_m_values(*(a2 * u + w[:, i] * w[:, j] for u, (i, j) in zip(upper, pairs)))
        k = min(refine_top, len(m))
        top = np.argpartition(-m, k - 1)[:k]
        cands.extend((float(m[i]), float(lam), int(i)) for i in top)
    cands.sort(key=lambda c: -c[0])
    best = None
    for _, lam, i in cands[:refine_top]:
        spec = PureInputSpec(lam, tuple(eul[i]))
        exact = m_value_of_T(output_T_matrix(ch, spec).T)
        if best is None or exact > best[0]:
            best = (exact, spec)
    meta = {
        "angle_step": angle_step,
        "lambda_step": lambda_step,
        "n_angles": len(angles),
        "n_lambdas": len(lams),
        "n_points": len(angles) ** 3 * len(lams),
    }
    return SweepResult(best[0], best[1], meta)


class SweepRow(NamedTuple):
    parameter: float
    best_M: float
    best_spec: PureInputSpec


def _sweep_one(args):
    factory, value, angle_step, lambda_step = args
    res = max_M_over_pure_inputs(factory(value), angle_step, lambda_step)
    return SweepRow(value, res.best_M, res.best_spec)


def sweep_family(
    factory: Callable[[float], QubitChannel],
    values: Sequence[float],
    angle_step: float = 0.1,
    lambda_step: float = 0.05,
    workers: int = 1,
) -> list[SweepRow]:
    """Run :func:`max_M_over_pure_inputs` for each parameter value, in input order."""
    jobs = [(factory, float(v), angle_step, lambda_step) for v in values]
    if workers <= 1:
        return [_sweep_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_one, jobs))


def estimate_crossing(
    factory: Callable[[float], QubitChannel],
    lo: float,
    hi: float,
    tol: float = 1e-4,
    angle_step: float = 0.1,
    lambda_step: float = 0.05,
    threshold: float = 1e-9,
) -> float:
    """Bisect for the parameter where the swept maximal M first exceeds 1.

    Requires max M <= 1 at ``lo`` and > 1 at ``hi``.
    """

    def violates(x):
        return max_M_over_pure_inputs(factory(x), angle_step, lambda_step).best_M > 1 + threshold

    if violates(lo) or not violates(hi):
        raise ValueError("crossing is not bracketed by [lo, hi]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if violates(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


FAMILIES: dict[str, Callable[..., QubitChannel]] = {
    "ampdamp": amplitude_damping,
    "extremal": extremal_channel,
    "qfamily": genuine_hidden_family,
}

PRESETS: dict[str, Callable[[], QubitChannel]] = {
    "example-i": example_i_channel,
    "example-ii": example_ii_channel,
    "nonunital-snlb": nonunital_snlb_example,
}


def classify(ch: ChannelLike) -> dict:
    """All verdicts for one channel, as plain Python values."""
    from .channel import is_completely_positive, is_entanglement_breaking, is_unital
    from .state import c_spectrum

    if not is_completely_positive(ch):
        return {"cp": False}
    choi = choi_state(ch)
    spec = c_spectrum(choi)
    hid = hidden_nonlocality(choi)
    return {
        "cp": True,
        "unital": is_unital(ch),
        "entanglement_breaking": is_entanglement_breaking(ch),
        "nlb_mes": breaks_mes_nonlocality(ch),
        "strongly_nlb": not hid.violates,
        "choi_M": horodecki_M(choi),
        "c_spectrum": spec.values.tolist(),
        "c_ratio": spec.ratio,
        "filtered_optimal_violation": hid.optimal_violation,
        "transfer_matrix": as_transfer_matrix(ch).tolist(),
    }
