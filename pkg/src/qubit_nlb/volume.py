"""Monte Carlo estimates of the relative volumes of channel classes.

Candidates ``(t, lam)`` are drawn uniformly from ``[-1, 1]^6`` (or
``lam in [-1, 1]^3`` with ``t = 0`` in unital mode); points that are not
completely positive are rejected, and the survivors are classified as
entanglement breaking (EB), breaking nonlocality of the maximally entangled
state (NLB-MES) and strongly nonlocality breaking (SNLB).

Sampling is split into fixed-size chunks, each with its own child
``SeedSequence``. Chunk ``k`` always sees the same stream, so a report
depends only on ``(n, seed, mode)`` and not on how chunks are spread over workers.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .channel import CP_TOL
from .linalg import MINKOWSKI, PAULI_PRODUCTS
from .nlbreak import NLB_TOL
from .state import DEGENERATE_FLOOR, HIDDEN_REL_TOL

CHUNK = 1 << 16
MODES = ("full", "unital")


@dataclass
class VolumeReport:
    seed: int
    samples_drawn: int
    cp_accepted: int
    eb_count: int
    nlb_mes_count: int
    snlb_count: int
    mode: str = "full"
    workers: int = 1

    @property
    def fractions(self) -> dict[str, float | None]:
        """Class counts over CP-accepted points; ``None`` when nothing was accepted."""
        n = self.cp_accepted
        keys = ("eb", "nlb_mes", "snlb")
        counts = (self.eb_count, self.nlb_mes_count, self.snlb_count)
        return {k: (c / n if n else None) for k, c in zip(keys, counts)}

    @property
    def stderr(self) -> dict[str, float | None]:
        n = self.cp_accepted
        return {k: (math.sqrt(f * (1 - f) / n) if f is not None else None)
                for k, f in self.fractions.items()}

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fractions"] = self.fractions
        d["stderr"] = self.stderr
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def table(self) -> str:
        fr, se = self.fractions, self.stderr
        lines = [
            f"mode={self.mode} seed={self.seed} samples={self.samples_drawn} "
            f"cp_accepted={self.cp_accepted}",
            f"{'class':<10}{'count':>10}{'fraction':>12}{'stderr':>10}",
        ]
        for label, key, count in (("EB", "eb", self.eb_count),
                                  ("NLB-MES", "nlb_mes", self.nlb_mes_count),
                                  ("SNLB", "snlb", self.snlb_count)):
            f = "n/a" if fr[key] is None else f"{fr[key]:.4f}"
            s = "n/a" if se[key] is None else f"{se[key]:.4f}"
            lines.append(f"{label:<10}{count:>10}{f:>12}{s:>10}")
        return "\n".join(lines)


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))


def sample_candidate(rng: np.random.Generator, mode: str = "full") -> tuple[np.ndarray, np.ndarray]:
    """One candidate ``(t, lam)``; ``t`` is identically zero in unital mode."""
    t, lam = sample_candidates(rng, 1, mode)
    return t[0], lam[0]


def sample_candidates(rng: np.random.Generator, n: int, mode: str = "full"):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if mode == "unital":
        return np.zeros((n, 3)), rng.uniform(-1.0, 1.0, size=(n, 3))
    x = rng.uniform(-1.0, 1.0, size=(n, 6))
    return x[:, :3], x[:, 3:]


def _choi_batch(t, lam, sign2=1.0):
    # sign2 = -1 gives the partial transpose on the channel side (sigma_y -> -sigma_y there)
    n = len(t)
    R = np.zeros((n, 4, 4))
    R[:, 0, 0] = 1.0
    R[:, 0, 1:] = t
    R[:, 0, 2] *= sign2
    R[:, 1, 1] = lam[:, 0]
    R[:, 2, 2] = -lam[:, 1] * sign2
    R[:, 3, 3] = lam[:, 2]
    return np.einsum("nij,ijab->nab", R, PAULI_PRODUCTS) / 4


def _cp_prefilter(t, lam, slack=1e-8):
    # diagonal entries and the two 2x2 principal minors of the Choi matrix (necessary for PSD)
    l1, l2, l3, t3 = lam[:, 0], lam[:, 1], lam[:, 2], t[:, 2]
    return (
        (1 + t3 + l3 >= -slack) & (1 - t3 - l3 >= -slack)
        & (1 + t3 - l3 >= -slack) & (1 - t3 + l3 >= -slack)
        & ((1 + l3) ** 2 - t3**2 - (l1 + l2) ** 2 >= -slack)
        & ((1 - l3) ** 2 - t3**2 - (l1 - l2) ** 2 >= -slack)
    )


def classify_batch(t: np.ndarray, lam: np.ndarray) -> dict[str, np.ndarray]:
    """Vectorized CP / EB / NLB-MES / SNLB masks for canonical channels."""
    t = np.asarray(t, dtype=float)
    lam = np.asarray(lam, dtype=float)
    n = len(t)
    cp = np.zeros(n, dtype=bool)
    pre = np.flatnonzero(_cp_prefilter(t, lam))
    if len(pre):
        cp[pre] = np.linalg.eigvalsh(_choi_batch(t[pre], lam[pre]))[:, 0] >= -CP_TOL
    eb = np.zeros(n, dtype=bool)
    mes = np.zeros(n, dtype=bool)
    snlb = np.zeros(n, dtype=bool)
    idx = np.flatnonzero(cp)
    if len(idx):
        tt, ll = t[idx], lam[idx]
        eb[idx] = np.linalg.eigvalsh(_choi_batch(tt, ll, sign2=-1.0))[:, 0] >= -CP_TOL
        sq = np.sort(ll**2, axis=1)
        mes[idx] = sq[:, 2] + sq[:, 1] <= 1 + NLB_TOL
        R = np.zeros((len(idx), 4, 4))
        R[:, 0, 0] = 1.0
        R[:, 0, 1:] = tt
        R[:, 1, 1], R[:, 2, 2], R[:, 3, 3] = ll[:, 0], -ll[:, 1], ll[:, 2]
        C = MINKOWSKI @ R @ MINKOWSKI @ np.swapaxes(R, 1, 2)
        w = np.sort(np.linalg.eigvals(C).real, axis=1)[:, ::-1]
        w = np.clip(w, 0.0, None)
        hidden = (w[:, 0] >= DEGENERATE_FLOOR) & (w[:, 1] + w[:, 2] > w[:, 0] * (1 + HIDDEN_REL_TOL))
        snlb[idx] = ~hidden
    return {"cp": cp, "eb": eb, "nlb_mes": mes, "snlb": snlb}


def _run_chunk(args):
    seed, chunk, size, mode = args
    t, lam = sample_candidates(chunk_rng(seed, chunk), size, mode)
    masks = classify_batch(t, lam)
    return tuple(int(masks[k].sum()) for k in ("cp", "eb", "nlb_mes", "snlb"))


def default_workers() -> int:
    env = os.environ.get("QUBIT_NLB_WORKERS")
    return max(1, int(env)) if env else 1


def estimate_volumes(n: int, seed: int = 0, mode: str = "full", workers: int | None = None) -> VolumeReport:
    """Sample ``n`` candidates and count the CP-accepted members of each class."""
    if n < 1:
        raise ValueError("need at least one sample")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    workers = default_workers() if workers is None else max(1, workers)
    jobs = []
    for k in range((n + CHUNK - 1) // CHUNK):
        jobs.append((seed, k, min(CHUNK, n - k * CHUNK), mode))
    if workers == 1 or len(jobs) == 1:
        results = [_run_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, jobs))
    totals = np.sum(np.array(results, dtype=np.int64), axis=0)
    cp, eb, mes, snlb = (int(x) for x in totals)
    return VolumeReport(seed=seed, samples_drawn=n, cp_accepted=cp, eb_count=eb,
                        nlb_mes_count=mes, snlb_count=snlb, mode=mode, workers=workers)
