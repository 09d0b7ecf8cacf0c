"""Golden checks reproducing the published numbers, used by ``qubit-nlb verify-paper``.

Each check returns a :class:`CheckResult`. Checks marked ``informational`` are
diagnostics printed next to a related check; they never affect the exit status.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .channel import QubitChannel, choi_state, compose
from .nlbreak import (
    PureInputSpec,
    amplitude_damping,
    breaks_mes_nonlocality,
    estimate_crossing,
    example_i_channel,
    example_ii_channel,
    extremal_channel,
    genuine_hidden_family,
    is_strongly_nlb,
    lemma4_check,
    nonunital_snlb_example,
    output_state,
    output_T_matrix,
    sweep_family,
    verify_mesbreak_implies_maxmixed_local,
    ampdamp_distillation_filters,
)
from .state import (
    Filter,
    apply_filter,
    c_spectrum,
    chsh_bruteforce,
    correlation_matrix,
    hidden_nonlocality,
    horodecki_M,
    lorentz_of_filter,
    m_value_of_T,
)
from .volume import chunk_rng, classify_batch, estimate_volumes, sample_candidates

CHECK_SEED = 2024


@dataclass
class CheckResult:
    name: str
    expected: str
    computed: str
    tol: str
    passed: bool
    seconds: float = 0.0
    informational: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _close(name, expected, computed, tol, seconds=0.0, max_seconds=None, informational=False):
    ok = abs(computed - expected) <= tol
    tol_txt = f"±{tol:g}"
    if max_seconds is not None:
        ok = ok and seconds < max_seconds
        tol_txt += f", <{max_seconds:g}s"
    return CheckResult(name, f"{expected:.7g}", f"{computed:.7g}", tol_txt, bool(ok), seconds, informational)


def _timed(fn: Callable):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


# --- random instances --------------------------------------------------------

def random_state(rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_filter(rng: np.random.Generator, max_cond: float = 20.0) -> np.ndarray:
    while True:
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        if np.linalg.cond(a) < max_cond:
            return a


def random_cp_channels(rng: np.random.Generator, n: int, mode: str = "full") -> list[QubitChannel]:
    out = []
    while len(out) < n:
        t, lam = sample_candidates(rng, 8192, mode)
        ok = classify_batch(t, lam)["cp"]
        out.extend(QubitChannel(a, b) for a, b in zip(t[ok], lam[ok]))
    return out[:n]


# --- criteria ---------------------------------------------------------------------

def check_example_i() -> list[CheckResult]:
    spec = PureInputSpec(0.4, (1.2, 1.4, 3.5))
    m, dt = _timed(lambda: m_value_of_T(output_T_matrix(example_i_channel(), spec).T))
    return [_close("1 example i: M at lambda=0.4, Euler (1.2,1.4,3.5)", 1.01094, m, 1e-4, dt, 1.0)]


def check_example_ii() -> list[CheckResult]:
    spec = PureInputSpec(0.45)
    m, dt = _timed(lambda: m_value_of_T(output_T_matrix(example_ii_channel(), spec).T))
    return [_close("2 example ii: M at lambda=0.45, R=I", 1.0159, m, 1e-4, dt, 1.0)]


def check_ampdamp_sweep(workers: int = 1) -> list[CheckResult]:
    ps = [round(0.05 * k, 2) for k in range(21)]
    rows, dt = _timed(lambda: sweep_family(amplitude_damping, ps, 0.1, 0.05, workers=workers))
    worst_lo = max(abs(r.best_M - 2 * (1 - r.parameter)) for r in rows if r.parameter <= 0.5)
    worst_hi = max(abs(r.best_M - 1) for r in rows if r.parameter > 0.5)
    return [
        CheckResult("3 ampdamp sweep: max |best_M - 2(1-p)|, p<=0.5", "0", f"{worst_lo:.3g}", "0.02, <120s",
                    worst_lo <= 0.02 and dt < 120, dt),
        CheckResult("3 ampdamp sweep: max |best_M - 1|, p>0.5", "0", f"{worst_hi:.3g}", "1e-6, <120s",
                    worst_hi <= 1e-6 and dt < 120, dt),
    ]


def _spectrum_check(name, ch, expected):
    spec, dt = _timed(lambda: c_spectrum(choi_state(ch)))
    err = float(np.max(np.abs(spec.values.real - np.sort(expected)[::-1])))
    return CheckResult(name, np.array2string(np.asarray(expected), precision=6),
                       np.array2string(spec.values.real, precision=6), "1e-10, <1s",
                       err <= 1e-10 and dt < 1.0, dt)


def check_c_spectra() -> list[CheckResult]:
    out = []
    for p in (0.3, 0.7):
        out.append(_spectrum_check(f"4 C-spectrum ampdamp p={p}", amplitude_damping(p), [1 - p] * 4))
    for q in (0.4, 0.6236):
        out.append(_spectrum_check(f"4 C-spectrum qfamily q={q}", genuine_hidden_family(q), [q, q, q * q, q * q]))
    u, v = 0.5, 1.1
    cu, cv = math.cos(u) ** 2, math.cos(v) ** 2
    out.append(_spectrum_check(f"4 C-spectrum extremal u={u}, v={v}", extremal_channel(u, v), [cu, cu, cv, cv]))
    return out


def check_filtered_violations() -> list[CheckResult]:
    out = []
    for p in (0.0, 0.5, 0.9):
        h = hidden_nonlocality(choi_state(amplitude_damping(p)))
        out.append(_close(f"5 filtered violation ampdamp p={p}", 2 * math.sqrt(2), h.optimal_violation, 1e-9))
    for q in (0.3, 0.6):
        h = hidden_nonlocality(choi_state(genuine_hidden_family(q)))
        out.append(_close(f"5 filtered violation qfamily q={q}", 2 * math.sqrt(1 + q), h.optimal_violation, 1e-9))
    for u, v in ((0.5, 1.1), (0.2, 0.9)):
        h = hidden_nonlocality(choi_state(extremal_channel(u, v)))
        expected = 1 + math.cos(v) ** 2 / math.cos(u) ** 2
        out.append(_close(f"5 C-ratio extremal u={u}, v={v}", expected, h.ratio, 1e-9))
    return out


def check_quasi_distillation() -> list[CheckResult]:
    p, n = 0.5, 1e3
    rho = choi_state(amplitude_damping(p))
    printed = Filter(np.diag([(1 - p) / (2 - p), 1 / n]), np.diag([1 / n, 1.0]))
    m_printed = horodecki_M(apply_filter(rho, printed))
    m_fixed = horodecki_M(apply_filter(rho, ampdamp_distillation_filters(p, n)))
    return [
        CheckResult("6 quasi-distillation, filters as printed (p=0.5, n=1e3)", ">= 1.999",
                    f"{m_printed:.7g}", "M >= 2 - 1e-3", m_printed >= 2 - 1e-3),
        CheckResult("6 quasi-distillation, A = diag(sqrt(1-p), 1/n)", ">= 1.999",
                    f"{m_fixed:.7g}", "M >= 2 - 1e-3", m_fixed >= 2 - 1e-3, informational=True),
    ]


def check_nonunital_snlb() -> list[CheckResult]:
    ch = nonunital_snlb_example()
    h = hidden_nonlocality(choi_state(ch))
    snlb = is_strongly_nlb(ch)
    return [
        _close("7 non-unital SNLB example: C-ratio", 0.887, h.ratio, 5e-4),
        CheckResult("7 non-unital SNLB example: SNLB verdict", "True", str(snlb), "exact", snlb),
    ]


def check_qfamily(fast: bool = False) -> list[CheckResult]:
    ch = genuine_hidden_family(0.6236)
    m = horodecki_M(output_state(ch, PureInputSpec(0.95)))
    m_swapped = horodecki_M(output_state(ch, PureInputSpec(0.05)))
    out = [
        _close("8 qfamily q=0.6236: M - 1 at lambda=0.95, R=I", 2.339e-5, m - 1, 1e-6),
        _close("8 qfamily q=0.6236: M - 1 at lambda=0.05, R=I (input relabeled)",
               2.339e-5, m_swapped - 1, 1e-6, informational=True),
    ]
    tol = 1e-3 if fast else 1e-4
    x, dt = _timed(lambda: estimate_crossing(genuine_hidden_family, 0.60, 0.65, tol=tol))
    out.append(CheckResult("8 qfamily sweep crossing estimate", "[0.615, 0.63]", f"{x:.5f}", "interval",
                           0.615 <= x <= 0.63, dt))
    return out


def check_volumes(fast: bool = False, workers: int = 1) -> list[CheckResult]:
    n_full, tol = (10**6, 0.02) if fast else (10**7, 0.01)
    full, dt = _timed(lambda: estimate_volumes(n_full, seed=CHECK_SEED, mode="full", workers=workers))
    uni, dt_u = _timed(lambda: estimate_volumes(10**6, seed=CHECK_SEED, mode="unital", workers=workers))
    fr, fu = full.fractions, uni.fractions
    out = []
    for key, label, expected in (("eb", "EB", 0.24), ("nlb_mes", "NLB-MES", 0.81), ("snlb", "SNLB", 0.39)):
        r = _close(f"9 volume full n={n_full:.0e}: {label}", expected, fr[key], tol, dt, 600.0)
        out.append(r)
    out.append(_close("9 volume unital n=1e6: EB", 0.5, fu["eb"], 0.01, dt_u))
    out.append(_close("9 volume unital n=1e6: SNLB", 0.92, fu["snlb"], 0.01, dt_u))
    out.append(_close("9 volume unital n=1e6: NLB-MES", 0.92, fu["nlb_mes"], 0.01, dt_u, informational=True))
    return out


# --- property suites -------------------------------------------------------------

def _suite(name, fn, n) -> CheckResult:
    (bad, detail), dt = _timed(fn)
    return CheckResult(f"10{name} ({n} instances)", "0 failures", f"{bad} failures{detail}", "see name",
                       bad == 0, dt)


def suite_chsh_oracle(rng, n=100):
    worst = 0.0
    for _ in range(n):
        rho = random_state(rng)
        m = horodecki_M(rho)
        worst = max(worst, abs(chsh_bruteforce(rho) - 2 * math.sqrt(m)))
    return int(worst > 1e-3), f", max dev {worst:.2e}"


def suite_lorentz(rng, n=1000):
    bad = 0
    for _ in range(n):
        rho = random_state(rng)
        a, b = random_filter(rng), random_filter(rng)
        out = apply_filter(rho, a, b)
        la, lb = lorentz_of_filter(a), lorentz_of_filter(b)
        pred = la @ correlation_matrix(rho) @ lb.T
        pred /= pred[0, 0]
        cov_ok = np.max(np.abs(pred - correlation_matrix(out))) <= 1e-8
        r0, r1 = c_spectrum(rho).ratio, c_spectrum(out).ratio
        bad += not (cov_ok and abs(r0 - r1) <= 1e-8 * max(1.0, abs(r0)))
    return bad, ""


def suite_lemma4(rng, n=10**5):
    bad = 0
    for _ in range(n):
        qa, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        ea = np.sort(rng.uniform(1e-3, 1.0, size=3))[::-1]
        if ea[0] + ea[1] > 1:
            ea = ea / (ea[0] + ea[1])
        qb, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        eb = rng.uniform(1e-3, 1.0, size=3)
        A = qa @ np.diag(ea) @ qa.T
        B = qb @ np.diag(eb) @ qb.T
        bad += not lemma4_check((A + A.T) / 2, (B + B.T) / 2)
    return bad, ""


def suite_maxmixed(rng, n=10**4):
    bad = 0
    chans = [c for c in random_cp_channels(rng, 2 * n) if breaks_mes_nonlocality(c)][:n]
    sources = random_cp_channels(rng, n)
    for ch, src in zip(chans, sources):
        sigma = choi_state(src)
        u = random_unitary(rng)
        sigma = np.kron(np.eye(2), u) @ sigma @ np.kron(np.eye(2), u).conj().T
        bad += not verify_mesbreak_implies_maxmixed_local(ch, sigma)
    return bad, ""


def suite_subset_chain(rng, n=10**4):
    from .channel import is_entanglement_breaking

    bad = 0
    for ch in random_cp_channels(rng, n):
        eb, snlb, mes = is_entanglement_breaking(ch), is_strongly_nlb(ch), breaks_mes_nonlocality(ch)
        bad += (eb and not snlb) or (snlb and not mes)
    return bad, ""


def suite_unital(rng, n=10**4):
    bad = sum(is_strongly_nlb(ch) != breaks_mes_nonlocality(ch)
              for ch in random_cp_channels(rng, n, mode="unital"))
    return bad, ""


def suite_closed_form(rng, n=1000):
    worst = 0.0
    for ch in random_cp_channels(rng, n):
        spec = PureInputSpec(rng.uniform(), tuple(rng.uniform(0, 2 * np.pi, size=3)))
        direct = horodecki_M(output_state(ch, spec))
        worst = max(worst, abs(m_value_of_T(output_T_matrix(ch, spec).T) - direct))
    return int(worst > 1e-9), f", max dev {worst:.1e}"


def suite_composition(rng, n=1000):
    bad = 0
    chans = random_cp_channels(rng, 2 * n)
    for first, second in zip(chans[:n], chans[n:]):
        if breaks_mes_nonlocality(second):
            bad += not breaks_mes_nonlocality(compose(second, first))
    return bad, ""


def check_properties(fast: bool = False, seed: int = CHECK_SEED) -> list[CheckResult]:
    scale = 10 if fast else 1
    suites = [
        ("a chsh_bruteforce vs 2 sqrt(M), 1e-3", suite_chsh_oracle, 100),
        ("b Lorentz covariance and C-ratio invariance, 1e-8", suite_lorentz, 1000),
        ("c lemma 4 on constrained PD pairs", suite_lemma4, 10**5),
        ("d MES-breaking keeps maximally-mixed-reduction states local", suite_maxmixed, 10**4),
        ("e EB subset SNLB subset NLB-MES", suite_subset_chain, 10**4),
        ("f unital SNLB = NLB-MES", suite_unital, 10**4),
        ("g closed-form output M vs direct, 1e-9", suite_closed_form, 1000),
    ]
    out = []
    for k, (name, fn, n) in enumerate(suites):
        n = max(n // scale, 10)
        rng = chunk_rng(seed, 1000 + k)
        out.append(_suite(name, lambda fn=fn, rng=rng, n=n: fn(rng, n), n))
    return out


def run_all(fast: bool = False, workers: int = 1, progress: Callable[[str], None] | None = None) -> list[CheckResult]:
    steps = [
        check_example_i,
        check_example_ii,
        lambda: check_ampdamp_sweep(workers),
        check_c_spectra,
        check_filtered_violations,
        check_quasi_distillation,
        check_nonunital_snlb,
        lambda: check_qfamily(fast),
        lambda: check_volumes(fast, workers),
        lambda: check_properties(fast),
    ]
    results = []
    for k, step in enumerate(steps, 1):
        if progress:
            progress(f"criterion {k}")
        results.extend(step())
    return results


def all_passed(results: list[CheckResult]) -> bool:
    return all(r.passed for r in results if not r.informational)


def format_table(results: list[CheckResult]) -> str:
    w = max(len(r.name) for r in results)
    lines = [f"{'check':<{w}}  {'expected':>14}  {'computed':>26}  {'tol':>16}  status"]
    for r in results:
        status = ("PASS" if r.passed else "FAIL") + (" (info)" if r.informational else "")
        lines.append(f"{r.name:<{w}}  {r.expected:>14}  {r.computed:>26}  {r.tol:>16}  {status}")
    return "\n".join(lines)
