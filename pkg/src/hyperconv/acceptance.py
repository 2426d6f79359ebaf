"""The twelve acceptance criteria as runnable checks.

Each criterion returns a :class:`CriterionResult`; :func:`run_all` runs them in
order and :func:`format_line` renders the one-line verdict. Criteria 10 and 11
share their sweeps.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .closedform import (
    delta_n_reduction_constant,
    lambda2_exact,
    riesz_chain_constant,
    theta_bound,
    theta_exact,
    w_norm_for_beta,
)
from .forms import Family, make_form
from .harness import (
    DEFAULT_W_GRID,
    MC_SIGMAS,
    SweepSpec,
    sup_inequality,
    fit_log_divergence,
    run_sweep,
)
from .oracle import GaussianProfile, Grid, RngStream, estimate, quadratic_form_probe
from .quadrature import integrate_adaptive
from .specialfun import elliptic_k, gauss_2f1

MC_BUDGET = 1_000_000
SEED = 42


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    elapsed: float = 0.0


def format_line(r: CriterionResult) -> str:
    return f"[{'PASS' if r.passed else 'FAIL'}] {r.number:2d} {r.title}: {r.detail} ({r.elapsed:.1f}s)"


def criterion_1() -> tuple[bool, str]:
    worst = 0.0
    for k in (0.1, 0.5, 0.9, 0.99):
        K = elliptic_k(k)
        rel = abs(K - 0.5 * math.pi * gauss_2f1(0.5, 0.5, 1.0, k * k)) / K
        worst = max(worst, rel)
    return worst <= 1e-9, f"max relative gap {worst:.2e} (tol 1e-9)"


def criterion_2(workers: int = 1) -> tuple[bool, str]:
    ok, parts = True, []
    for i, wn in enumerate((0.5, 2.0)):
        ex = lambda2_exact(wn)
        e = estimate(make_form(Family.LAMBDA_N, 2, w_norm=wn), MC_BUDGET, RngStream(SEED, 200 + i), workers)
        z = abs(e.value - ex) / e.stderr
        rel = e.stderr / e.value
        ok &= z <= MC_SIGMAS and rel <= 0.02
        parts.append(f"|w|={wn:g}: {e.value:.6g}+-{e.stderr:.2g} vs {ex:.6g} ({z:.2f} sigma, {100 * rel:.2f}%)")
    return ok, "; ".join(parts)


def criterion_3(workers: int = 1) -> tuple[bool, str]:
    exact = lambda2_exact(1.0)
    e = estimate(make_form(Family.LAMBDA_N, 2, w_norm=1.0), MC_BUDGET, RngStream(SEED, 300), workers)
    ok = exact == math.inf and e.divergence_suspected
    return ok, f"exact={exact}, oracle flag={e.divergence_suspected} (value {e.value})"


LOG_BETAS = (0.99, 0.995, 0.999, 0.9999)


def criterion_4() -> tuple[bool, str]:
    pts = [(w, lambda2_exact(w)) for w in (w_norm_for_beta(b) for b in LOG_BETAS)]
    fit = fit_log_divergence(pts)
    return fit.passed, f"ratio {fit.ratio:.4f} (band [0.9, 1.1]), residual {fit.residual:.2e}"


THETA_BOUND_CASES = ((2, 0.6), (2, 0.75), (2, 0.9), (3, 1.25), (3, 1.5), (3, 1.75), (4, 2.0), (4, 2.5))


def criterion_5() -> tuple[bool, str]:
    grid = DEFAULT_W_GRID
    assert len(grid) == 17 and 1.0 in grid
    worst, bad = math.inf, []
    for n, a in THETA_BOUND_CASES:
        for wn in grid:
            rep = theta_bound(n, a, a, wn)
            if not math.isfinite(rep.exact_value) or not rep.holds:
                bad.append((n, a, wn))
            if rep.upper_bound > 0:
                worst = min(worst, 1 - rep.exact_value / rep.upper_bound)
    detail = f"{len(THETA_BOUND_CASES) * len(grid)} points, min relative margin {worst:.3g}"
    if bad:
        detail += f"; violations at {bad}"
    return not bad, detail


def criterion_6() -> tuple[bool, str]:
    vals = {a: theta_exact(2, a, a, 1.0) for a in (0.6, 0.75, 0.9, 1.0)}
    ok = all(math.isfinite(vals[a]) for a in (0.6, 0.75, 0.9)) and vals[1.0] == math.inf
    return ok, ", ".join(f"alpha={a:g}: {v:.6g}" for a, v in vals.items())


def criterion_7(workers: int = 1) -> tuple[bool, str]:
    ok, parts = True, []
    for i, wn in enumerate((0.5, 1.0, 2.0)):
        lam = estimate(make_form(Family.LAMBDA_N, 3, w_norm=wn), MC_BUDGET, RngStream(SEED, 700 + i), workers)
        dlt = estimate(make_form(Family.DELTA_N, 3, w_norm=wn), MC_BUDGET, RngStream(SEED, 710 + i), workers)
        z = abs(lam.value - dlt.value) / math.hypot(lam.stderr, dlt.stderr)
        ok &= z <= MC_SIGMAS
        parts.append(f"|w|={wn:g}: {lam.value:.6g} vs {dlt.value:.6g} ({z:.2f} sigma)")
    return ok, "; ".join(parts)


def criterion_8(workers: int = 1) -> tuple[bool, str]:
    a = estimate(make_form(Family.THETA_ALPHA, 3, (1.5,), tau=4.0, w_norm=2.0), MC_BUDGET, RngStream(SEED, 800), workers)
    b = estimate(make_form(Family.THETA_ALPHA, 3, (1.5,), tau=1.0, w_norm=1.0), MC_BUDGET, RngStream(SEED, 801), workers)
    z = abs(a.value - b.value) / math.hypot(a.stderr, b.stderr)
    return z <= MC_SIGMAS, f"tau=4,|w|=2: {a.value:.6g}; tau=1,|w|=1: {b.value:.6g} ({z:.2f} sigma)"


def riesz_pair_integral_4d() -> float:
    """|w|^2 * int_{R^4} |x|^-3 |w - x|^-3 dx at |w| = 1 by nested quadrature.

    The integrand is symmetric under x -> w - x, so twice the half-space
    x . w < 1/2 is taken; there |w - x| >= 1/2 and only the origin is
    singular, which the r^3 volume factor absorbs. In polar form about the
    origin the integral is 2 sigma(S^2) int dr int sin^2 t (1 + r^2 - 2 r cos t)^(-3/2) dt,
    with cos t < 1/(2r).
    """

    def polar(r: float, om: float = 0.0) -> float:
        # integral over cos t in (-1, 1 - om)
        span = 2.0 - om

        def g(u, v):
            one_plus = span * u
            one_minus = om + span * v
            return span * np.sqrt(one_minus * one_plus) * ((1 - r) ** 2 + 2 * r * one_minus) ** -1.5

        return integrate_adaptive(g, (0.5, 0.5 if om == 0.0 else 0.0), rtol=1e-11, complement=True)

    near = integrate_adaptive(lambda x: np.array([0.5 * polar(0.5 * t) for t in x]), rtol=1e-9)
    # r = 1/(2s) on (1/2, inf); the cap is cos t < s, so 1 - cos t > 1 - s exactly
    far = integrate_adaptive(
        lambda s, q: np.array([0.5 / a**2 * polar(0.5 / a, b) for a, b in zip(s, q)]),
        (1.0, 0.0),
        rtol=1e-9,
        complement=True,
    )
    return 2.0 * 4.0 * math.pi * (near + far)


def criterion_9() -> tuple[bool, str]:
    value = riesz_pair_integral_4d()
    c = riesz_chain_constant(4)
    rel = abs(value - c) / c
    return rel <= 0.01, f"quadrature {value:.12g} vs 4 pi^2 = {c:.12g} (rel {rel:.1e})"


class _SweepCache:
    def __init__(self, workers: int):
        self.workers = workers
        self.reports: dict = {}

    def get(self, family: Family, n: int):
        key = (family, n)
        if key not in self.reports:
            spec = SweepSpec(family, (n,), budget=MC_BUDGET, seed=SEED + 1000 + 10 * n + (family is Family.LAMBDA_N),
                             workers=self.workers)
            self.reports[key] = run_sweep(spec)
        return self.reports[key]


def criterion_10(cache: _SweepCache) -> tuple[bool, str]:
    ok, parts = True, []
    for n in (2, 3, 4):
        rep = cache.get(Family.DELTA_N, n)
        flagged = [r.w_norm for r in rep.rows if r.flagged]
        sup = rep.sweep_checks[0]
        ok &= sup.passed and not flagged
        parts.append(f"Delta_{n} sup {rep.summary()['sup']:.5g} {'stable' if sup.passed else 'UNSTABLE'}, flags {flagged}")
    lam = cache.get(Family.LAMBDA_N, 2)
    flagged = [r.w_norm for r in lam.rows if r.flagged]
    ok &= 1.0 in flagged
    parts.append(f"Lambda_2 flags at {flagged}")
    return ok, "; ".join(parts)


def criterion_11(cache: _SweepCache) -> tuple[bool, str]:
    def top(rep):
        return max((r for r in rep.rows if np.isfinite(r.value)), key=lambda r: r.value)

    two = top(cache.get(Family.DELTA_N, 2))
    ok, parts = True, []
    for n in (3, 4):
        c = delta_n_reduction_constant(n)
        row = sup_inequality(f"Delta_{n}", top(cache.get(Family.DELTA_N, n)), two, c, [])
        ok &= row.passed
        parts.append(f"sup Delta_{n} {row.lhs:.5g} <= {c:.5g} x {row.rhs:.5g} (slack {row.slack:.4g})")
    return ok, "; ".join(parts)


PROBE_WIDTHS = (0.5, 1.0, 2.0)


def criterion_12(workers: int = 1) -> tuple[bool, str]:
    spec = make_form(Family.KERNEL_H, 2, (0.75,), w=(1.0, 0.0), v=(0.0, 1.0))
    vals = []
    for i, width in enumerate(PROBE_WIDTHS):
        e = quadratic_form_probe(spec, GaussianProfile(width), Grid(4 * width, 16), 400_000,
                                 RngStream(SEED, 1200 + i), workers)
        vals.append(e.value)
    finite = all(math.isfinite(v) and v > 0 for v in vals)
    spread = max(vals) / min(vals) if finite else math.inf
    return finite and spread <= 3.0, (
        ", ".join(f"width {w:g}: {v:.5g}" for w, v in zip(PROBE_WIDTHS, vals)) + f"; spread x{spread:.3g} (limit x3)"
    )


TITLES = {
    1: "elliptic K vs 2F1",
    2: "Lambda_2 closed form vs oracle",
    3: "Lambda_2 divergence on the unit sphere",
    4: "Lambda_2 log asymptote",
    5: "Theta Gamma-ratio bound",
    6: "Theta_{2,alpha} at |w|=1",
    7: "Lambda_3 = Delta_3",
    8: "dilation invariance",
    9: "Riesz chain constant, n=4",
    10: "uniform-boundedness sweeps",
    11: "reduction inequalities",
    12: "kernel quadratic-form probe",
}


def criteria(workers: int = 1) -> dict[int, Callable[[], tuple[bool, str]]]:
    cache = _SweepCache(workers)
    return {
        1: criterion_1,
        2: lambda: criterion_2(workers),
        3: lambda: criterion_3(workers),
        4: criterion_4,
        5: criterion_5,
        6: criterion_6,
        7: lambda: criterion_7(workers),
        8: lambda: criterion_8(workers),
        9: criterion_9,
        10: lambda: criterion_10(cache),
        11: lambda: criterion_11(cache),
        12: lambda: criterion_12(workers),
    }


def run_one(number: int, fn: Callable[[], tuple[bool, str]]) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failure with its reason, not an abort
        ok, detail = False, f"error: {type(exc).__name__}: {exc}"
    return CriterionResult(number, TITLES[number], bool(ok), detail, time.perf_counter() - t0)


def run_all(workers: int = 1, only: set[int] | None = None, echo: Callable[[str], None] | None = None):
    results = []
    for number, fn in criteria(workers).items():
        if only and number not in only:
            continue
        res = run_one(number, fn)
        results.append(res)
        if echo is not None:
            echo(format_line(res))
    return results
