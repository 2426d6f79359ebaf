"""Parameter sweeps that pit the closed forms against the Monte-Carlo oracle.

A sweep evaluates one family over a grid of (n, exponents, |w|), attaches
per-point checks (closed-form agreement, bound inequality, invariances) and
sweep-level checks (sup stability, log asymptote, reduction inequalities),
and persists the result as CSV + JSON + a manifest.

Grid sups are lower bounds on the true sup; a finite grid can refute a
uniform bound but never confirm one, and reports say so.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .closedform import (
    closed_form_bound,
    closed_form_value,
    delta_n_reduction_constant,
    lambda2_log_asymptote,
    riesz_chain_constant,
)
from .errors import DomainError, HyperconvError, StructureError
from .forms import Family, FormSpec, axis_vector
from .oracle import McEstimate, RngStream, estimate

DEFAULT_W_GRID = tuple(2.0**k / 4 for k in range(-8, 9))
MC_SIGMAS = 3.0
BOUND_RTOL = 1e-9
SUP_STABILITY = 0.10
LOG_FIT_BAND = (0.9, 1.1)
LOG_FIT_MAX_RESIDUAL = 0.05
SUP_LABEL = "grid sup (a lower bound on the true sup)"


class Check(str, enum.Enum):
    COMPARE_CLOSED_FORM = "CompareClosedForm"
    BOUND_INEQUALITY = "BoundInequality"
    DILATION_INVARIANCE = "DilationInvariance"
    ROTATION_INVARIANCE = "RotationInvariance"
    LOG_ASYMPTOTE = "LogAsymptote"
    REDUCTION_INEQUALITY = "ReductionInequality"
    SUP_FINITE = "SupFinite"


@dataclass(frozen=True)
class SweepSpec:
    """One family over a grid; every combination of the grids is a point.

    ``alphas`` lists the exponent tuples to try (each as the FormSpec takes
    them); use ``((),)`` for families with fixed exponents. ``lams`` likewise,
    with ``(None,)`` for families without lambda.
    """

    family: Family
    ns: tuple[int, ...]
    alphas: tuple[tuple[float, ...], ...] = ((),)
    lams: tuple[float | None, ...] = (None,)
    w_norms: tuple[float, ...] = DEFAULT_W_GRID
    budget: int = 100_000
    seed: int = 42
    checks: tuple[Check, ...] = (Check.SUP_FINITE,)
    workers: int = 1
    tau: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "ns", tuple(int(n) for n in self.ns))
        object.__setattr__(self, "alphas", tuple(tuple(float(a) for a in al) for al in self.alphas))
        object.__setattr__(self, "lams", tuple(None if l is None else float(l) for l in self.lams))
        object.__setattr__(self, "w_norms", tuple(float(w) for w in self.w_norms))
        object.__setattr__(self, "checks", tuple(Check(c) for c in self.checks))
        if self.family.is_kernel:
            raise StructureError("kernel families are probed with quadratic_form_probe, not swept")
        if not (self.ns and self.alphas and self.lams and self.w_norms):
            raise StructureError("every sweep grid must be nonempty")
        if any(w < 0 or not math.isfinite(w) for w in self.w_norms):
            raise StructureError("w_norms must be finite and nonnegative")
        if int(self.budget) != self.budget or self.budget <= 0:
            raise StructureError(f"budget must be a positive integer, got {self.budget!r}")
        if self.workers < 1:
            raise StructureError(f"workers must be >= 1, got {self.workers!r}")

    def forms(self) -> list[FormSpec]:
        out = []
        for n in self.ns:
            for al in self.alphas:
                for lam in self.lams:
                    for wn in self.w_norms:
                        out.append(FormSpec(self.family, n, al, lam, self.tau, axis_vector(n, wn)))
        return out

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "ns": list(self.ns),
            "alphas": [list(a) for a in self.alphas],
            "lambdas": list(self.lams),
            "w_norms": list(self.w_norms),
            "budget": int(self.budget),
            "seed": self.seed,
            "checks": [c.value for c in self.checks],
            "workers": self.workers,
            "tau": self.tau,
        }


@dataclass(frozen=True)
class CheckOutcome:
    """Pass/fail plus the measured slack (positive = margin, negative = miss)."""

    check: str
    passed: bool
    slack: float
    note: str = ""


@dataclass
class PointRow:
    family: str
    n: int
    alphas: tuple[float, ...]
    lam: float | None
    tau: float
    w_norm: float
    exact: float | None
    bound: float | None
    mc: McEstimate | None
    checks: list[CheckOutcome] = field(default_factory=list)
    error: str = ""

    @property
    def value(self) -> float:
        """The number a sup is taken over: the MC estimate, else the exact value."""
        if self.mc is not None:
            return self.mc.value
        return self.exact if self.exact is not None else math.nan

    @property
    def flagged(self) -> bool:
        return bool(self.mc is not None and self.mc.divergence_suspected)


@dataclass
class SweepReport:
    spec: SweepSpec
    rows: list[PointRow]
    sweep_checks: list[CheckOutcome]
    provenance: dict

    def __post_init__(self):
        if not self.rows:
            raise StructureError("a sweep report needs at least one row")

    @property
    def failed(self) -> int:
        return sum(not c.passed for r in self.rows for c in r.checks) + sum(
            not c.passed for c in self.sweep_checks
        )

    @property
    def passed(self) -> bool:
        return self.failed == 0 and not any(r.error for r in self.rows)

    def summary(self) -> dict:
        finite = [r for r in self.rows if not r.error]
        top = max(finite, key=lambda r: _sup_key(r.value), default=None)
        return {
            "sup": None if top is None else top.value,
            "sup_w_norm": None if top is None else top.w_norm,
            "sup_label": SUP_LABEL,
            "failed_checks": self.failed,
            "errors": sum(bool(r.error) for r in self.rows),
        }

    def to_dict(self) -> dict:
        return to_jsonable(
            {
                "spec": self.spec.to_dict(),
                "rows": [_row_dict(r) for r in self.rows],
                "sweep_checks": [asdict(c) for c in self.sweep_checks],
                "summary": self.summary(),
                "provenance": self.provenance,
            }
        )


def _sup_key(x: float) -> float:
    return -math.inf if x is None or math.isnan(x) else x


def _row_dict(r: PointRow) -> dict:
    return {
        "family": r.family,
        "n": r.n,
        "alphas": list(r.alphas),
        "lambda": r.lam,
        "tau": r.tau,
        "w_norm": r.w_norm,
        "exact": r.exact,
        "bound": r.bound,
        "mc": None if r.mc is None else r.mc.to_dict(),
        "checks": [asdict(c) for c in r.checks],
        "error": r.error,
    }


def to_jsonable(obj):
    """Replace non-finite floats by strings so the JSON stays standard."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def _mc_agree(a: McEstimate, b: McEstimate) -> CheckOutcome:
    if math.isinf(a.value) or math.isinf(b.value):
        same = math.isinf(a.value) and math.isinf(b.value)
        return CheckOutcome("", same, 0.0 if same else -math.inf, "non-finite estimate")
    tol = MC_SIGMAS * math.hypot(a.stderr, b.stderr)
    return CheckOutcome("", abs(a.value - b.value) <= tol, tol - abs(a.value - b.value))


def _random_rotation(gen: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(gen.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _point_checks(form: FormSpec, row: PointRow, checks: Sequence[Check], spec: SweepSpec, rng: RngStream):
    mc = row.mc
    if Check.COMPARE_CLOSED_FORM in checks and row.exact is not None and mc is not None:
        if math.isinf(row.exact):
            ok = math.isinf(mc.value) or mc.divergence_suspected
            row.checks.append(CheckOutcome(Check.COMPARE_CLOSED_FORM.value, ok, 0.0 if ok else -math.inf,
                                           "exact value diverges; oracle must flag it"))
        else:
            tol = MC_SIGMAS * mc.stderr
            diff = abs(mc.value - row.exact)
            row.checks.append(CheckOutcome(Check.COMPARE_CLOSED_FORM.value, diff <= tol, tol - diff))
    if Check.BOUND_INEQUALITY in checks and row.bound is not None:
        slack = row.bound * (1 + BOUND_RTOL) - row.exact if math.isfinite(row.bound) else math.inf
        ok = slack >= 0
        note = "exact <= bound"
        if mc is not None and math.isfinite(mc.value):
            mc_slack = row.bound + MC_SIGMAS * mc.stderr - mc.value
            ok = ok and mc_slack >= 0
            slack = min(slack, mc_slack)
            note = "exact <= bound and oracle <= bound + 3 stderr"
        row.checks.append(CheckOutcome(Check.BOUND_INEQUALITY.value, ok, slack, note))
    elif Check.BOUND_INEQUALITY in checks and row.exact is not None:
        # the family has a bound, but not at these exponents
        row.checks.append(CheckOutcome(Check.BOUND_INEQUALITY.value, False, -math.inf,
                                       "bound undefined at these exponents"))
    if Check.DILATION_INVARIANCE in checks and mc is not None:
        t = 4.0
        scaled = FormSpec(form.family, form.n, form.alphas, form.lam, form.tau * t,
                          tuple(math.sqrt(t) * x for x in form.w))
        other = estimate(scaled, spec.budget, rng.child(1), spec.workers)
        out = _mc_agree(mc, other)
        row.checks.append(CheckOutcome(Check.DILATION_INVARIANCE.value, out.passed, out.slack,
                                       "tau -> 4 tau, w -> 2 w"))
    if Check.ROTATION_INVARIANCE in checks and mc is not None:
        R = _random_rotation(rng.child(2).generator(), form.n)
        turned = FormSpec(form.family, form.n, form.alphas, form.lam, form.tau,
                          tuple(R @ np.asarray(form.w)))
        other = estimate(turned, spec.budget, rng.child(3), spec.workers)
        out = _mc_agree(mc, other)
        row.checks.append(CheckOutcome(Check.ROTATION_INVARIANCE.value, out.passed, out.slack,
                                       "w -> R w, R a random rotation"))


def _evaluate(form: FormSpec, spec: SweepSpec, index: int) -> PointRow:
    rng = RngStream(spec.seed, index)
    row = PointRow(form.family.value, form.n, form.alphas, form.lam, form.tau, form.w_norm, None, None, None)
    try:
        row.exact = closed_form_value(form)
        rep = closed_form_bound(form)
        if rep is not None:
            row.bound = rep.upper_bound
        row.mc = estimate(form, spec.budget, rng, spec.workers)
        _point_checks(form, row, spec.checks, spec, rng)
    except HyperconvError as exc:
        if isinstance(exc, StructureError):
            raise
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def _sup_finite(rows: list[PointRow], spec: SweepSpec, start_index: int) -> tuple[CheckOutcome, list[PointRow]]:
    """Stable grid sup: no divergence anywhere, and refining near the argmax moves it < 10%."""
    bad = [r for r in rows if r.error or r.flagged or not math.isfinite(r.value)]
    if bad:
        where = ", ".join(f"|w|={r.w_norm:g}" for r in bad)
        return CheckOutcome(Check.SUP_FINITE.value, False, -math.inf, f"divergence suspected at {where}"), []
    ws = sorted({r.w_norm for r in rows})
    by_w = {r.w_norm: r for r in rows}
    top = max(rows, key=lambda r: r.value)
    i = ws.index(top.w_norm)
    extra_w = []
    for j in (i - 1, i + 1):
        if 0 <= j < len(ws):
            a, b = ws[min(i, j)], ws[max(i, j)]
            extra_w.append(math.sqrt(a * b) if a > 0 else b / 2)
    extra = []
    base = by_w[top.w_norm]
    for k, wn in enumerate(extra_w):
        form = FormSpec(spec.family, base.n, base.alphas, base.lam, spec.tau, axis_vector(base.n, wn))
        extra.append(_evaluate(form, spec, start_index + k))
    if any(r.error or r.flagged or not math.isfinite(r.value) for r in extra):
        return CheckOutcome(Check.SUP_FINITE.value, False, -math.inf, "divergence suspected after refinement"), extra
    new_sup = max([top.value] + [r.value for r in extra])
    change = (new_sup - top.value) / top.value if top.value > 0 else 0.0
    return CheckOutcome(Check.SUP_FINITE.value, change <= SUP_STABILITY, SUP_STABILITY - change,
                        f"{SUP_LABEL} {top.value:.6g} at |w|={top.w_norm:g}; refined {new_sup:.6g}"), extra


class LogFit(NamedTuple):
    ratio: float
    residual: float
    passed: bool


def fit_log_divergence(
    values: Iterable[tuple[float, float]],
    band: tuple[float, float] = LOG_FIT_BAND,
    max_residual: float = LOG_FIT_MAX_RESIDUAL,
) -> LogFit:
    """Fit Lambda_2 values near the unit sphere to c * (-ln(sqrt(1 - beta) / 2)).

    Parameters
    ----------
    values : iterable of (w_norm, value)
        At least 4 points with 0.9 < |w| < 0.999 and finite values.

    Returns
    -------
    LogFit
        ``ratio`` is the least-squares c (a line through the origin),
        ``residual`` the RMS misfit relative to the mean value. ``passed``
        needs c inside ``band`` and a residual below ``max_residual``; the
        residual test is what rejects data with no logarithmic growth.
    """
    pts = list(values)
    if len(pts) < 4:
        raise DomainError(f"fit_log_divergence needs at least 4 points, got {len(pts)}")
    x, y = [], []
    for wn, val in pts:
        if not (0.9 < wn < 0.999):
            raise DomainError(f"w_norm must lie in (0.9, 0.999), got {wn!r}")
        if not math.isfinite(val):
            raise DomainError(f"value at |w|={wn!r} is not finite")
        x.append(lambda2_log_asymptote(wn))
        y.append(val)
    x, y = np.array(x), np.array(y)
    ratio = float(x @ y / (x @ x))
    scale = abs(float(y.mean()))
    residual = float(np.sqrt(np.mean((y - ratio * x) ** 2)) / scale) if scale > 0 else math.inf
    return LogFit(ratio, residual, band[0] <= ratio <= band[1] and residual <= max_residual)


def _log_check(rows: list[PointRow]) -> CheckOutcome:
    pts = [(r.w_norm, r.exact) for r in rows if r.exact is not None and 0.9 < r.w_norm < 0.999]
    try:
        fit = fit_log_divergence(pts)
    except DomainError as exc:
        return CheckOutcome(Check.LOG_ASYMPTOTE.value, False, -math.inf, str(exc))
    lo, hi = LOG_FIT_BAND
    slack = min(fit.ratio - lo, hi - fit.ratio, LOG_FIT_MAX_RESIDUAL - fit.residual)
    return CheckOutcome(Check.LOG_ASYMPTOTE.value, fit.passed, slack,
                        f"ratio {fit.ratio:.6g}, residual {fit.residual:.3g}")


def provenance(spec: SweepSpec) -> dict:
    from . import __version__

    return {
        "seed": spec.seed,
        "budget": int(spec.budget),
        "workers": spec.workers,
        "version": __version__,
        "numpy": np.__version__,
    }


def run_sweep(spec: SweepSpec) -> SweepReport:
    """Evaluate every grid point and every requested check.

    Point errors (e.g. a DomainError from an inadmissible bound) are stored
    on the row and the sweep carries on; structural errors abort.
    Point i draws from RngStream(seed, i), so reports are reproducible.
    """
    forms = spec.forms()
    rows = [_evaluate(f, spec, i) for i, f in enumerate(forms)]
    sweep_checks: list[CheckOutcome] = []
    next_index = len(forms)
    if Check.SUP_FINITE in spec.checks:
        # one sup per exponent combination
        groups: dict[tuple, list[PointRow]] = {}
        for r in rows:
            groups.setdefault((r.n, r.alphas, r.lam), []).append(r)
        for key, grp in groups.items():
            out, extra = _sup_finite(grp, spec, next_index)
            next_index += 2
            label = f"n={key[0]} alphas={list(key[1])} lambda={key[2]}"
            sweep_checks.append(CheckOutcome(out.check, out.passed, out.slack, f"{label}: {out.note}"))
            rows.extend(extra)
    if Check.LOG_ASYMPTOTE in spec.checks:
        if spec.family is not Family.LAMBDA_N or spec.ns != (2,):
            raise StructureError("LogAsymptote applies to LambdaN with n = 2 only")
        sweep_checks.append(_log_check(rows))
    if Check.REDUCTION_INEQUALITY in spec.checks:
        for n in spec.ns:
            for c in check_reduction_chain(n, spec.w_norms, spec.budget, spec.seed, spec.workers):
                sweep_checks.append(CheckOutcome(Check.REDUCTION_INEQUALITY.value, c.passed, c.slack,
                                                 f"{c.label}: {c.note}"))
    return SweepReport(spec, rows, sweep_checks, provenance(spec))


@dataclass(frozen=True)
class ChainRow:
    """lhs <= constant * rhs (or lhs = rhs) with MC slack."""

    label: str
    lhs: float
    lhs_stderr: float
    rhs: float
    rhs_stderr: float
    constant: float
    passed: bool
    slack: float
    note: str = ""


def _grid_sup(family: Family, n: int, grid: Sequence[float], budget: int, seed: int, workers: int):
    spec = SweepSpec(family, (n,), w_norms=tuple(grid), budget=budget, seed=seed, checks=(), workers=workers)
    rep = run_sweep(spec)
    top = max(rep.rows, key=lambda r: _sup_key(r.value))
    flagged = [r.w_norm for r in rep.rows if r.flagged]
    return top, rep.rows, flagged


def sup_inequality(label: str, lhs: PointRow, rhs: PointRow, c: float, flagged: list[float]) -> ChainRow:
    a, sa = lhs.mc.value, lhs.mc.stderr
    b, sb = rhs.mc.value, rhs.mc.stderr
    if not (math.isfinite(a) and math.isfinite(b)):
        return ChainRow(label, a, sa, b, sb, c, False, -math.inf, "non-finite grid sup")
    slack = c * b + MC_SIGMAS * math.hypot(sa, c * sb) - a
    note = f"grid sups at |w|={lhs.w_norm:g} and |w|={rhs.w_norm:g} (lower bounds on the true sups)"
    if flagged:
        note += f"; heavy tails flagged at |w| in {flagged}"
    return ChainRow(label, a, sa, b, sb, c, slack >= 0, slack, note)


def check_reduction_chain(
    n: int,
    grid: Sequence[float] = DEFAULT_W_GRID,
    budget: int = 100_000,
    seed: int = 42,
    workers: int = 1,
) -> list[ChainRow]:
    """Check the dimension-reduction chain on grid sups.

    For n = 3: Lambda_3 = Delta_3 pointwise (independent streams). For n >= 4:
    sup Lambda_n <= riesz_chain_constant(n) * sup Delta_n. For every n:
    sup Delta_n <= delta_n_reduction_constant(n) * sup Delta_2. Grid sups
    stand in for the true sups, which makes (i) weaker than the statement it
    tests: both sides are lower bounds.
    """
    if n not in (3, 4, 5):
        raise DomainError(f"check_reduction_chain supports n in {{3, 4, 5}}, got {n!r}")
    out: list[ChainRow] = []
    d_top, d_rows, d_flag = _grid_sup(Family.DELTA_N, n, grid, budget, seed + 1, workers)
    l_top, l_rows, l_flag = _grid_sup(Family.LAMBDA_N, n, grid, budget, seed + 2, workers)
    if n == 3:
        for lr, dr in zip(l_rows, d_rows):
            tol = MC_SIGMAS * math.hypot(lr.mc.stderr, dr.mc.stderr)
            diff = abs(lr.mc.value - dr.mc.value)
            out.append(ChainRow(f"Lambda_3 = Delta_3 at |w|={lr.w_norm:g}", lr.mc.value, lr.mc.stderr,
                                dr.mc.value, dr.mc.stderr, 1.0, diff <= tol, tol - diff))
    else:
        c = riesz_chain_constant(n)
        out.append(sup_inequality(f"sup Lambda_{n} <= {c:.6g} sup Delta_{n}", l_top, d_top, c, l_flag + d_flag))
    two_top, _, two_flag = _grid_sup(Family.DELTA_N, 2, grid, budget, seed + 3, workers)
    c2 = delta_n_reduction_constant(n)
    out.append(sup_inequality(f"sup Delta_{n} <= {c2:.6g} sup Delta_2", d_top, two_top, c2, d_flag + two_flag))
    return out


CSV_COLUMNS = ["family", "n", "alpha", "lambda", "tau", "w_norm", "exact", "bound",
               "mc_value", "mc_stderr", "n_samples", "check", "pass", "slack"]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def report_csv_rows(report: SweepReport) -> list[list[str]]:
    """One line per (point, check); points without checks get one line with an empty check."""
    lines = []
    for r in report.rows:
        base = [
            r.family, r.n, ";".join(repr(a) for a in r.alphas), r.lam, r.tau, r.w_norm, r.exact, r.bound,
            None if r.mc is None else r.mc.value,
            None if r.mc is None else r.mc.stderr,
            None if r.mc is None else r.mc.n_samples,
        ]
        checks = r.checks or [CheckOutcome("error" if r.error else "", not r.error, math.nan, r.error)]
        for c in checks:
            lines.append([_fmt(x) for x in base + [c.check, c.passed, c.slack]])
    for c in report.sweep_checks:
        lines.append([_fmt(x) for x in [report.spec.family.value] + [None] * 10 + [c.check, c.passed, c.slack]])
    return lines


def write_report(report: SweepReport, out_dir: str | Path, stem: str = "sweep") -> dict[str, Path]:
    """Write ``<stem>.csv``, ``<stem>.json`` and ``manifest.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"csv": out / f"{stem}.csv", "json": out / f"{stem}.json", "manifest": out / "manifest.json"}
    with open(paths["csv"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        w.writerows(report_csv_rows(report))
    paths["json"].write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    manifest = dict(report.provenance)
    manifest["files"] = [paths["csv"].name, paths["json"].name]
    paths["manifest"].write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return paths


def load_presets() -> dict:
    """Named sweep bundles from the packaged ``presets.json``."""
    text = resources.files("hyperconv").joinpath("presets.json").read_text()
    data = json.loads(text)
    if data.get("schema") != 1 or "presets" not in data:
        raise StructureError("presets.json: expected schema 1 with a 'presets' table")
    return data["presets"]


def preset_spec(
    name: str,
    family: Family,
    n: int,
    alphas: tuple[float, ...] = (),
    lam: float | None = None,
    seed: int = 42,
    workers: int = 1,
    budget: int | None = None,
) -> SweepSpec:
    presets = load_presets()
    if name not in presets:
        raise StructureError(f"unknown preset {name!r}; known: {sorted(presets)}")
    p = presets[name]
    grid = p.get("w_norms", "default")
    w_norms = DEFAULT_W_GRID if grid == "default" else tuple(grid)
    fam = Family(family)
    checks = p.get("checks", {}).get(fam.value, p.get("checks", {}).get("*", ["SupFinite"]))
    return SweepSpec(fam, (n,), (tuple(alphas),), (lam,), w_norms,
                     int(budget if budget is not None else p["budget"]), seed, tuple(checks), workers)
