"""Monte-Carlo evaluation of the families straight from their definitions.

Both deltas are resolved analytically. The linear delta fixes the closing
factor (the one carrying the negative sign in the quadric); the quadric delta
then becomes linear in one remaining "pivot" factor, which confines the pivot
to a hyperplane. Every other factor is importance sampled with a radial
proposal whose density near the origin is proportional to |x|^-a, so the
Riesz singularities cancel in the weights. Inside the hyperplane the radius
is drawn from a piecewise power-law envelope (see ``_pivot``), which keeps
those weights bounded as well.

Kernels (no linear delta) are handled by sampling the sum u = sum x_k from a
defensive mixture centred on w, v and 0 and taking one inner sample of the
delta-resolved integral at u.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, StructureError
from ._pivot import pivot_weights
from .forms import Family, FormSpec, classify, homogeneity_power
from .specialfun import ln_beta, ln_sphere_area, sphere_area

CHUNK = 1 << 17
TAIL_QUANTILE = 1e-3
TAIL_SHARE_LIMIT = 0.5
DEGENERATE_EPS = 1e-8
_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class RngStream:
    """Seeded, splittable stream; every (seed, stream_id, worker) is independent."""

    seed: int
    stream_id: int = 0

    def generator(self, worker: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id, worker))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id * 100_003 + index + 1)


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    n_samples: int
    n_live: int
    proposal_tag: str
    divergence_suspected: bool = False
    tail_share: float = 0.0
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "stderr": self.stderr,
            "n_samples": self.n_samples,
            "n_live": self.n_live,
            "proposal_tag": self.proposal_tag,
            "divergence_suspected": self.divergence_suspected,
            "tail_share": self.tail_share,
        }


@dataclass(frozen=True)
class DeltaResolution:
    pivot_radius: float
    jacobian: float
    branch: str  # "PositiveRoot" or "NoRoot"

    @property
    def has_root(self) -> bool:
        return self.branch == "PositiveRoot"


def resolve_quadric_delta(tau: float, S: float, v: Sequence[float], omega: Sequence[float]) -> DeltaResolution:
    """Root in rho of tau + S + rho^2 - |v - rho omega|^2 along the ray rho * omega.

    The argument equals tau + S - |v|^2 + 2 rho (v . omega), so the root is
    rho* = (|v|^2 - S - tau) / (2 v . omega) with Jacobian 1 / (2 |v . omega|).
    """
    v = np.asarray(v, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if abs(float(omega @ omega) - 1.0) > 1e-9:
        raise DomainError("omega must be a unit vector")
    vv = float(v @ v)
    num = vv - S - tau
    vw = float(v @ omega)
    # a numerator within rounding of zero is the measure-zero surface |v|^2 = S + tau
    if vw == 0.0 or abs(num) <= 8 * _EPS * (vv + S + tau) or (num > 0) != (vw > 0):
        return DeltaResolution(0.0, 0.0, "NoRoot")
    return DeltaResolution(num / (2.0 * vw), 1.0 / (2.0 * abs(vw)), "PositiveRoot")


@dataclass(frozen=True)
class _Layout:
    """Which factor is fixed by which delta, and how each free factor is sampled."""

    n: int
    exponents: tuple[float, ...]
    pivot: int
    closing: int
    free: tuple[int, ...]

    @property
    def a_pivot(self) -> float:
        return self.exponents[self.pivot]

    @property
    def a_closing(self) -> float:
        return self.exponents[self.closing]

    def tail_parameter(self, k: int) -> float:
        # decay of the resolved pivot/closing pair as a free factor grows
        inner = self.a_pivot + self.a_closing + 2 - self.n
        return min(max(self.exponents[k] + inner - self.n, 0.5), 4.0)


def _layout(spec: FormSpec) -> _Layout:
    n, fam = spec.n, spec.family
    a = spec.factor_exponents()
    if fam in (Family.THETA_ALPHA, Family.THETA_ALPHA_LAMBDA, Family.KERNEL_H):
        return _Layout(n, a, pivot=0, closing=1, free=())
    if fam in (Family.DELTA_N, Family.KERNEL_J):
        # factors (z, x, y); y carries the minus sign
        return _Layout(n, a, pivot=0, closing=2, free=(1,))
    pivot = n - 2
    if fam is Family.LAMBDA_ALPHA_LAMBDA:
        adm = classify(spec)
        if adm.pivot is not None:
            pivot = adm.pivot
    free = tuple(k for k in range(n - 1) if k != pivot)
    return _Layout(n, a, pivot=pivot, closing=n - 1, free=free)


def _unit_vectors(gen: np.random.Generator, N: int, n: int) -> np.ndarray:
    g = gen.standard_normal((N, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _sample_free(layout: _Layout, gen, N: int, proposal: str, scale=1.0):
    """Free factors and the log of |x|^-a / q(x) for each.

    ``scale`` (scalar or per-sample) stretches the Beta-prime radii; the mass
    of the integrand sits at |x| ~ sqrt(tau + |w|^2).
    """
    n = layout.n
    xs = []
    log_w = np.zeros(N)
    S = np.zeros(N)
    lsig = ln_sphere_area(n - 1)
    for k in layout.free:
        a = layout.exponents[k]
        if not a < n:
            raise DomainError(f"factor exponent {a} >= n={n} has no radial proposal")
        if proposal == "gamma":
            r = gen.gamma(n - a, 1.0, N)
            log_w += lsig + math.lgamma(n - a) + r
        else:
            nu = layout.tail_parameter(k)
            X = np.minimum(gen.beta(n - a, nu, N), 1.0 - 1e-16)
            ratio = X / (1.0 - X)
            r = scale * ratio
            log_w += lsig + ln_beta(n - a, nu) + (n - a) * np.log(scale) + (n - a + nu) * np.log1p(ratio)
        x = r[:, None] * _unit_vectors(gen, N, n)
        xs.append(x)
        S += r * r
    return xs, log_w, S


def _delta_weights(layout: _Layout, tau: float, w: np.ndarray, N: int, gen, points: bool = False):
    """Weights (without the |w|^power prefactor) of N hyperplane-resolved samples."""
    n = layout.n
    w2 = np.sum(np.asarray(w) ** 2, axis=-1)
    xs, log_w, S = _sample_free(layout, gen, N, "beta-prime", np.sqrt(tau + w2))
    v = np.broadcast_to(w, (N, n)).copy()
    for x in xs:
        v -= x
    vnorm = np.linalg.norm(v, axis=1)
    T = tau + S
    u_seg = gen.random(N)
    u_rad = gen.random(N)
    inner, rad = pivot_weights(vnorm, T, u_seg, u_rad, layout.a_pivot, layout.a_closing, n - 1)
    with np.errstate(over="ignore", invalid="ignore"):
        weights = np.exp(log_w) * sphere_area(n - 2) * inner
    if not points:
        return weights, None
    # rebuild every factor: pivot = h v_hat + r t_hat with t_hat orthogonal to v
    vs = np.where(vnorm > 0, vnorm, 1.0)
    vhat = v / vs[:, None]
    h = (vnorm**2 - T) / (2.0 * vs)
    t = gen.standard_normal((N, n))
    t -= np.sum(t * vhat, axis=1, keepdims=True) * vhat
    t /= np.linalg.norm(t, axis=1, keepdims=True)
    pivot = h[:, None] * vhat + rad[:, None] * t
    factors: list[np.ndarray | None] = [None] * len(layout.exponents)
    for k, x in zip(layout.free, xs):
        factors[k] = x
    factors[layout.pivot] = pivot
    factors[layout.closing] = v - pivot
    return weights, factors


def _radial_root_weights(layout: _Layout, tau: float, w: np.ndarray, N: int, gen):
    """Weights from the ray parametrisation: uniform omega, root in the pivot radius."""
    n = layout.n
    xs, log_w, S = _sample_free(layout, gen, N, "gamma")
    v = np.broadcast_to(w, (N, n)).copy()
    for x in xs:
        v -= x
    omega = _unit_vectors(gen, N, n)
    vv = np.sum(v * v, axis=1)
    vw = np.sum(v * omega, axis=1)
    num = vv - S - tau
    ok = (num * vw > 0) & (np.abs(vw) >= DEGENERATE_EPS * np.sqrt(vv))
    vw_safe = np.where(ok, vw, 1.0)
    rho = np.where(ok, num / (2.0 * vw_safe), 1.0)
    closing = v - rho[:, None] * omega
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        body = (
            rho ** (n - 1 - layout.a_pivot)
            * np.linalg.norm(closing, axis=1) ** (-layout.a_closing)
            / (2.0 * np.abs(vw_safe))
        )
        weights = np.where(ok, np.exp(log_w) * sphere_area(n - 1) * body, 0.0)
    return weights, ok


class _Accumulator:
    """Chunk-mergeable running moments plus the largest weights."""

    def __init__(self, keep: int):
        self.keep = keep
        self.count = 0
        self.live = 0
        self.n_inf = 0
        self.mean = 0.0
        self.m2 = 0.0
        self.top = np.empty(0)

    def add(self, w: np.ndarray, live: np.ndarray | None = None):
        self.count += w.size
        self.live += int(np.count_nonzero(w > 0) if live is None else np.count_nonzero(live))
        inf = ~np.isfinite(w)
        if inf.any():
            self.n_inf += int(inf.sum())
            w = np.where(inf, 0.0, w)
        nb = w.size
        mb = float(w.mean())
        m2b = float(((w - mb) ** 2).sum())
        na = self.count - nb
        delta = mb - self.mean
        self.mean += delta * nb / self.count
        self.m2 += m2b + delta * delta * na * nb / self.count
        self._keep_top(w)

    def _keep_top(self, w: np.ndarray):
        merged = np.concatenate([self.top, w])
        if merged.size > self.keep:
            merged = np.partition(merged, merged.size - self.keep)[-self.keep:]
        self.top = merged

    def merge(self, other: "_Accumulator"):
        if other.count == 0:
            return
        n = self.count + other.count
        delta = other.mean - self.mean
        self.m2 += other.m2 + delta * delta * self.count * other.count / n
        self.mean += delta * other.count / n
        self.count = n
        self.live += other.live
        self.n_inf += other.n_inf
        self._keep_top(other.top)


def _run(
    draw: Callable[[np.random.Generator, int], tuple[np.ndarray, np.ndarray | None]],
    budget: int,
    rng: RngStream,
    workers: int,
    tag: str,
) -> McEstimate:
    if int(budget) != budget or budget <= 0:
        raise DomainError(f"budget must be a positive integer, got {budget!r}")
    budget = int(budget)
    workers = max(1, min(int(workers), budget))
    keep = max(1, math.ceil(TAIL_QUANTILE * budget))
    shares = [budget // workers + (i < budget % workers) for i in range(workers)]
    t0 = time.perf_counter()

    def work(i: int) -> _Accumulator:
        gen = rng.generator(i)
        acc = _Accumulator(keep)
        left = shares[i]
        while left > 0:
            m = min(CHUNK, left)
            w, live = draw(gen, m)
            acc.add(w, live)
            left -= m
        return acc

    if workers == 1:
        parts = [work(0)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, range(workers)))
    total = _Accumulator(keep)
    for p in parts:
        total.merge(p)
    elapsed = time.perf_counter() - t0

    if total.n_inf:
        return McEstimate(math.inf, math.inf, budget, total.live, tag, True, 1.0, elapsed)
    mean = total.mean
    var = total.m2 / (budget - 1) if budget > 1 else 0.0
    stderr = math.sqrt(max(var, 0.0) / budget)
    share = float(total.top.sum()) / (mean * budget) if mean > 0 else 0.0
    return McEstimate(mean, stderr, budget, total.live, tag, share > TAIL_SHARE_LIMIT, share, elapsed)


def estimate(
    spec: FormSpec,
    budget: int,
    rng: RngStream,
    workers: int = 1,
    proposal: str = "hyperplane",
) -> McEstimate:
    """Importance-sampling estimate of the integral described by ``spec``.

    Parameters
    ----------
    spec : FormSpec
        Any family; admissibility is not required, so divergent regions can be
        probed. Kernel families are forwarded to :func:`estimate_kernel`.
    budget : int
        Total number of samples, split evenly over ``workers`` streams.
    rng : RngStream
        The result is a deterministic function of (rng, budget, workers).
    proposal : {"hyperplane", "radial"}
        ``"hyperplane"`` resolves the quadric delta across the hyperplane it
        defines for the pivot factor. ``"radial"`` resolves it along a uniform
        ray with Gamma(n - a, 1) radii for the free factors; it is kept as an
        independent cross-check and has infinite variance for some exponents.
    """
    if spec.family.is_kernel:
        return estimate_kernel(spec, budget, rng, workers)
    layout = _layout(spec)
    n = spec.n
    w = np.asarray(spec.w, dtype=float)
    wn = float(np.linalg.norm(w))
    power = homogeneity_power(spec)
    if wn == 0.0:
        prefactor = 0.0 if power > 0 else (1.0 if power == 0 else math.inf)
    else:
        prefactor = wn**power
    if proposal == "hyperplane":
        def draw(gen, m):
            wts, _ = _delta_weights(layout, spec.tau, w, m, gen)
            return prefactor * wts if prefactor else np.zeros(m), None
    elif proposal == "radial":
        def draw(gen, m):
            wts, ok = _radial_root_weights(layout, spec.tau, w, m, gen)
            return prefactor * wts if prefactor else np.zeros(m), ok
    else:
        raise StructureError(f"unknown proposal {proposal!r}")
    return _run(draw, budget, rng, workers, f"{proposal}/{spec.family.value}/n={n}")


def sample_support(spec: FormSpec, n_samples: int, rng: RngStream):
    """Draw resolved samples and return (weights, list of factor arrays) for inspection."""
    if spec.family.is_kernel:
        raise StructureError("sample_support applies to the delta-constrained families")
    layout = _layout(spec)
    return _delta_weights(layout, spec.tau, np.asarray(spec.w, dtype=float), n_samples, rng.generator(), True)


_KERNEL_INNER = {
    Family.KERNEL_H: Family.THETA_ALPHA,
    Family.KERNEL_K: Family.LAMBDA_N,
    Family.KERNEL_K_ALPHA: Family.LAMBDA_N_ALPHA,
    Family.KERNEL_J: Family.DELTA_N,
}


class _ShiftMixture:
    """Equal mixture of radial power-law densities centred at w, v and 0.

    The components at w and v behave like |u - c|^-gamma near their centre and
    every component decays like |u|^-(n+1).
    """

    def __init__(self, n: int, gamma: float, centres: np.ndarray):
        self.n = n
        self.centres = centres  # (3, n) or (N, 3, n)
        self.shapes = np.array([n - gamma, n - gamma, float(n)])
        self.lsig = ln_sphere_area(n - 1)

    def sample(self, gen, N: int) -> np.ndarray:
        comp = gen.integers(0, 3, N)
        shape = self.shapes[comp]
        X = np.minimum(gen.random(N) ** (1.0 / shape), 1.0 - 1e-16)
        d = X / (1.0 - X)
        centre = self.centres[comp] if self.centres.ndim == 2 else self.centres[np.arange(N), comp]
        return centre + d[:, None] * _unit_vectors(gen, N, self.n)

    def log_density(self, u: np.ndarray) -> np.ndarray:
        n = self.n
        if self.centres.ndim == 2:
            d = np.linalg.norm(u[:, None, :] - self.centres[None, :, :], axis=2)
        else:
            d = np.linalg.norm(u[:, None, :] - self.centres, axis=2)
        s = self.shapes[None, :]
        with np.errstate(divide="ignore"):
            lq = np.log(s) + (s - n) * np.log(d) - (s + 1) * np.log1p(d) - self.lsig
        return np.logaddexp.reduce(lq, axis=1) - math.log(3.0)


def _kernel_draw(spec: FormSpec, wv: Callable[[np.random.Generator, int], tuple[np.ndarray, np.ndarray]]):
    """Sampler for T(w, v) where (w, v) come from ``wv`` (fixed or random pairs)."""
    n = spec.n
    gamma = spec.shift_exponent()
    inner_spec = FormSpec(
        _KERNEL_INNER[spec.family], n, spec.alphas, None, 1.0, spec.w,
    )
    layout = _layout(inner_spec)

    def draw(gen, m):
        w, v = wv(gen, m)
        centres = np.stack([w, v, np.zeros_like(w)], axis=-2)
        mix = _ShiftMixture(n, gamma, centres)
        u = mix.sample(gen, m)
        inner, _ = _delta_weights(layout, 1.0, u, m, gen)
        dw = np.linalg.norm(w - u, axis=-1)
        dv = np.linalg.norm(v - u, axis=-1)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            lw = -gamma * (np.log(dw) + np.log(dv)) - mix.log_density(u)
            out = np.exp(lw) * inner
        return np.where(inner > 0, out, 0.0), None

    return draw


def estimate_kernel(spec: FormSpec, budget: int, rng: RngStream, workers: int = 1) -> McEstimate:
    """Estimate a kernel value T(w, v) for the KernelH/K/KAlpha/J families.

    Writing u for the sum of all factors, T(w, v) is the integral over u of
    |w - u|^-g |v - u|^-g times the delta-constrained integral at u (tau = 1).
    """
    if not spec.family.is_kernel:
        raise StructureError(f"{spec.family.value} is not a kernel family")
    n = spec.n
    gamma = spec.shift_exponent()
    w = np.asarray(spec.w, dtype=float)
    v = np.asarray(spec.v, dtype=float)
    tag = f"mixture/{spec.family.value}/n={n}"
    # local integrability of the shifted factors is decidable up front
    if gamma >= n or (np.array_equal(w, v) and 2 * gamma >= n):
        return McEstimate(math.inf, math.inf, int(budget), 0, tag, True, 1.0, 0.0)
    draw = _kernel_draw(spec, lambda gen, m: (w, v))
    return _run(draw, budget, rng, workers, tag)


@dataclass(frozen=True)
class GaussianProfile:
    """f(x) = exp(-|x|^2 / (2 width^2))."""

    width: float

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.exp(-np.sum(x * x, axis=-1) / (2.0 * self.width**2))

    def norm_sq(self, n: int) -> float:
        return (math.pi * self.width**2) ** (n / 2)


@dataclass(frozen=True)
class Grid:
    """Cube [-half_width, half_width]^n split into cells^n equal cells."""

    half_width: float
    cells: int

    def refined(self) -> "Grid":
        return Grid(self.half_width, 2 * self.cells)

    def centres(self, n: int) -> np.ndarray:
        h = 2 * self.half_width / self.cells
        axis = -self.half_width + h * (np.arange(self.cells) + 0.5)
        mesh = np.meshgrid(*([axis] * n), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def cell_volume(self, n: int) -> float:
        return (2 * self.half_width / self.cells) ** n


def quadratic_form_probe(
    spec: FormSpec,
    profile: Callable[[np.ndarray], np.ndarray],
    grid: Grid,
    budget: int,
    rng: RngStream,
    workers: int = 1,
) -> McEstimate:
    """Estimate <f, T f> / ||f||_2^2 for the kernel family of ``spec``.

    Pairs (w, v) are drawn cell by cell on ``grid`` with cell probabilities
    proportional to f at the cell centres and jittered uniformly inside each
    cell; the kernel at each pair is estimated as in :func:`estimate_kernel`.
    ``spec.w`` and ``spec.v`` are ignored. The returned McEstimate carries the
    ratio as its value.
    """
    if not spec.family.is_kernel:
        raise StructureError(f"{spec.family.value} is not a kernel family")
    n = spec.n
    if 2 * spec.shift_exponent() >= 2 * n:
        raise DomainError("kernel is not locally integrable in (w, v)")
    centres = grid.centres(n)
    fc = np.asarray(profile(centres), dtype=float)
    if not np.any(fc > 0):
        raise DomainError("test function vanishes on the grid; the ratio is 0/0")
    if np.any(fc < 0):
        raise DomainError("test function must be nonnegative")
    prob = fc + 1e-9 * fc.max()
    prob /= prob.sum()
    cdf = np.cumsum(prob)
    vol = grid.cell_volume(n)
    h = 2 * grid.half_width / grid.cells
    norm_sq = profile.norm_sq(n) if hasattr(profile, "norm_sq") else float((fc**2).sum() * vol)

    def point(gen, m):
        idx = np.minimum(np.searchsorted(cdf, gen.random(m), side="right"), prob.size - 1)
        x = centres[idx] + h * (gen.random((m, n)) - 0.5)
        return x, np.asarray(profile(x), dtype=float) * vol / prob[idx]

    state = {}

    def wv(gen, m):
        w, fw = point(gen, m)
        v, fv = point(gen, m)
        state["f"] = fw * fv
        return w, v

    kernel = _kernel_draw(spec, wv)

    def draw(gen, m):
        t, _ = kernel(gen, m)
        return t * state["f"] / norm_sq, None

    if workers > 1:
        # shared scratch state is per call; keep the probe single-threaded
        workers = 1
    return _run(draw, budget, rng, workers, f"probe/{spec.family.value}/n={n}")
