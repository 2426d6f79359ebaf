"""Adaptive quadrature on (0, 1) for integrands with power-law endpoint behaviour.

Endpoint singularities u^e (or (1-u)^e) are removed by the substitution
u = t^(1/(1+e)), which turns the panel next to the endpoint into a smooth
integrand. The transformed halves are then refined by a vectorised
Gauss-Kronrod (7, 15) scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AccuracyError, DomainError
from .specialfun import POSITIVE_INFINITY, UNIT_SNAP, extended, ln_beta

DEFAULT_RTOL = 1e-11
DEFAULT_MAX_PANELS = 2**20
_EPS = np.finfo(float).eps
_BELOW_ONE = np.nextafter(1.0, 0.0)

# Gauss-Kronrod 7-15 nodes on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss weights sit on the odd-indexed Kronrod nodes (1, 3, 5, 7 on each side)
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[[9, 11, 13]] = _WG[2::-1]
_GW[7] = _WG[3]


def _gk_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float,
    max_panels: int,
) -> tuple[float, float, int]:
    """Integrate vectorised ``f`` over [a, b] to absolute tolerance ``tol``."""
    lo = np.array([a])
    hi = np.array([b])
    width_total = b - a
    done = 0.0
    done_err = 0.0
    panels = 1
    while lo.size:
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        x = mid[:, None] + half[:, None] * _NODES[None, :]
        fx = f(x.ravel()).reshape(x.shape)
        k = half * (fx @ _KW)
        g = half * (fx @ _GW)
        err = np.abs(k - g)
        if not (np.all(np.isfinite(k)) and np.all(np.isfinite(err))):
            raise AccuracyError("integrand produced non-finite values inside (0, 1)")
        # a roundoff floor keeps tall narrow peaks from splitting forever
        ok = err <= np.maximum(tol * (hi - lo) / width_total, 64 * _EPS * np.abs(half * (np.abs(fx) @ _KW)))
        done += float(k[ok].sum())
        done_err += float(err[ok].sum())
        lo, hi = lo[~ok], hi[~ok]
        if lo.size:
            panels += lo.size
            if panels > max_panels:
                raise AccuracyError(
                    f"adaptive quadrature exceeded {max_panels} panels "
                    f"(unresolved error {float(err[~ok].sum()):.3e})"
                )
            m = 0.5 * (lo + hi)
            lo, hi = np.concatenate([lo, m]), np.concatenate([m, hi])
    return done, done_err, panels


def _integrate_halves(
    f_left: Callable[[np.ndarray], np.ndarray],
    f_right: Callable[[np.ndarray], np.ndarray],
    left: float,
    right: float,
    rtol: float,
    max_panels: int,
    scale_hint: float,
) -> float:
    """Integrate over (0, 1/2] with f_left(u) and over (0, 1/2] in v = 1-u with f_right(v)."""
    gl = 1.0 / (1.0 + left)
    gr = 1.0 / (1.0 + right)

    def tl(t):
        return gl * t ** (gl - 1.0) * f_left(t**gl)

    def tr(t):
        return gr * t ** (gr - 1.0) * f_right(t**gr)

    tol = rtol * scale_hint
    total = 0.0
    for _ in range(60):
        vl, el, _ = _gk_adaptive(tl, 0.0, 0.5 ** (1.0 / gl), 0.5 * tol, max_panels)
        vr, er, _ = _gk_adaptive(tr, 0.0, 0.5 ** (1.0 / gr), 0.5 * tol, max_panels)
        total = vl + vr
        if tol <= rtol * abs(total) * 1.0001 or total == 0.0:
            return total
        # scale hint was too large for a relative tolerance; tighten and repeat
        tol = rtol * abs(total)
    return total


def integrate_adaptive(
    g: Callable[..., np.ndarray],
    singular_exponents: tuple[float, float] = (0.0, 0.0),
    rtol: float = DEFAULT_RTOL,
    max_panels: int = DEFAULT_MAX_PANELS,
    complement: bool = False,
) -> float:
    """Integrate ``g`` over (0, 1).

    Parameters
    ----------
    g : callable
        Vectorised integrand, evaluated only at interior points. With
        ``complement=True`` it is called as ``g(u, 1 - u)`` where both
        arguments are accurate. Without it, points within rounding of u = 1
        are evaluated at the nearest representable u and rescaled by the
        declared right-endpoint power law, which is exact for integrands of
        the form h(u) (1-u)^right with h smooth.
    singular_exponents : (float, float)
        Declared power behaviour ``g ~ u^left`` at 0 and ``g ~ (1-u)^right`` at 1.
        Both must exceed -1.
    rtol : float
        Target relative error.
    max_panels : int
        Subdivision budget; exceeding it raises :class:`AccuracyError`.
    """
    left, right = singular_exponents
    if left <= -1 or right <= -1:
        raise DomainError(
            f"endpoint exponents must exceed -1 for integrability, got {singular_exponents!r}"
        )
    if complement:
        f_left = lambda u: g(u, 1.0 - u)  # noqa: E731
        f_right = lambda v: g(1.0 - v, v)  # noqa: E731
    else:
        f_left = g

        def f_right(v):
            # 1 - v rounds; evaluate at the representable point and carry the
            # declared power law over the rounding gap
            u = np.minimum(1.0 - v, _BELOW_ONE)
            vr = 1.0 - u
            return g(u) * (v / vr) ** right

    return _integrate_halves(f_left, f_right, left, right, rtol, max_panels, scale_hint=1.0)


@dataclass(frozen=True)
class ReducedIntegrand:
    """coefficient * u^(p-1) (1-u)^(q-1) (1-beta u)^(-s) on (0, 1).

    ``beta_complement`` optionally carries 1 - beta computed without
    cancellation; it is derived from ``beta`` when omitted.
    """

    coefficient: float
    p: float
    q: float
    s: float
    beta: float
    beta_complement: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.beta <= 1.0):
            raise DomainError(f"beta must lie in [0, 1], got {self.beta!r}")

    @property
    def one_minus_beta(self) -> float:
        if self.beta_complement is not None:
            return self.beta_complement
        return 1.0 - self.beta

    def converges(self) -> bool:
        if not (self.p > 0 and self.q > 0):
            return False
        if self.one_minus_beta <= UNIT_SNAP:
            return self.q - self.s > 0
        return True

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        v = 1.0 - u
        return self.coefficient * _reduced_body(self, u, v)


def _reduced_body(f: ReducedIntegrand, u, v):
    return u ** (f.p - 1.0) * v ** (f.q - 1.0) * (f.one_minus_beta + f.beta * v) ** (-f.s)


def integrate_reduced(
    f: ReducedIntegrand,
    rtol: float = DEFAULT_RTOL,
    max_panels: int = DEFAULT_MAX_PANELS,
) -> float:
    """Value of ``f`` integrated over (0, 1); ``inf`` when it diverges.

    The factor (1 - beta u) is evaluated as (1 - beta) + beta (1 - u) with
    both pieces computed directly, so nothing cancels near u = 1.
    """
    if f.coefficient == 0.0:
        return 0.0
    if not f.converges():
        return POSITIVE_INFINITY
    cb = f.one_minus_beta
    if cb <= UNIT_SNAP:
        return extended(f.coefficient * math.exp(ln_beta(f.p, f.q - f.s)))
    if f.beta == 0.0:
        return extended(f.coefficient * math.exp(ln_beta(f.p, f.q)))

    p, q, s, beta = f.p, f.q, f.s, f.beta

    def left(u):
        return u ** (p - 1.0) * (1.0 - u) ** (q - 1.0) * (cb + beta * (1.0 - u)) ** (-s)

    def right(v):
        return (1.0 - v) ** (p - 1.0) * v ** (q - 1.0) * (cb + beta * v) ** (-s)

    # B(p, q) bounds the s = 0 integral and sets the scale for the first pass
    hint = math.exp(ln_beta(p, q))
    val = _integrate_halves(left, right, p - 1.0, q - 1.0, rtol, max_panels, hint)
    return extended(f.coefficient * val)
