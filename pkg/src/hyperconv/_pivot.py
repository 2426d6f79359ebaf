"""NumPy implementation of the resolved-pivot kernel.

After the linear delta removes the closing factor, the quadric delta is
linear in the pivot factor p:

    tau + S + |p|^2 - |v - p|^2 = tau + S - |v|^2 + 2 v.p

so p lives on the hyperplane v.p = h |v|, h = (|v|^2 - T) / (2|v|), T = tau + S,
with delta Jacobian 1 / (2|v|). Writing p = h v/|v| + t, t in R^m (m = n - 1),
the two remaining factors depend on r = |t| only:

    (h^2 + r^2)^(-a_p/2) ((|v| - h)^2 + r^2)^(-a_n/2)

and r is drawn from the piecewise power law r^(m-1) max(A, r)^-a_p max(B, r)^-a_n
with A = |h|, B = |v| - h >= A. The ratio of the true radial integrand to
this envelope lies in [2^(-(a_p+a_n)/2), 1], so the weights are bounded.
"""

from __future__ import annotations

import numpy as np


def _log_segment_masses(A, B, a_p, a_n, m):
    k = m - a_p
    k2 = m - a_p - a_n
    with np.errstate(divide="ignore", invalid="ignore"):
        lA = np.log(A)
        lB = np.log(B)
        L = lB - lA
        lm1 = np.where(A > 0, k * lA - np.log(m) - a_n * lB, -np.inf)
        if k > 0:
            lm2 = k * lB + np.log(-np.expm1(-k * L)) - np.log(k)
        elif k < 0:
            lm2 = np.where(A > 0, k * lA + np.log(-np.expm1(k * L)) - np.log(-k), np.inf)
        else:
            lm2 = np.log(L)
        lm2 = lm2 - a_n * lB
        if k2 < 0:
            lm3 = k2 * lB - np.log(-k2)
        else:
            lm3 = np.full_like(B, np.inf)
    return lm1, lm2, lm3, k, k2, lA, lB, L


def pivot_weights(vnorm, T, u_seg, u_rad, a_p, a_n, m):
    """Per-sample inner weight and sampled in-plane radius.

    Parameters
    ----------
    vnorm, T : ndarray
        |v| and tau + S for every sample.
    u_seg, u_rad : ndarray
        Uniform variates on [0, 1) selecting the envelope segment and the
        radius within it.
    a_p, a_n : float
        Exponents of the pivot and closing factors.
    m : int
        Dimension of the hyperplane, n - 1.

    Returns
    -------
    weight : ndarray
        Z * ratio / (2 |v|), where Z is the envelope mass. ``inf`` where the
        radial integral diverges, 0 where |v| = 0 (no solution).
    radius : ndarray
        Sampled |t| (0 where the weight is not finite).
    """
    vnorm = np.asarray(vnorm, dtype=float)
    T = np.asarray(T, dtype=float)
    live = vnorm > 0
    vs = np.where(live, vnorm, 1.0)
    h = (vs * vs - T) / (2.0 * vs)
    A = np.abs(h)
    B = (vs * vs + T) / (2.0 * vs)

    lm1, lm2, lm3, k, k2, lA, lB, L = _log_segment_masses(A, B, a_p, a_n, m)
    with np.errstate(invalid="ignore", over="ignore"):
        lz = np.logaddexp(np.logaddexp(lm1, lm2), lm3)
        finite = np.isfinite(lz) & live
        lz_safe = np.where(finite, lz, 0.0)
        p1 = np.where(finite, np.exp(lm1 - lz_safe), 0.0)
        p2 = np.where(finite, np.exp(lm2 - lz_safe), 0.0)

    u = np.asarray(u_rad, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r1 = A * u ** (1.0 / m)
        if k > 0:
            r2 = B * np.exp(np.log(np.exp(-k * L) + u * (-np.expm1(-k * L))) / k)
        elif k < 0:
            r2 = A * np.exp(np.log(np.exp(k * L) + u * (-np.expm1(k * L))) / k)
        else:
            r2 = A * np.exp(u * L)
        r3 = B * (1.0 - u) ** (1.0 / k2) if k2 < 0 else np.full_like(B, np.inf)
    seg1 = u_seg < p1
    seg2 = (~seg1) & (u_seg < p1 + p2)
    r = np.where(seg1, r1, np.where(seg2, r2, r3))

    with np.errstate(divide="ignore", invalid="ignore"):
        qa = np.where(r >= A, A / r, r / A)
        qb = np.where(r >= B, B / r, r / B)
        ratio = (1.0 + qa * qa) ** (-0.5 * a_p) * (1.0 + qb * qb) ** (-0.5 * a_n)
        ratio = np.where(np.isfinite(ratio), ratio, 1.0)
        weight = np.exp(lz_safe) * ratio / (2.0 * vs)
    weight = np.where(finite, weight, np.where(live, np.inf, 0.0))
    r = np.where(finite, r, 0.0)
    return weight, r
