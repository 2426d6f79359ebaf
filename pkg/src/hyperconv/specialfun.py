"""Special functions: log-gamma, Beta, Gauss 2F1, complete elliptic K, sphere areas.

Extended reals are plain floats: finite values or ``math.inf``. A NaN is
never returned; it is raised as :class:`~hyperconv.errors.NumericalError`.
"""

from __future__ import annotations

import math

from .errors import DomainError, NumericalError

POSITIVE_INFINITY = math.inf

# k (or beta) this close to 1 is treated as exactly 1
UNIT_SNAP = 1e-12


def extended(x: float) -> float:
    """Validate an extended-real value (finite or +inf)."""
    if math.isnan(x):
        raise NumericalError("computation produced NaN")
    if x == -math.inf:
        raise NumericalError("computation produced -inf")
    return x


def ln_gamma(x: float) -> float:
    """Natural log of the Gamma function for ``x > 0``."""
    if not x > 0:
        raise DomainError(f"ln_gamma requires x > 0, got x={x!r}")
    return math.lgamma(x)


def beta_fn(a: float, b: float) -> float:
    """Euler Beta function B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)."""
    return math.exp(ln_beta(a, b))


def ln_beta(a: float, b: float) -> float:
    if not (a > 0 and b > 0):
        raise DomainError(f"beta_fn requires a > 0 and b > 0, got a={a!r}, b={b!r}")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _series_2f1(a: float, b: float, c: float, z: float) -> float:
    term = 1.0
    total = 1.0
    k = 0
    while True:
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        total += term
        k += 1
        if abs(term) <= 1e-17 * abs(total) or k > 20000:
            return total


def gauss_2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function F(a, b; c; z) in the Euler regime.

    Supported: ``c > b > 0`` and ``0 <= z < 1``. The power series is summed
    for ``z <= 1/2``; above that the Euler integral

        B(b, c-b) F(a, b; c; z) = int_0^1 u^(b-1) (1-u)^(c-b-1) (1-zu)^(-a) du

    is evaluated by singular quadrature. At ``z`` within ``UNIT_SNAP`` of 1 the
    Gauss summation value is returned, or ``inf`` when ``c - a - b <= 0``.
    """
    if not (c > b > 0):
        raise DomainError(f"gauss_2f1 requires c > b > 0, got b={b!r}, c={c!r}")
    if not (0.0 <= z <= 1.0):
        raise DomainError(f"gauss_2f1 requires 0 <= z < 1, got z={z!r}")
    if z >= 1.0 - UNIT_SNAP:
        if c - a - b <= 0:
            return POSITIVE_INFINITY
        # c - a > b > 0 here, so every Gamma argument is positive
        return math.exp(
            math.lgamma(c) + math.lgamma(c - a - b) - math.lgamma(c - a) - math.lgamma(c - b)
        )
    if z == 0.0:
        return 1.0
    if z <= 0.5:
        return extended(_series_2f1(a, b, c, z))

    from .quadrature import ReducedIntegrand, integrate_reduced

    val = integrate_reduced(ReducedIntegrand(1.0, b, c - b, a, z))
    return extended(val / beta_fn(b, c - b))


def agm(a: float, b: float) -> float:
    """Arithmetic-geometric mean of two nonnegative numbers."""
    if a < 0 or b < 0:
        raise DomainError("agm requires nonnegative arguments")
    if a == 0.0 or b == 0.0:
        return 0.0
    for _ in range(64):
        if abs(a - b) <= 1e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def elliptic_k(k: float) -> float:
    """Complete elliptic integral of the first kind K(k), modulus convention.

    Returns ``inf`` for ``k`` within ``UNIT_SNAP`` of 1.
    """
    if not (0.0 <= k <= 1.0):
        raise DomainError(f"elliptic_k requires 0 <= k <= 1, got k={k!r}")
    if k >= 1.0 - UNIT_SNAP:
        return POSITIVE_INFINITY
    return elliptic_k_complement(math.sqrt((1.0 - k) * (1.0 + k)))


def elliptic_k_complement(kprime: float) -> float:
    """K expressed through the complementary modulus k' = sqrt(1 - k^2).

    Near k = 1 the complement carries the information, so callers that know
    k' directly (e.g. from |1 - |w|^2| / (1 + |w|^2)) avoid cancellation.
    """
    if not (0.0 <= kprime <= 1.0):
        raise DomainError(f"complementary modulus must lie in [0, 1], got {kprime!r}")
    if kprime == 0.0:
        return POSITIVE_INFINITY
    return math.pi / (2.0 * agm(1.0, kprime))


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere S^d embedded in R^(d+1)."""
    if int(d) != d or d < 0:
        raise DomainError(f"sphere dimension must be a nonnegative integer, got d={d!r}")
    return 2.0 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


def ln_sphere_area(d: int) -> float:
    if int(d) != d or d < 0:
        raise DomainError(f"sphere dimension must be a nonnegative integer, got d={d!r}")
    return math.log(2.0) + 0.5 * (d + 1) * math.log(math.pi) - math.lgamma((d + 1) / 2)
