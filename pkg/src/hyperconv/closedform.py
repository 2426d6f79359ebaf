"""Exact one-dimensional reductions and Gamma-ratio bounds.

All values are at tau = 1 (every family is dilation invariant). Gamma-ratio
constants are assembled in log space and exponentiated once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .quadrature import ReducedIntegrand, integrate_reduced
from .specialfun import (
    POSITIVE_INFINITY,
    elliptic_k_complement,
    extended,
    ln_gamma,
    sphere_area,
)


def beta_of(w_norm: float) -> float:
    """beta(w) = 4|w|^2 / (1 + |w|^2)^2, symmetric under |w| -> 1/|w|."""
    if w_norm < 0:
        raise DomainError(f"w_norm must be nonnegative, got {w_norm!r}")
    if math.isinf(w_norm) or w_norm == 0.0:
        return 0.0
    if w_norm > 1.0:
        r = 1.0 / w_norm
        return 4.0 * r * r / (1.0 + r * r) ** 2
    return 4.0 * w_norm * w_norm / (1.0 + w_norm * w_norm) ** 2


def beta_complement(w_norm: float) -> float:
    """1 - beta(w) = ((1 - |w|^2) / (1 + |w|^2))^2, computed without cancellation."""
    return complementary_modulus(w_norm) ** 2


def complementary_modulus(w_norm: float) -> float:
    """sqrt(1 - beta(w)) = |1 - |w|^2| / (1 + |w|^2)."""
    if math.isinf(w_norm):
        return 1.0
    if w_norm > 1.0:
        r = 1.0 / w_norm
        return (1.0 - r) * (1.0 + r) / (1.0 + r * r)
    return (1.0 - w_norm) * (1.0 + w_norm) / (1.0 + w_norm * w_norm)


def w_factor_base(w_norm: float) -> float:
    """|w|^2 / (1 + |w|^2) in [0, 1]."""
    if math.isinf(w_norm):
        return 1.0
    if w_norm > 1.0:
        return 1.0 / (1.0 + 1.0 / (w_norm * w_norm))
    return w_norm * w_norm / (1.0 + w_norm * w_norm)


def w_norm_for_beta(beta: float) -> float:
    """The |w| <= 1 with beta(|w|) = beta."""
    if not (0.0 <= beta <= 1.0):
        raise DomainError(f"beta must lie in [0, 1], got {beta!r}")
    if beta == 0.0:
        return 0.0
    return (1.0 - math.sqrt(1.0 - beta)) / math.sqrt(beta)


def lambda2_exact(w_norm: float) -> float:
    """Two-dimensional Lambda: 2|w|^2/(1+|w|^2) K(sqrt(beta)); inf on |w| = 1."""
    if w_norm < 0:
        raise DomainError(f"w_norm must be nonnegative, got {w_norm!r}")
    if w_norm == 0.0:
        return 0.0
    if math.isinf(w_norm):
        return math.pi
    kp = complementary_modulus(w_norm)
    if kp == 0.0:
        return POSITIVE_INFINITY
    return extended(2.0 * w_factor_base(w_norm) * elliptic_k_complement(kp))


def log_asymptote(beta: float) -> float:
    """-ln(sqrt(1 - beta) / 2), the claimed behaviour of Lambda_2 as beta -> 1."""
    if not (0.9 < beta < 1.0):
        raise DomainError(f"log asymptote is only claimed for beta in (0.9, 1), got {beta!r}")
    return -math.log(math.sqrt(1.0 - beta) / 2.0)


def lambda2_log_asymptote(w_norm: float) -> float:
    beta = beta_of(w_norm)
    if not (0.9 < beta < 1.0):
        raise DomainError(
            f"log asymptote is only claimed for beta in (0.9, 1); |w|={w_norm!r} gives beta={beta!r}"
        )
    return -math.log(complementary_modulus(w_norm) / 2.0)


def _theta_exponents(n: int, alpha: float, lam: float) -> tuple[float, float, float]:
    return (alpha + lam - n + 1) / 2, (n - 1) / 2, alpha / 2


def theta_log_coefficient(n: int, alpha: float, lam: float) -> float:
    """log of 2^(alpha+lambda-n) pi^((n-1)/2) / Gamma((n-1)/2)."""
    return (alpha + lam - n) * math.log(2.0) + 0.5 * (n - 1) * math.log(math.pi) - ln_gamma((n - 1) / 2)


def theta_reduced(n: int, alpha: float, lam: float, w_norm: float) -> ReducedIntegrand:
    """The Beta-type integrand whose integral is Theta_{n,alpha,lambda}(w)."""
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n!r}")
    if w_norm < 0:
        raise DomainError(f"w_norm must be nonnegative, got {w_norm!r}")
    p, q, s = _theta_exponents(n, alpha, lam)
    base = w_factor_base(w_norm)
    if base == 0.0:
        coef = 0.0 if 2 * p > 0 else POSITIVE_INFINITY
    else:
        coef = math.exp(theta_log_coefficient(n, alpha, lam) + 2 * p * math.log(base))
    return ReducedIntegrand(coef, p, q, s, beta_of(w_norm), beta_complement(w_norm))


def theta_exact(n: int, alpha: float, lam: float | None, w_norm: float) -> float:
    """Theta_{n,alpha,lambda}(w) at tau = 1; ``lam=None`` means lambda = alpha."""
    if lam is None:
        lam = alpha
    f = theta_reduced(n, alpha, lam, w_norm)
    if math.isinf(f.coefficient):
        return POSITIVE_INFINITY
    if f.coefficient == 0.0:
        return 0.0
    return integrate_reduced(f)


@dataclass(frozen=True)
class BoundReport:
    exact_value: float
    upper_bound: float
    w_factor: float
    constant: float

    @property
    def holds(self) -> bool:
        if math.isinf(self.exact_value) or math.isinf(self.upper_bound):
            return math.isinf(self.upper_bound)
        return self.exact_value <= self.upper_bound * (1 + 1e-9)


def theta_bound_constant(n: int, alpha: float, lam: float, denominator: str = "lambda") -> float:
    """Gamma-ratio constant bounding Theta_{n,alpha,lambda}.

    ``denominator="lambda"`` uses Gamma(lambda/2); this is B(p, (n-1-alpha)/2)
    times the prefactor, i.e. exactly what replacing (1 - beta u)^(-alpha/2) by
    (1 - u)^(-alpha/2) produces. ``"alpha"`` uses Gamma(alpha/2) instead; the two
    agree when lambda = alpha.
    """
    if not (0 < alpha < n - 1):
        raise DomainError(f"bound needs 0 < alpha < n-1, got alpha={alpha!r}, n={n!r}")
    p = (alpha + lam - n + 1) / 2
    if not p > 0:
        raise DomainError(f"bound needs alpha + lambda > n-1, got alpha={alpha!r}, lambda={lam!r}")
    if denominator == "lambda":
        den = ln_gamma(lam / 2)
    elif denominator == "alpha":
        den = ln_gamma(alpha / 2)
    else:
        raise DomainError(f"denominator must be 'lambda' or 'alpha', got {denominator!r}")
    return math.exp(
        theta_log_coefficient(n, alpha, lam) + ln_gamma(p) + ln_gamma((n - 1 - alpha) / 2) - den
    )


def theta_bound(
    n: int, alpha: float, lam: float | None, w_norm: float, denominator: str = "lambda"
) -> BoundReport:
    if lam is None:
        lam = alpha
    constant = theta_bound_constant(n, alpha, lam, denominator)
    wf = w_factor_base(w_norm) ** (alpha + lam - n + 1)
    return BoundReport(theta_exact(n, alpha, lam, w_norm), constant * wf, wf, constant)


def riesz_ft_constant(n: int, lam: float) -> float:
    """Multiplier c with F[|x|^-lam] = c |xi|^-(n-lam), for the e^(2 pi i x y) transform."""
    if not (0 < lam < n):
        raise DomainError(f"need 0 < lambda < n, got lambda={lam!r}, n={n!r}")
    return math.exp((lam - n / 2) * math.log(math.pi) + ln_gamma((n - lam) / 2) - ln_gamma(lam / 2))


def riesz_composition_constant(n: int, a: float, b: float) -> float:
    """C with int_{R^n} |x|^-a |w-x|^-b dx = C |w|^(n-a-b), for 0 < a, b < n < a + b."""
    if not (0 < a < n and 0 < b < n and a + b > n):
        raise DomainError(f"composition needs 0 < a, b < n < a + b, got a={a!r}, b={b!r}, n={n!r}")
    return math.exp(
        0.5 * n * math.log(math.pi)
        + ln_gamma((n - a) / 2) + ln_gamma((n - b) / 2) + ln_gamma((a + b - n) / 2)
        - ln_gamma(a / 2) - ln_gamma(b / 2) - ln_gamma(n - (a + b) / 2)
    )


def riesz_chain_constant(n: int) -> float:
    """|w|^2 times the (n-2)-fold convolution of |x|^-(n-1) on R^n, a constant in w.

    pi^(((n-1)^2 - 3)/2) Gamma((n-1)/2)^-(n-2) Gamma(n/2 - 1)^-1.
    """
    if int(n) != n or n < 4:
        raise DomainError(f"riesz_chain_constant needs integer n >= 4, got n={n!r}")
    return math.exp(
        0.5 * ((n - 1) ** 2 - 3) * math.log(math.pi)
        - (n - 2) * ln_gamma((n - 1) / 2)
        - ln_gamma(n / 2 - 1)
    )


def delta_n_reduction_constant(n: int) -> float:
    """(1/8) sigma(S^(n-2))^2, the factor relating sup Delta_n to sup Delta_2."""
    if int(n) != n or n <= 2:
        raise DomainError(f"delta_n_reduction_constant needs integer n > 2, got n={n!r}")
    return sphere_area(n - 2) ** 2 / 8.0


def closed_form_value(spec) -> float | None:
    """Exact value of ``spec`` when the family has a closed form, else None."""
    from .forms import Family, dilation_normalize

    spec, _ = dilation_normalize(spec)
    fam, n, w = spec.family, spec.n, spec.w_norm
    if fam is Family.THETA_ALPHA:
        return theta_exact(n, spec.alpha, spec.alpha, w)
    if fam is Family.THETA_ALPHA_LAMBDA:
        return theta_exact(n, spec.alpha, spec.lam, w)
    if n == 2 and fam is Family.LAMBDA_N:
        return lambda2_exact(w)
    if n == 2 and fam is Family.LAMBDA_N_ALPHA:
        return theta_exact(2, spec.alpha, spec.alpha, w)
    return None


def closed_form_bound(spec, denominator: str = "lambda") -> BoundReport | None:
    from .forms import Family, dilation_normalize

    spec, _ = dilation_normalize(spec)
    fam, n, w = spec.family, spec.n, spec.w_norm
    if fam is Family.THETA_ALPHA or (n == 2 and fam is Family.LAMBDA_N_ALPHA):
        a, lam = spec.alpha, spec.alpha
    elif fam is Family.THETA_ALPHA_LAMBDA:
        a, lam = spec.alpha, spec.lam
    else:
        return None
    try:
        return theta_bound(n, a, lam, w, denominator)
    except DomainError:
        return None

