"""Integral families, admissibility classification and dilation bookkeeping.

Every family is a delta-constrained product of Riesz factors |x_k|^(-a_k) on
R^n. The non-kernel families carry a prefactor |w|^power chosen so that the
value is unchanged under (tau, w) -> (s^2 tau, s w).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

from .errors import StructureError


class Family(str, enum.Enum):
    LAMBDA_N = "LambdaN"
    DELTA_N = "DeltaN"
    THETA_ALPHA = "ThetaAlpha"
    THETA_ALPHA_LAMBDA = "ThetaAlphaLambda"
    LAMBDA_N_ALPHA = "LambdaNAlpha"
    LAMBDA_ALPHA_LAMBDA = "LambdaAlphaLambda"
    KERNEL_K = "KernelK"
    KERNEL_K_ALPHA = "KernelKAlpha"
    KERNEL_H = "KernelH"
    KERNEL_J = "KernelJ"

    @property
    def is_kernel(self) -> bool:
        return self.name.startswith("KERNEL")


class Status(str, enum.Enum):
    ADMISSIBLE = "Admissible"
    INADMISSIBLE = "Inadmissible"
    BOUNDARY = "BoundaryCase"


# number of user-supplied alphas per family; None means "n - 1 entries"
_ALPHA_COUNT = {
    Family.LAMBDA_N: 0,
    Family.DELTA_N: 0,
    Family.THETA_ALPHA: 1,
    Family.THETA_ALPHA_LAMBDA: 1,
    Family.LAMBDA_N_ALPHA: 1,
    Family.LAMBDA_ALPHA_LAMBDA: None,
    Family.KERNEL_K: 0,
    Family.KERNEL_K_ALPHA: 1,
    Family.KERNEL_H: 1,
    Family.KERNEL_J: 0,
}
_NEEDS_LAMBDA = {Family.THETA_ALPHA_LAMBDA, Family.LAMBDA_ALPHA_LAMBDA}


@dataclass(frozen=True)
class FormSpec:
    """One member of an integral family.

    ``alphas`` holds the free Riesz exponents of the family: one entry for the
    alpha-families, n - 1 entries for LambdaAlphaLambda, none for LambdaN,
    DeltaN, KernelK and KernelJ (whose exponents are fixed at n - 1). ``lam``
    is the exponent of the last factor where the family has one; it is
    serialised as ``"lambda"``.
    """

    family: Family
    n: int
    alphas: tuple[float, ...] = ()
    lam: float | None = None
    tau: float = 1.0
    w: tuple[float, ...] = ()
    v: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "w", tuple(float(x) for x in self.w))
        if self.v is not None:
            object.__setattr__(self, "v", tuple(float(x) for x in self.v))
        _validate(self)

    @property
    def w_norm(self) -> float:
        return math.hypot(*self.w) if self.w else 0.0

    @property
    def alpha(self) -> float:
        return self.alphas[0]

    def factor_exponents(self) -> tuple[float, ...]:
        """Exponent of every Riesz factor, in factor order."""
        n, fam = self.n, self.family
        if fam in (Family.LAMBDA_N, Family.KERNEL_K):
            return (n - 1.0,) * n
        if fam in (Family.DELTA_N, Family.KERNEL_J):
            return (n - 1.0,) * 3
        if fam in (Family.THETA_ALPHA, Family.KERNEL_H):
            return (self.alpha, self.alpha)
        if fam is Family.THETA_ALPHA_LAMBDA:
            return (self.alpha, self.lam)
        if fam in (Family.LAMBDA_N_ALPHA, Family.KERNEL_K_ALPHA):
            return (self.alpha,) * n
        return self.alphas + (self.lam,)

    def shift_exponent(self) -> float:
        """Exponent of each shifted factor |w - sum x|, |v - sum x| in a kernel."""
        n, fam = self.n, self.family
        if fam is Family.KERNEL_K:
            return n - 1.0
        if fam is Family.KERNEL_K_ALPHA:
            return n * (n - self.alpha + 1) / 2 - 1
        if fam is Family.KERNEL_H:
            return 1.5 * n - 1 - self.alpha
        if fam is Family.KERNEL_J:
            return (n + 1) / 2
        raise StructureError(f"{fam.value} is not a kernel family")

    def to_dict(self) -> dict:
        d = {
            "family": self.family.value,
            "n": self.n,
            "alphas": list(self.alphas),
            "lambda": self.lam,
            "tau": self.tau,
            "w": list(self.w),
        }
        if self.v is not None:
            d["v"] = list(self.v)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "FormSpec":
        unknown = set(d) - {"family", "n", "alphas", "lambda", "tau", "w", "v"}
        if unknown:
            raise StructureError(f"unknown FormSpec fields: {sorted(unknown)}")
        try:
            return cls(
                family=Family(d["family"]),
                n=int(d["n"]),
                alphas=tuple(d.get("alphas", ())),
                lam=d.get("lambda"),
                tau=float(d.get("tau", 1.0)),
                w=tuple(d["w"]),
                v=tuple(d["v"]) if d.get("v") is not None else None,
            )
        except KeyError as exc:
            raise StructureError(f"FormSpec is missing field {exc.args[0]!r}") from None
        except ValueError as exc:
            raise StructureError(str(exc)) from None

    @classmethod
    def from_json(cls, text: str) -> "FormSpec":
        return cls.from_dict(json.loads(text))


def axis_vector(n: int, norm: float) -> tuple[float, ...]:
    """Canonical w of the given length along the first axis."""
    return (float(norm),) + (0.0,) * (n - 1)


def make_form(
    family: Family | str,
    n: int,
    alphas: Sequence[float] = (),
    lam: float | None = None,
    tau: float = 1.0,
    w_norm: float | None = None,
    w: Sequence[float] | None = None,
    v: Sequence[float] | None = None,
) -> FormSpec:
    if w is None:
        if w_norm is None:
            raise StructureError("either w or w_norm must be given")
        w = axis_vector(n, w_norm)
    return FormSpec(Family(family), n, tuple(alphas), lam, tau, tuple(w), None if v is None else tuple(v))


def _validate(spec: FormSpec) -> None:
    fam, n = spec.family, spec.n
    if int(n) != n or n < 2:
        raise StructureError(f"n must be an integer >= 2, got n={n!r}")
    if not (spec.tau > 0 and math.isfinite(spec.tau)):
        raise StructureError(f"tau must be positive and finite, got tau={spec.tau!r}")
    if len(spec.w) != n:
        raise StructureError(f"w must have {n} components, got {len(spec.w)}")
    if not all(math.isfinite(x) for x in spec.w):
        raise StructureError("w must be finite")
    if fam.is_kernel:
        if spec.v is None or len(spec.v) != n:
            raise StructureError(f"kernel family {fam.value} needs v with {n} components")
        if spec.tau != 1.0:
            raise StructureError("kernel families are defined at tau = 1")
    elif spec.v is not None:
        raise StructureError(f"v is only meaningful for kernel families, not {fam.value}")
    want = _ALPHA_COUNT[fam]
    if want is None:
        want = n - 1
    if fam in (Family.LAMBDA_N, Family.DELTA_N) and spec.alphas:
        # accepted for symmetry with the JSON form, but must be the fixed exponent
        if any(a != n - 1 for a in spec.alphas):
            raise StructureError(f"{fam.value} exponents are fixed at n-1={n - 1}")
    elif len(spec.alphas) != want:
        raise StructureError(f"{fam.value} needs {want} alpha value(s), got {len(spec.alphas)}")
    if fam in _NEEDS_LAMBDA:
        if spec.lam is None:
            raise StructureError(f"{fam.value} needs lambda")
    elif spec.lam is not None and not (fam is Family.THETA_ALPHA and spec.lam == spec.alpha):
        raise StructureError(f"{fam.value} takes no lambda")
    if not all(math.isfinite(a) for a in spec.factor_exponents()):
        raise StructureError("exponents must be finite")


@dataclass(frozen=True)
class Admissibility:
    status: Status
    homogeneity_power: float
    reason: str = ""
    pivot: int | None = None

    @property
    def admissible(self) -> bool:
        return self.status is Status.ADMISSIBLE


def homogeneity_power(spec: FormSpec) -> float:
    """Power p of the |w|^p prefactor making the family dilation invariant."""
    n, fam = spec.n, spec.family
    if fam is Family.LAMBDA_N:
        return 2.0
    if fam is Family.DELTA_N:
        return n - 1.0
    if fam is Family.THETA_ALPHA:
        return 2 * spec.alpha + 2 - n
    if fam is Family.THETA_ALPHA_LAMBDA:
        return spec.alpha + spec.lam + 2 - n
    if fam is Family.LAMBDA_N_ALPHA:
        return 2 + n * (spec.alpha - n + 1)
    if fam is Family.LAMBDA_ALPHA_LAMBDA:
        return 2 + sum(spec.alphas) + spec.lam - n * (n - 1)
    return 0.0


class _Conditions:
    """Collects strict inequalities; equality demotes to BoundaryCase."""

    def __init__(self):
        self.out: list[str] = []
        self.edge: list[str] = []

    def less(self, a: float, b: float, label: str):
        if a > b:
            self.out.append(label)
        elif a == b:
            self.edge.append(label)

    def require(self, ok: bool, label: str):
        if not ok:
            self.out.append(label)

    def result(self, power: float, pivot: int | None = None) -> Admissibility:
        if self.out:
            return Admissibility(Status.INADMISSIBLE, power, "; ".join(self.out), pivot)
        if self.edge:
            return Admissibility(Status.BOUNDARY, power, "; ".join(self.edge), pivot)
        return Admissibility(Status.ADMISSIBLE, power, "", pivot)


def classify(spec: FormSpec) -> Admissibility:
    """Admissibility of ``spec`` under the open-interval hypotheses of its family."""
    n, fam = spec.n, spec.family
    power = homogeneity_power(spec)
    c = _Conditions()
    if fam is Family.LAMBDA_N:
        if n == 2:
            return Admissibility(Status.INADMISSIBLE, power, "Λ_2 unbounded")
        return c.result(power)
    if fam is Family.DELTA_N:
        return c.result(power)
    if fam in (Family.THETA_ALPHA, Family.KERNEL_H):
        a = spec.alpha
        c.less((n - 1) / 2, a, "alpha > (n-1)/2")
        c.less(a, n - 1, "alpha < n-1")
        return c.result(power)
    if fam is Family.THETA_ALPHA_LAMBDA:
        a, lam = spec.alpha, spec.lam
        c.less(0, lam, "lambda > 0")
        c.less(0, a, "alpha > 0")
        c.less(a, n - 1, "alpha < n-1")
        c.less(n - 1, a + lam, "alpha + lambda > n-1")
        return c.result(power)
    if fam in (Family.LAMBDA_N_ALPHA, Family.KERNEL_K_ALPHA):
        a = spec.alpha
        c.require(n >= 3, "n >= 3")
        lower = n - 1 - 2 / n if fam is Family.LAMBDA_N_ALPHA else n - 2 - 2 / n
        c.less(lower, a, f"alpha > {lower:g}")
        c.less(a, n - 1, "alpha < n-1")
        return c.result(power)
    if fam is Family.KERNEL_K:
        c.require(n >= 3, "n >= 3")
        return c.result(power)
    if fam is Family.KERNEL_J:
        return c.result(power)

    # LambdaAlphaLambda
    lam = spec.lam
    c.require(n >= 3, "n >= 3")
    for k, a in enumerate(spec.alphas):
        c.less(0, a, f"alpha_{k + 1} > 0")
        c.less(a, n, f"alpha_{k + 1} < n")
    c.less(0, lam, "lambda > 0")
    c.less(0, power, "rho > 0")
    if power >= n:
        c.edge.append("rho < n (hypothesis; rho >= n is unproven, not known to fail)")
    pivot = None
    for k, a in enumerate(spec.alphas):
        if 0 < a < n - 1 and n - 1 < a + lam < 2 * (n - 1):
            pivot = k
            break
    if pivot is None:
        c.out.append("no alpha_i with 0 < alpha_i < n-1 and n-1 < alpha_i + lambda < 2(n-1)")
    return c.result(power, pivot)


@dataclass(frozen=True)
class ScaleMap:
    """Record of the dilation applied by :func:`dilation_normalize`."""

    scale: float
    description: str = field(default="")


def dilation_normalize(spec: FormSpec) -> tuple[FormSpec, ScaleMap]:
    """Equivalent spec with tau = 1 and w replaced by w / sqrt(tau)."""
    if spec.family.is_kernel or spec.tau == 1.0:
        return spec, ScaleMap(1.0, "identity")
    s = math.sqrt(spec.tau)
    out = replace(spec, tau=1.0, w=tuple(x / s for x in spec.w))
    return out, ScaleMap(s, f"(tau, w) -> (1, w / {s:g})")
