"""Univariate orthogonal polynomial families from three-term recurrences.

Monic polynomials are the canonical form: psi_{k+1}(x) = (x - a_k) psi_k(x)
- b_k psi_{k-1}(x) with psi_0 = 1, psi_{-1} = 0.  Orthonormal evaluation
divides by the norm h_k on the fly.  Standard families (probabilists'
Hermite for the standard normal weight, Legendre for the uniform density
1/2 on [-1, 1]) use closed-form coefficients; arbitrary weights go through
the discretized Stieltjes procedure on a Fejer grid.
"""

from dataclasses import dataclass, field
from math import sqrt
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import NumericalError, ValidationError

HERMITE_KIND = "hermite"
LEGENDRE_KIND = "legendre"
CUSTOM_KIND = "custom"

#: Default Fejer resolution for Stieltjes inner products.
DEFAULT_RESOLUTION = 128

_DENSITY_TOL = 1e-10


@dataclass(frozen=True)
class PolynomialFamily:
    """A weight function identifying an orthogonal polynomial family.

    The weight must be a probability density on its support.  For the two
    standard kinds the density is implied; a custom kind carries an explicit
    weight callable and a finite support interval.
    """

    kind: str
    weight: Callable[[float], float] | None = None
    support: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in (HERMITE_KIND, LEGENDRE_KIND, CUSTOM_KIND):
            raise ValidationError(f"unknown family kind {self.kind!r}")
        if self.kind == CUSTOM_KIND:
            if self.weight is None or self.support is None:
                raise ValidationError("custom family needs weight and support")
            lo, hi = self.support
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValidationError(
                    "custom weights need a finite support interval; truncate "
                    "infinite supports explicitly before constructing the family"
                )
            total, _ = quad(self.weight, lo, hi, limit=200)
            if abs(total - 1.0) > _DENSITY_TOL:
                raise ValidationError(
                    f"custom weight integrates to {total!r}, not a probability density"
                )


HERMITE = PolynomialFamily(HERMITE_KIND)
LEGENDRE = PolynomialFamily(LEGENDRE_KIND)


def custom_family(weight: Callable[[float], float], support: tuple[float, float]) -> PolynomialFamily:
    """Family for an arbitrary probability-density weight on a finite interval."""
    return PolynomialFamily(CUSTOM_KIND, weight, support)


@dataclass(frozen=True)
class RecurrenceTable:
    """Recurrence coefficients defining one polynomial family up to max_degree.

    a holds a_0..a_{n-1}, b holds b_1..b_{n-1} and m0 is the zeroth moment of
    the weight.  norms_sq caches h_k^2 = m0 * prod(b_1..b_k) for k = 0..n so
    orthonormal evaluation is available through degree n.
    """

    a: np.ndarray
    b: np.ndarray
    m0: float
    max_degree: int
    family: str
    norms_sq: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.max_degree < 1:
            raise ValidationError("max_degree must be >= 1")
        if len(self.a) != self.max_degree or len(self.b) != self.max_degree - 1:
            raise ValidationError("recurrence coefficient lengths inconsistent with max_degree")
        if np.any(self.b <= 0.0):
            raise ValidationError("all recurrence b coefficients must be positive")
        if np.any(self.norms_sq <= 0.0):
            raise ValidationError("polynomial norms must be positive")
        for arr in (self.a, self.b, self.norms_sq):
            arr.setflags(write=False)


def _table_from_coeffs(a, b_full, m0, kind) -> RecurrenceTable:
    """Assemble a table from a_0..a_{n-1} and b_1..b_n (one extra b for h_n)."""
    a = np.asarray(a, dtype=float)
    b_full = np.asarray(b_full, dtype=float)
    n = len(a)
    if np.any(b_full <= 0.0):
        raise NumericalError("weight not a valid positive measure at requested degree")
    norms_sq = m0 * np.concatenate(([1.0], np.cumprod(b_full)))
    return RecurrenceTable(a=a, b=b_full[: n - 1], m0=float(m0), max_degree=n,
                           family=kind, norms_sq=norms_sq)


def standard_recurrence(family: PolynomialFamily, n: int) -> RecurrenceTable:
    """Closed-form recurrence coefficients for a standard family.

    Hermite (standard normal weight): a_k = 0, b_k = k.  Legendre (uniform
    density 1/2 on [-1, 1]): a_k = 0, b_k = k^2 / (4k^2 - 1).
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if family.kind == CUSTOM_KIND:
        raise ValidationError(
            "no closed form for custom weights; use stieltjes_recurrence instead"
        )
    k = np.arange(1, n + 1, dtype=float)
    if family.kind == HERMITE_KIND:
        b_full = k
    else:
        b_full = k * k / (4.0 * k * k - 1.0)
    return _table_from_coeffs(np.zeros(n), b_full, 1.0, family.kind)


def fejer_rule(n: int, lo: float = -1.0, hi: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Fejer first-kind quadrature (open rule, no endpoint nodes) on [lo, hi]."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    k = np.arange(1, n + 1)
    theta = (2 * k - 1) * np.pi / (2 * n)
    m = np.arange(1, n // 2 + 1)
    # w_k = (2/n) * (1 - 2 sum_m cos(2 m theta_k) / (4 m^2 - 1))
    cos_terms = np.cos(2.0 * np.outer(theta, m))
    w = (2.0 / n) * (1.0 - 2.0 * cos_terms @ (1.0 / (4.0 * m * m - 1.0)))
    x = np.cos(theta)[::-1]
    w = w[::-1]
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def stieltjes_recurrence(weight: Callable, support: tuple[float, float], n: int,
                         resolution: int = DEFAULT_RESOLUTION) -> RecurrenceTable:
    """Recurrence coefficients for an arbitrary weight by discretized Stieltjes.

    Inner products are evaluated on a Fejer first-kind grid of `resolution`
    points over the (finite) support, so the weight may be singular at the
    endpoints.  resolution must be at least 2n to resolve the degree-2n
    integrands of the highest coefficients.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if resolution < 2 * n:
        raise ValidationError(f"resolution {resolution} too small, need >= {2 * n}")
    lo, hi = support
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ValidationError("support must be a finite interval (lo, hi) with lo < hi")
    t, w = fejer_rule(resolution, lo, hi)
    mass = w * np.asarray([weight(x) for x in t], dtype=float)
    if np.any(mass < 0.0) or not np.all(np.isfinite(mass)):
        raise NumericalError("weight is negative or non-finite on the support")

    a = np.empty(n)
    b_full = np.empty(n)
    psi_prev = np.zeros(resolution)
    psi = np.ones(resolution)
    norm_prev = 0.0
    m0 = float(mass.sum())
    for k in range(n + 1):
        norm_k = float(mass @ (psi * psi))
        if norm_k <= 0.0:
            raise NumericalError("weight not a valid positive measure at requested degree")
        if k >= 1:
            b_full[k - 1] = norm_k / norm_prev
        if k == n:
            break
        a[k] = float(mass @ (t * psi * psi)) / norm_k
        psi_next = (t - a[k]) * psi - (b_full[k - 1] if k >= 1 else 0.0) * psi_prev
        psi_prev, psi = psi, psi_next
        norm_prev = norm_k
    return _table_from_coeffs(a, b_full, m0, CUSTOM_KIND)


def eval_ortho(rt: RecurrenceTable, k: int, x):
    """Monic orthogonal polynomial psi_k at x (scalar or array), k <= max_degree."""
    if not 0 <= k <= rt.max_degree:
        raise ValidationError(f"degree {k} outside table range 0..{rt.max_degree}")
    x = np.asarray(x, dtype=float)
    psi_prev = np.zeros_like(x)
    psi = np.ones_like(x)
    for j in range(k):
        psi_next = (x - rt.a[j]) * psi - (rt.b[j - 1] if j >= 1 else 0.0) * psi_prev
        psi_prev, psi = psi, psi_next
    return psi if psi.ndim else float(psi)


def norm_squared(rt: RecurrenceTable, k: int) -> float:
    """h_k^2 = <psi_k, psi_k> = m0 * prod(b_1..b_k)."""
    if not 0 <= k <= rt.max_degree:
        raise ValidationError(f"degree {k} outside table range 0..{rt.max_degree}")
    return float(rt.norms_sq[k])


def eval_orthonormal(rt: RecurrenceTable, k: int, x):
    """Orthonormal polynomial psi_k / h_k at x."""
    return eval_ortho(rt, k, x) / sqrt(norm_squared(rt, k))


def orthonormal_column(rt: RecurrenceTable, max_k: int, x: np.ndarray) -> np.ndarray:
    """All orthonormal values psi_0..psi_max_k at points x, shape (max_k+1, len(x)).

    Single forward recurrence shared across degrees; used by basis evaluation.
    """
    if not 0 <= max_k <= rt.max_degree:
        raise ValidationError(f"degree {max_k} outside table range 0..{rt.max_degree}")
    x = np.asarray(x, dtype=float)
    out = np.empty((max_k + 1, x.size))
    psi_prev = np.zeros(x.size)
    psi = np.ones(x.size)
    out[0] = psi
    for j in range(max_k):
        psi_next = (x - rt.a[j]) * psi - (rt.b[j - 1] if j >= 1 else 0.0) * psi_prev
        psi_prev, psi = psi, psi_next
        out[j + 1] = psi
    return out / np.sqrt(rt.norms_sq[: max_k + 1])[:, None]
