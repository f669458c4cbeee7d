"""Total-degree polynomial chaos: basis, projection, moments, Sobol' indices.

Coefficients are stored in the orthonormal convention throughout, so the
mean of an output is its coefficient 0 and its variance is the plain sum of
squared higher coefficients.
"""

import json
from dataclasses import dataclass
from itertools import combinations
from math import comb, sqrt

import numpy as np

from . import orthopoly
from ._threads import evaluate_rows
from .errors import NumericalError, ValidationError
from .orthopoly import HERMITE, LEGENDRE, RecurrenceTable
from .quadrature import TensorGrid, gauss_rule, tensor_grid

GERM_UNIFORM = "uniform"  # uniform on [-1, 1], Legendre basis
GERM_NORMAL = "normal"    # standard normal, Hermite basis

_GERM_FAMILY = {GERM_UNIFORM: LEGENDRE, GERM_NORMAL: HERMITE}

_DEGENERATE_VARIANCE = 1e-300


@dataclass(frozen=True)
class UncertainParameter:
    """One physical parameter theta = mean + sigma * germ."""

    name: str
    germ: str
    mean: float
    sigma: float

    def __post_init__(self):
        if self.germ not in _GERM_FAMILY:
            raise ValidationError(f"unknown germ {self.germ!r} for {self.name!r}")
        if not self.sigma > 0.0:
            raise ValidationError(f"sigma must be positive for {self.name!r}")


@dataclass(frozen=True)
class InputSpec:
    """Independent uncertain parameters, each an affine map of its germ."""

    parameters: tuple[UncertainParameter, ...]

    def __post_init__(self):
        if len(self.parameters) == 0:
            raise ValidationError("input spec needs at least one parameter")
        names = [p.name for p in self.parameters]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate uncertain parameter names")

    @property
    def dimension(self) -> int:
        return len(self.parameters)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parameters)

    def to_physical(self, eps: np.ndarray) -> np.ndarray:
        """Map germ values (last axis = dimension) to physical parameters."""
        eps = np.asarray(eps, dtype=float)
        means = np.array([p.mean for p in self.parameters])
        sigmas = np.array([p.sigma for p in self.parameters])
        return means + sigmas * eps

    def recurrence_tables(self, degree: int) -> tuple[RecurrenceTable, ...]:
        """Per-dimension tables of the family matching each germ."""
        return tuple(
            orthopoly.standard_recurrence(_GERM_FAMILY[p.germ], max(degree, 1))
            for p in self.parameters
        )


def input_spec(parameters) -> InputSpec:
    """Build an InputSpec from (name, germ, mean, sigma) tuples or parameter objects."""
    built = tuple(
        p if isinstance(p, UncertainParameter) else UncertainParameter(*p)
        for p in parameters
    )
    return InputSpec(parameters=built)


@dataclass(frozen=True)
class TotalDegreeBasis:
    """Multivariate basis of all multi-indices with total degree <= degree.

    Indices are graded lexicographic: ascending total degree, plain
    lexicographic within a degree, so index 0 is the zero multi-index.
    """

    dimension: int
    degree: int
    indices: tuple[tuple[int, ...], ...]
    tables: tuple[RecurrenceTable, ...]

    def __len__(self):
        return len(self.indices)


def _compositions(d: int, total: int):
    """All d-tuples of nonnegative ints summing to total, lexicographic order."""
    if d == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(d - 1, total - first):
            yield (first, *rest)


def enumerate_basis(d: int, p: int, tables) -> TotalDegreeBasis:
    """Graded-lex total-degree basis of C(p+d, d) multi-indices."""
    if d < 1:
        raise ValidationError("dimension must be >= 1")
    if p < 0:
        raise ValidationError("degree must be >= 0")
    tables = tuple(tables)
    if len(tables) != d:
        raise ValidationError(f"need {d} recurrence tables, got {len(tables)}")
    for rt in tables:
        if rt.max_degree < p:
            raise ValidationError(
                f"table degree {rt.max_degree} below basis degree {p}"
            )
    indices = tuple(
        alpha for total in range(p + 1) for alpha in _compositions(d, total)
    )
    assert len(indices) == comb(p + d, d)
    return TotalDegreeBasis(dimension=d, degree=p, indices=indices, tables=tables)


def basis_for_spec(spec: InputSpec, p: int) -> TotalDegreeBasis:
    """Total-degree basis whose per-dimension families match the germ types."""
    return enumerate_basis(spec.dimension, p, spec.recurrence_tables(max(p, 1)))


def basis_matrix(basis: TotalDegreeBasis, eps: np.ndarray) -> np.ndarray:
    """Orthonormal basis values at germ points, shape (n_points, len(basis))."""
    eps = np.atleast_2d(np.asarray(eps, dtype=float))
    if eps.shape[1] != basis.dimension:
        raise ValidationError(f"germ points must have {basis.dimension} components")
    univariate = [
        orthopoly.orthonormal_column(rt, basis.degree, eps[:, i])
        for i, rt in enumerate(basis.tables)
    ]
    out = np.empty((eps.shape[0], len(basis)))
    for j, alpha in enumerate(basis.indices):
        col = univariate[0][alpha[0]].copy()
        for i in range(1, basis.dimension):
            col *= univariate[i][alpha[i]]
        out[:, j] = col
    return out


def eval_basis_function(basis: TotalDegreeBasis, j: int, eps) -> float:
    """Orthonormal multivariate basis polynomial j at one germ point."""
    if not 0 <= j < len(basis):
        raise ValidationError(f"basis index {j} outside 0..{len(basis) - 1}")
    eps = np.asarray(eps, dtype=float).reshape(1, -1)
    alpha = basis.indices[j]
    value = 1.0
    for i, rt in enumerate(basis.tables):
        value *= orthopoly.eval_orthonormal(rt, alpha[i], eps[0, i])
    return value


@dataclass(frozen=True)
class PceSurrogate:
    """Orthonormal PC coefficients for each output of a projected model."""

    basis: TotalDegreeBasis
    coefficients: np.ndarray  # shape (n_outputs, len(basis))
    input_spec: InputSpec
    output_labels: tuple[str, ...]

    def __post_init__(self):
        if self.coefficients.ndim != 2 or self.coefficients.shape[1] != len(self.basis):
            raise ValidationError("coefficient matrix shape does not match basis")
        if self.coefficients.shape[0] != len(self.output_labels):
            raise ValidationError("one label per output row required")
        self.coefficients.setflags(write=False)

    @property
    def n_outputs(self) -> int:
        return self.coefficients.shape[0]


def _quadrature_grid(spec: InputSpec, points_per_dim) -> TensorGrid:
    rules = []
    for p, n_g in zip(spec.parameters, points_per_dim):
        rt = orthopoly.standard_recurrence(_GERM_FAMILY[p.germ], n_g)
        rules.append(gauss_rule(rt, n_g))
    return tensor_grid(rules)


def _per_dim_points(n_g, d: int) -> list[int]:
    if np.isscalar(n_g):
        return [int(n_g)] * d
    points = [int(v) for v in n_g]
    if len(points) != d:
        raise ValidationError(f"need one quadrature size per dimension ({d})")
    return points


def project(model, spec: InputSpec, basis: TotalDegreeBasis, n_g,
            output_labels=None, threads: int | None = None) -> PceSurrogate:
    """Spectral projection of a model onto the basis by tensor Gauss quadrature.

    The model maps a physical parameter vector to a vector of outputs and is
    evaluated once per grid node (values are reused across coefficients).
    Each per-dimension rule size must be at least p + 1 so that products of
    basis polynomials with a degree-<=p response are integrated exactly.
    """
    if basis.dimension != spec.dimension:
        raise ValidationError("basis dimension does not match input spec")
    for p, rt in zip(spec.parameters, basis.tables):
        if rt.family != _GERM_FAMILY[p.germ].kind:
            raise ValidationError(
                f"germ {p.germ!r} of {p.name!r} does not match basis family {rt.family!r}"
            )
    points = _per_dim_points(n_g, spec.dimension)
    if min(points) < basis.degree + 1:
        raise ValidationError(
            f"quadrature sizes {points} too small for degree {basis.degree}; need >= p + 1"
        )
    grid = _quadrature_grid(spec, points)
    nodes = grid.node_matrix()
    weights = grid.weight_vector()
    thetas = spec.to_physical(nodes)
    if np.any(thetas <= 0.0):
        bad = nodes[np.argmin(thetas.min(axis=1))]
        raise ValidationError(
            f"physical parameters non-positive at germ node {bad.tolist()}; "
            "reduce sigma or revisit the input spec"
        )
    values = evaluate_rows(model, thetas, threads=threads, what="quadrature node")
    psi = basis_matrix(basis, nodes)
    coeffs = values.T @ (weights[:, None] * psi)
    labels = tuple(output_labels) if output_labels is not None else tuple(
        f"y{i}" for i in range(values.shape[1])
    )
    if len(labels) != values.shape[1]:
        raise ValidationError("output label count does not match model output size")
    return PceSurrogate(basis=basis, coefficients=coeffs, input_spec=spec,
                        output_labels=labels)


def eval_surrogate(s: PceSurrogate, eps) -> np.ndarray:
    """Surrogate outputs at one germ point (or a batch with germs on rows)."""
    eps = np.asarray(eps, dtype=float)
    single = eps.ndim == 1
    psi = basis_matrix(s.basis, eps)
    values = psi @ s.coefficients.T
    return values[0] if single else values


@dataclass(frozen=True)
class MomentSummary:
    """Mean, variance, skewness and non-excess kurtosis per output."""

    labels: tuple[str, ...]
    mean: np.ndarray
    variance: np.ndarray
    skewness: np.ndarray
    kurtosis: np.ndarray
    degenerate: np.ndarray  # True where variance ~ 0 and skew/kurt are placeholders

    def row(self, label: str) -> dict:
        i = self.labels.index(label)
        return {
            "mean": self.mean[i], "variance": self.variance[i],
            "skewness": self.skewness[i], "kurtosis": self.kurtosis[i],
        }


def moments(s: PceSurrogate, n_g_high: int | None = None) -> MomentSummary:
    """Moments of the surrogate: mean and variance from coefficients,
    skewness/kurtosis by a fresh tensor Gauss rule applied to the surrogate.

    n_g_high points per dimension must integrate the surrogate's fourth
    power exactly, i.e. n_g_high >= ceil((4p + 1) / 2); the default adds one
    extra point of margin.
    """
    p = s.basis.degree
    min_points = -(-(4 * p + 1) // 2)
    if n_g_high is None:
        n_g_high = min_points + 1
    if n_g_high < min_points:
        raise ValidationError(
            f"n_g_high {n_g_high} cannot integrate degree-{4 * p} surrogate powers; "
            f"need >= {min_points}"
        )
    mean = s.coefficients[:, 0].copy()
    variance = np.sum(s.coefficients[:, 1:] ** 2, axis=1)
    skewness = np.zeros_like(variance)
    kurtosis = np.full_like(variance, 3.0)
    degenerate = variance < _DEGENERATE_VARIANCE
    live = ~degenerate
    if np.any(live):
        grid = _quadrature_grid(s.input_spec, [n_g_high] * s.input_spec.dimension)
        nodes = grid.node_matrix()
        weights = grid.weight_vector()
        centered = eval_surrogate(s, nodes) - mean
        m3 = weights @ centered**3
        m4 = weights @ centered**4
        skewness[live] = m3[live] / variance[live] ** 1.5
        kurtosis[live] = m4[live] / variance[live] ** 2
    return MomentSummary(labels=s.output_labels, mean=mean, variance=variance,
                         skewness=skewness, kurtosis=kurtosis, degenerate=degenerate)


@dataclass(frozen=True)
class SobolReport:
    """Variance shares per nonempty subset of inputs, plus total indices.

    subsets holds 0-based dimension tuples ordered by (size, lexicographic);
    indices[i, j] is the share of output i attributed exactly to subsets[j]
    and totals[i, k] is the total index of input k.
    """

    labels: tuple[str, ...]
    input_names: tuple[str, ...]
    subsets: tuple[tuple[int, ...], ...]
    indices: np.ndarray   # (n_outputs, n_subsets)
    totals: np.ndarray    # (n_outputs, d)

    def index(self, label: str, subset) -> float:
        i = self.labels.index(label)
        j = self.subsets.index(tuple(sorted(subset)))
        return float(self.indices[i, j])

    def total(self, label: str, dim: int) -> float:
        return float(self.totals[self.labels.index(label), dim])


def sobol(s: PceSurrogate) -> SobolReport:
    """Sobol' decomposition of each output's variance from the PC coefficients.

    The index of subset T collects the squared coefficients of exactly the
    multi-indices whose support equals T; the total index of input i
    complements the share of all multi-indices with alpha_i = 0.
    """
    if s.basis.degree < 1:
        raise ValidationError("Sobol' indices need basis degree >= 1")
    d = s.basis.dimension
    sq = s.coefficients**2
    variance = sq[:, 1:].sum(axis=1)
    if np.any(variance <= 0.0):
        bad = [s.output_labels[i] for i in np.nonzero(variance <= 0.0)[0]]
        raise NumericalError(f"degenerate output, Sobol' undefined: {bad}")
    supports = [tuple(i for i, a in enumerate(alpha) if a > 0) for alpha in s.basis.indices]
    subsets = [
        tup for size in range(1, d + 1) for tup in combinations(range(d), size)
    ]
    position = {tup: j for j, tup in enumerate(subsets)}
    indices = np.zeros((s.n_outputs, len(subsets)))
    for col, support in enumerate(supports):
        if support:
            indices[:, position[support]] += sq[:, col]
    indices /= variance[:, None]
    totals = np.empty((s.n_outputs, d))
    for i in range(d):
        away = np.array([alpha[i] == 0 for alpha in s.basis.indices])
        away[0] = False  # the constant term belongs to no subset
        totals[:, i] = 1.0 - sq[:, away].sum(axis=1) / variance
    return SobolReport(labels=s.output_labels, input_names=s.input_spec.names,
                       subsets=tuple(subsets), indices=indices, totals=totals)


def surrogate_to_json(s: PceSurrogate) -> str:
    """Serialize a surrogate; floats round-trip exactly via repr encoding."""
    doc = {
        "format": "uqueue-surrogate/1",
        "dimension": s.basis.dimension,
        "degree": s.basis.degree,
        "inputs": [
            {"name": p.name, "germ": p.germ, "mean": p.mean, "sigma": p.sigma}
            for p in s.input_spec.parameters
        ],
        "output_labels": list(s.output_labels),
        "coefficients": [list(map(float, row)) for row in s.coefficients],
    }
    return json.dumps(doc, indent=2)


def surrogate_from_json(text: str) -> PceSurrogate:
    """Rebuild a surrogate written by surrogate_to_json."""
    doc = json.loads(text)
    if doc.get("format") != "uqueue-surrogate/1":
        raise ValidationError("unrecognized surrogate document format")
    spec = input_spec(
        (i["name"], i["germ"], i["mean"], i["sigma"]) for i in doc["inputs"]
    )
    basis = basis_for_spec(spec, int(doc["degree"]))
    coeffs = np.asarray(doc["coefficients"], dtype=float)
    return PceSurrogate(basis=basis, coefficients=coeffs, input_spec=spec,
                        output_labels=tuple(doc["output_labels"]))
