"""Gauss quadrature rules and tensor-product grids for spectral projection."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import NumericalError, ValidationError
from .orthopoly import RecurrenceTable

_MAX_DIMS = 8


@dataclass(frozen=True)
class QuadratureRule1D:
    """Nodes (ascending) and positive weights integrating against one weight function."""

    nodes: np.ndarray
    weights: np.ndarray
    family_tag: str

    def __post_init__(self):
        if np.any(self.weights <= 0.0):
            raise NumericalError("quadrature weights must be positive")
        if np.any(np.diff(self.nodes) <= 0.0):
            raise NumericalError("quadrature nodes must be strictly increasing")
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self):
        return len(self.nodes)


def gauss_rule(rt: RecurrenceTable, n_g: int) -> QuadratureRule1D:
    """n_g-point Gauss rule for the table's weight, exact through degree 2 n_g - 1.

    Nodes and weights come from the symmetric Jacobi matrix built from
    (a, sqrt(b)): nodes are its eigenvalues and weight_i is m0 times the
    squared first component of the i-th normalized eigenvector.
    """
    if n_g < 1:
        raise ValidationError("n_g must be >= 1")
    if n_g > rt.max_degree:
        raise ValidationError(
            f"rule size {n_g} exceeds table degree {rt.max_degree}; build a larger table"
        )
    diag = rt.a[:n_g]
    off = np.sqrt(rt.b[: n_g - 1])
    try:
        nodes, vecs = eigh_tridiagonal(diag, off)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - scipy rarely fails here
        raise NumericalError(f"Jacobi eigendecomposition failed: {exc}") from exc
    weights = rt.m0 * vecs[0, :] ** 2
    return QuadratureRule1D(nodes=nodes, weights=weights, family_tag=rt.family)


@dataclass(frozen=True)
class TensorGrid:
    """Full tensor product of 1-d rules; iteration is row-major (last dim fastest)."""

    rules: tuple[QuadratureRule1D, ...]

    def __post_init__(self):
        if len(self.rules) == 0:
            raise ValidationError("tensor grid needs at least one rule")
        if len(self.rules) > _MAX_DIMS:
            raise ValidationError(f"tensor grid limited to {_MAX_DIMS} dimensions")

    @property
    def dimension(self) -> int:
        return len(self.rules)

    def __len__(self):
        size = 1
        for r in self.rules:
            size *= len(r)
        return size

    def node_matrix(self) -> np.ndarray:
        """All grid nodes as an array of shape (len(grid), d)."""
        grids = np.meshgrid(*(r.nodes for r in self.rules), indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=-1)

    def weight_vector(self) -> np.ndarray:
        """Product weights aligned with node_matrix rows."""
        grids = np.meshgrid(*(r.weights for r in self.rules), indexing="ij")
        w = np.ones(len(self))
        for g in grids:
            w = w * g.reshape(-1)
        return w

    def __iter__(self):
        nodes = self.node_matrix()
        weights = self.weight_vector()
        for i in range(len(self)):
            yield nodes[i], weights[i]


def tensor_grid(rules) -> TensorGrid:
    """Tensor product grid of the given 1-d rules (one per input dimension)."""
    return TensorGrid(rules=tuple(rules))


def integrate(fn, grid: TensorGrid) -> np.ndarray:
    """Sum of weight * fn(node) over the grid, accumulated in iteration order.

    fn maps a node vector to a scalar or 1-d array; the result is always a
    1-d array.  Non-finite values raise with the offending node.
    """
    total = None
    for node, weight in grid:
        value = np.atleast_1d(np.asarray(fn(node), dtype=float))
        if not np.all(np.isfinite(value)):
            raise NumericalError(f"integrand returned non-finite value at node {node.tolist()}")
        total = weight * value if total is None else total + weight * value
    return total
