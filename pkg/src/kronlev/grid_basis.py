"""One-dimensional grids (nodes + probability weights) and univariate bases.

A grid discretizes one input dimension as a finite probability measure;
the default is the Gauss-Legendre rule on [-1, 1] with its quadrature
weights normalized to sum to 1.  Basis evaluation covers plain monomials
and Legendre polynomials orthonormal under the uniform probability measure
on [-1, 1].
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid1D",
    "BasisSpec",
    "gauss_legendre_grid",
    "gauss_legendre_uniform_grid",
    "eval_basis",
    "eval_basis_matrix",
    "grid_from_json",
    "grid_to_json",
]

BASIS_KINDS = ("monomial", "legendre-orthonormal")

# Weight-sum gate: user grids within this of 1 are accepted as-is, never
# silently renormalized.
_WEIGHT_SUM_TOL = 1e-8


@dataclass(frozen=True)
class Grid1D:
    """Nodes and probability weights of a discrete measure on the line."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 1 or weights.shape != nodes.shape or nodes.size == 0:
            raise ValueError("nodes and weights must be equal-length 1D arrays")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must be strictly increasing")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        if abs(weights.sum() - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {weights.sum()!r}, not 1 (not renormalizing)")

    def __len__(self):
        return self.nodes.size


@dataclass(frozen=True)
class BasisSpec:
    """Univariate basis family and the number of functions used from it."""

    kind: str
    count: int

    def __post_init__(self):
        if self.kind not in BASIS_KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}; expected one of {BASIS_KINDS}")
        if self.count < 1:
            raise ValueError("count must be >= 1")


def _legendre_value_and_derivative(degree: int, y: np.ndarray):
    """P_degree(y) and P'_degree(y) by the three-term recurrence."""
    p_prev = np.zeros_like(y)
    p = np.ones_like(y)
    for k in range(degree):
        p_prev, p = p, ((2 * k + 1) * y * p - k * p_prev) / (k + 1)
    if degree == 0:
        return p, np.zeros_like(y)
    dp = degree * (y * p - p_prev) / (y * y - 1.0)
    return p, dp


def gauss_legendre_grid(num_nodes: int) -> Grid1D:
    """Gauss-Legendre rule on [-1, 1] as a probability measure.

    Nodes are the roots of the degree-M Legendre polynomial, found by Newton
    iteration from the Chebyshev-angle initial guess; weights are the
    quadrature weights divided by 2.  Converged when every Newton correction
    |P_M/P'_M| is below 1e-14; raises after 100 sweeps otherwise.
    """
    M = int(num_nodes)
    if M < 1:
        raise ValueError("need at least one node")
    if M == 1:
        return Grid1D(np.zeros(1), np.ones(1))
    i = np.arange(1, M + 1)
    y = np.cos(np.pi * (4 * i - 1) / (4 * M + 2))
    converged = False
    for _ in range(100):
        p, dp = _legendre_value_and_derivative(M, y)
        step = p / dp
        y = y - step
        if np.max(np.abs(step)) <= 1e-14:
            converged = True
            break
    if not converged:
        raise RuntimeError(f"Gauss-Legendre Newton iteration failed to converge for M={M}")
    p, dp = _legendre_value_and_derivative(M, y)
    # cos gives descending nodes; flip, then symmetrize so the rule is
    # exactly even (the midpoint of an odd rule lands on exactly 0.0)
    y = y[::-1]
    dp = dp[::-1]
    y = 0.5 * (y - y[::-1])
    w = 1.0 / ((1.0 - y * y) * dp * dp)  # quadrature weight 2/((1-y^2)P'^2), halved
    w = 0.5 * (w + w[::-1])
    return Grid1D(y, w)


def gauss_legendre_uniform_grid(num_nodes: int) -> Grid1D:
    """Gauss-Legendre nodes carrying *uniform* weights 1/M.

    This is the discrete measure used by the reference relative-error
    studies: the grid nodes come from the quadrature rule but every node
    counts equally.
    """
    base = gauss_legendre_grid(num_nodes)
    return Grid1D(base.nodes, np.full(len(base), 1.0 / len(base)))


def eval_basis(spec: BasisSpec, j: int, y: float) -> float:
    """Value of the j-th basis function (1-based, j <= spec.count) at y."""
    if not 1 <= j <= spec.count:
        raise ValueError(f"basis index {j} outside [1, {spec.count}]")
    return float(eval_basis_matrix(spec, np.asarray([y], dtype=float))[0, j - 1])


def eval_basis_matrix(spec: BasisSpec, y: np.ndarray) -> np.ndarray:
    """All basis values at the points ``y``; shape (len(y), count).

    The Legendre variant returns sqrt(2j-1) * P_{j-1}(y), orthonormal with
    respect to the uniform probability measure on [-1, 1].
    """
    y = np.asarray(y, dtype=float)
    n = spec.count
    out = np.empty((y.size, n))
    if spec.kind == "monomial":
        out[:, 0] = 1.0
        for j in range(1, n):
            out[:, j] = out[:, j - 1] * y
        return out
    out[:, 0] = 1.0
    if n > 1:
        out[:, 1] = y
    for k in range(1, n - 1):
        out[:, k + 1] = ((2 * k + 1) * y * out[:, k] - k * out[:, k - 1]) / (k + 1)
    return out * np.sqrt(2.0 * np.arange(n) + 1.0)


def grid_from_json(obj) -> Grid1D:
    """Load a grid from a JSON object/string {"nodes": [...], "weights": [...]}."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict):
        raise ValueError("grid JSON must be an object")
    unknown = set(obj) - {"nodes", "weights"}
    if unknown:
        raise ValueError(f"unknown grid keys: {sorted(unknown)}")
    if "nodes" not in obj or "weights" not in obj:
        raise ValueError("grid JSON needs both 'nodes' and 'weights'")
    nodes = np.asarray(obj["nodes"], dtype=float)
    weights = np.asarray(obj["weights"], dtype=float)
    if not np.all(np.isfinite(nodes)) or not np.all(np.isfinite(weights)):
        raise ValueError("grid nodes/weights must be finite")
    return Grid1D(nodes, weights)


def grid_to_json(grid: Grid1D) -> dict:
    return {"nodes": grid.nodes.tolist(), "weights": grid.weights.tolist()}


def legendre_reference_check(grid: Grid1D, max_degree: int) -> float:
    """Worst absolute error integrating y^k, k <= max_degree, against [-1,1] moments."""
    worst = 0.0
    for k in range(max_degree + 1):
        exact = 0.0 if k % 2 else 1.0 / (k + 1)
        approx = float(np.sum(grid.weights * grid.nodes**k))
        worst = max(worst, abs(approx - exact))
    return worst
