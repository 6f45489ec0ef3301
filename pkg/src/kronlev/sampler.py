"""Row-sampling distributions over a tensor-product grid.

Four methods draw multivariate grid points and evaluate their point masses:

* ``uniform`` — every grid point equally likely.
* ``tensor-product`` — per dimension, pick a column uniformly and draw a
  node from its leverage row; the law is the product of the per-dimension
  induced distributions (the full Kronecker matrix's leverage scores).
* ``orthogonal-columns`` — pick a member of the index set uniformly, then
  per dimension draw from the chosen column's leverage row, with the rows
  built by column normalization (requires orthogonal factor columns).
* ``leverage-lower`` — same two-stage draw with QR-built rows; for a
  monotone lower index set this samples the *exact* leverage scores of the
  column-subset design matrix.

Point masses are evaluated on demand: the mixture sum over the index set
costs O(N*D) per query and nothing is precomputed over the full grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .factor import (
    FactorMatrix,
    LeverageTable1D,
    factor_qr,
    leverage_table,
    normalized_column_table,
    sample_nu_kd,
)
from .grid_basis import Grid1D
from .indexset import MultiIndexSet, is_monotone_lower

__all__ = [
    "METHOD_TAGS",
    "GridPoint",
    "SamplerMethod",
    "make_method",
    "sample_point",
    "sample_indices",
    "point_mass",
    "point_mass_many",
    "mu_mass",
    "mu_mass_many",
]

METHOD_TAGS = ("uniform", "tensor-product", "orthogonal-columns", "leverage-lower")


@dataclass(frozen=True)
class GridPoint:
    """One multivariate grid point: 1-based node indices and coordinates."""

    indices: tuple[int, ...]
    coords: tuple[float, ...]


@dataclass(frozen=True)
class SamplerMethod:
    """A sampling distribution bound to per-dimension tables and (optionally) an index set."""

    tag: str
    grids: tuple[Grid1D, ...]
    tables: Optional[tuple[LeverageTable1D, ...]]
    index_set: Optional[MultiIndexSet]
    index_array: Optional[np.ndarray]  # (N, D) 0-based rows of the index set

    @property
    def dimension(self) -> int:
        return len(self.grids)

    @property
    def grid_shape(self) -> tuple[int, ...]:
        return tuple(len(g) for g in self.grids)


def make_method(
    tag: str,
    factors: Sequence[FactorMatrix],
    index_set: Optional[MultiIndexSet] = None,
) -> SamplerMethod:
    """Initialize a sampling method from per-dimension factor matrices.

    ``leverage-lower`` insists the index set is monotone lower and
    ``orthogonal-columns`` that every factor has orthogonal columns; both
    requirements are verified here, not assumed.
    """
    if tag not in METHOD_TAGS:
        raise ValueError(f"unknown sampler method {tag!r}; expected one of {METHOD_TAGS}")
    grids = tuple(f.grid for f in factors)
    if tag == "uniform":
        return SamplerMethod(tag, grids, None, None, None)
    if tag == "tensor-product":
        tables = tuple(leverage_table(factor_qr(f)) for f in factors)
        return SamplerMethod(tag, grids, tables, None, None)
    if index_set is None:
        raise ValueError(f"method {tag!r} requires a multi-index set")
    if index_set.dimension != len(factors):
        raise ValueError("index set dimension does not match the number of factors")
    for d, (n_d, f) in enumerate(zip(index_set.bounding_box, factors)):
        if n_d > f.matrix.shape[1]:
            raise ValueError(
                f"index set needs {n_d} columns in dimension {d + 1}, factor has {f.matrix.shape[1]}"
            )
    if tag == "leverage-lower":
        if not is_monotone_lower(index_set):
            raise ValueError("leverage-lower sampling requires a monotone lower index set")
        tables = tuple(leverage_table(factor_qr(f)) for f in factors)
    else:
        tables = tuple(normalized_column_table(f) for f in factors)
    index_array = np.asarray(index_set.indices, dtype=np.int64) - 1
    return SamplerMethod(tag, grids, tables, index_set, index_array)


def _check_bounds(method: SamplerMethod, idx0: np.ndarray):
    shape = method.grid_shape
    if idx0.shape[-1] != len(shape):
        raise ValueError("point dimension does not match the method")
    if np.any(idx0 < 0) or np.any(idx0 >= np.asarray(shape)):
        raise ValueError("grid point index out of bounds")


def sample_indices(method: SamplerMethod, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` iid grid points; returns 0-based node indices (size, D)."""
    D = method.dimension
    out = np.empty((size, D), dtype=np.int64)
    if method.tag == "uniform":
        for d, m_d in enumerate(method.grid_shape):
            out[:, d] = rng.integers(0, m_d, size=size)
        return out
    if method.tag == "tensor-product":
        for d, tables in enumerate(method.tables):
            k = rng.integers(0, tables.num_functions, size=size)
            out[:, d] = sample_nu_kd(tables, k + 1, rng) - 1
        return out
    # two-stage draw: uniform member of the index set, then its leverage rows
    member = rng.integers(0, method.index_array.shape[0], size=size)
    for d, tables in enumerate(method.tables):
        k = method.index_array[member, d]
        out[:, d] = sample_nu_kd(tables, k + 1, rng) - 1
    return out


def sample_point(method: SamplerMethod, rng: np.random.Generator) -> GridPoint:
    """Draw one grid point according to the method's distribution."""
    idx0 = sample_indices(method, rng, 1)[0]
    coords = tuple(float(g.nodes[i]) for g, i in zip(method.grids, idx0))
    return GridPoint(tuple(int(i) + 1 for i in idx0), coords)


def point_mass_many(method: SamplerMethod, idx0: np.ndarray) -> np.ndarray:
    """Probability of each grid point (rows of 0-based indices) under the method."""
    idx0 = np.asarray(idx0, dtype=np.int64)
    single = idx0.ndim == 1
    if single:
        idx0 = idx0[None, :]
    _check_bounds(method, idx0)
    if method.tag == "uniform":
        mass = np.full(idx0.shape[0], 1.0 / np.prod(method.grid_shape))
    elif method.tag == "tensor-product":
        mass = np.ones(idx0.shape[0])
        for d, tables in enumerate(method.tables):
            mass *= tables.marginal()[idx0[:, d]]
    else:
        # uniform mixture over the index set of per-dimension row products
        prod = np.ones((idx0.shape[0], method.index_array.shape[0]))
        for d, tables in enumerate(method.tables):
            prod *= tables.table[method.index_array[:, d][None, :], idx0[:, d][:, None]]
        mass = prod.sum(axis=1) / method.index_array.shape[0]
    return mass[0] if single else mass


def point_mass(method: SamplerMethod, point: GridPoint) -> float:
    """Probability that the method draws exactly this grid point."""
    idx0 = np.asarray(point.indices, dtype=np.int64) - 1
    return float(point_mass_many(method, idx0))


def mu_mass_many(grids: Sequence[Grid1D], idx0: np.ndarray) -> np.ndarray:
    """Product-measure mass of each grid point (rows of 0-based indices)."""
    idx0 = np.asarray(idx0, dtype=np.int64)
    single = idx0.ndim == 1
    if single:
        idx0 = idx0[None, :]
    mass = np.ones(idx0.shape[0])
    for d, grid in enumerate(grids):
        col = idx0[:, d]
        if np.any(col < 0) or np.any(col >= len(grid)):
            raise ValueError("grid point index out of bounds")
        mass *= grid.weights[col]
    return mass[0] if single else mass


def mu_mass(grids: Sequence[Grid1D], point: GridPoint) -> float:
    """Underlying product-measure mass at this grid point."""
    idx0 = np.asarray(point.indices, dtype=np.int64) - 1
    return float(mu_mass_many(grids, idx0))
