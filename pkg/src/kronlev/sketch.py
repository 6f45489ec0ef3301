"""Assembling and solving the sketched least squares problem.

A sketch is K iid grid points drawn from a sampling method, each carrying
the unbiasing weight v_k = (1/K) * mu(Y_k) / nu(Y_k).  The sketched system
scales basis values and right-hand side samples by sqrt(v_k); its least
squares solution approximates the full weighted problem.  Theoretical
sample-size lower bounds from the residual guarantees are provided as a
calculator, and the full-grid relative error is evaluated by streaming
rows so the dense design matrix is never materialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.linalg import solve_triangular

from .factor import FactorMatrix
from .grid_basis import BasisSpec, eval_basis_matrix
from .indexset import MultiIndexSet
from .sampler import SamplerMethod, mu_mass_many, point_mass_many, sample_indices

__all__ = [
    "TargetFunction",
    "Sketch",
    "SketchedSystem",
    "Solution",
    "draw_sketch",
    "assemble",
    "solve",
    "full_relative_error",
    "sample_size",
    "truncate",
]

SAMPLE_SIZE_BOUNDS = ("instance-Vb", "instance-V", "expectation", "truncation", "embedding")

_RANK_RTOL = 1e-12
_CHUNK_ROWS = 65536
_MAX_STREAM_ROWS = 10**8


@dataclass(frozen=True)
class TargetFunction:
    """Deterministic map from grid-point coordinates to data values.

    ``fn`` must accept an (n, D) coordinate array and return n values; the
    same input must always produce the same output.
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, coords: np.ndarray) -> np.ndarray:
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        return np.asarray(self.fn(coords), dtype=float).reshape(coords.shape[0])


@dataclass(frozen=True)
class Sketch:
    """K sampled grid points with their unbiasing weights."""

    method_tag: str
    indices0: np.ndarray  # (K, D) 0-based node indices
    coords: np.ndarray    # (K, D) resolved coordinates
    weights: np.ndarray   # (K,) v_k, all finite and > 0
    seed: Optional[int] = None

    @property
    def size(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class SketchedSystem:
    """The sqrt(v_k)-scaled design matrix and right-hand side."""

    matrix: np.ndarray  # (K, N)
    rhs: np.ndarray     # (K,)


@dataclass(frozen=True)
class Solution:
    """Least squares solution of a sketched system."""

    x: np.ndarray
    residual_norm: float
    rank_deficient: bool


def draw_sketch(
    method: SamplerMethod,
    count: int,
    seed: Union[int, np.random.Generator, None],
) -> Sketch:
    """Draw K iid points from the method and attach unbiasing weights."""
    if count < 1:
        raise ValueError("sketch size must be >= 1")
    if isinstance(seed, np.random.Generator):
        rng, seed_value = seed, None
    else:
        rng, seed_value = np.random.default_rng(seed), seed
    idx0 = sample_indices(method, rng, count)
    mass = point_mass_many(method, idx0)
    if np.any(mass <= 0.0):
        # a sampled point always has positive mass under its own law
        raise RuntimeError("sampled a grid point with zero point mass (internal fault)")
    weights = mu_mass_many(method.grids, idx0) / mass / count
    coords = np.column_stack([g.nodes[idx0[:, d]] for d, g in enumerate(method.grids)])
    return Sketch(method.tag, idx0, coords, weights, seed_value)


def assemble(
    index_set: MultiIndexSet,
    bases: Sequence[BasisSpec],
    sketch: Sketch,
    target: TargetFunction,
) -> SketchedSystem:
    """Evaluate sqrt(v_k) * a_alpha(Y_k) and sqrt(v_k) * b(Y_k).

    The multivariate basis value is the product over dimensions of the
    univariate basis functions picked by each multi-index; the sqrt(w_m)
    row weighting of the full problem lives inside v_k, not here.
    """
    if len(bases) != index_set.dimension:
        raise ValueError("one basis spec per dimension is required")
    root_v = np.sqrt(sketch.weights)
    cols = np.asarray(index_set.indices, dtype=np.int64) - 1
    mat = np.ones((sketch.size, len(index_set)))
    for d, basis in enumerate(bases):
        values = eval_basis_matrix(basis, sketch.coords[:, d])
        mat *= values[:, cols[:, d]]
    mat *= root_v[:, None]
    rhs = root_v * target(sketch.coords)
    return SketchedSystem(mat, rhs)


def solve(system: SketchedSystem) -> Solution:
    """QR-based least squares; rank-deficient sketches get the minimum-norm solution.

    Rank deficiency (R diagonal below 1e-12 of its largest entry, or fewer
    rows than columns) is a flagged outcome, not an error.
    """
    a, b = system.matrix, system.rhs
    k, n = a.shape
    deficient = k < n
    if not deficient:
        q, r = np.linalg.qr(a)
        diag = np.abs(np.diag(r))
        deficient = bool(np.any(diag <= _RANK_RTOL * diag.max())) if diag.size else True
        if not deficient:
            x = solve_triangular(r, q.T @ b)
    if deficient:
        x = np.linalg.lstsq(a, b, rcond=None)[0]
    residual = float(np.linalg.norm(a @ x - b))
    return Solution(x, residual, deficient)


def _stream_rows(shape: tuple[int, ...], chunk_size: int):
    total = int(np.prod(shape))
    for start in range(0, total, chunk_size):
        rows = np.arange(start, min(start + chunk_size, total))
        yield rows, np.unravel_index(rows, shape)


def full_relative_error(
    index_set: MultiIndexSet,
    factors: Sequence[FactorMatrix],
    x: np.ndarray,
    target: Optional[TargetFunction] = None,
    *,
    b_values: Optional[np.ndarray] = None,
    chunk_size: int = _CHUNK_ROWS,
) -> float:
    """||A x - b||_2 / ||b||_2 over the full grid, streamed in row chunks.

    Row m of A is sqrt(w_m) times the product of univariate basis values,
    read directly from the factor matrices.  ``b_values`` may supply
    precomputed function values b(y_m) in lexicographic order; otherwise
    ``target`` is evaluated chunk by chunk.  Partial sums are reduced in a
    fixed order so the result is bit-stable for a given chunk size.
    """
    if (target is None) == (b_values is None):
        raise ValueError("provide exactly one of target or b_values")
    shape = tuple(f.matrix.shape[0] for f in factors)
    total = int(np.prod(shape))
    if total > _MAX_STREAM_ROWS:
        raise ValueError(f"grid has {total} rows, beyond the streaming budget {_MAX_STREAM_ROWS}")
    cols = np.asarray(index_set.indices, dtype=np.int64) - 1
    x = np.asarray(x, dtype=float)
    res_parts, b_parts = [], []
    for rows, per_dim in _stream_rows(shape, chunk_size):
        block = np.ones((rows.size, len(index_set)))
        root_w = np.ones(rows.size)
        for d, f in enumerate(factors):
            block *= f.matrix[per_dim[d]][:, cols[:, d]]
            root_w *= np.sqrt(f.grid.weights[per_dim[d]])
        if b_values is not None:
            values = np.asarray(b_values, dtype=float)[rows]
        else:
            coords = np.column_stack([f.grid.nodes[per_dim[d]] for d, f in enumerate(factors)])
            values = target(coords)
        b_chunk = root_w * values
        r_chunk = block @ x - b_chunk
        res_parts.append(np.dot(r_chunk, r_chunk))
        b_parts.append(np.dot(b_chunk, b_chunk))
    return math.sqrt(float(np.sum(res_parts)) / float(np.sum(b_parts)))


def sample_size(bound: str, n: int, epsilon: float, delta: float) -> int:
    """Smallest sketch size certified by the named residual guarantee.

    ``instance-Vb`` needs epsilon in (0, 1/2); ``instance-V`` and
    ``embedding`` need epsilon in (0, 1); ``expectation``/``truncation``
    accept any epsilon > 0.  All bounds need delta in (0, 1).
    """
    if bound not in SAMPLE_SIZE_BOUNDS:
        raise ValueError(f"unknown bound {bound!r}; expected one of {SAMPLE_SIZE_BOUNDS}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    if bound == "instance-Vb":
        if not 0.0 < epsilon < 0.5:
            raise ValueError("instance-Vb requires epsilon in (0, 1/2)")
        value = 3.0 * math.log(4.0 * (n + 1) / delta) / epsilon**2 * (n + 1)
    elif bound == "instance-V":
        if not 0.0 < epsilon < 1.0:
            raise ValueError("instance-V requires epsilon in (0, 1)")
        value = (n / epsilon) * max(
            2.0 / (delta * (1.0 - epsilon) ** 2),
            3.0 * math.log(4.0 * n / delta) / epsilon,
        )
    elif bound == "embedding":
        if not 0.0 < epsilon < 1.0:
            raise ValueError("embedding requires epsilon in (0, 1)")
        value = 3.0 * math.log(4.0 * n / delta) / epsilon**2 * n
    else:
        if epsilon <= 0.0:
            raise ValueError("expectation/truncation require epsilon > 0")
        value = 2.0 * n * (1.0 / epsilon + 3.0 * math.log(2.0 * n / delta))
    return int(math.ceil(value))


def truncate(value, threshold: float):
    """Clamp to [-T, T]: the truncated estimator's pointwise transform."""
    if threshold < 0:
        raise ValueError("truncation threshold must be >= 0")
    return np.clip(value, -threshold, threshold)
