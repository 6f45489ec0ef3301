"""Per-dimension design matrices, QR factors, leverage tables, alias samplers.

For one dimension with grid (y_m, w_m) and basis functions a_1..a_N, the
factor matrix has entries sqrt(w_m) * a_n(y_m).  Its thin QR yields columns
that are discrete orthonormal functions; squaring the Q entries gives, per
column k, a probability vector over the grid nodes (the (k,d) leverage
scores).  Each of those rows gets a Vose alias table so a draw costs O(1)
after O(M) setup.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid_basis import BasisSpec, Grid1D, eval_basis_matrix

__all__ = [
    "FactorMatrix",
    "FactorDecomposition",
    "LeverageTable1D",
    "DiscreteSampler",
    "build_factor",
    "factor_qr",
    "leverage_table",
    "build_alias",
    "draw",
    "sample_nu_kd",
]

_RANK_RTOL = 1e-12


@dataclass(frozen=True)
class FactorMatrix:
    """sqrt(weight)-scaled basis values on one dimension's grid."""

    matrix: np.ndarray  # (M_d, N_d)
    grid: Grid1D
    basis: BasisSpec


@dataclass(frozen=True)
class FactorDecomposition:
    """Thin QR of a factor matrix, R diagonal normalized positive."""

    q: np.ndarray  # (M_d, N_d), orthonormal columns
    r: np.ndarray  # (N_d, N_d), upper triangular, positive diagonal


@dataclass(frozen=True)
class DiscreteSampler:
    """Vose alias tables for one finite distribution over [M]."""

    prob: np.ndarray   # acceptance probability per bucket
    alias: np.ndarray  # fallback index per bucket

    def reconstructed(self) -> np.ndarray:
        """Recover the input probabilities from the tables (identity check)."""
        m = self.prob.size
        p = self.prob.copy()
        np.add.at(p, self.alias, 1.0 - self.prob)
        return p / m


@dataclass(frozen=True)
class LeverageTable1D:
    """The (k,d) leverage scores ell_{k,m} plus per-k alias tables.

    ``table[k-1, m-1] = w_m * q_k(y_m)^2``; every row is a probability
    vector.  ``prob``/``alias`` stack the per-row alias tables so batched
    draws with mixed k values stay vectorized.
    """

    table: np.ndarray  # (N_d, M_d)
    prob: np.ndarray = field(init=False, repr=False, compare=False)
    alias: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rows = np.asarray(self.table, dtype=float)
        if np.any(rows < 0):
            raise ValueError("leverage scores must be nonnegative")
        sums = rows.sum(axis=1)
        if np.max(np.abs(sums - 1.0)) > 1e-10:
            raise ValueError("each leverage row must sum to 1")
        samplers = [build_alias(row) for row in rows]
        object.__setattr__(self, "table", rows)
        object.__setattr__(self, "prob", np.stack([s.prob for s in samplers]))
        object.__setattr__(self, "alias", np.stack([s.alias for s in samplers]))

    @property
    def num_functions(self) -> int:
        return self.table.shape[0]

    @property
    def num_nodes(self) -> int:
        return self.table.shape[1]

    def marginal(self) -> np.ndarray:
        """Uniform mixture over k: the dimension's induced distribution."""
        return self.table.mean(axis=0)


def build_factor(grid: Grid1D, basis: BasisSpec) -> FactorMatrix:
    """Assemble the M_d x N_d factor matrix sqrt(w_m) a_n(y_m)."""
    if len(grid) < basis.count:
        raise ValueError(
            f"grid has {len(grid)} nodes but basis needs {basis.count}; "
            "a factor with fewer rows than columns cannot have full column rank"
        )
    values = eval_basis_matrix(basis, grid.nodes)
    return FactorMatrix(np.sqrt(grid.weights)[:, None] * values, grid, basis)


def factor_qr(factor: FactorMatrix) -> FactorDecomposition:
    """Householder QR with positive R diagonal; rejects rank deficiency."""
    q, r = np.linalg.qr(factor.matrix)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs
    r = signs[:, None] * r
    diag = np.abs(np.diag(r))
    running_max = np.maximum.accumulate(diag)
    bad = np.nonzero(diag <= _RANK_RTOL * running_max)[0]
    if bad.size:
        raise ValueError(f"factor matrix is rank deficient at column {bad[0] + 1}")
    return FactorDecomposition(q, r)


def leverage_table(decomposition: FactorDecomposition) -> LeverageTable1D:
    """Per-(k, m) leverage scores from the orthonormal factor columns.

    The factor matrix already carries sqrt(w_m), so the weighted score
    w_m * q_k(y_m)^2 is just the squared Q entry.
    """
    return LeverageTable1D((decomposition.q ** 2).T)


def normalized_column_table(factor: FactorMatrix, gram_tol: float = 1e-10) -> LeverageTable1D:
    """Leverage table using column normalization instead of a full QR.

    Valid only when the factor columns are mutually orthogonal; the Gram
    off-diagonals are checked against ``gram_tol``, never assumed.
    """
    a = factor.matrix
    gram = a.T @ a
    off = gram - np.diag(np.diag(gram))
    if np.max(np.abs(off)) > gram_tol:
        raise ValueError(
            f"factor columns are not orthogonal (max Gram off-diagonal {np.max(np.abs(off)):.2e})"
        )
    norms = np.sqrt(np.diag(gram))
    return LeverageTable1D(((a / norms) ** 2).T)


def build_alias(probabilities) -> DiscreteSampler:
    """Vose alias tables for a finite distribution (O(M) construction)."""
    p = np.asarray(probabilities, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("need a nonempty 1D probability vector")
    if np.any(p < 0):
        raise ValueError("probabilities must be nonnegative")
    total = p.sum()
    if not (1 - 1e-9 <= total <= 1 + 1e-9):
        raise ValueError(f"probabilities sum to {total!r}, not 1")
    m = p.size
    scaled = p * (m / total)
    prob = np.ones(m)
    alias = np.arange(m)
    small = [i for i in range(m) if scaled[i] < 1.0]
    large = [i for i in range(m) if scaled[i] >= 1.0]
    while small and large:
        lo = small.pop()
        hi = large.pop()
        prob[lo] = scaled[lo]
        alias[lo] = hi
        scaled[hi] -= 1.0 - scaled[lo]
        (small if scaled[hi] < 1.0 else large).append(hi)
    for i in small + large:
        prob[i] = 1.0
        alias[i] = i
    return DiscreteSampler(prob, alias)


def draw(sampler: DiscreteSampler, rng: np.random.Generator, size=None):
    """Sample indices from the alias tables; O(1) per draw.

    Returns a scalar int for ``size=None``, else an int array.
    """
    m = sampler.prob.size
    buckets = rng.integers(0, m, size=size)
    accept = rng.random(size=size)
    out = np.where(accept < sampler.prob[buckets], buckets, sampler.alias[buckets])
    return int(out) if size is None else out


def sample_nu_kd(tables: LeverageTable1D, k, rng: np.random.Generator):
    """Node indices distributed as the k-th leverage row of one dimension.

    ``k`` is 1-based and may be an array; the output has the same shape.
    """
    k_idx = np.asarray(k) - 1
    if np.any(k_idx < 0) or np.any(k_idx >= tables.num_functions):
        raise ValueError(f"k outside [1, {tables.num_functions}]")
    buckets = rng.integers(0, tables.num_nodes, size=k_idx.shape)
    accept = rng.random(size=k_idx.shape)
    out = np.where(
        accept < tables.prob[k_idx, buckets], buckets, tables.alias[k_idx, buckets]
    )
    if np.isscalar(k) or np.asarray(k).ndim == 0:
        return int(out) + 1
    return out + 1
