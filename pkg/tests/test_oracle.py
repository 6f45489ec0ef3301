import itertools
import math

import numpy as np
import pytest

from kronlev.factor import build_factor, factor_qr
from kronlev.grid_basis import BasisSpec, gauss_legendre_grid
from kronlev.indexset import IndexSetSpec, build_index_set, lexicographic_column_index
from kronlev.oracle import (
    aliasing_statistic,
    build_full,
    exact_leverage,
    flat_row_index,
    gram_statistic,
    solve_full,
)
from kronlev.sampler import make_method
from kronlev.sketch import Sketch, TargetFunction, draw_sketch


def total_degree(dimension, order):
    return build_index_set(
        IndexSetSpec(dimension=dimension, family="wlp-ball", order=order,
                     weights=(1.0,) * dimension)
    )


def full_box(shape):
    return build_index_set(
        IndexSetSpec(dimension=len(shape), family="explicit-list",
                     indices=tuple(itertools.product(*(range(1, n + 1) for n in shape))))
    )


def monomial_factors(dimension, m, n):
    return [build_factor(gauss_legendre_grid(m), BasisSpec("monomial", n))] * dimension


SMOOTH = TargetFunction("smooth", lambda c: np.exp(c.sum(axis=1)))
ZERO = TargetFunction("zero", lambda c: np.zeros(c.shape[0]))


def full_grid_sketch(system):
    """Deterministic sketch containing every grid row with v = mu weights."""
    shape = system.grid_shape
    idx0 = np.array(list(itertools.product(*(range(s) for s in shape))), dtype=np.int64)
    coords = np.zeros(idx0.shape, dtype=float)
    return Sketch("deterministic", idx0, coords, system.row_weights.copy())


class TestBuildFull:
    def test_full_box_equals_kronecker_product(self):
        factors = monomial_factors(2, 4, 2)
        system = build_full(full_box((2, 2)), factors, SMOOTH)
        kron = np.kron(factors[0].matrix, factors[1].matrix)
        assert np.max(np.abs(system.matrix - kron)) < 1e-14

    def test_column_subset_selects_kronecker_columns(self):
        factors = monomial_factors(2, 5, 3)
        index_set = total_degree(2, 2)
        system = build_full(index_set, factors, SMOOTH)
        kron = np.kron(factors[0].matrix, factors[1].matrix)
        for n, alpha in enumerate(index_set.indices):
            col = lexicographic_column_index((3, 3), alpha) - 1
            assert np.max(np.abs(system.matrix[:, n] - kron[:, col])) < 1e-14

    def test_one_dimension_is_column_restriction(self):
        factors = monomial_factors(1, 6, 4)
        index_set = total_degree(1, 2)
        system = build_full(index_set, factors, SMOOTH)
        assert np.array_equal(system.matrix, factors[0].matrix[:, :3])

    def test_row_count_is_grid_product(self):
        factors = monomial_factors(3, 20, 8)
        system = build_full(total_degree(3, 7), factors, ZERO)
        assert system.matrix.shape == (8000, 120)

    def test_size_guard(self):
        factors = monomial_factors(3, 101, 2)
        with pytest.raises(ValueError, match="dense guard"):
            build_full(total_degree(3, 1), factors, ZERO)


class TestExactLeverage:
    def test_square_invertible_gives_uniform_scores(self):
        factors = monomial_factors(1, 4, 4)
        scores = exact_leverage(build_full(total_degree(1, 3), factors, ZERO))
        assert np.max(np.abs(scores - 0.25)) < 1e-12

    def test_scores_sum_to_one(self):
        system = build_full(total_degree(2, 2), monomial_factors(2, 5, 3), SMOOTH)
        assert abs(exact_leverage(system).sum() - 1.0) < 1e-10
        assert abs(exact_leverage(system, "vb-augmented").sum() - 1.0) < 1e-10

    def test_product_identity_on_full_box(self):
        # leverage of a Kronecker product factors into per-dimension scores
        factors = monomial_factors(2, 4, 2)
        system = build_full(full_box((2, 2)), factors, ZERO)
        scores = exact_leverage(system)
        per_dim = [(factor_qr(f).q ** 2).sum(axis=1) / 2 for f in factors]
        for m1, m2 in itertools.product(range(4), repeat=2):
            row = flat_row_index(np.array([[m1, m2]]), (4, 4))[0]
            assert scores[row] == pytest.approx(per_dim[0][m1] * per_dim[1][m2], abs=1e-12)

    def test_vb_with_b_in_range_matches_plain(self):
        from kronlev.oracle import FullSystem

        factors = monomial_factors(2, 5, 3)
        index_set = total_degree(2, 2)
        base = build_full(index_set, factors, ZERO)
        x0 = np.linspace(1, 2, len(index_set))
        sys_in_range = FullSystem(
            base.matrix, base.matrix @ x0, base.row_weights, base.grid_shape
        )
        plain = exact_leverage(sys_in_range)
        vb = exact_leverage(sys_in_range, "vb-augmented")
        assert np.max(np.abs(plain - vb)) < 1e-12

    def test_vb_with_outside_b_differs_and_normalizes(self):
        factors = monomial_factors(2, 5, 3)
        system = build_full(total_degree(2, 2), factors, SMOOTH)
        plain = exact_leverage(system)
        vb = exact_leverage(system, "vb-augmented")
        assert abs(vb.sum() - 1.0) < 1e-10
        assert np.max(np.abs(plain - vb)) > 1e-6

    def test_rank_deficient_rejected(self):
        from kronlev.oracle import FullSystem

        mat = np.ones((6, 2))
        with pytest.raises(ValueError, match="rank deficient"):
            exact_leverage(FullSystem(mat, np.ones(6), np.full(6, 1 / 6), (6,)))


class TestSolveFull:
    def test_consistent_system_has_zero_error(self):
        factors = monomial_factors(2, 5, 3)
        index_set = total_degree(2, 2)
        base = build_full(index_set, factors, ZERO)
        from kronlev.oracle import FullSystem

        x0 = np.arange(1.0, 7.0)
        system = FullSystem(base.matrix, base.matrix @ x0, base.row_weights, base.grid_shape)
        solution = solve_full(system)
        assert solution.relative_error < 1e-12
        assert np.max(np.abs(solution.x - x0)) < 1e-10
        assert not solution.rank_deficient

    def test_residual_orthogonal_to_range(self):
        system = build_full(total_degree(2, 3), monomial_factors(2, 6, 4), SMOOTH)
        solution = solve_full(system)
        residual = system.rhs - system.matrix @ solution.x
        assert np.max(np.abs(system.matrix.T @ residual)) < 1e-10


class TestPropLowerBasis:
    def test_kronecker_q_columns_span_range(self):
        # product Q columns gathered over a lower set span the range of A
        factors = monomial_factors(2, 5, 3)
        index_set = total_degree(2, 2)
        system = build_full(index_set, factors, ZERO)
        qs = [factor_qr(f).q for f in factors]
        cols = []
        for alpha in index_set.indices:
            cols.append(np.kron(qs[0][:, alpha[0] - 1], qs[1][:, alpha[1] - 1]))
        q = np.column_stack(cols)
        assert np.max(np.abs(q.T @ q - np.eye(len(index_set)))) < 1e-12
        assert np.max(np.abs(q @ (q.T @ system.matrix) - system.matrix)) < 1e-10


@pytest.fixture(scope="module")
def gram_setup():
    factors = monomial_factors(2, 5, 3)
    index_set = total_degree(2, 2)
    system = build_full(index_set, factors, SMOOTH)
    u = np.linalg.qr(system.matrix)[0]
    method = make_method("leverage-lower", factors, index_set)
    return system, u, method


@pytest.fixture(scope="module")
def aliasing_setup():
    factors = monomial_factors(2, 5, 3)
    index_set = total_degree(2, 2)
    system = build_full(index_set, factors, SMOOTH)
    u = np.linalg.qr(system.matrix)[0]
    solution = solve_full(system)
    residual = system.rhs - system.matrix @ solution.x
    method = make_method("leverage-lower", factors, index_set)
    return system, u, residual, method


class TestGramStatistic:

    def test_exact_on_deterministic_full_sketch(self, gram_setup):
        system, u, _ = gram_setup
        assert gram_statistic(u, system, full_grid_sketch(system)) < 1e-10

    def test_nonnegative_and_large_for_tiny_sketch(self, gram_setup):
        system, u, method = gram_setup
        sketch = draw_sketch(method, 1, 0)
        assert gram_statistic(u, system, sketch) >= 0.0

    def test_concentrates_for_large_sketches(self, gram_setup):
        system, u, method = gram_setup
        stats = [gram_statistic(u, system, draw_sketch(method, 4000, s)) for s in range(5)]
        assert max(stats) < 0.2


class TestAliasingStatistic:

    def test_zero_when_b_in_range(self, aliasing_setup):
        system, u, _, method = aliasing_setup
        sketch = draw_sketch(method, 30, 1)
        assert aliasing_statistic(u, system, np.zeros_like(system.rhs), sketch) < 1e-12

    def test_zero_on_deterministic_full_sketch(self, aliasing_setup):
        system, u, residual, _ = aliasing_setup
        assert aliasing_statistic(u, system, residual, full_grid_sketch(system)) < 1e-10

    def test_expectation_identity(self, aliasing_setup):
        # E[statistic] = (N/K) ||b_perp||^2 over sketches
        system, u, residual, method = aliasing_setup
        k = 25
        n = u.shape[1]
        rng = np.random.default_rng(31)
        values = np.array(
            [aliasing_statistic(u, system, residual, draw_sketch(method, k, rng))
             for _ in range(4000)]
        )
        expected = n / k * float(residual @ residual)
        stderr = values.std() / math.sqrt(values.size)
        assert abs(values.mean() - expected) < 3 * stderr
