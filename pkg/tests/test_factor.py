import numpy as np
import pytest

from kronlev.factor import (
    build_alias,
    build_factor,
    draw,
    factor_qr,
    leverage_table,
    normalized_column_table,
    sample_nu_kd,
)
from kronlev.grid_basis import BasisSpec, gauss_legendre_grid


def monomial_factor(m, n):
    return build_factor(gauss_legendre_grid(m), BasisSpec("monomial", n))


def legendre_factor(m, n):
    return build_factor(gauss_legendre_grid(m), BasisSpec("legendre-orthonormal", n))


class TestBuildFactor:
    def test_constant_column_is_root_weights(self):
        f = monomial_factor(3, 1)
        assert np.allclose(f.matrix[:, 0], np.sqrt([5 / 18, 8 / 18, 5 / 18]), atol=1e-15)

    def test_legendre_columns_orthonormal_under_exact_quadrature(self):
        f = legendre_factor(3, 3)
        assert np.max(np.abs(f.matrix.T @ f.matrix - np.eye(3))) < 1e-14

    def test_more_columns_than_rows_rejected(self):
        with pytest.raises(ValueError, match="full column rank"):
            monomial_factor(2, 3)


class TestFactorQr:
    def test_orthonormal_input_passes_through(self):
        f = legendre_factor(10, 5)
        dec = factor_qr(f)
        assert np.max(np.abs(dec.q - f.matrix)) < 1e-10
        assert np.max(np.abs(dec.r - np.eye(5))) < 1e-10

    def test_qr_invariants_on_monomials(self):
        f = monomial_factor(20, 10)
        dec = factor_qr(f)
        assert np.max(np.abs(dec.q.T @ dec.q - np.eye(10))) < 1e-10
        assert np.max(np.abs(dec.q @ dec.r - f.matrix)) < 1e-10 * np.max(np.abs(f.matrix))
        assert np.all(np.diag(dec.r) > 0)
        assert np.max(np.abs(np.triu(dec.r) - dec.r)) == 0

    def test_duplicate_column_raises_with_position(self):
        f = monomial_factor(5, 3)
        broken = f.matrix.copy()
        broken[:, 2] = broken[:, 1]
        from kronlev.factor import FactorMatrix

        with pytest.raises(ValueError, match="column 3"):
            factor_qr(FactorMatrix(broken, f.grid, f.basis))


class TestLeverageTable:
    def test_rows_are_probability_vectors(self):
        table = leverage_table(factor_qr(monomial_factor(9, 4)))
        assert np.max(np.abs(table.table.sum(axis=1) - 1.0)) < 1e-10
        assert np.all(table.table >= 0)

    def test_constant_function_row_equals_weights(self):
        g = gauss_legendre_grid(7)
        table = leverage_table(factor_qr(build_factor(g, BasisSpec("monomial", 3))))
        assert np.allclose(table.table[0], g.weights, atol=1e-14)

    def test_against_independent_recomputation(self):
        # q_k(y_m) = [V R^{-1}]_{m,k} with V the raw basis values
        from kronlev.grid_basis import eval_basis_matrix

        g = gauss_legendre_grid(8)
        basis = BasisSpec("monomial", 5)
        f = build_factor(g, basis)
        dec = factor_qr(f)
        raw = eval_basis_matrix(basis, g.nodes)
        q_func = raw @ np.linalg.inv(dec.r)
        recomputed = (g.weights[:, None] * q_func**2).T
        table = leverage_table(dec)
        assert np.max(np.abs(table.table - recomputed)) < 1e-14

    def test_square_case_marginal_is_uniform(self):
        table = leverage_table(factor_qr(monomial_factor(6, 6)))
        assert np.max(np.abs(table.marginal() - 1.0 / 6.0)) < 1e-10

    def test_normalized_column_table_requires_orthogonality(self):
        with pytest.raises(ValueError, match="not orthogonal"):
            normalized_column_table(monomial_factor(8, 4))

    def test_normalized_column_table_matches_qr_for_orthogonal_columns(self):
        f = legendre_factor(12, 5)
        a = normalized_column_table(f).table
        b = leverage_table(factor_qr(f)).table
        assert np.max(np.abs(a - b)) < 1e-12


class TestAlias:
    def test_singleton_always_drawn(self):
        sampler = build_alias([1.0])
        rng = np.random.default_rng(0)
        assert all(draw(sampler, rng) == 0 for _ in range(10))

    def test_reconstruction_identity(self):
        p = np.array([5 / 18, 8 / 18, 5 / 18])
        sampler = build_alias(p)
        assert np.max(np.abs(sampler.reconstructed() - p)) < 1e-12

    def test_reconstruction_identity_random(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            p = rng.dirichlet(np.ones(rng.integers(1, 30)))
            assert np.max(np.abs(build_alias(p).reconstructed() - p)) < 1e-12

    def test_fair_coin_frequencies(self):
        sampler = build_alias([0.5, 0.5])
        rng = np.random.default_rng(7)
        n = 10**6
        ones = int(np.sum(draw(sampler, rng, size=n)))
        sigma = np.sqrt(n * 0.25)
        assert abs(ones - n / 2) < 3 * sigma

    def test_input_validation(self):
        with pytest.raises(ValueError):
            build_alias([0.5, -0.5])
        with pytest.raises(ValueError):
            build_alias([0.0, 0.0])
        with pytest.raises(ValueError):
            build_alias([0.3, 0.3])


class TestSampleNuKd:
    def test_one_hot_row_is_deterministic(self):
        nodes = np.array([-1.0, 0.0, 1.0])
        table_rows = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])
        from kronlev.factor import LeverageTable1D

        tables = LeverageTable1D(table_rows)
        rng = np.random.default_rng(3)
        assert all(sample_nu_kd(tables, 1, rng) == 2 for _ in range(20))
        assert all(sample_nu_kd(tables, 2, rng) == 1 for _ in range(20))

    def test_empirical_law_close_in_total_variation(self):
        table = leverage_table(factor_qr(monomial_factor(10, 4)))
        rng = np.random.default_rng(11)
        k = 3
        n = 10**5
        drawn = sample_nu_kd(table, np.full(n, k), rng) - 1
        freq = np.bincount(drawn, minlength=10) / n
        tv = 0.5 * np.sum(np.abs(freq - table.table[k - 1]))
        assert tv < 0.01

    def test_out_of_range_k(self):
        table = leverage_table(factor_qr(monomial_factor(5, 2)))
        with pytest.raises(ValueError):
            sample_nu_kd(table, 3, np.random.default_rng(0))

    def test_vectorized_k_shapes(self):
        table = leverage_table(factor_qr(monomial_factor(5, 2)))
        rng = np.random.default_rng(0)
        out = sample_nu_kd(table, np.array([1, 2, 1, 2]), rng)
        assert out.shape == (4,)
        assert np.all((out >= 1) & (out <= 5))
