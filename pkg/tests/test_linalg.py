from __future__ import annotations

import numpy as np
import pytest

from maskcomplete import (
    determinant,
    numerical_rank,
    random_factors,
    random_rank_r,
    svd_compact,
)

from conftest import RANK1_3X3
from oracles import cofactor_determinant, gram_eigenvalues


class TestDeterminant:
    def test_identity(self):
        for k in range(1, 6):
            assert determinant(np.eye(k)) == pytest.approx(1.0)

    def test_rank_one_two_by_two_vanishes(self):
        # The defining 2-minor identity of a rank-1 matrix.
        assert determinant(np.array([[1.0, 2.0], [2.0, 4.0]])) == pytest.approx(0.0, abs=1e-14)

    def test_against_cofactor_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = rng.standard_normal((4, 4))
            expected = cofactor_determinant(a)
            assert determinant(a) == pytest.approx(expected, rel=1e-10)

    def test_multiplicativity(self):
        rng = np.random.default_rng(1)
        for dim in (2, 3, 5, 8):
            a = rng.standard_normal((dim, dim))
            b = rng.standard_normal((dim, dim))
            assert determinant(a @ b) == pytest.approx(
                determinant(a) * determinant(b), rel=1e-9
            )

    def test_swap_changes_sign(self):
        a = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert determinant(a) == pytest.approx(-1.0)

    def test_non_square_rejected(self):
        with pytest.raises(ValueError, match="square"):
            determinant(np.ones((2, 3)))


class TestNumericalRank:
    def test_zero_matrix(self):
        assert numerical_rank(np.zeros((4, 4))) == 0

    def test_intro_matrix_rank_one(self):
        assert numerical_rank(RANK1_3X3) == 1

    def test_product_rank_three(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((7, 3)) @ rng.standard_normal((3, 9))
        assert numerical_rank(a) == 3

    def test_tol_must_be_positive(self):
        with pytest.raises(ValueError):
            numerical_rank(np.eye(2), tol=0.0)


class TestRandomRankR:
    def test_full_rank_when_r_is_min_dim(self):
        a = random_rank_r(4, 6, 4, seed=0)
        assert numerical_rank(a) == 4

    def test_rank_one_minors_vanish(self):
        a = random_rank_r(3, 3, 1, seed=5)
        scale = np.max(np.abs(a)) ** 2
        for i in range(2):
            for j in range(2):
                minor = determinant(a[np.ix_([i, i + 1], [j, j + 1])])
                assert abs(minor) <= 1e-10 * scale

    def test_rank_matches_construction(self):
        assert numerical_rank(random_rank_r(10, 15, 3, seed=9)) == 3

    def test_never_exceeds_rank(self):
        for seed in range(10):
            a = random_rank_r(8, 6, 2, seed=seed)
            s = svd_compact(a)[0]
            assert s[2] <= 1e-9 * s[0]

    def test_deterministic(self):
        assert np.array_equal(random_rank_r(5, 5, 2, 3), random_rank_r(5, 5, 2, 3))

    def test_bad_rank_rejected(self):
        with pytest.raises(ValueError):
            random_rank_r(3, 3, 4, seed=0)
        with pytest.raises(ValueError):
            random_factors(3, 3, 0, seed=0)


class TestSvdCompact:
    def test_diagonal(self):
        s, _, _ = svd_compact(np.diag([3.0, 1.0]))
        assert np.allclose(s, [3.0, 1.0])

    def test_rank_one_outer_product(self):
        u = np.array([1.0, 2.0, 2.0])
        v = np.array([3.0, 4.0])
        s, _, _ = svd_compact(np.outer(u, v))
        assert s[0] == pytest.approx(np.linalg.norm(u) * np.linalg.norm(v))
        assert s[1] == pytest.approx(0.0, abs=1e-12)

    def test_reconstruction(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((6, 4))
        s, u, vt = svd_compact(a)
        err = np.linalg.norm(a - (u * s) @ vt)
        assert err <= 1e-10 * np.linalg.norm(a)

    def test_against_charpoly_eigenvalue_oracle(self):
        rng = np.random.default_rng(4)
        a = rng.standard_normal((6, 4))
        s = svd_compact(a)[0]
        eigs = gram_eigenvalues(a)
        assert np.allclose(np.sort(s**2)[::-1], eigs, rtol=1e-8, atol=1e-8)

    def test_frobenius_identity(self):
        rng = np.random.default_rng(6)
        for shape in ((5, 5), (7, 3), (2, 9)):
            a = rng.standard_normal(shape)
            s = svd_compact(a)[0]
            assert np.sum(s**2) == pytest.approx(np.linalg.norm(a) ** 2, rel=1e-9)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            svd_compact(np.array([[np.inf, 1.0], [0.0, 1.0]]))
