import numpy as np
import pytest

from distfobs.core.numkit import (
    DEFAULT_TOLERANCES,
    ToleranceConfig,
    canonical_signs,
    eigenvalues,
    invert_with_condition,
    is_schur_stable,
    numerical_rank,
    observability_matrix,
    observable_row_space,
    orthonormal_nullspace_basis,
    orthonormal_row_basis,
    pseudo_inverse,
    real_matrix,
    residual_ok,
    row_space_contains,
    spectral_radius,
    unstable_eigenvalues,
)
from distfobs.exception import DimensionMismatch, NonFiniteEntry, SquareRequired


class TestToleranceConfig:
    def test_defaults(self):
        tol = ToleranceConfig()
        assert tol.rank_tol is None
        assert tol.residual_tol == 1e-8
        assert tol.rank_cutoff((3, 5)) == pytest.approx(np.finfo(float).eps * 5)

    def test_explicit_rank_tol(self):
        assert ToleranceConfig(rank_tol=1e-6).rank_cutoff((100, 100)) == 1e-6

    @pytest.mark.parametrize("kwargs", [
        {"stability_margin": 0.0},
        {"residual_tol": -1e-8},
        {"pbh_tol": float("nan")},
        {"rank_tol": 0.0},
    ])
    def test_rejects_nonpositive(self, kwargs):
        with pytest.raises(ValueError):
            ToleranceConfig(**kwargs)

    def test_with_overrides_skips_none(self):
        tol = ToleranceConfig()
        assert tol.with_overrides(rank_tol=None) is tol
        assert tol.with_overrides(rank_tol=1e-7, residual_tol=None).rank_tol == 1e-7

    def test_to_dict(self):
        assert set(DEFAULT_TOLERANCES.to_dict()) == {
            "rank_tol", "stability_margin", "residual_tol", "pbh_tol"}


class TestRealMatrix:
    def test_flat_list_is_one_row(self):
        assert real_matrix([1, 2, 3]).shape == (1, 3)

    def test_empty_takes_cols(self):
        assert real_matrix([], cols=4).shape == (0, 4)

    def test_read_only(self):
        M = real_matrix([[1.0, 2.0]])
        with pytest.raises(ValueError):
            M[0, 0] = 5.0

    def test_non_finite(self):
        with pytest.raises(NonFiniteEntry):
            real_matrix([[1.0, float("inf")]])

    def test_ragged(self):
        with pytest.raises(DimensionMismatch):
            real_matrix([[1.0, 2.0], [3.0]])

    def test_three_dimensional(self):
        with pytest.raises(DimensionMismatch):
            real_matrix([[[1.0]]])

    def test_shape_checks(self):
        with pytest.raises(DimensionMismatch):
            real_matrix([[1.0, 2.0]], cols=3)
        with pytest.raises(DimensionMismatch):
            real_matrix([[1.0, 2.0]], rows=2)


class TestRank:
    def test_illustration_stack(self):
        M = [[0, 2, 0], [3, 0, 0], [1, 0, 0], [0, 1, 0]]
        assert numerical_rank(M) == 2

    def test_empty_and_zero(self):
        assert numerical_rank(np.zeros((0, 3))) == 0
        assert numerical_rank(np.zeros((2, 2))) == 0

    def test_cutoff_decides(self):
        M = np.diag([1.0, 1e-10])
        assert numerical_rank(M) == 2
        assert numerical_rank(M, ToleranceConfig(rank_tol=1e-9)) == 1
        assert numerical_rank(M, rtol=1e-12) == 2


class TestSubspaces:
    def test_pseudo_inverse(self):
        Sigma = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 1.0]])
        P = pseudo_inverse(Sigma)
        np.testing.assert_allclose(Sigma @ P @ Sigma, Sigma, atol=1e-12)
        np.testing.assert_allclose(Sigma @ P, np.eye(2), atol=1e-12)

    def test_pseudo_inverse_empty(self):
        assert pseudo_inverse(np.zeros((0, 3))).shape == (3, 0)

    def test_nullspace(self):
        V = orthonormal_nullspace_basis([[1, 0, 0], [0, 1, 0]])
        np.testing.assert_allclose(V, [[0, 0, 1]], atol=1e-12)

    def test_nullspace_of_nothing_is_everything(self):
        np.testing.assert_array_equal(orthonormal_nullspace_basis(np.zeros((0, 3))), np.eye(3))

    def test_nullspace_full_rank(self):
        assert orthonormal_nullspace_basis(np.eye(2)).shape == (0, 2)

    def test_row_basis(self):
        B = orthonormal_row_basis([[2.0, 0.0], [-4.0, 0.0]])
        np.testing.assert_allclose(B, [[1.0, 0.0]], atol=1e-12)

    def test_canonical_signs(self):
        np.testing.assert_array_equal(canonical_signs([[-1.0, 2.0], [0.0, -3.0], [0.0, 0.0]]),
                                      [[1.0, -2.0], [0.0, 3.0], [0.0, 0.0]])

    def test_row_space_contains(self):
        assert row_space_contains([[1.0, 0.0]], [[2.0, 0.0]])
        assert not row_space_contains([[1.0, 0.0]], [[0.0, 1.0]])
        assert row_space_contains([[1.0, 0.0]], np.zeros((0, 2)))
        with pytest.raises(DimensionMismatch):
            row_space_contains([[1.0, 0.0]], [[1.0, 0.0, 0.0]])


class TestSpectra:
    def test_spectral_radius(self):
        assert spectral_radius([[0.5, 2.0], [0.0, 3.0]]) == pytest.approx(3.0)
        assert spectral_radius(np.zeros((0, 0))) == 0.0

    def test_schur_stability(self):
        assert is_schur_stable([[0.5]])
        assert not is_schur_stable([[1.0]])
        assert not is_schur_stable([[0.5, 2.0], [0.0, 3.0]])

    def test_unit_circle_counts_as_unstable(self):
        eigs = unstable_eigenvalues(np.diag([0.5, 1.0, -3.0]))
        np.testing.assert_allclose(sorted(eigs.real), [-3.0, 1.0])

    def test_square_required(self):
        with pytest.raises(SquareRequired):
            eigenvalues(np.zeros((2, 3)))

    def test_invert_with_condition(self):
        T_inv, cond = invert_with_condition(np.diag([2.0, 4.0]))
        np.testing.assert_allclose(T_inv, np.diag([0.5, 0.25]))
        assert cond == pytest.approx(2.0)


class TestObservability:
    def test_matrix(self):
        O = observability_matrix([[0.5, 2.0], [0.0, 3.0]], [[0.0, 1.0]])
        np.testing.assert_allclose(O, [[0.0, 1.0], [0.0, 3.0]])
        assert numerical_rank(O) == 1

    def test_row_space_motivating(self):
        Q = observable_row_space([[0.5, 2.0], [0.0, 3.0]], [[0.0, 1.0]])
        np.testing.assert_allclose(Q, [[0.0, 1.0]], atol=1e-12)

    def test_row_space_illustration(self):
        A = [[0, 2, 0], [3, 0, 0], [0, 0, 5]]
        Q = observable_row_space(A, [[0, 1, 0]])
        assert Q.shape == (2, 3)
        np.testing.assert_allclose(Q @ Q.T, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(Q[:, 2], 0.0, atol=1e-12)

    def test_row_space_full(self):
        A = [[0, 2, 0], [3, 0, 0], [1, 0, 5]]
        assert observable_row_space(A, [[0, 0, 1]]).shape == (3, 3)

    def test_no_outputs(self):
        assert observable_row_space(np.eye(2), np.zeros((0, 2))).shape == (0, 2)


def test_residual_ok():
    assert residual_ok([[1e-9]], scale=1.0)
    assert not residual_ok([[1e-7]], scale=1.0)
    assert residual_ok([[1e-7]], scale=100.0)


class TestRandomProperties:
    TOL = ToleranceConfig(rank_tol=1e-10)

    @staticmethod
    def low_rank(rng, rows, cols, rank):
        return rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, cols))

    def test_penrose_identities(self, rng):
        for rows, cols, rank in [(4, 6, 2), (6, 4, 3), (5, 5, 5), (3, 7, 1)]:
            M = self.low_rank(rng, rows, cols, rank)
            P = pseudo_inverse(M, self.TOL)
            np.testing.assert_allclose(M @ P @ M, M, atol=1e-10)
            np.testing.assert_allclose(P @ M @ P, P, atol=1e-10)
            np.testing.assert_allclose((M @ P).T, M @ P, atol=1e-10)
            np.testing.assert_allclose((P @ M).T, P @ M, atol=1e-10)

    def test_rank_of_transpose(self, rng):
        for _ in range(20):
            rows, cols = rng.integers(1, 8, size=2)
            rank = int(rng.integers(1, min(rows, cols) + 1))
            M = self.low_rank(rng, rows, cols, rank)
            assert numerical_rank(M, self.TOL) == numerical_rank(M.T, self.TOL) == rank

    def test_nullspace_basis(self, rng):
        for rows, cols, rank in [(2, 5, 2), (4, 6, 3), (3, 3, 1)]:
            M = self.low_rank(rng, rows, cols, rank)
            B = orthonormal_nullspace_basis(M, self.TOL)
            assert B.shape == (cols - rank, cols)
            np.testing.assert_allclose(B @ B.T, np.eye(cols - rank), atol=1e-10)
            np.testing.assert_allclose(M @ B.T, 0.0, atol=1e-10)

    def test_triangular_spectrum_is_diagonal(self, rng):
        for n in (1, 3, 6):
            T = np.triu(rng.standard_normal((n, n)))
            eigs = eigenvalues(T)
            np.testing.assert_allclose(eigs.imag, 0.0, atol=1e-10)
            np.testing.assert_allclose(np.sort(eigs.real), np.sort(np.diag(T)), atol=1e-10)
