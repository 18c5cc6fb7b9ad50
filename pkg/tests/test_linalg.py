import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fedlowrank as fl
from fedlowrank.linalg import GRAM_NOISE_FLOOR

import oracles


class TestDenseMatrix:
    def test_shape_and_flat_data(self):
        m = fl.DenseMatrix([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        assert (m.rows, m.cols) == (3, 2)
        assert m.data.tolist() == [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
        assert m.data.size == m.rows * m.cols

    def test_rejects_nonfinite_and_empty(self):
        with pytest.raises(ValueError):
            fl.DenseMatrix([[1.0, float("nan")]])
        with pytest.raises(ValueError):
            fl.DenseMatrix([[1.0, float("inf")]])
        with pytest.raises(ValueError):
            fl.DenseMatrix(np.zeros((0, 3)))

    def test_backing_array_is_readonly(self):
        m = fl.DenseMatrix([[1.0]])
        with pytest.raises(ValueError):
            m.ndarray[0, 0] = 2.0

    def test_from_flat_round_trip(self):
        m = fl.DenseMatrix.from_flat(2, 3, [1, 2, 3, 4, 5, 6])
        assert m.ndarray[1, 0] == 4.0
        with pytest.raises(ValueError):
            fl.DenseMatrix.from_flat(2, 2, [1, 2, 3])


class TestGaussian:
    def test_identical_seed_identical_matrix(self):
        a = fl.gaussian(2, 2, 1234)
        b = fl.gaussian(2, 2, 1234)
        assert np.array_equal(a.ndarray, b.ndarray)

    def test_distinct_seeds_differ(self):
        a = fl.gaussian(3, 2, 1)
        b = fl.gaussian(3, 2, 2)
        assert not np.array_equal(a.ndarray, b.ndarray)

    def test_moments_at_scale(self):
        m = fl.gaussian(1000, 1000, 99).data
        assert -0.01 <= m.mean() <= 0.01
        assert 0.99 <= m.var() <= 1.01

    def test_zero_dimension_rejected(self):
        with pytest.raises(ValueError):
            fl.gaussian(0, 3, 1)
        with pytest.raises(ValueError):
            fl.gaussian(3, 0, 1)


class TestMatmul:
    def test_identity(self):
        m = fl.gaussian(3, 3, 5)
        out = fl.matmul(fl.DenseMatrix.identity(3), m)
        assert np.array_equal(out.ndarray, m.ndarray)

    def test_hand_computed(self):
        a = fl.DenseMatrix([[1, 2], [3, 4]])
        b = fl.DenseMatrix([[0], [1]])
        assert fl.matmul(a, b).ndarray.ravel().tolist() == [2.0, 4.0]

    def test_against_triple_loop_oracle(self):
        a = fl.gaussian(7, 5, 10)
        b = fl.gaussian(5, 3, 11)
        expected = oracles.matmul_triple_loop(a.ndarray, b.ndarray)
        assert np.abs(fl.matmul(a, b).ndarray - expected).max() <= 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            fl.matmul(fl.gaussian(2, 3, 1), fl.gaussian(2, 3, 1))

    def test_flop_accounting(self):
        counter = fl.FlopCounter()
        fl.matmul(fl.gaussian(4, 5, 1), fl.gaussian(5, 6, 2), counter)
        assert counter.total == 2 * 4 * 5 * 6
        fl.matmul(fl.gaussian(2, 2, 1), fl.gaussian(2, 2, 2), counter)
        assert counter.total == 2 * 4 * 5 * 6 + 2 * 2 * 2 * 2


class TestFrobenius:
    def test_zero_and_identity(self):
        assert fl.frobenius_sq(fl.DenseMatrix.zeros(3, 4)) == 0.0
        assert fl.frobenius_sq(fl.DenseMatrix.identity(4)) == 4.0

    def test_matches_spectrum(self):
        m = fl.gaussian(6, 4, 20)
        total = sum(s**2 for s in fl.singular_values(m).values)
        assert fl.frobenius_sq(m) == pytest.approx(total, rel=1e-8)

    @settings(max_examples=25, deadline=None)
    @given(
        rows=st.integers(1, 12),
        cols=st.integers(1, 12),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_spectrum_identity_property(self, rows, cols, seed):
        m = fl.gaussian(rows, cols, seed)
        total = float(fl.singular_values(m).values @ fl.singular_values(m).values)
        assert fl.frobenius_sq(m) == pytest.approx(total, rel=1e-8)


class TestSymEig:
    def test_diagonal(self):
        res = fl.sym_eig(fl.DenseMatrix(np.diag([3.0, 1.0, 2.0])))
        assert res.eigenvalues.tolist() == [3.0, 2.0, 1.0]

    def test_two_by_two_closed_form(self):
        res = fl.sym_eig(fl.DenseMatrix([[2.0, 1.0], [1.0, 2.0]]))
        assert res.eigenvalues == pytest.approx([3.0, 1.0])

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            fl.sym_eig(fl.DenseMatrix([[1.0, 2.0], [0.0, 1.0]]))
        with pytest.raises(ValueError):
            fl.sym_eig(fl.gaussian(3, 4, 1))

    @pytest.mark.parametrize("n", [2, 10, 33, 64])
    def test_reconstruction_and_orthonormality(self, n):
        g = fl.gaussian(n, n, 321 + n).ndarray
        a = fl.DenseMatrix((g + g.T) / 2.0)
        res = fl.sym_eig(a)
        q = res.eigenvectors.ndarray
        recon = q @ np.diag(res.eigenvalues) @ q.T
        norm_a = np.linalg.norm(a.ndarray)
        assert np.linalg.norm(recon - a.ndarray) <= 1e-9 * norm_a
        assert np.linalg.norm(q.T @ q - np.eye(n)) <= 1e-10 * math.sqrt(n)
        for k in range(n):
            resid = a.ndarray @ q[:, k] - res.eigenvalues[k] * q[:, k]
            assert np.linalg.norm(resid) <= 1e-9 * norm_a


class TestSingularValues:
    def test_diagonal(self):
        s = fl.singular_values(fl.DenseMatrix(np.diag([5.0, 3.0])))
        assert s.values.tolist() == [5.0, 3.0]

    def test_orthonormal_columns_give_ones(self):
        q = fl.orthonormalize(fl.gaussian(9, 4, 3))
        assert fl.singular_values(q).values == pytest.approx(np.ones(4), abs=1e-12)

    def test_matches_bidiagonal_svd(self):
        m = fl.gaussian(8, 5, 77)
        ref = oracles.svd_spectrum(m.ndarray)
        assert fl.singular_values(m).values == pytest.approx(ref, rel=1e-9)

    def test_noise_floor_clamp_keeps_rank_sharp(self):
        # rank-2 matrix: values 3..r must be exactly zero, not sqrt(eps) dust
        a = fl.gaussian(30, 2, 4).ndarray @ fl.gaussian(2, 20, 5).ndarray
        s = fl.singular_values(fl.DenseMatrix(a))
        assert (s.values > 0).sum() == 2
        assert s.values[2] == 0.0

    def test_spectrum_sigma_indexing(self):
        s = fl.Spectrum(np.array([4.0, 2.0, 1.0]))
        assert s.sigma(1) == 4.0 and s.sigma(3) == 1.0
        assert s.sigma(4) == 0.0
        with pytest.raises(ValueError):
            s.sigma(0)


class TestConditionNumber:
    def test_identity_and_diag(self):
        assert fl.condition_number(fl.DenseMatrix.identity(5)) == pytest.approx(1.0)
        assert fl.condition_number(fl.DenseMatrix(np.diag([4.0, 2.0]))) == pytest.approx(2.0)

    def test_matches_explicit_ratio(self):
        m = fl.gaussian(60, 4, 15)
        ref = oracles.svd_spectrum(m.ndarray)
        kappa = fl.condition_number(m)
        assert kappa == pytest.approx(ref[0] / ref[-1], rel=1e-8)
        assert kappa > 1.0

    def test_rank_deficient_carries_sigma_min(self):
        a = fl.gaussian(8, 2, 6).ndarray @ fl.gaussian(2, 5, 7).ndarray
        with pytest.raises(fl.RankDeficientError) as exc:
            fl.condition_number(fl.DenseMatrix(a))
        assert exc.value.sigma_min == 0.0


class TestOrthonormalize:
    def test_orthonormal_input_unchanged_up_to_sign(self):
        q = fl.orthonormalize(fl.gaussian(10, 3, 8))
        q2 = fl.orthonormalize(q)
        signs = np.sign(np.sum(q.ndarray * q2.ndarray, axis=0))
        assert np.abs(q2.ndarray * signs - q.ndarray).max() <= 1e-12

    def test_projector_matches_gram_schmidt_oracle(self):
        m = fl.DenseMatrix([[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]])
        q = fl.orthonormalize(m).ndarray
        q_ref = oracles.classical_gram_schmidt(m.ndarray)
        p, p_ref = q @ q.T, q_ref @ q_ref.T
        assert np.linalg.norm(p - p_ref) <= 1e-10

    def test_random_block_is_orthonormal(self):
        q = fl.orthonormalize(fl.gaussian(20, 5, 9)).ndarray
        assert np.linalg.norm(q.T @ q - np.eye(5)) <= 1e-10 * math.sqrt(5)

    def test_rank_deficient_and_wide_rejected(self):
        ones = fl.DenseMatrix(np.ones((6, 2)))
        with pytest.raises(fl.RankDeficientError):
            fl.orthonormalize(ones)
        with pytest.raises(ValueError):
            fl.orthonormalize(fl.gaussian(2, 5, 1))


class TestPinvGram:
    def test_identity_and_diagonal(self):
        assert np.allclose(fl.pinv_gram(fl.DenseMatrix.identity(3)).ndarray, np.eye(3))
        p = fl.pinv_gram(fl.DenseMatrix(np.diag([4.0, 0.0])))
        assert np.allclose(p.ndarray, np.diag([0.25, 0.0]))

    @pytest.mark.parametrize("r", [2, 5, 17, 32])
    def test_penrose_identities(self, r):
        v = fl.gaussian(r + 10, r, 40 + r)
        g = fl.DenseMatrix(v.ndarray.T @ v.ndarray)
        gp = fl.pinv_gram(g).ndarray
        gm = g.ndarray
        scale = 1e-8 * np.linalg.norm(gm)
        assert np.linalg.norm(gm @ gp @ gm - gm) <= scale
        assert np.linalg.norm(gp @ gm @ gp - gp) <= scale * max(np.linalg.norm(gp) / np.linalg.norm(gm), 1.0)
        assert np.linalg.norm((gm @ gp).T - gm @ gp) <= scale
        assert np.linalg.norm((gp @ gm).T - gp @ gm) <= scale

    def test_rank_deficient_gram_handled(self):
        v = fl.gaussian(6, 2, 50).ndarray @ np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
        g = fl.DenseMatrix(v.T @ v)
        gp = fl.pinv_gram(g).ndarray
        gm = g.ndarray
        assert np.linalg.norm(gm @ gp @ gm - gm) <= 1e-8 * np.linalg.norm(gm)


class TestDeterminism:
    def test_bit_identical_repeats(self):
        a, b = fl.gaussian(12, 7, 1000), fl.gaussian(7, 9, 2000)
        p1 = fl.matmul(a, b).ndarray
        p2 = fl.matmul(a, b).ndarray
        assert np.array_equal(p1, p2)
        sym = fl.DenseMatrix((lambda g: (g + g.T) / 2)(fl.gaussian(16, 16, 3000).ndarray))
        e1, e2 = fl.sym_eig(sym), fl.sym_eig(sym)
        assert np.array_equal(e1.eigenvalues, e2.eigenvalues)
        assert np.array_equal(e1.eigenvectors.ndarray, e2.eigenvectors.ndarray)

    def test_gram_noise_floor_documented_scale(self):
        assert GRAM_NOISE_FLOOR < 1e-12
