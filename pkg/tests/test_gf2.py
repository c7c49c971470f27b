"""GF(2) linear algebra oracles and properties."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shuttleqec import gf2
from shuttleqec.gf2 import BitMatrix


def random_matrix(rng, rows, cols, density=0.3):
    return BitMatrix((rng.random((rows, cols)) < density).astype(np.uint8))


def matrices(max_dim=12):
    return st.builds(
        lambda seed, r, c, d: random_matrix(np.random.default_rng(seed),
                                            r, c, d),
        st.integers(0, 2**32 - 1), st.integers(1, max_dim),
        st.integers(1, max_dim), st.floats(0.05, 0.7))


class TestRank:
    def test_identity(self):
        assert gf2.rank(BitMatrix.identity(7)) == 7

    def test_zero(self):
        assert gf2.rank(BitMatrix.zeros(4, 6)) == 0

    def test_known_oracle(self):
        # [DERIVED] rank computed by hand: row3 = row1 ^ row2
        M = BitMatrix(np.array([[1, 1, 0, 0],
                                [0, 1, 1, 0],
                                [1, 0, 1, 0]], dtype=np.uint8))
        assert gf2.rank(M) == 2

    @given(matrices())
    @settings(max_examples=60, deadline=None)
    def test_bounds_and_transpose(self, M):
        r = gf2.rank(M)
        assert 0 <= r <= min(M.rows, M.cols)
        assert gf2.rank(M.transpose()) == r


class TestNullspace:
    @given(matrices())
    @settings(max_examples=60, deadline=None)
    def test_kernel_annihilates(self, M):
        N = gf2.nullspace_basis(M)
        assert N.rows == M.cols - gf2.rank(M)
        if N.rows:
            prod = gf2.matmul(M, N.transpose())
            assert not prod.entries

    @given(matrices())
    @settings(max_examples=40, deadline=None)
    def test_basis_independent(self, M):
        N = gf2.nullspace_basis(M)
        if N.rows:
            assert gf2.rank(N) == N.rows


class TestSolveAffine:
    @given(matrices(), st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_solution_solves(self, M, seed):
        rng = np.random.default_rng(seed)
        x_true = (rng.random(M.cols) < 0.4).astype(np.uint8)
        s = (M.copy_array() @ x_true) % 2
        x = gf2.solve_affine(M, s)
        assert x is not None
        assert np.array_equal((M.copy_array() @ x) % 2, s)

    def test_inconsistent(self):
        M = BitMatrix(np.array([[1, 0], [1, 0]], dtype=np.uint8))
        assert gf2.solve_affine(M, np.array([1, 0], np.uint8)) is None


class TestStructure:
    def test_kron_matches_numpy(self):
        rng = np.random.default_rng(1)
        A = random_matrix(rng, 3, 4)
        B = random_matrix(rng, 2, 5)
        K = gf2.kron(A, B)
        assert np.array_equal(K.copy_array(),
                              np.kron(A.copy_array(), B.copy_array()) % 2)

    def test_matmul_oracle(self):
        A = BitMatrix(np.array([[1, 1], [0, 1]], dtype=np.uint8))
        B = BitMatrix(np.array([[1, 0], [1, 1]], dtype=np.uint8))
        # [DERIVED] (1,1;0,1)(1,0;1,1) = (0,1;1,1) over GF(2)
        assert np.array_equal(gf2.matmul(A, B).copy_array(),
                              np.array([[0, 1], [1, 1]]))

    def test_stacking(self):
        rng = np.random.default_rng(2)
        A, B = random_matrix(rng, 2, 3), random_matrix(rng, 2, 3)
        assert gf2.vstack([A, B]).shape == (4, 3)
        assert gf2.hstack([A, B]).shape == (2, 6)

    @given(matrices())
    @settings(max_examples=40, deadline=None)
    def test_text_roundtrip(self, M):
        assert BitMatrix.from_text(M.to_text()) == M

    def test_in_rowspace(self):
        M = BitMatrix(np.array([[1, 1, 0], [0, 1, 1]], dtype=np.uint8))
        assert gf2.in_rowspace(np.array([1, 0, 1], np.uint8), M)
        assert not gf2.in_rowspace(np.array([1, 0, 0], np.uint8), M)

    def test_save_load(self, tmp_path):
        M = random_matrix(np.random.default_rng(3), 5, 7)
        path = tmp_path / "m.txt"
        M.save(path)
        assert BitMatrix.load(path) == M
