import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from complexlab import linalg


def laplace_det(m):
    """Cofactor expansion; independent of LU for small matrices."""
    m = np.asarray(m)
    if m.shape[0] == 1:
        return m[0, 0]
    return sum((-1) ** j * m[0, j] * laplace_det(np.delete(m[1:], j, axis=1)) for j in range(m.shape[0]))


def e(n, j):
    v = np.zeros(n, complex)
    v[j] = 1
    return v


class TestPair:
    def test_examples(self):
        assert linalg.pair(e(2, 0), e(2, 0)) == 1
        assert linalg.pair(1j * e(2, 0), e(2, 0)) == 0
        assert linalg.pair([1 + 1j, 0], [1 + 1j, 0]) == 2

    def test_matches_real_dot(self, rng):
        for _ in range(20):
            a = rng.normal(size=3) + 1j * rng.normal(size=3)
            b = rng.normal(size=3) + 1j * rng.normal(size=3)
            assert linalg.pair(a, b) == pytest.approx(linalg.realify(a) @ linalg.realify(b), abs=1e-14)

    def test_rejects_mismatch(self):
        with pytest.raises(ValueError):
            linalg.pair([1, 2], [1])


class TestRealify:
    def test_examples(self):
        np.testing.assert_array_equal(linalg.realify([1 + 2j, 3 + 4j]), [1, 2, 3, 4])
        np.testing.assert_array_equal(linalg.realify(1j * e(2, 0)), [0, 1, 0, 0])

    def test_real_linear_and_invertible(self, rng):
        u = rng.normal(size=4) + 1j * rng.normal(size=4)
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        np.testing.assert_allclose(linalg.realify(u + v), linalg.realify(u) + linalg.realify(v))
        np.testing.assert_array_equal(linalg.complexify(linalg.realify(u)), u)


class TestDeterminants:
    def test_block_det_examples(self):
        assert linalg.block_det_identity(np.eye(2), np.zeros((2, 2))) == pytest.approx((1, 1))
        assert linalg.block_det_identity(np.zeros((2, 2)), np.eye(2)) == pytest.approx((1, 1))

    def test_lu_det_matches_laplace(self, rng):
        for n in range(1, 6):
            m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            assert abs(linalg.det(m) - laplace_det(m)) <= 1e-12 * max(1, abs(laplace_det(m)))

    def test_block_det_random_3x3_independent_route(self, rng):
        B, D = rng.normal(size=(2, 3, 3))
        lhs, rhs = linalg.block_det_identity(B, D)
        assert lhs == pytest.approx(laplace_det(np.block([[B, D], [-D, B]])), rel=1e-10)
        assert rhs == pytest.approx(abs(laplace_det(B + 1j * D)) ** 2, rel=1e-10)

    @given(st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_block_det_property(self, m, seed):
        B, D = np.random.default_rng(seed).normal(size=(2, m, m))
        lhs, rhs = linalg.block_det_identity(B, D)
        assert abs(lhs - rhs) <= 1e-10 * max(1, abs(lhs))

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            linalg.block_det_identity(np.ones((2, 3)), np.ones((2, 3)))


class TestWedge:
    def test_examples(self):
        assert linalg.wedge([e(2, 0), e(2, 1)]) == pytest.approx(1)
        assert linalg.wedge([e(2, 0), e(2, 0)]) == 0
        assert linalg.wedge([e(2, 0), (e(2, 0) + e(2, 1)) / np.sqrt(2)]) == pytest.approx(0.5, abs=1e-12)

    def test_half_by_explicit_columns(self):
        # direct 4x4 determinant of the realified columns
        v = (e(2, 0) + e(2, 1)) / np.sqrt(2)
        cols = [linalg.realify(x) for x in (e(2, 0), 1j * e(2, 0), v, 1j * v)]
        assert abs(laplace_det(np.column_stack(cols))) == pytest.approx(0.5, abs=1e-12)

    def test_phase_invariance(self, rng):
        for _ in range(20):
            n, k = 4, 3
            vs = rng.normal(size=(k, n)) + 1j * rng.normal(size=(k, n))
            vs /= np.linalg.norm(vs, axis=1)[:, None]
            ph = np.exp(1j * rng.uniform(0, 2 * np.pi, k))[:, None]
            assert linalg.wedge(vs * ph) == pytest.approx(linalg.wedge(vs), abs=1e-10)

    @given(st.sampled_from([2, 3, 4]), st.integers(0, 2**32 - 1))
    def test_full_rank_equals_complex_det(self, n, seed):
        g = np.random.default_rng(seed)
        vs = g.normal(size=(n, n)) + 1j * g.normal(size=(n, n))
        vs /= np.linalg.norm(vs, axis=1)[:, None]
        assert abs(linalg.wedge(vs) - abs(np.linalg.det(vs)) ** 2) <= 1e-10

    def test_bounded_by_one_for_unit_vectors(self, rng):
        for _ in range(50):
            vs = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
            vs /= np.linalg.norm(vs, axis=1)[:, None]
            assert 0 <= linalg.wedge(vs) <= 1 + 1e-12

    def test_rejects_too_many(self):
        with pytest.raises(ValueError):
            linalg.wedge(np.eye(3)[:2].T)


class TestTakagi:
    def test_identity(self):
        tk = linalg.takagi(np.eye(3))
        np.testing.assert_allclose(tk.D, 1)
        np.testing.assert_allclose(tk.reconstruct(), np.eye(3), atol=1e-12)

    def test_swap(self):
        A = np.array([[0, 1], [1, 0]], complex)
        tk = linalg.takagi(A)
        np.testing.assert_allclose(tk.D, np.linalg.svd(A, compute_uv=False), atol=1e-12)
        np.testing.assert_allclose(tk.reconstruct(), A, atol=1e-12)

    def test_diag(self):
        tk = linalg.takagi(np.diag([2.0, 3.0]))
        np.testing.assert_allclose(tk.D, [3, 2])
        np.testing.assert_allclose(tk.reconstruct(), np.diag([2, 3]), atol=1e-12)

    @given(st.integers(1, 16), st.integers(0, 2**32 - 1), st.booleans())
    def test_reconstruction_and_unitarity(self, m, seed, degenerate):
        g = np.random.default_rng(seed)
        if degenerate:
            d = np.repeat(g.uniform(0, 2, (m + 1) // 2), 2)[:m]
            d[g.uniform(size=m) < 0.2] = 0
            U = linalg.random_unitary(m, g)
            A = U.T @ np.diag(d) @ U
            A = 0.5 * (A + A.T)
        else:
            G = g.normal(size=(m, m)) + 1j * g.normal(size=(m, m))
            A = G + G.T
        tk = linalg.takagi(A)
        norm = max(np.linalg.norm(A, 2), 1e-300)
        assert np.linalg.norm(A - tk.reconstruct(), 2) <= 1e-10 * max(norm, 1)
        np.testing.assert_allclose(tk.U @ tk.U.conj().T, np.eye(m), atol=1e-10)
        assert np.all(np.diff(tk.D) <= 1e-12) and np.all(tk.D >= 0)

    def test_rejects_nonsymmetric(self):
        with pytest.raises(ValueError):
            linalg.takagi(np.array([[1, 2], [3, 4]], complex))


def test_principal_angles_and_rank():
    a = np.eye(4)[:, :2]
    b = np.eye(4)[:, 1:3]
    np.testing.assert_allclose(linalg.principal_angles(a, b), [0, np.pi / 2], atol=1e-12)
    assert linalg.numerical_rank(np.outer([1, 2], [3, 4])) == 1
    assert linalg.numerical_rank(1e-12 * np.eye(2), scale=1.0) == 0


def test_random_matrices_orthonormal(rng):
    for n in (1, 3, 5):
        U = linalg.random_unitary(n, rng)
        Q = linalg.random_orthogonal(n, rng)
        np.testing.assert_allclose(U @ U.conj().T, np.eye(n), atol=1e-12)
        np.testing.assert_allclose(Q @ Q.T, np.eye(n), atol=1e-12)


def test_det_permutation_sign():
    for perm in itertools.permutations(range(3)):
        P = np.eye(3)[list(perm)]
        assert linalg.det(P) == pytest.approx(np.linalg.det(P))
