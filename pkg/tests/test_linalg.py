import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimolab.linalg import SvdResult, cmatmul, conj_transpose, frobenius_norm, svd

from oracles import hermitian_2x2_eigvals, matmul_triple_loop


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


_ELEMS = st.floats(-10, 10, allow_nan=False)


@st.composite
def complex_matrices(draw, max_dim=5):
    rows = draw(st.integers(1, max_dim))
    cols = draw(st.integers(1, max_dim))
    data = draw(st.lists(st.tuples(_ELEMS, _ELEMS), min_size=rows * cols, max_size=rows * cols))
    return np.array([complex(re, im) for re, im in data]).reshape(rows, cols)


@st.composite
def conformable_pairs(draw, max_dim=4):
    m = draw(st.integers(1, max_dim))
    k = draw(st.integers(1, max_dim))
    n = draw(st.integers(1, max_dim))
    data = draw(st.lists(st.tuples(_ELEMS, _ELEMS), min_size=(m + n) * k, max_size=(m + n) * k))
    flat = np.array([complex(re, im) for re, im in data])
    return flat[: m * k].reshape(m, k), flat[m * k :].reshape(k, n)


class TestMatmul:
    def test_identity(self):
        rng = np.random.default_rng(0)
        m = random_complex(rng, (2, 2))
        assert np.array_equal(cmatmul(np.eye(2), m), m)

    def test_permutation(self):
        swap = np.array([[0, 1], [1, 0]], dtype=complex)
        col = np.array([[3 + 1j], [5 - 2j]])
        out = cmatmul(swap, col)
        assert out[0, 0] == 5 - 2j and out[1, 0] == 3 + 1j

    def test_matches_triple_loop(self):
        rng = np.random.default_rng(7)
        a = random_complex(rng, (3, 4))
        b = random_complex(rng, (4, 2))
        assert np.abs(cmatmul(a, b) - matmul_triple_loop(a, b)).max() < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            cmatmul(np.ones((2, 3)), np.ones((2, 3)))

    @given(conformable_pairs())
    @settings(max_examples=50, deadline=None)
    def test_adjoint_of_product(self, pair):
        a, b = pair
        lhs = conj_transpose(cmatmul(a, b))
        rhs = cmatmul(conj_transpose(b), conj_transpose(a))
        scale = max(1.0, np.abs(lhs).max())
        assert np.abs(lhs - rhs).max() < 1e-12 * scale


class TestConjTranspose:
    def test_real_symmetric_fixed_point(self):
        m = np.array([[1.0, 2.0], [2.0, 5.0]], dtype=complex)
        assert np.array_equal(conj_transpose(m), m)

    def test_scalar_i(self):
        assert conj_transpose(np.array([[1j]]))[0, 0] == -1j

    @given(complex_matrices())
    @settings(max_examples=50, deadline=None)
    def test_involution(self, a):
        assert np.array_equal(conj_transpose(conj_transpose(a)), a)


class TestSvd:
    def test_identity_sigma(self):
        r = svd(np.eye(2, dtype=complex))
        assert np.allclose(r.sigma, [1.0, 1.0])

    def test_antidiagonal(self):
        a = np.array([[0, 2], [1, 0]], dtype=complex)
        r = svd(a)
        assert np.allclose(r.sigma, [2.0, 1.0])
        assert np.abs(r.reconstruct() - a).max() < 1e-10
        assert np.abs(r.u.conj().T @ r.u - np.eye(2)).max() < 1e-10

    def _check_result(self, a, r: SvdResult, tol=1e-10):
        m, n = a.shape
        assert np.abs(r.u @ r.u.conj().T - np.eye(m)).max() < tol
        assert np.abs(r.v @ r.v.conj().T - np.eye(n)).max() < tol
        assert np.all(np.diff(r.sigma) <= 0)
        assert np.all(r.sigma >= 0)
        denom = max(np.linalg.norm(a), 1e-30)
        assert np.linalg.norm(r.reconstruct() - a) / denom < tol

    def test_random_2x2_reconstruction(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            a = random_complex(rng, (2, 2))
            self._check_result(a, svd(a))

    def test_rectangular_shapes(self):
        rng = np.random.default_rng(12)
        for shape in [(3, 2), (2, 3), (4, 4), (1, 3), (5, 1), (8, 8)]:
            a = random_complex(rng, shape)
            self._check_result(a, svd(a))

    def test_rank_deficient(self):
        col = np.array([[1.0 + 1j], [2.0]])
        a = col @ np.array([[1.0, -2.0]])
        r = svd(a)
        self._check_result(a, r, tol=1e-9)
        assert r.sigma[1] == 0.0

    def test_zero_matrix(self):
        r = svd(np.zeros((3, 2)))
        assert np.all(r.sigma == 0)
        assert np.abs(r.u @ r.u.conj().T - np.eye(3)).max() < 1e-12

    def test_deterministic(self):
        rng = np.random.default_rng(13)
        a = random_complex(rng, (4, 3))
        r1, r2 = svd(a), svd(a.copy())
        assert np.array_equal(r1.u, r2.u)
        assert np.array_equal(r1.sigma, r2.sigma)
        assert np.array_equal(r1.v, r2.v)

    def test_v_phase_convention(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            a = random_complex(rng, (3, 3))
            r = svd(a)
            for i in range(3):
                pivot = r.v[np.argmax(np.abs(r.v[:, i])), i]
                assert abs(pivot.imag) < 1e-12 and pivot.real > 0

    def test_singular_values_match_hermitian_eigensolver(self):
        rng = np.random.default_rng(15)
        for _ in range(100):
            a = random_complex(rng, (2, 2))
            expected = np.sqrt(np.maximum(hermitian_2x2_eigvals(a.conj().T @ a), 0.0))
            assert np.abs(svd(a).sigma - expected).max() < 1e-9

    def test_frobenius_invariant_under_factors(self):
        rng = np.random.default_rng(16)
        for _ in range(20):
            a = random_complex(rng, (3, 2))
            r = svd(a)
            assert abs(frobenius_norm(r.u.conj().T @ a) - frobenius_norm(a)) < 1e-10
            assert abs(frobenius_norm(a @ r.v) - frobenius_norm(a)) < 1e-10

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            svd(np.array([[np.nan, 0], [0, 1]]))

    def test_equal_singular_values_stable(self):
        r = svd(np.diag([3.0, 3.0]).astype(complex))
        assert np.allclose(r.sigma, [3.0, 3.0])
        # stable tie-break keeps input order of the associated vectors
        assert np.allclose(r.v, np.eye(2))
