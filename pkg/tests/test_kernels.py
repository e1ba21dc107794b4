import numpy as np
import scipy.sparse as sp

from graphrothe import _kernels_py, kernels


def _random_spd_csr(rng, n):
    m = sp.random(n, n, density=0.25, random_state=rng.integers(1 << 31))
    S = (m @ m.T + sp.identity(n) * n).tocsr()
    S.sort_indices()
    return S


def _csr_parts(S):
    return (np.ascontiguousarray(S.indptr, dtype=np.int64),
            np.ascontiguousarray(S.indices, dtype=np.int64),
            np.ascontiguousarray(S.data),
            np.ascontiguousarray(S.diagonal()))


class TestFallbackEquivalence:
    """The compiled and pure-Python kernels must agree bit for bit."""

    def test_seq_sum(self):
        rng = np.random.default_rng(1)
        for size in (0, 1, 7, 1000):
            a = np.ascontiguousarray(rng.normal(size=size))
            assert kernels.seq_sum(a) == _kernels_py.seq_sum(a)

    def test_seq_dot(self):
        rng = np.random.default_rng(2)
        a = np.ascontiguousarray(rng.normal(size=513))
        b = np.ascontiguousarray(rng.normal(size=513))
        assert kernels.seq_dot(a, b) == _kernels_py.seq_dot(a, b)

    def test_psor_sweep(self):
        rng = np.random.default_rng(3)
        S = _random_spd_csr(rng, 40)
        indptr, indices, data, diag = _csr_parts(S)
        b = rng.normal(size=40)
        lower = np.full(40, -0.05)
        u1 = np.zeros(40)
        u2 = np.zeros(40)
        for _ in range(200):
            d1 = kernels.psor_sweep(indptr, indices, data, diag, b, lower,
                                    u1, 1.1)
            d2 = _kernels_py.psor_sweep(indptr, indices, data, diag, b,
                                        lower, u2, 1.1)
            assert d1 == d2
        assert np.array_equal(u1, u2)


class TestSeqSemantics:
    def test_strict_left_to_right(self):
        # a sum whose value depends on evaluation order
        a = np.array([1e16, 1.0, -1e16])
        expect = ((1e16 + 1.0) + -1e16)
        assert kernels.seq_sum(a) == expect

    def test_repeatable(self):
        rng = np.random.default_rng(4)
        a = np.ascontiguousarray(rng.normal(size=999))
        assert kernels.seq_sum(a) == kernels.seq_sum(a.copy())


class TestPsorSolves:
    def test_unconstrained_matches_direct(self):
        rng = np.random.default_rng(5)
        S = _random_spd_csr(rng, 30)
        indptr, indices, data, diag = _csr_parts(S)
        b = rng.normal(size=30)
        lower = np.full(30, -1e30)
        u = np.zeros(30)
        for _ in range(2000):
            delta = kernels.psor_sweep(indptr, indices, data, diag, b,
                                       lower, u, 1.0)
            if delta < 1e-15:
                break
        ref = np.linalg.solve(S.toarray(), b)
        assert np.allclose(u, ref, rtol=0.0, atol=1e-10)

    def test_projection_feasible(self):
        rng = np.random.default_rng(6)
        S = _random_spd_csr(rng, 25)
        indptr, indices, data, diag = _csr_parts(S)
        b = rng.normal(size=25)
        lower = rng.uniform(-0.1, 0.1, size=25)
        u = np.maximum(np.zeros(25), lower)
        for _ in range(500):
            kernels.psor_sweep(indptr, indices, data, diag, b, lower, u, 1.0)
        assert np.all(u >= lower)
