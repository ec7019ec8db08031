import math

import numpy as np
import pytest

from randinfo import (ConvergenceError, GaussianInfo, KernelProjector,
                      ResourceLimitError, StructuredMatrix, kernel_projector_apply,
                      sample, singular_values, top_sv_of_projected_diag)
from randinfo.randmat import lanczos_top_eig


class TestSampling:
    def test_bitwise_determinism(self):
        a = sample(7, 3, 5)
        b = sample(7, 3, 5)
        assert np.array_equal(a.entries, b.entries)

    def test_row_nesting(self):
        small = sample(7, 2, 5)
        big = sample(7, 3, 5)
        assert np.array_equal(small.entries, big.entries[:2])

    def test_column_extension(self):
        narrow = sample(11, 4, 6)
        wide = sample(11, 4, 64)
        assert np.array_equal(narrow.entries, wide.entries[:, :6])
        assert np.array_equal(narrow.entries, wide.truncated(6).entries)

    def test_seeds_differ(self):
        assert not np.array_equal(sample(1, 2, 8).entries, sample(2, 2, 8).entries)

    def test_moments(self):
        G = sample(123, 200, 200)
        assert abs(G.entries.mean()) < 3 / 200          # 3 standard errors of the mean
        assert 0.9 < G.entries.var() < 1.1

    def test_entry_cap(self):
        with pytest.raises(ResourceLimitError):
            sample(1, 10_000, 10_000)

    def test_n_zero_rows(self):
        G = sample(5, 0, 4)
        assert G.entries.shape == (0, 4)


class TestStructuredMatrix:
    def test_weights_applied(self):
        G = sample(3, 2, 4)
        w = np.array([2.0, 1.0, 0.5, 0.0])
        S = StructuredMatrix.whole(G, w)
        assert np.allclose(S.dense, G.entries * w)

    def test_block_ranges(self):
        G = sample(3, 4, 6)
        S = StructuredMatrix(G, (1, 3), (2, 6))
        assert S.shape == (2, 4)
        assert np.array_equal(S.dense, G.entries[1:3, 2:6])

    def test_range_validation(self):
        G = sample(3, 2, 4)
        with pytest.raises(ValueError):
            StructuredMatrix(G, (0, 3), (0, 4))
        with pytest.raises(ValueError):
            StructuredMatrix(G, (0, 2), (0, 4), np.ones(3))


class TestSingularValues:
    def test_identity_fixture(self):
        s = singular_values(np.eye(3))
        assert np.allclose(s, [1.0, 1.0, 1.0])

    def test_2x2_closed_form(self):
        s = singular_values(np.array([[1.0, 1.0], [0.0, 1.0]]))
        want = [math.sqrt((3 + math.sqrt(5)) / 2), math.sqrt((3 - math.sqrt(5)) / 2)]
        assert np.allclose(s, want, rtol=1e-14)

    def test_transpose_invariance(self):
        A = sample(9, 4, 11).entries * np.linspace(1, 0.1, 11)
        s1 = singular_values(A)[0]
        s1t = singular_values(A.T)[0]
        assert s1 == pytest.approx(s1t, rel=1e-12)

    def test_non_increasing(self):
        s = singular_values(sample(2, 5, 9).entries)
        assert np.all(np.diff(s) <= 0)

    def test_dense_cap(self):
        with pytest.raises(ResourceLimitError):
            singular_values(np.eye(10), dense_cap=5)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            singular_values(np.eye(3), mode="banana")

    @pytest.mark.parametrize("seed,n,m", [(1, 3, 12), (2, 8, 40), (3, 60, 64),
                                          (4, 20, 512), (5, 127, 128)])
    def test_iterative_matches_dense(self, seed, n, m):
        w = np.sort(np.random.Generator(np.random.Philox(key=np.array(
            [seed, 99], dtype=np.uint64))).uniform(0.1, 1.0, m))[::-1]
        A = StructuredMatrix.whole(sample(seed, n, m), w)
        dense = singular_values(A, "all_dense")
        it = singular_values(A, "extreme_iterative", tol=1e-12)
        assert it[0] == pytest.approx(dense[0], rel=1e-8)
        assert it[1] == pytest.approx(dense[-1], rel=1e-8)


class TestKernelProjector:
    def test_single_row_annihilates(self):
        S = np.zeros((1, 4))
        S[0, 0] = 1.0
        e1 = np.array([1.0, 0, 0, 0])
        e2 = np.array([0.0, 1, 0, 0])
        assert np.allclose(kernel_projector_apply(S, e1), 0.0)
        assert np.allclose(kernel_projector_apply(S, e2), e2)

    def test_projector_axioms(self):
        G = sample(42, 3, 8)
        proj = KernelProjector(G.entries)
        rng = np.random.default_rng(0)
        for _ in range(5):
            v = rng.standard_normal(8)
            pv = proj.apply(v)
            assert np.linalg.norm(G.entries @ pv) < 1e-10
            assert np.allclose(proj.apply(pv), pv, atol=1e-10)

    def test_symmetry(self):
        G = sample(8, 4, 10)
        proj = KernelProjector(G.entries)
        P = proj.apply_columns(np.eye(10))
        assert np.allclose(P, P.T, atol=1e-12)

    def test_rank_deficiency_reported(self):
        row = sample(1, 1, 6).entries
        S = np.vstack([row, 2 * row])
        proj = KernelProjector(S)
        assert proj.deficient
        assert proj.rank == 1
        v = np.random.default_rng(1).standard_normal(6)
        assert np.linalg.norm(S @ proj.apply(v)) < 1e-10

    def test_not_flat_rejected(self):
        with pytest.raises(ValueError):
            KernelProjector(np.ones((5, 3)))


class TestTopSvProjectedDiag:
    def test_sphere_section(self):
        G = sample(21, 3, 9)
        est = top_sv_of_projected_diag(G.entries, np.full(9, 0.7))
        assert est.value == pytest.approx(0.7, rel=1e-12)

    def test_no_constraints(self):
        est = top_sv_of_projected_diag(np.zeros((0, 5)), np.array([3.0, 2, 1, 1, 1]))
        assert est.value == 3.0

    def test_against_dense_eigensolver(self):
        G = sample(17, 4, 12)
        w = np.linspace(1.0, 0.05, 12)
        est = top_sv_of_projected_diag(G.entries, w, tol=1e-12)
        proj = KernelProjector(G.entries)
        P = proj.apply_columns(np.eye(12))
        M = P @ np.diag(w**2) @ P
        want = math.sqrt(max(np.linalg.eigvalsh(M)[-1], 0.0))
        assert est.value == pytest.approx(want, rel=1e-8)

    def test_monotone_in_rows(self):
        w = np.linspace(1.0, 0.2, 30)
        values = []
        for n in range(1, 6):
            G = sample(5, n, 30)
            values.append(top_sv_of_projected_diag(G.entries, w).value)
        assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(3)
        G = sample(13, 3, 10).entries
        w = np.sort(rng.uniform(0.1, 1, 10))[::-1]
        perm = rng.permutation(10)
        direct = top_sv_of_projected_diag(G, w, tol=1e-12)
        permuted = top_sv_of_projected_diag(G[:, perm], w[perm], tol=1e-12)
        assert permuted.value == pytest.approx(direct.value, rel=1e-9)


class TestLanczos:
    def test_exact_on_small_diagonal(self):
        d = np.array([4.0, 1.0, 0.25, 0.01])
        est = lanczos_top_eig(lambda v: d * v, 4)
        assert est.value == pytest.approx(4.0, rel=1e-12)
        assert est.converged

    def test_multiplicity(self):
        d = np.array([2.0, 2.0, 2.0, 1.0])
        est = lanczos_top_eig(lambda v: d * v, 4)
        assert est.value == pytest.approx(2.0, rel=1e-12)

    def test_convergence_error_carries_diagnostics(self):
        d = np.linspace(1.0, 2.0, 40)
        with pytest.raises(ConvergenceError) as err:
            lanczos_top_eig(lambda v: d * v, 40, tol=1e-30, max_iter=5, min_iter=1)
        assert err.value.iterations == 5
        assert err.value.estimate is not None

    def test_dim_one(self):
        est = lanczos_top_eig(lambda v: 3.0 * v, 1)
        assert est.value == 3.0
