import math

import numpy as np
import pytest
import scipy.linalg

from randinfo import (SemiAxes, ball_coordinate_sq, coordinate_radius,
                      sample, section_radius)
from randinfo.experiments import trial_seed


def radius_oracle(seq, G):
    """Independent oracle in x-space: orthonormal null basis of G plus a
    generalized eigenproblem (no kernel projector, no substitution)."""
    N = scipy.linalg.null_space(np.asarray(G.entries, dtype=float))
    inv_sq = 1.0 / seq.values**2
    lam = scipy.linalg.eigh(N.T @ N, N.T @ (inv_sq[:, None] * N), eigvals_only=True)
    return math.sqrt(max(float(lam[-1]), 0.0))


def coordinate_oracle(seq, G, k):
    """Lagrangian closed form on the null-space parametrization."""
    N = scipy.linalg.null_space(np.asarray(G.entries, dtype=float))
    inv_sq = 1.0 / seq.values**2
    M = N.T @ (inv_sq[:, None] * N)
    c = N[k - 1, :]
    return math.sqrt(max(float(c @ np.linalg.solve(M, c)), 0.0))


class TestSectionRadius:
    def test_unconstrained(self):
        seq = SemiAxes.explicit([2.0, 1.0, 0.5])
        sr = section_radius(seq, sample(1, 0, 3))
        assert sr.value == 2.0

    def test_sphere_section(self):
        seq = SemiAxes.explicit([0.8] * 6)
        for n in (1, 3, 5):
            sr = section_radius(seq, sample(n, n, 6))
            assert sr.value == pytest.approx(0.8, rel=1e-10)

    def test_degenerate_segment(self):
        seq = SemiAxes.explicit([1.0, 0.0, 0.0])
        sr = section_radius(seq, sample(4, 1, 3))
        assert sr.value == 0.0
        assert sr.degenerate

    def test_n_at_least_m_is_degenerate(self):
        seq = SemiAxes.explicit([1.0, 0.5])
        assert section_radius(seq, sample(2, 2, 2)).degenerate

    def test_iterative_matches_dense(self):
        seq = SemiAxes.explicit([1.0, 0.8, 0.5, 0.3, 0.1])
        G = sample(99, 2, 5)
        dense = section_radius(seq, G, dense_cap=2048)
        it = section_radius(seq, G, dense_cap=0, tol=1e-12)
        assert dense.method == "dense" and it.method == "iterative"
        assert it.value == pytest.approx(dense.value, rel=1e-8)

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_independent_oracle(self, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(5, 24))
        n = int(rng.integers(1, m))
        seq = SemiAxes.explicit(np.sort(rng.uniform(0.05, 1, m))[::-1])
        G = sample(trial_seed(88, seed, 0), n, m)
        sr = section_radius(seq, G)
        assert sr.value == pytest.approx(radius_oracle(seq, G), rel=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_sandwich(self, seed):
        rng = np.random.default_rng(100 + seed)
        m = int(rng.integers(4, 30))
        n = int(rng.integers(1, m))
        seq = SemiAxes.explicit(np.sort(rng.uniform(0.01, 1, m))[::-1])
        sr = section_radius(seq, sample(seed, n, m))
        assert seq.sigma_value(n + 1) - 1e-9 <= sr.value <= seq.sigma_value(1) + 1e-9

    def test_monotone_in_n(self):
        seq = SemiAxes.polynomial(0.6, 0.0, m=40)
        vals = [section_radius(seq, sample(7, n, 40)).value for n in range(0, 8)]
        assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))

    def test_homogeneity(self):
        base = SemiAxes.polynomial(0.8, 0.0, m=25)
        scaled = SemiAxes.polynomial(0.8, 0.0, m=25, scale=3.7)
        G = sample(31, 4, 25)
        r1 = section_radius(base, G).value
        r2 = section_radius(scaled, G).value
        assert r2 == pytest.approx(3.7 * r1, rel=1e-10)

    def test_row_scaling_invariance(self):
        # normalizing the rows of G leaves the kernel, hence the radius, unchanged
        seq = SemiAxes.explicit([1.0, 0.7, 0.4, 0.2, 0.1, 0.05])
        G = sample(55, 2, 6)
        norms = np.linalg.norm(G.entries, axis=1, keepdims=True)
        from randinfo import GaussianInfo
        U = GaussianInfo(55, 2, 6, G.entries / norms)
        r1 = section_radius(seq, G, dense_cap=2048).value
        r2 = section_radius(seq, U, dense_cap=2048).value
        assert r2 == pytest.approx(r1, rel=1e-10)

    def test_mismatched_m_rejected(self):
        with pytest.raises(ValueError):
            section_radius(SemiAxes.explicit([1.0, 0.5]), sample(1, 1, 3))


class TestCoordinateRadius:
    def test_no_information(self):
        seq = SemiAxes.explicit([1.0, 0.5, 0.25])
        assert coordinate_radius(seq, sample(1, 0, 3), 2) == 0.5

    def test_zero_axis(self):
        seq = SemiAxes.explicit([1.0, 0.5, 0.0])
        assert coordinate_radius(seq, sample(1, 1, 3), 3) == 0.0

    def test_dominated_by_section_radius(self):
        seq = SemiAxes.explicit([1.0, 0.8, 0.5, 0.3, 0.1])
        G = sample(12, 2, 5)
        r = section_radius(seq, G).value
        for k in range(1, 6):
            assert coordinate_radius(seq, G, k) <= r + 1e-10

    @pytest.mark.parametrize("seed", range(4))
    def test_against_lagrangian_oracle(self, seed):
        rng = np.random.default_rng(200 + seed)
        seq = SemiAxes.explicit(np.sort(rng.uniform(0.1, 1, 6))[::-1])
        G = sample(trial_seed(77, seed, 0), 2, 6)
        k = int(rng.integers(1, 7))
        val = coordinate_radius(seq, G, k)
        oracle = coordinate_oracle(seq, G, k)
        assert val == pytest.approx(oracle, rel=1e-6)

    def test_bad_k(self):
        seq = SemiAxes.explicit([1.0, 0.5])
        with pytest.raises(ValueError):
            coordinate_radius(seq, sample(1, 1, 2), 3)


class TestBallCoordinate:
    def test_no_information(self):
        assert ball_coordinate_sq(sample(1, 0, 5)) == 1.0

    def test_mean_matches_dimension_ratio(self):
        m, n, trials = 10, 4, 2000
        vals = np.array([ball_coordinate_sq(sample(trial_seed(9, n, t), n, m))
                         for t in range(trials)])
        se = vals.std(ddof=1) / math.sqrt(trials)
        assert abs(vals.mean() - 0.6) <= 3 * se

    def test_two_dimensional_case(self):
        # n = m - 1 in dimension 2: squared coordinate of a uniform direction
        trials = 2000
        vals = np.array([ball_coordinate_sq(sample(trial_seed(10, 1, t), 1, 2))
                         for t in range(trials)])
        se = vals.std(ddof=1) / math.sqrt(trials)
        assert abs(vals.mean() - 0.5) <= 3 * se

    def test_requires_n_below_m(self):
        with pytest.raises(ValueError):
            ball_coordinate_sq(sample(1, 3, 3))
