import numpy as np
import pytest

from fteval import (FeatureSet, GaussianStats, NumericsError, PreconditionError,
                    ValidationError, estimate_stats, fid, frechet_distance,
                    read_stats, symmetric_eigh)
from fteval.synth import synth_features

from oracles import fid_oracle


def random_symmetric(rng, d, scale=1.0):
    a = rng.normal(scale=scale, size=(d, d))
    return (a + a.T) / 2.0


def random_spd(rng, d):
    a = rng.normal(size=(d, d))
    return a @ a.T + 0.1 * np.eye(d)


class TestJacobiEigensolver:
    @pytest.mark.parametrize("d", [1, 2, 3, 5, 10, 25, 50])
    def test_matches_lapack(self, d):
        rng = np.random.default_rng(d)
        a = random_symmetric(rng, d)
        w, v = symmetric_eigh(a)
        w_ref = np.linalg.eigvalsh(a)
        np.testing.assert_allclose(w, w_ref, atol=1e-10 * max(1.0, np.abs(w_ref).max()))
        # eigenvectors reconstruct the input
        np.testing.assert_allclose((v * w) @ v.T, a, atol=1e-10)
        np.testing.assert_allclose(v.T @ v, np.eye(d), atol=1e-12)

    def test_zero_matrix(self):
        w, v = symmetric_eigh(np.zeros((3, 3)))
        assert np.all(w == 0)
        np.testing.assert_array_equal(v, np.eye(3))

    def test_diagonal_is_exact(self):
        w, _ = symmetric_eigh(np.diag([4.0, 1.0, 9.0]))
        np.testing.assert_array_equal(w, [1.0, 4.0, 9.0])


class TestEstimateStats:
    def test_two_point_closed_form(self):
        fs = FeatureSet(np.array([[0.0, 0.0], [2.0, 2.0]]))
        s = estimate_stats(fs)
        np.testing.assert_array_equal(s.mean, [1.0, 1.0])
        np.testing.assert_array_equal(s.cov, [[2.0, 2.0], [2.0, 2.0]])

    def test_identical_rows_zero_covariance(self):
        fs = FeatureSet(np.ones((5, 3)))
        assert np.all(estimate_stats(fs).cov == 0.0)

    def test_single_row_rejected(self):
        with pytest.raises(ValidationError):
            FeatureSet(np.ones((1, 3)))


class TestFrechetDistance:
    def test_identity(self):
        rng = np.random.default_rng(0)
        s = GaussianStats(rng.normal(size=4), random_spd(rng, 4))
        assert frechet_distance(s, s) == pytest.approx(0.0, abs=1e-8)

    def test_mean_only_closed_form(self):
        a = GaussianStats(np.zeros(2), np.eye(2))
        b = GaussianStats(np.array([3.0, 4.0]), np.eye(2))
        assert frechet_distance(a, b) == pytest.approx(25.0, abs=1e-9)

    def test_diagonal_closed_form(self):
        a = GaussianStats(np.zeros(2), 4.0 * np.eye(2))
        b = GaussianStats(np.zeros(2), np.eye(2))
        assert frechet_distance(a, b) == pytest.approx(2.0, abs=1e-9)

    def test_commuting_diagonal_general(self):
        # closed form for diagonal covariances: sum (sqrt(a_i) - sqrt(b_i))^2
        rng = np.random.default_rng(1)
        da, db = rng.uniform(0.1, 5.0, size=6), rng.uniform(0.1, 5.0, size=6)
        a = GaussianStats(np.zeros(6), np.diag(da))
        b = GaussianStats(np.zeros(6), np.diag(db))
        expected = float(((np.sqrt(da) - np.sqrt(db)) ** 2).sum())
        assert frechet_distance(a, b) == pytest.approx(expected, abs=1e-9)

    def test_symmetry(self):
        rng = np.random.default_rng(2)
        a = GaussianStats(rng.normal(size=5), random_spd(rng, 5))
        b = GaussianStats(rng.normal(size=5), random_spd(rng, 5))
        ab, ba = frechet_distance(a, b), frechet_distance(b, a)
        assert ab == pytest.approx(ba, rel=1e-8)

    def test_matches_scipy_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            a = GaussianStats(rng.normal(size=6), random_spd(rng, 6))
            b = GaussianStats(rng.normal(size=6), random_spd(rng, 6))
            expected = fid_oracle(a.mean, a.cov, b.mean, b.cov)
            assert frechet_distance(a, b) == pytest.approx(expected, rel=1e-7, abs=1e-9)

    def test_dimension_mismatch(self):
        a = GaussianStats(np.zeros(2), np.eye(2))
        b = GaussianStats(np.zeros(3), np.eye(3))
        with pytest.raises(PreconditionError):
            frechet_distance(a, b)

    def test_strongly_negative_covariance_rejected(self):
        a = GaussianStats(np.zeros(2), np.diag([1.0, -0.5]))
        b = GaussianStats(np.zeros(2), np.eye(2))
        with pytest.raises(NumericsError):
            frechet_distance(a, b)

    def test_asymmetric_covariance_rejected(self):
        with pytest.raises(PreconditionError):
            GaussianStats(np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]))


class TestFid:
    def test_identical_features(self):
        fs = synth_features(0, 500, 6)
        assert fid(fs, fs) <= 1e-4

    def test_monte_carlo_mean_shift(self):
        mu = np.zeros(8)
        mu[0], mu[1] = 3.0, 4.0
        a = synth_features(1, 10_000, 8, mean=0.0, scale=1.0)
        b = synth_features(2, 10_000, 8, mean=mu, scale=1.0)
        assert fid(a, b) == pytest.approx(25.0, rel=0.05)

    def test_rotation_invariance(self):
        rng = np.random.default_rng(4)
        q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
        a = synth_features(5, 400, 6, scale=2.0)
        b = synth_features(6, 400, 6, mean=1.0, scale=0.5)
        plain = fid(a, b)
        rotated = fid(FeatureSet(a.values @ q.T), FeatureSet(b.values @ q.T))
        assert rotated == pytest.approx(plain, rel=1e-6)

    def test_degenerate_covariance_still_finite(self):
        a = synth_features(7, 50, 4, scale=0.0)   # all rows identical
        b = synth_features(8, 50, 4, scale=0.0, mean=1.0)
        value = fid(a, b)
        assert np.isfinite(value) and value >= 0.0

    def test_eps_validation(self):
        a = synth_features(9, 10, 3)
        with pytest.raises(PreconditionError):
            fid(a, a, eps=-1.0)


def test_read_stats_roundtrip(tmp_path):
    path = tmp_path / "stats.json"
    path.write_text('{"mean": [0.0, 1.0], "cov": [[2.0, 0.5], [0.5, 1.0]]}')
    s = read_stats(path)
    np.testing.assert_array_equal(s.mean, [0.0, 1.0])
    assert s.cov[0, 1] == 0.5


def test_degenerate_fid_matches_scipy_oracle():
    # zero and rank-deficient covariances exercise the eps-jitter path
    zero_a = synth_features(7, 50, 4, scale=0.0)
    zero_b = synth_features(8, 50, 4, scale=0.0, mean=1.0)
    sa, sb = estimate_stats(zero_a), estimate_stats(zero_b)
    jitter = 1e-6 * np.eye(4)
    expected = fid_oracle(sa.mean, sa.cov + jitter, sb.mean, sb.cov + jitter)
    assert fid(zero_a, zero_b) == pytest.approx(expected, abs=1e-9)

    rng = np.random.default_rng(0)
    base = rng.normal(size=(100, 2))
    lifted = np.hstack([base, base @ rng.normal(size=(2, 4))])  # rank 2 in 6-D
    low_a = FeatureSet(lifted)
    low_b = FeatureSet(lifted + rng.normal(scale=0.01, size=lifted.shape))
    sa, sb = estimate_stats(low_a), estimate_stats(low_b)
    jitter = 1e-6 * np.eye(6)
    expected = fid_oracle(sa.mean, sa.cov + jitter, sb.mean, sb.cov + jitter)
    assert fid(low_a, low_b) == pytest.approx(expected, rel=1e-4, abs=1e-7)
