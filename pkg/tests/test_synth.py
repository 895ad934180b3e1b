import numpy as np
import pytest

from fteval import ValidationError, adfd, derive_motion_field
from fteval.synth import SplitMix64, SynthSpec, perturb, synth_features, synth_landmarks


class TestSplitMix64:
    def test_deterministic(self):
        a = SplitMix64(99).normal(64)
        b = SplitMix64(99).normal(64)
        np.testing.assert_array_equal(a, b)

    def test_block_size_independent(self):
        # counter-based stream: chunked draws equal one big draw
        r = SplitMix64(5)
        chunked = np.concatenate([r.next_u64(3), r.next_u64(5)])
        np.testing.assert_array_equal(chunked, SplitMix64(5).next_u64(8))

    def test_uniform_range(self):
        u = SplitMix64(1).uniform(10_000)
        assert u.min() > 0.0 and u.max() <= 1.0
        assert abs(u.mean() - 0.5) < 0.02

    def test_gaussian_moments(self):
        z = SplitMix64(2).normal(100_000)
        assert abs(z.mean()) < 0.02
        assert abs(z.std() - 1.0) < 0.02


class TestSynthLandmarks:
    def test_same_spec_identical(self):
        spec = SynthSpec(seed=4, T=12, n=16, width=128, height=128,
                         head_drift=(1.5, 10.0), mouth_open=(0.0, 1.0),
                         jitter_sigma=0.3)
        a, b = synth_landmarks(spec), synth_landmarks(spec)
        assert a.coords.tobytes() == b.coords.tobytes()

    def test_degenerate_spec_is_static(self):
        spec = SynthSpec(seed=0, T=6, n=8, width=64, height=64,
                         head_drift=(0.0, 10.0), mouth_open=(0.4,), jitter_sigma=0.0)
        s = synth_landmarks(spec)
        assert np.all(derive_motion_field(s).transitions == 0.0)

    def test_adfd_decreases_with_jitter(self):
        def jittered(sigma):
            return synth_landmarks(SynthSpec(seed=7, T=20, n=16, width=128,
                                             height=128, head_drift=(2.0, 8.0),
                                             mouth_open=(0.0, 1.0, 0.0),
                                             jitter_sigma=sigma))
        clean = jittered(0.0)
        scores = [adfd(jittered(s), clean).score for s in (0.5, 1.0, 2.0, 4.0)]
        assert all(v < 1.0 for v in scores)
        assert all(a > b for a, b in zip(scores, scores[1:]))

    def test_invalid_specs(self):
        with pytest.raises(ValidationError):
            SynthSpec(seed=0, T=0, n=8, width=64, height=64)
        with pytest.raises(ValidationError):
            SynthSpec(seed=0, T=2, n=3, width=64, height=64)
        with pytest.raises(ValidationError):
            SynthSpec(seed=0, T=2, n=8, width=64, height=64, head_drift=(-1.0, 5.0))
        with pytest.raises(ValidationError):
            SynthSpec(seed=0, T=2, n=8, width=64, height=64, mouth_open=(1.5,))


class TestPerturb:
    def base(self):
        return synth_landmarks(SynthSpec(seed=1, T=10, n=8, width=64, height=64,
                                         head_drift=(2.0, 7.0), mouth_open=(0.0, 1.0)))

    def test_translate_preserves_motion_field(self):
        s = self.base()
        moved = perturb(s, "translate", (5.0, 5.0))
        np.testing.assert_allclose(derive_motion_field(moved).transitions,
                                   derive_motion_field(s).transitions, atol=1e-10)

    def test_zero_jitter_identity(self):
        s = self.base()
        assert perturb(s, "jitter", 0.0) is s

    def test_jitter_deterministic_per_seed(self):
        s = self.base()
        a = perturb(s, "jitter", 1.0, seed=3)
        b = perturb(s, "jitter", 1.0, seed=3)
        c = perturb(s, "jitter", 1.0, seed=4)
        np.testing.assert_array_equal(a.coords, b.coords)
        assert not np.array_equal(a.coords, c.coords)

    def test_time_shift_keeps_aligned_tail(self):
        s = self.base()
        shifted = perturb(s, "time_shift", 2)
        assert shifted.T == 8
        np.testing.assert_array_equal(shifted.coords, s.coords[2:])

    def test_out_of_range(self):
        s = self.base()
        with pytest.raises(ValidationError):
            perturb(s, "time_shift", 10)
        with pytest.raises(ValidationError):
            perturb(s, "warp", 1)


class TestSynthFeatures:
    def test_deterministic(self):
        a = synth_features(3, 50, 4)
        b = synth_features(3, 50, 4)
        np.testing.assert_array_equal(a.values, b.values)

    def test_sample_mean_within_bound(self):
        # 4 * scale / sqrt(N) per-coordinate bound on the sample mean
        for seed, scale in ((0, 1.0), (1, 2.5)):
            n = 5000
            mean = np.arange(6, dtype=float)
            fs = synth_features(seed, n, 6, mean=mean, scale=scale)
            err = np.abs(fs.values.mean(axis=0) - mean)
            assert np.all(err < 4.0 * scale / np.sqrt(n))

    def test_scale_zero_constant(self):
        fs = synth_features(5, 10, 3, mean=2.0, scale=0.0)
        assert np.all(fs.values == 2.0)

    def test_invalid_parameters(self):
        with pytest.raises(ValidationError):
            synth_features(0, 1, 4)
        with pytest.raises(ValidationError):
            synth_features(0, 10, 0)
        with pytest.raises(ValidationError):
            synth_features(0, 10, 4, scale=-1.0)
