import math

import numpy as np
import pytest

from fteval import PreconditionError, psnr, ssim, ssim_frame
from fteval.image_metrics import validate_frame_pair

from conftest import frames_from

PSNR_DIFF1 = 20.0 * math.log10(255.0)  # MSE = 1 closed form
SSIM_0_255 = 6.5025 / 65031.5025       # constant-image closed form


def random_frames(seed, T=2, h=32, w=32, c=3, top=255):
    rng = np.random.default_rng(seed)
    return frames_from(rng.integers(0, top + 1, size=(T, h, w, c)))


class TestPsnr:
    def test_identical_frames_sentinel(self):
        f = random_frames(0)
        r = psnr(f, f)
        assert r.per_frame == (None, None)
        assert r.mean_db is None
        assert r.identical == 2

    def test_uniform_difference_one(self):
        base = random_frames(1, top=254)
        plus = frames_from(base.frames + 1)
        r = psnr(base, plus)
        assert r.mean_db == pytest.approx(PSNR_DIFF1, abs=1e-3)

    def test_black_vs_white(self):
        a = frames_from(np.zeros((1, 8, 8, 1)))
        b = frames_from(np.full((1, 8, 8, 1), 255))
        assert psnr(a, b).mean_db == pytest.approx(0.0, abs=1e-12)

    def test_mixed_identical_excluded_from_mean(self):
        base = random_frames(2, T=3, top=254)
        gen = base.frames.copy()
        gen[1] += 1  # frames 0 and 2 identical
        r = psnr(base, frames_from(gen))
        assert r.identical == 2
        assert r.per_frame[0] is None and r.per_frame[2] is None
        assert r.mean_db == pytest.approx(PSNR_DIFF1, abs=1e-3)

    def test_strictly_decreases_with_noise_amplitude(self):
        rng = np.random.default_rng(3)
        base = rng.integers(64, 192, size=(1, 32, 32, 3))
        sign = rng.choice((-1, 1), size=base.shape)
        previous = math.inf
        for amp in (1, 2, 4, 8, 16):
            noisy = frames_from(base + sign * amp)
            value = psnr(frames_from(base), noisy).mean_db
            assert value < previous
            previous = value

    def test_geometry_mismatch(self):
        with pytest.raises(PreconditionError):
            psnr(random_frames(0, h=16), random_frames(0, h=32))

    def test_count_mismatch_policies(self):
        a, b = random_frames(4, T=3), random_frames(5, T=2)
        with pytest.raises(PreconditionError):
            psnr(a, b)
        a2, b2, warnings = validate_frame_pair(a, b, "truncate")
        assert a2.count == b2.count == 2 and warnings


class TestSsim:
    def test_identity_exact(self):
        for seed in range(20):
            f = random_frames(seed, T=1, h=64, w=64)
            assert ssim(f, f).mean == pytest.approx(1.0, abs=1e-9)

    def test_constant_zero_vs_white(self):
        a = frames_from(np.zeros((1, 16, 16, 1)))
        b = frames_from(np.full((1, 16, 16, 1), 255))
        assert ssim(a, b).mean == pytest.approx(SSIM_0_255, abs=1e-7)

    def test_constant_127_vs_128(self):
        # constant-image closed form: means 127/128, zero variances
        a = frames_from(np.full((1, 16, 16, 1), 127))
        b = frames_from(np.full((1, 16, 16, 1), 128))
        c1 = (0.01 * 255) ** 2
        expected = (2 * 127.0 * 128.0 + c1) / (127.0 ** 2 + 128.0 ** 2 + c1)
        assert ssim(a, b).mean == pytest.approx(expected, abs=1e-9)

    def test_symmetry(self):
        a, b = random_frames(6), random_frames(7)
        forward = ssim(a, b).per_frame
        backward = ssim(b, a).per_frame
        for x, y in zip(forward, backward):
            assert x == pytest.approx(y, abs=1e-12)

    def test_bounded(self):
        for seed in range(5):
            a, b = random_frames(seed), random_frames(seed + 100)
            for v in ssim(a, b).per_frame:
                assert -1.0 <= v <= 1.0

    def test_rejects_tiny_frames(self):
        a = frames_from(np.zeros((1, 8, 8, 1)))
        with pytest.raises(PreconditionError):
            ssim(a, a)

    def test_luma_conversion_matches_gray(self):
        # a gray image stored as RGB must score like its single-channel copy
        rng = np.random.default_rng(8)
        gray = rng.integers(0, 256, size=(1, 32, 32, 1))
        rgb = np.repeat(gray, 3, axis=3)
        other_gray = rng.integers(0, 256, size=(1, 32, 32, 1))
        other_rgb = np.repeat(other_gray, 3, axis=3)
        a = ssim(frames_from(gray), frames_from(other_gray)).mean
        b = ssim(frames_from(rgb), frames_from(other_rgb)).mean
        assert a == pytest.approx(b, abs=1e-9)

    def test_frame_api_shape_check(self):
        with pytest.raises(PreconditionError):
            ssim_frame(np.zeros((32, 32)), np.zeros((32, 16)))


class TestCrossLibraryOracles:
    """Independent reference: scikit-image's Gaussian-weighted implementations."""

    def test_ssim_matches_skimage_reference(self):
        from skimage.metrics import structural_similarity
        rng = np.random.default_rng(42)
        for _ in range(5):
            a = rng.integers(0, 256, size=(40, 56)).astype(np.uint8)
            noise = rng.integers(-30, 31, size=a.shape)
            b = np.clip(a.astype(np.int16) + noise, 0, 255).astype(np.uint8)
            mine = ssim_frame(a.astype(float), b.astype(float))
            ref = structural_similarity(a, b, gaussian_weights=True, sigma=1.5,
                                        use_sample_covariance=False, data_range=255)
            assert mine == pytest.approx(ref, abs=1e-12)

    def test_psnr_matches_skimage_reference(self):
        from skimage.metrics import peak_signal_noise_ratio
        rng = np.random.default_rng(43)
        a = rng.integers(0, 256, size=(32, 32, 3)).astype(np.uint8)
        noise = rng.integers(-9, 10, size=a.shape)
        b = np.clip(a.astype(np.int16) + noise, 0, 255).astype(np.uint8)
        mine = psnr(frames_from(a[None]), frames_from(b[None])).mean_db
        assert mine == pytest.approx(peak_signal_noise_ratio(a, b, data_range=255),
                                     abs=1e-12)
