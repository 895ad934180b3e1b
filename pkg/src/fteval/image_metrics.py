"""Pixel-space fidelity metrics over aligned 8-bit frame pairs: PSNR and SSIM.

PSNR uses the MSE over all channels at the 8-bit peak (255); a zero-MSE frame
is reported as an IDENTICAL sentinel and excluded from the video mean, with
the number of such frames recorded.

SSIM is single-scale with the reference parameterization: 11x11 Gaussian
window (sigma 1.5, normalized to sum 1), C1 = (0.01*255)^2, C2 = (0.03*255)^2,
statistics over valid window positions only (no padding).  3-channel frames
are converted to Rec. 601 luma first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .model import FrameSource

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = (0.01 * 255.0) ** 2
SSIM_C2 = (0.03 * 255.0) ** 2
PSNR_PEAK = 255.0
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class PsnrResult:
    """Per-frame dB values (None = identical frame) and their mean.

    ``mean_db`` is None when every frame pair is identical.
    """

    per_frame: tuple[float | None, ...]
    mean_db: float | None
    identical: int


@dataclass(frozen=True)
class SsimResult:
    per_frame: tuple[float, ...]
    mean: float


def validate_frame_pair(gen: FrameSource, gt: FrameSource,
                        policy: str = "strict") -> tuple[FrameSource, FrameSource, list[str]]:
    """Pair check mirroring landmark validation: dims strict, length by policy."""
    if (gen.height, gen.width, gen.channels) != (gt.height, gt.width, gt.channels):
        raise PreconditionError(
            f"frame geometry mismatch: {gen.width}x{gen.height}x{gen.channels} vs "
            f"{gt.width}x{gt.height}x{gt.channels}")
    warnings: list[str] = []
    if gen.count != gt.count:
        if policy == "strict":
            raise PreconditionError(f"frame count mismatch under strict policy: "
                                    f"{gen.count} vs {gt.count}")
        t = min(gen.count, gt.count)
        warnings.append(f"frame count mismatch ({gen.count} vs {gt.count}): truncated to {t}")
        gen, gt = gen.truncated(t), gt.truncated(t)
    return gen, gt, warnings


def psnr(gen: FrameSource, gt: FrameSource, policy: str = "strict") -> PsnrResult:
    gen, gt, _ = validate_frame_pair(gen, gt, policy)
    per_frame: list[float | None] = []
    finite: list[float] = []
    for a, b in zip(gen.frames, gt.frames):
        mse = float(np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2))
        if mse == 0.0:
            per_frame.append(None)
        else:
            db = 10.0 * math.log10(PSNR_PEAK * PSNR_PEAK / mse)
            per_frame.append(db)
            finite.append(db)
    mean_db = sum(finite) / len(finite) if finite else None
    return PsnrResult(per_frame=tuple(per_frame), mean_db=mean_db,
                      identical=len(per_frame) - len(finite))


def _gaussian_kernel(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(x ** 2) / (2.0 * sigma * sigma))
    return g / g.sum()


def _filter_valid(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # separable 2-D correlation, valid region only
    k = kernel.size
    h = np.zeros((img.shape[0], img.shape[1] - k + 1))
    for i, w in enumerate(kernel):
        h += w * img[:, i:i + h.shape[1]]
    out = np.zeros((img.shape[0] - k + 1, h.shape[1]))
    for i, w in enumerate(kernel):
        out += w * h[i:i + out.shape[0], :]
    return out


def _to_luma(frame: np.ndarray) -> np.ndarray:
    f = frame.astype(np.float64)
    if frame.shape[2] == 1:
        return f[:, :, 0]
    r, g, b = LUMA_WEIGHTS
    return r * f[:, :, 0] + g * f[:, :, 1] + b * f[:, :, 2]


def ssim_frame(gen: np.ndarray, gt: np.ndarray) -> float:
    """SSIM between two luma planes (2-D float arrays on the 0..255 scale)."""
    if gen.shape != gt.shape:
        raise PreconditionError(f"frame shape mismatch: {gen.shape} vs {gt.shape}")
    if gen.shape[0] < SSIM_WINDOW or gen.shape[1] < SSIM_WINDOW:
        raise PreconditionError(f"frames must be at least {SSIM_WINDOW}x{SSIM_WINDOW} "
                                f"for SSIM, got {gen.shape[1]}x{gen.shape[0]}")
    k = _gaussian_kernel()
    mu_x = _filter_valid(gen, k)
    mu_y = _filter_valid(gt, k)
    var_x = _filter_valid(gen * gen, k) - mu_x * mu_x
    var_y = _filter_valid(gt * gt, k) - mu_y * mu_y
    cov_xy = _filter_valid(gen * gt, k) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + SSIM_C1) * (2.0 * cov_xy + SSIM_C2)
    den = (mu_x * mu_x + mu_y * mu_y + SSIM_C1) * (var_x + var_y + SSIM_C2)
    ssim_map = np.clip(num / den, -1.0, 1.0)
    return float(ssim_map.mean())


def ssim(gen: FrameSource, gt: FrameSource, policy: str = "strict") -> SsimResult:
    gen, gt, _ = validate_frame_pair(gen, gt, policy)
    per_frame = tuple(
        ssim_frame(_to_luma(a), _to_luma(b)) for a, b in zip(gen.frames, gt.frames)
    )
    return SsimResult(per_frame=per_frame, mean=sum(per_frame) / len(per_frame))
