"""Deterministic synthetic-data generators for tests and format fixtures.

Everything here is a pure function of its arguments, bit-for-bit, so
independent implementations can reproduce the outputs exactly:

* PRNG: SplitMix64.  Output i (0-based) is ``mix(seed + (i+1) * GAMMA)`` over
  u64 wraparound arithmetic with GAMMA = 0x9E3779B97F4A7C15 and
  ``mix(z) = h(g(z))`` where ``g(z) = (z ^ (z >> 30)) * 0xBF58476D1CB4CBB8``,
  ``h(z) = ((z ^ (z >> 27)) * 0x94D049BB133111EB)`` followed by ``z ^ (z >> 31)``.
* Uniforms: ``((out >> 11) + 1) * 2^-53``, i.e. the half-open interval (0, 1].
* Gaussians: basic Box-Muller on consecutive uniform pairs (u1, u2):
  ``r = sqrt(-2 ln u1)``, ``z0 = r cos(2 pi u2)``, ``z1 = r sin(2 pi u2)``.
  Values are consumed in emission order; an odd request drops the last z1.

Synthetic faces use a fixed normalized template scaled to the frame: the
last ``max(1, n // 4)`` landmarks form a mouth ellipse centered at
(0.50 w, 0.72 h) with radii (0.14 w, (0.01 + 0.05 * envelope) h); the rest
trace a face outline ellipse centered at (0.50 w, 0.45 h) with radii
(0.32 w, 0.36 h).  Points sit at evenly spaced angles 2 pi j / count,
enumerated from angle zero.  Head drift adds
``(A sin(2 pi t / period), A cos(2 pi t / period))`` to every point of frame
t, and jitter adds sigma times a standard normal per coordinate, drawn
frame-major, landmark-minor, x before y.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import FeatureSet, LandmarkSequence

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CB4CBB8
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """Counter-based SplitMix64 stream; see the module docstring for the spec."""

    def __init__(self, seed: int):
        self._seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        self._count = 0

    def next_u64(self, count: int) -> np.ndarray:
        idx = np.arange(self._count + 1, self._count + count + 1, dtype=np.uint64)
        self._count += count
        z = self._seed + idx * np.uint64(_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))

    def uniform(self, count: int) -> np.ndarray:
        """Uniform samples in (0, 1], 53-bit resolution."""
        bits = self.next_u64(count) >> np.uint64(11)
        return (bits.astype(np.float64) + 1.0) * 2.0 ** -53

    def normal(self, count: int) -> np.ndarray:
        """Standard normal samples via Box-Muller pairs."""
        pairs = (count + 1) // 2
        u = self.uniform(2 * pairs)
        r = np.sqrt(-2.0 * np.log(u[0::2]))
        theta = (2.0 * math.pi) * u[1::2]
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:count]


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one synthetic landmark sequence."""

    seed: int
    T: int
    n: int
    width: int
    height: int
    head_drift: tuple[float, float] = (0.0, 25.0)  # amplitude px, period frames
    mouth_open: tuple[float, ...] = (0.0,)         # envelope samples in [0, 1]
    jitter_sigma: float = 0.0

    def __post_init__(self):
        if self.T < 1:
            raise ValidationError(f"T must be >= 1, got {self.T}")
        if self.n < 4:
            raise ValidationError(f"n must be >= 4, got {self.n}")
        if self.width < 1 or self.height < 1:
            raise ValidationError(f"invalid frame size {self.width}x{self.height}")
        amp, period = self.head_drift
        if amp < 0:
            raise ValidationError(f"drift amplitude must be >= 0, got {amp}")
        if amp > 0 and period <= 0:
            raise ValidationError(f"drift period must be positive, got {period}")
        if not self.mouth_open:
            raise ValidationError("mouth_open envelope needs at least one sample")
        if any(not (0.0 <= e <= 1.0) for e in self.mouth_open):
            raise ValidationError("mouth_open samples must lie in [0, 1]")
        if self.jitter_sigma < 0:
            raise ValidationError(f"jitter_sigma must be >= 0, got {self.jitter_sigma}")


def _envelope_at(samples: tuple[float, ...], t: int, total: int) -> float:
    if len(samples) == 1 or total == 1:
        return samples[0]
    pos = t * (len(samples) - 1) / (total - 1)
    return float(np.interp(pos, np.arange(len(samples)), np.array(samples)))


def synth_landmarks(spec: SynthSpec) -> LandmarkSequence:
    """Render the template face with drift, mouth envelope, and jitter."""
    mouth_count = max(1, spec.n // 4)
    outline_count = spec.n - mouth_count
    w, h = float(spec.width), float(spec.height)
    out_angles = 2.0 * math.pi * np.arange(outline_count) / outline_count
    mouth_angles = 2.0 * math.pi * np.arange(mouth_count) / mouth_count
    amp, period = spec.head_drift

    coords = np.empty((spec.T, spec.n, 2))
    for t in range(spec.T):
        env = _envelope_at(spec.mouth_open, t, spec.T)
        coords[t, :outline_count, 0] = 0.50 * w + 0.32 * w * np.cos(out_angles)
        coords[t, :outline_count, 1] = 0.45 * h + 0.36 * h * np.sin(out_angles)
        coords[t, outline_count:, 0] = 0.50 * w + 0.14 * w * np.cos(mouth_angles)
        coords[t, outline_count:, 1] = (0.72 * h
                                        + (0.01 + 0.05 * env) * h * np.sin(mouth_angles))
        if amp > 0:
            coords[t, :, 0] += amp * math.sin(2.0 * math.pi * t / period)
            coords[t, :, 1] += amp * math.cos(2.0 * math.pi * t / period)
    if spec.jitter_sigma > 0:
        noise = SplitMix64(spec.seed).normal(spec.T * spec.n * 2)
        coords += spec.jitter_sigma * noise.reshape(spec.T, spec.n, 2)
    return LandmarkSequence(coords, spec.width, spec.height)


def perturb(seq: LandmarkSequence, kind: str, magnitude, seed: int = 0) -> LandmarkSequence:
    """Apply a documented transform: translate, jitter, or time_shift.

    * translate: magnitude is (dx, dy) pixels; the motion field is unchanged.
    * jitter: magnitude is sigma; adds N(0, sigma^2) noise per coordinate
      (SplitMix64(seed), same draw order as synth_landmarks).
    * time_shift: magnitude is a frame count k in [0, T); keeps the aligned
      tail of T - k frames.
    """
    if kind == "translate":
        dx, dy = magnitude
        if not (math.isfinite(dx) and math.isfinite(dy)):
            raise ValidationError(f"translate offset must be finite, got {magnitude}")
        return LandmarkSequence(seq.coords + np.array([dx, dy], dtype=np.float64),
                                seq.width, seq.height, seq.fps)
    if kind == "jitter":
        sigma = float(magnitude)
        if not (math.isfinite(sigma) and sigma >= 0):
            raise ValidationError(f"jitter sigma must be >= 0, got {magnitude}")
        if sigma == 0.0:
            return seq
        noise = SplitMix64(seed).normal(seq.T * seq.n * 2)
        return LandmarkSequence(seq.coords + sigma * noise.reshape(seq.T, seq.n, 2),
                                seq.width, seq.height, seq.fps)
    if kind == "time_shift":
        k = int(magnitude)
        if not 0 <= k < seq.T:
            raise ValidationError(f"time_shift must lie in [0, T), got {k} for T={seq.T}")
        return LandmarkSequence(seq.coords[k:], seq.width, seq.height, seq.fps)
    raise ValidationError(f"unknown perturbation kind {kind!r}")


def synth_features(seed: int, rows: int, dim: int, mean=0.0, scale: float = 1.0) -> FeatureSet:
    """Deterministic isotropic Gaussian features: mean + scale * N(0, I)."""
    if rows < 2:
        raise ValidationError(f"need at least 2 rows, got {rows}")
    if dim < 1:
        raise ValidationError(f"dim must be >= 1, got {dim}")
    if not (math.isfinite(scale) and scale >= 0):
        raise ValidationError(f"scale must be a finite non-negative real, got {scale}")
    try:
        mu = np.broadcast_to(np.asarray(mean, dtype=np.float64), (dim,))
    except ValueError as e:
        raise ValidationError(f"mean does not broadcast to dim {dim}: {e}") from e
    if not np.isfinite(mu).all():
        raise ValidationError("mean must be finite")
    z = SplitMix64(seed).normal(rows * dim).reshape(rows, dim)
    return FeatureSet(mu + scale * z)
