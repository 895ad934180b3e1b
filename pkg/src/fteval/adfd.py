"""Audio-driven facial dynamics (ADFD) score.

The score multiplies two bounded factors:

* spatial: per frame, ``1 - mean_i(||gen_i - gt_i||) / d`` clamped to [0, 1],
  where ``d`` is the frame diagonal; averaged over frames.
* motion: per transition, the cosine between the flattened displacement
  fields of consecutive frames, shifted from [-1, 1] to [0, 1]; averaged
  over the T-1 transitions.

Zero-motion convention: two all-zero displacement fields agree perfectly and
score 1.0; exactly one all-zero field carries no directional information and
scores the neutral 0.5.  A single-frame sequence has no dynamics, so its
motion factor is defined as 1.0.

``score = (w1 * spatial) * (w2 * motion)``; with the default unit weights the
score lives in [0, 1] and equals 1.0 exactly for identical sequences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .model import (AdfdWeights, FrameLandmarks, LandmarkSequence,
                    derive_motion_field, frame_diagonal, validate_pair)


@dataclass(frozen=True)
class AdfdBreakdown:
    """Score plus the factor means and their per-frame/per-transition terms."""

    spatial: float
    motion: float
    score: float
    per_frame_spatial: tuple[float, ...]
    per_transition_motion: tuple[float, ...]


def spatial_term(gen_frame: FrameLandmarks, gt_frame: FrameLandmarks, d: float) -> float:
    """Normalized landmark alignment of one frame, clamped to [0, 1]."""
    if d <= 0:
        raise PreconditionError(f"frame diagonal must be positive, got {d}")
    if gen_frame.n != gt_frame.n:
        raise PreconditionError(f"landmark count mismatch: {gen_frame.n} vs {gt_frame.n}")
    diff = gen_frame.points - gt_frame.points
    dist = np.sqrt(diff[:, 0] ** 2 + diff[:, 1] ** 2)
    return float(min(max(1.0 - float(dist.mean()) / d, 0.0), 1.0))


def motion_term(gen_vec: np.ndarray, gt_vec: np.ndarray) -> float:
    """Direction agreement of two displacement fields, mapped to [0, 1]."""
    a = np.asarray(gen_vec, dtype=np.float64).reshape(-1)
    b = np.asarray(gt_vec, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise PreconditionError(f"displacement length mismatch: {a.shape[0]} vs {b.shape[0]}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise PreconditionError("non-finite displacement entry")
    na = math.sqrt(float(a @ a))
    nb = math.sqrt(float(b @ b))
    if na == 0.0 and nb == 0.0:
        return 1.0
    if na == 0.0 or nb == 0.0:
        return 0.5
    if np.array_equal(a, b):
        # bitwise-equal motion is perfect coherence; skip the rounding of dot/norms
        return 1.0
    cos = float(a @ b) / (na * nb)
    cos = min(max(cos, -1.0), 1.0)
    return (cos + 1.0) / 2.0


def adfd(gen: LandmarkSequence, gt: LandmarkSequence,
         weights: AdfdWeights = AdfdWeights(), policy: str = "strict") -> AdfdBreakdown:
    """Score a generated landmark sequence against ground truth."""
    gen, gt, _ = validate_pair(gen, gt, policy)
    d = frame_diagonal(gt)
    per_frame = tuple(
        spatial_term(gf, tf, d) for gf, tf in zip(gen.frames, gt.frames)
    )
    gen_motion = derive_motion_field(gen).transitions
    gt_motion = derive_motion_field(gt).transitions
    per_transition = tuple(
        motion_term(gen_motion[t], gt_motion[t]) for t in range(len(gen_motion))
    )
    spatial = sum(per_frame) / len(per_frame)
    motion = sum(per_transition) / len(per_transition) if per_transition else 1.0
    score = (weights.w1 * spatial) * (weights.w2 * motion)
    return AdfdBreakdown(spatial=spatial, motion=motion, score=score,
                         per_frame_spatial=per_frame,
                         per_transition_motion=per_transition)
