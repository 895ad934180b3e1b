"""Core domain types shared by every metric.

Landmark coordinates are stored as 64-bit floats in raw pixel units; nothing
is normalized at ingest time (metrics apply their own normalization).  All
types are immutable after construction and safe to share across threads.
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, ValidationError

MISMATCH_POLICIES = ("strict", "truncate")


def _frozen(a: np.ndarray, dtype=np.float64) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class FrameLandmarks:
    """Landmarks of a single frame: 0-based ordinal plus an (n, 2) array."""

    index: int
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise ValidationError(f"frame {self.index}: points must be an (n, 2) array "
                                  f"with n >= 1, got shape {pts.shape}")
        if not np.isfinite(pts).all():
            raise ValidationError(f"frame {self.index}: non-finite landmark coordinate")
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True, eq=False)
class LandmarkSequence:
    """Per-frame 2-D landmarks for one video, with frame geometry and rate.

    ``coords`` has shape (T, n, 2).  Out-of-frame points are legal (trackers
    emit them); they are only counted, never rejected.
    """

    coords: np.ndarray
    width: int
    height: int
    fps: float = 25.0
    out_of_frame: int = field(init=False, default=0)

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=np.float64)
        if c.ndim != 3 or c.shape[2] != 2:
            raise ValidationError(f"coords must have shape (T, n, 2), got {c.shape}")
        if c.shape[0] < 1:
            raise ValidationError("sequence needs at least one frame")
        if c.shape[1] < 1:
            raise ValidationError("sequence needs at least one landmark per frame")
        if not np.isfinite(c).all():
            raise ValidationError("non-finite landmark coordinate")
        for name, value in (("width", self.width), ("height", self.height)):
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ValidationError(f"{name} must be an integer, got {value!r}")
            if value <= 0:
                raise ValidationError(f"{name} must be positive, got {value}")
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))
        if not (math.isfinite(self.fps) and self.fps > 0):
            raise ValidationError(f"fps must be a positive real, got {self.fps}")
        outside = ((c[..., 0] < 0) | (c[..., 0] > self.width)
                   | (c[..., 1] < 0) | (c[..., 1] > self.height))
        object.__setattr__(self, "coords", _frozen(c))
        object.__setattr__(self, "out_of_frame", int(outside.sum()))

    @classmethod
    def from_frames(cls, frames: Sequence[FrameLandmarks], width: int, height: int,
                    fps: float = 25.0) -> "LandmarkSequence":
        if not frames:
            raise ValidationError("sequence needs at least one frame")
        ordered = sorted(frames, key=lambda f: f.index)
        n = ordered[0].n
        for f in ordered:
            if f.n != n:
                raise ValidationError(f"frame {f.index} has {f.n} landmarks, expected {n}")
        indices = [f.index for f in ordered]
        if indices != list(range(len(ordered))):
            for want, got in enumerate(indices):
                if want != got:
                    raise ValidationError(f"missing frame {want} (indices must be 0..T-1)")
        return cls(np.stack([f.points for f in ordered]), width, height, fps)

    @property
    def T(self) -> int:
        return self.coords.shape[0]

    @property
    def n(self) -> int:
        return self.coords.shape[1]

    @property
    def frames(self) -> tuple[FrameLandmarks, ...]:
        return tuple(FrameLandmarks(t, self.coords[t]) for t in range(self.T))

    def truncated(self, t: int) -> "LandmarkSequence":
        if not 1 <= t <= self.T:
            raise ValidationError(f"cannot truncate T={self.T} sequence to {t} frames")
        if t == self.T:
            return self
        return LandmarkSequence(self.coords[:t], self.width, self.height, self.fps)


@dataclass(frozen=True, eq=False)
class MotionField:
    """Per-transition landmark displacements, shape (T-1, n, 2); empty for T=1."""

    transitions: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.transitions, dtype=np.float64)
        if v.ndim != 3 or v.shape[2] != 2:
            raise ValidationError(f"transitions must have shape (T-1, n, 2), got {v.shape}")
        object.__setattr__(self, "transitions", _frozen(v))

    def __len__(self) -> int:
        return self.transitions.shape[0]


@dataclass(frozen=True, eq=False)
class FrameSource:
    """Ordered 8-bit raster frames, shape (T, H, W, C) with C in {1, 3}."""

    frames: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frames)
        if f.dtype != np.uint8:
            raise ValidationError(f"frames must be uint8, got {f.dtype}")
        if f.ndim != 4 or f.shape[3] not in (1, 3):
            raise ValidationError(f"frames must have shape (T, H, W, C) with C in "
                                  f"{{1, 3}}, got {f.shape}")
        if f.shape[0] < 1 or f.shape[1] < 1 or f.shape[2] < 1:
            raise ValidationError("frame stack must be non-empty")
        f = np.ascontiguousarray(f)
        f.setflags(write=False)
        object.__setattr__(self, "frames", f)

    @property
    def count(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def channels(self) -> int:
        return self.frames.shape[3]

    def truncated(self, t: int) -> "FrameSource":
        if not 1 <= t <= self.count:
            raise ValidationError(f"cannot truncate {self.count} frames to {t}")
        return self if t == self.count else FrameSource(self.frames[:t])


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """N x D matrix of real-valued embeddings; N >= 2 so covariance exists."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValidationError(f"feature matrix must be 2-D, got shape {v.shape}")
        if v.shape[0] < 2:
            raise ValidationError(f"need at least 2 feature rows, got {v.shape[0]}")
        if v.shape[1] < 1:
            raise ValidationError("feature dimension must be >= 1")
        if not np.isfinite(v).all():
            bad = int(np.flatnonzero(~np.isfinite(v).all(axis=1))[0])
            raise ValidationError(f"non-finite feature value in row {bad}")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class AdfdWeights:
    """Balancing weights for the two ADFD factors (both default to 1)."""

    w1: float = 1.0
    w2: float = 1.0

    def __post_init__(self):
        for name, w in (("w1", self.w1), ("w2", self.w2)):
            if not (math.isfinite(w) and w >= 0):
                raise ValidationError(f"{name} must be a finite non-negative real, got {w}")


@dataclass(frozen=True)
class LandmarkScheme:
    """Landmark topology: total point count plus the mouth-region index set."""

    name: str
    total: int
    mouth_indices: tuple[int, ...]

    def __post_init__(self):
        if self.total < 1:
            raise ValidationError(f"scheme '{self.name}': total must be >= 1")
        idx = tuple(sorted(int(i) for i in self.mouth_indices))
        if not idx:
            raise ValidationError(f"scheme '{self.name}': mouth_indices must be non-empty")
        if len(set(idx)) != len(idx):
            raise ValidationError(f"scheme '{self.name}': duplicate mouth index")
        if idx[0] < 0 or idx[-1] >= self.total:
            raise ValidationError(f"scheme '{self.name}': mouth indices must lie in "
                                  f"[0, {self.total})")
        object.__setattr__(self, "mouth_indices", idx)


def derive_motion_field(seq: LandmarkSequence) -> MotionField:
    """Displacement of every landmark between consecutive frames (T-1 entries)."""
    if seq.T == 1:
        return MotionField(np.empty((0, seq.n, 2)))
    return MotionField(np.diff(seq.coords, axis=0))


def frame_diagonal(seq: LandmarkSequence) -> float:
    """Maximum possible distance between two points in the frame."""
    w, h = seq.width, seq.height
    if w <= 0 or h <= 0:
        raise PreconditionError(f"frame dimensions must be positive, got {w}x{h}")
    return math.sqrt(w * w + h * h)


def validate_pair(gen: LandmarkSequence, gt: LandmarkSequence,
                  policy: str = "strict") -> tuple[LandmarkSequence, LandmarkSequence, list[str]]:
    """Check two sequences are comparable; optionally truncate to equal length.

    Returns (gen, gt, warnings).  Landmark counts and frame dimensions must
    match; a frame-count mismatch is an error under ``strict`` and a recorded
    truncation under ``truncate``.
    """
    if policy not in MISMATCH_POLICIES:
        raise ValueError(f"unknown mismatch policy {policy!r}")
    if gen.n != gt.n:
        raise PreconditionError(f"landmark count mismatch: {gen.n} vs {gt.n}")
    if (gen.width, gen.height) != (gt.width, gt.height):
        raise PreconditionError(f"frame dimension mismatch: {gen.width}x{gen.height} "
                                f"vs {gt.width}x{gt.height}")
    warnings: list[str] = []
    if gen.T != gt.T:
        if policy == "strict":
            raise PreconditionError(f"frame count mismatch under strict policy: "
                                    f"{gen.T} vs {gt.T}")
        t = min(gen.T, gt.T)
        warnings.append(f"length mismatch ({gen.T} vs {gt.T} frames): truncated to T={t}")
        gen, gt = gen.truncated(t), gt.truncated(t)
    return gen, gt, warnings
