"""Audio-visual synchronization scoring over precomputed embedding streams.

For each candidate offset the audio and visual streams are paired with the
visual stream shifted by that many frames (positive offset = visual lags),
vectors are L2-normalized, and the mean Euclidean distance over the
overlapping window is recorded.  The minimum of that curve is the distance
score (lower is better) and median-minus-minimum is the confidence (higher
is better).  Overlap windows shrink at extreme offsets; nothing is padded.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, ValidationError
from .model import FeatureSet, _frozen

DEFAULT_MAX_OFFSET = 15
MIN_OVERLAP = 5


@dataclass(frozen=True, eq=False)
class EmbeddingStream:
    """T x D embedding matrix plus how many video frames each vector spans."""

    vectors: np.ndarray
    hop: int = 1

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValidationError(f"embedding stream must be a T x D matrix with "
                                  f"T, D >= 1, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise ValidationError("non-finite embedding value")
        norms = np.sqrt((v * v).sum(axis=1))
        if (norms == 0.0).any():
            bad = int(np.flatnonzero(norms == 0.0)[0])
            raise ValidationError(f"zero-norm embedding vector at index {bad}")
        if not (isinstance(self.hop, int) and self.hop >= 1):
            raise ValidationError(f"hop must be a positive integer, got {self.hop}")
        object.__setattr__(self, "vectors", _frozen(v))

    @classmethod
    def from_features(cls, features: FeatureSet, hop: int = 1) -> "EmbeddingStream":
        return cls(features.values, hop)

    @property
    def length(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class SyncResult:
    """Alignment summary: argmin offset (frames), min distance, confidence."""

    best_offset: int
    lse_d: float
    lse_c: float
    offsets: tuple[int, ...]
    distance_curve: tuple[float, ...]


def _normalized(v: np.ndarray) -> np.ndarray:
    return v / np.sqrt((v * v).sum(axis=1))[:, None]


def sync_score(audio: EmbeddingStream, visual: EmbeddingStream,
               max_offset: int = DEFAULT_MAX_OFFSET) -> SyncResult:
    """Scan offsets in [-max_offset, +max_offset] frames for the best alignment.

    Tie-breaking is deterministic: smallest |offset| wins, negative before
    positive.  Offsets are tested in steps of the stream hop.
    """
    if audio.dim != visual.dim:
        raise PreconditionError(f"embedding dimension mismatch: {audio.dim} vs {visual.dim}")
    if audio.hop != visual.hop:
        raise PreconditionError(f"hop mismatch: {audio.hop} vs {visual.hop}")
    if max_offset < 0:
        raise PreconditionError(f"max_offset must be >= 0, got {max_offset}")
    hop = audio.hop
    steps = max_offset // hop
    a = _normalized(audio.vectors)
    v = _normalized(visual.vectors)
    ta, tv = a.shape[0], v.shape[0]
    offsets: list[int] = []
    curve: list[float] = []
    for k in range(-steps, steps + 1):
        if k >= 0:
            length = min(ta, tv - k)
            pair_a, pair_v = a[:length], v[k:k + length]
        else:
            length = min(ta + k, tv)
            pair_a, pair_v = a[-k:-k + length], v[:length]
        if length < MIN_OVERLAP:
            raise PreconditionError(f"overlap at offset {k * hop} is {max(length, 0)} "
                                    f"vectors; need at least {MIN_OVERLAP}")
        diff = pair_a - pair_v
        curve.append(float(np.sqrt((diff * diff).sum(axis=1)).mean()))
        offsets.append(k * hop)
    best_i = min(range(len(curve)),
                 key=lambda i: (curve[i], abs(offsets[i]), offsets[i] >= 0))
    lse_d = curve[best_i]
    lse_c = float(np.median(curve)) - lse_d
    return SyncResult(best_offset=offsets[best_i], lse_d=lse_d, lse_c=lse_c,
                      offsets=tuple(offsets), distance_curve=tuple(curve))
