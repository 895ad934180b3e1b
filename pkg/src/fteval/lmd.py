"""Full-face and mouth-region landmark distance (F-LMD / M-LMD), in pixels."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .model import LandmarkScheme, LandmarkSequence, validate_pair


@dataclass(frozen=True)
class LmdResult:
    """Mean per-landmark Euclidean distances; lower is better."""

    f_lmd: float
    m_lmd: float
    per_frame: tuple[tuple[float, float], ...]


def lmd(gen: LandmarkSequence, gt: LandmarkSequence, scheme: LandmarkScheme,
        policy: str = "strict") -> LmdResult:
    gen, gt, _ = validate_pair(gen, gt, policy)
    if scheme.total != gen.n:
        raise PreconditionError(f"scheme '{scheme.name}' expects {scheme.total} "
                                f"landmarks, sequences have {gen.n}")
    diff = gen.coords - gt.coords
    dist = np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2)  # (T, n)
    mouth = list(scheme.mouth_indices)
    per_frame_f = dist.mean(axis=1)
    per_frame_m = dist[:, mouth].mean(axis=1)
    return LmdResult(
        f_lmd=float(per_frame_f.mean()),
        m_lmd=float(per_frame_m.mean()),
        per_frame=tuple((float(f), float(m)) for f, m in zip(per_frame_f, per_frame_m)),
    )
