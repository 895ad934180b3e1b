"""Talking-face video evaluation toolkit.

Scores generated talking-face videos against ground truth: the audio-driven
facial dynamics (ADFD) score, mouth/full landmark distance, PSNR, SSIM,
Fréchet feature distance, and audio-visual sync offset/confidence, plus a
deterministic synthetic-data generator and a batch evaluation CLI.
"""
from ._version import VERSION as __version__
from .adfd import AdfdBreakdown, adfd, motion_term, spatial_term
from .errors import (FtevalError, IngestError, IngestWarning, ManifestError,
                     NumericsError, PreconditionError, ValidationError)
from .frechet import (GaussianStats, estimate_stats, fid, frechet_distance,
                      read_stats, symmetric_eigh)
from .image_metrics import PsnrResult, SsimResult, psnr, ssim, ssim_frame
from .ingest import (read_features, read_frames, read_landmarks,
                     write_features, write_frames, write_landmarks)
from .lmd import LmdResult, lmd
from .model import (AdfdWeights, FeatureSet, FrameLandmarks, FrameSource,
                    LandmarkScheme, LandmarkSequence, MotionField,
                    derive_motion_field, frame_diagonal, validate_pair)
from .report import (EvaluationManifest, EvalOptions, ManifestEntry,
                     MetricReport, evaluate, load_manifest, render_report,
                     render_table)
from .schemes import IBUG68, load_scheme_file, resolve_scheme
from .sync import EmbeddingStream, SyncResult, sync_score
from .synth import SplitMix64, SynthSpec, perturb, synth_features, synth_landmarks

__all__ = [
    "AdfdBreakdown", "AdfdWeights", "EmbeddingStream", "EvalOptions",
    "EvaluationManifest", "FeatureSet", "FrameLandmarks", "FrameSource",
    "FtevalError", "GaussianStats", "IBUG68", "IngestError", "IngestWarning",
    "LandmarkScheme", "LandmarkSequence", "LmdResult", "ManifestEntry",
    "ManifestError", "MetricReport", "MotionField", "NumericsError",
    "PreconditionError", "PsnrResult", "SplitMix64", "SsimResult",
    "SyncResult", "SynthSpec", "ValidationError", "adfd", "derive_motion_field",
    "estimate_stats", "evaluate", "fid", "frame_diagonal", "frechet_distance",
    "lmd", "load_manifest", "load_scheme_file", "motion_term", "perturb",
    "psnr", "read_features", "read_frames", "read_landmarks", "read_stats",
    "render_report", "render_table", "resolve_scheme", "spatial_term", "ssim",
    "ssim_frame", "symmetric_eigh", "sync_score", "synth_features",
    "synth_landmarks", "validate_pair", "write_features", "write_frames",
    "write_landmarks",
]
