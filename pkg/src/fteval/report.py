"""Batch evaluation over a manifest of video pairs plus report rendering.

A manifest is a single JSON document::

    {
      "label": "method-A",
      "options": {"scheme": "ibug68", "w1": 1.0, "w2": 1.0,
                  "mismatch": "strict", "max_offset": 15,
                  "fid_eps": 1e-6, "hop": 1},
      "entries": [
        {"id": "clip1",
         "gen_landmarks": "...", "gt_landmarks": "...",
         "gen_frames": "...",    "gt_frames": "...",
         "gen_features": "...",  "gt_features": "...",
         "audio_embed": "...",   "visual_embed": "..."}
      ]
    }

Relative paths resolve against the manifest's directory.  Every metric whose
input pair is present is computed; missing inputs are reported as absent,
never as zeros.  Reports are deterministic: fixed entry order, sorted JSON
keys, floats rounded to 6 significant digits, no timestamps.
"""
from __future__ import annotations

import json
import math
import threading
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ._version import VERSION
from .adfd import adfd
from .errors import FtevalError, ManifestError
from .frechet import DEFAULT_FID_EPS, fid
from .image_metrics import psnr, ssim, validate_frame_pair
from .ingest import read_features, read_frames, read_landmarks
from .lmd import lmd
from .model import (MISMATCH_POLICIES, AdfdWeights, LandmarkScheme,
                    validate_pair)
from .schemes import resolve_scheme
from .sync import DEFAULT_MAX_OFFSET, EmbeddingStream, sync_score

TOOL = f"fteval {VERSION}"

METRIC_DIRECTIONS = {
    "adfd": "up",
    "adfd_spatial": "up",
    "adfd_motion": "up",
    "f_lmd": "down",
    "m_lmd": "down",
    "psnr_db": "up",
    "ssim": "up",
    "fid": "down",
    "sync_conf": "up",
    "sync_dist": "down",
}

TABLE_ORDER = ("psnr_db", "ssim", "m_lmd", "f_lmd", "fid", "sync_conf",
               "sync_dist", "sync_offset", "adfd", "adfd_spatial", "adfd_motion")

DISPLAY_NAMES = {
    "psnr_db": "PSNR", "ssim": "SSIM", "m_lmd": "M-LMD", "f_lmd": "F-LMD",
    "fid": "FID", "sync_conf": "Sync-C", "sync_dist": "Sync-D",
    "sync_offset": "Offset", "adfd": "ADFD", "adfd_spatial": "ADFD-S",
    "adfd_motion": "ADFD-M",
}

LANDMARK_KEYS = ("adfd", "adfd_motion", "adfd_spatial", "f_lmd", "m_lmd")
FRAME_KEYS = ("psnr_db", "ssim")
FEATURE_KEYS = ("fid",)
SYNC_KEYS = ("sync_conf", "sync_dist", "sync_offset")

CONVENTIONS = {
    "adfd_spatial": "per frame: 1 - mean per-landmark Euclidean distance / frame "
                    "diagonal, clamped to [0,1]; averaged over frames",
    "adfd_motion": "per transition: cosine of flattened consecutive-frame displacement "
                   "fields shifted to [0,1], averaged over all T-1 transitions; "
                   "both fields zero -> 1.0, one zero -> 0.5, single frame -> 1.0",
    "adfd_score": "(w1 * spatial) * (w2 * motion)",
    "lmd": "raw pixel distances; mouth region per the landmark scheme",
    "psnr": "MSE over all channels at 8-bit peak 255; identical frames excluded "
            "from the mean and counted separately",
    "ssim": "single scale, 11x11 Gaussian window sigma 1.5 normalized to sum 1, "
            "valid window positions only, Rec.601 luma for 3-channel input",
    "fid": "unbiased sample covariance, unconditional eps*I jitter, matrix square "
           "root via symmetric eigendecomposition of sqrt(Ca) Cb sqrt(Ca)",
    "sync": "L2-normalized embeddings; mean Euclidean distance per offset; "
            "confidence = median - min of the curve; ties -> smallest |offset|, "
            "negative first",
}

_INGEST_LOCK = threading.Lock()


def round6(x):
    """Round to 6 significant digits (round-half-even) for report output."""
    if x is None:
        return None
    if isinstance(x, bool) or isinstance(x, int):
        return x
    v = float(x)
    if not math.isfinite(v):
        raise ValueError(f"non-finite report value {v}")
    return float(format(v, ".6g"))


def fmt6(x) -> str:
    if isinstance(x, bool) or isinstance(x, int):
        return str(x)
    return format(float(x), ".6g")


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    gen_landmarks: Path | None = None
    gt_landmarks: Path | None = None
    gen_frames: Path | None = None
    gt_frames: Path | None = None
    gen_features: Path | None = None
    gt_features: Path | None = None
    audio_embed: Path | None = None
    visual_embed: Path | None = None


@dataclass(frozen=True)
class EvalOptions:
    scheme: LandmarkScheme | str | None = "ibug68"
    w1: float = 1.0
    w2: float = 1.0
    mismatch: str = "strict"
    max_offset: int = DEFAULT_MAX_OFFSET
    fid_eps: float = DEFAULT_FID_EPS
    hop: int = 1

    def __post_init__(self):
        if self.mismatch not in MISMATCH_POLICIES:
            raise ManifestError(f"unknown mismatch policy {self.mismatch!r}")

    def resolved_scheme(self) -> LandmarkScheme | None:
        if self.scheme is None or isinstance(self.scheme, LandmarkScheme):
            return self.scheme
        return resolve_scheme(self.scheme)


@dataclass(frozen=True)
class EvaluationManifest:
    entries: tuple[ManifestEntry, ...]
    options: EvalOptions = field(default_factory=EvalOptions)
    label: str = "run"


@dataclass(frozen=True)
class MetricReport:
    """Evaluated manifest: per-entry values, aggregate means, run metadata."""

    label: str
    entries: tuple[dict, ...]
    aggregate: dict
    counts: dict
    metadata: dict

    def to_json_obj(self) -> dict:
        return {"label": self.label, "entries": list(self.entries),
                "aggregate": self.aggregate, "counts": self.counts,
                "metadata": self.metadata}

    @classmethod
    def from_json_obj(cls, doc: dict) -> "MetricReport":
        try:
            return cls(label=doc["label"], entries=tuple(doc["entries"]),
                       aggregate=doc["aggregate"], counts=doc["counts"],
                       metadata=doc["metadata"])
        except (KeyError, TypeError) as e:
            raise ManifestError(f"not a metric report: missing {e}") from e


_ENTRY_PATH_KEYS = ("gen_landmarks", "gt_landmarks", "gen_frames", "gt_frames",
                    "gen_features", "gt_features", "audio_embed", "visual_embed")
_PAIRS = (("gen_landmarks", "gt_landmarks"), ("gen_frames", "gt_frames"),
          ("gen_features", "gt_features"), ("audio_embed", "visual_embed"))


def _entry_from_doc(doc: dict, base: Path) -> ManifestEntry:
    if not isinstance(doc, dict) or "id" not in doc:
        raise ManifestError(f"manifest entry must be an object with an 'id': {doc!r}")
    unknown = set(doc) - {"id", *_ENTRY_PATH_KEYS}
    if unknown:
        raise ManifestError(f"entry '{doc['id']}': unknown keys {sorted(unknown)}")
    paths = {}
    for key in _ENTRY_PATH_KEYS:
        if doc.get(key) is not None:
            paths[key] = base / str(doc[key])
    entry = ManifestEntry(id=str(doc["id"]), **paths)
    if not any(getattr(entry, a) and getattr(entry, b) for a, b in _PAIRS):
        raise ManifestError(f"entry '{entry.id}' has no complete input pair; "
                            f"nothing to evaluate")
    return entry


def _options_from_doc(doc: dict) -> EvalOptions:
    known = {"scheme", "w1", "w2", "mismatch", "max_offset", "fid_eps", "hop"}
    unknown = set(doc) - known
    if unknown:
        raise ManifestError(f"unknown option keys {sorted(unknown)}")
    kwargs = dict(doc)
    scheme = kwargs.get("scheme")
    if isinstance(scheme, dict):
        missing = {"name", "total", "mouth_indices"} - set(scheme)
        if missing:
            raise ManifestError(f"inline scheme missing fields: {sorted(missing)}")
        kwargs["scheme"] = LandmarkScheme(name=str(scheme["name"]),
                                          total=int(scheme["total"]),
                                          mouth_indices=tuple(scheme["mouth_indices"]))
    return EvalOptions(**kwargs)


def load_manifest(path) -> EvaluationManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as e:
        raise ManifestError(f"{path}: cannot read manifest: {e}") from e
    except json.JSONDecodeError as e:
        raise ManifestError(f"{path}:{e.lineno}: invalid manifest JSON: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ManifestError(f"{path}: manifest must be a JSON object")
    unknown = set(doc) - {"entries", "options", "label"}
    if unknown:
        raise ManifestError(f"{path}: unknown manifest keys {sorted(unknown)}")
    raw_entries = doc.get("entries")
    if not isinstance(raw_entries, list) or not raw_entries:
        raise ManifestError(f"{path}: manifest needs a non-empty 'entries' list")
    base = path.parent
    entries = tuple(_entry_from_doc(e, base) for e in raw_entries)
    ids = [e.id for e in entries]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ManifestError(f"{path}: duplicate entry ids {dupes}")
    options = _options_from_doc(doc.get("options", {}))
    return EvaluationManifest(entries=entries, options=options,
                              label=str(doc.get("label", "run")))


def _read_capturing(reader, *args, **kwargs):
    """Run a parser, returning (value, warning messages) thread-safely."""
    with _INGEST_LOCK:
        with warnings.catch_warnings(record=True) as rec:
            warnings.simplefilter("always")
            value = reader(*args, **kwargs)
    return value, [str(r.message) for r in rec]


def _evaluate_entry(entry: ManifestEntry, opts: EvalOptions,
                    scheme: LandmarkScheme | None) -> dict:
    metrics: dict = {}
    notes: dict = {}
    absent: list[str] = []
    errors: dict[str, str] = {}
    warn: list[str] = []

    for a, b in _PAIRS:
        if bool(getattr(entry, a)) != bool(getattr(entry, b)):
            present, missing = (a, b) if getattr(entry, a) else (b, a)
            warn.append(f"{present} given without {missing}; pair skipped")

    if entry.gen_landmarks and entry.gt_landmarks:
        try:
            gen, wg = _read_capturing(read_landmarks, entry.gen_landmarks)
            gt, wt = _read_capturing(read_landmarks, entry.gt_landmarks)
            warn += wg + wt
            for name, seq in (("gen", gen), ("gt", gt)):
                if seq.out_of_frame:
                    warn.append(f"{name} landmarks: {seq.out_of_frame} out-of-frame points")
            gen, gt, wp = validate_pair(gen, gt, opts.mismatch)
            warn += wp
            breakdown = adfd(gen, gt, AdfdWeights(opts.w1, opts.w2))
            metrics["adfd"] = round6(breakdown.score)
            metrics["adfd_spatial"] = round6(breakdown.spatial)
            metrics["adfd_motion"] = round6(breakdown.motion)
            if scheme is None:
                errors["lmd"] = "no landmark scheme configured"
            else:
                try:
                    res = lmd(gen, gt, scheme)
                    metrics["f_lmd"] = round6(res.f_lmd)
                    metrics["m_lmd"] = round6(res.m_lmd)
                except FtevalError as e:
                    errors["lmd"] = str(e)
        except FtevalError as e:
            errors["landmarks"] = str(e)
    else:
        absent += LANDMARK_KEYS

    if entry.gen_frames and entry.gt_frames:
        try:
            gen, wg = _read_capturing(read_frames, entry.gen_frames)
            gt, wt = _read_capturing(read_frames, entry.gt_frames)
            warn += wg + wt
            gen, gt, wp = validate_frame_pair(gen, gt, opts.mismatch)
            warn += wp
            p = psnr(gen, gt)
            notes["psnr_identical_frames"] = p.identical
            if p.mean_db is None:
                notes["psnr_db"] = "IDENTICAL"
            else:
                metrics["psnr_db"] = round6(p.mean_db)
            metrics["ssim"] = round6(ssim(gen, gt).mean)
        except FtevalError as e:
            errors["frames"] = str(e)
    else:
        absent += FRAME_KEYS

    if entry.gen_features and entry.gt_features:
        try:
            gen, wg = _read_capturing(read_features, entry.gen_features)
            gt, wt = _read_capturing(read_features, entry.gt_features)
            warn += wg + wt
            metrics["fid"] = round6(fid(gen, gt, opts.fid_eps))
        except FtevalError as e:
            errors["features"] = str(e)
    else:
        absent += FEATURE_KEYS

    if entry.audio_embed and entry.visual_embed:
        try:
            audio, wg = _read_capturing(read_features, entry.audio_embed)
            visual, wt = _read_capturing(read_features, entry.visual_embed)
            warn += wg + wt
            res = sync_score(EmbeddingStream.from_features(audio, opts.hop),
                             EmbeddingStream.from_features(visual, opts.hop),
                             opts.max_offset)
            metrics["sync_offset"] = res.best_offset
            metrics["sync_dist"] = round6(res.lse_d)
            metrics["sync_conf"] = round6(res.lse_c)
        except FtevalError as e:
            errors["sync"] = str(e)
    else:
        absent += SYNC_KEYS

    return {"id": entry.id, "metrics": metrics, "notes": notes,
            "absent": sorted(absent), "errors": errors, "warnings": warn}


def evaluate(manifest: EvaluationManifest, jobs: int = 1) -> MetricReport:
    """Evaluate every entry; per-entry failures never abort the run."""
    if not manifest.entries:
        raise ManifestError("manifest has no entries")
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    opts = manifest.options
    scheme = opts.resolved_scheme()
    if jobs == 1:
        entry_results = [_evaluate_entry(e, opts, scheme) for e in manifest.entries]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_evaluate_entry, e, opts, scheme)
                       for e in manifest.entries]
            entry_results = [f.result() for f in futures]

    if all(not r["metrics"] for r in entry_results):
        details = "; ".join(f"{r['id']}: {msg}" for r in entry_results
                            for msg in r["errors"].values())
        raise ManifestError(f"every manifest entry failed ({details})")

    keys = sorted({k for r in entry_results for k in r["metrics"]})
    aggregate = {}
    counts = {}
    for k in keys:
        values = [r["metrics"][k] for r in entry_results if k in r["metrics"]]
        counts[k] = len(values)
        aggregate[k] = round6(sum(values) / len(values))

    metadata = {
        "tool": TOOL,
        "directions": {k: METRIC_DIRECTIONS.get(k, "none") for k in keys},
        "parameters": {
            "scheme": scheme.name if scheme else None,
            "w1": round6(opts.w1), "w2": round6(opts.w2),
            "mismatch": opts.mismatch, "max_offset": opts.max_offset,
            "fid_eps": round6(opts.fid_eps), "hop": opts.hop,
        },
        "conventions": dict(CONVENTIONS),
        "warnings": [f"{r['id']}: {msg}" for r in entry_results
                     for msg in r["warnings"]],
    }
    return MetricReport(label=manifest.label, entries=tuple(entry_results),
                        aggregate=aggregate, counts=counts, metadata=metadata)


def _report_columns(entries: tuple[dict, ...]) -> list[str]:
    keys = {k for e in entries for k in e["metrics"]}
    return [k for k in TABLE_ORDER if k in keys] + sorted(keys - set(TABLE_ORDER))


def render_report(report: MetricReport, format: str = "json") -> str:
    """Render one report: canonical JSON, or an entries-by-metrics csv/markdown."""
    if format == "json":
        return canonical_json(report.to_json_obj())
    cols = _report_columns(report.entries)
    rows = [[e["id"]] + [fmt6(e["metrics"][k]) if k in e["metrics"] else "absent"
                         for k in cols] for e in report.entries]
    rows.append(["aggregate"] + [fmt6(report.aggregate[k]) if k in report.aggregate
                                 else "absent" for k in cols])
    if format == "csv":
        lines = ["id," + ",".join(cols)]
        lines += [",".join(r) for r in rows]
        return "\n".join(lines) + "\n"
    if format == "markdown":
        header = ["id"] + [_column_title(k) for k in cols]
        return _markdown_table(header, rows)
    raise ValueError(f"unknown report format {format!r}")


def _column_title(key: str) -> str:
    arrow = {"up": "↑", "down": "↓"}.get(METRIC_DIRECTIONS.get(key, ""), "")
    return DISPLAY_NAMES.get(key, key) + arrow


def _markdown_table(header: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |",
             "| " + " | ".join("---" for _ in header) + " |"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def render_table(reports: list[MetricReport], format: str = "markdown") -> str:
    """Method-comparison table over aggregate values, one row per report.

    The best value per directed column is bolded in markdown output.
    """
    if not reports:
        raise ManifestError("no reports to tabulate")
    base = set(reports[0].aggregate)
    for rep in reports[1:]:
        if set(rep.aggregate) != base:
            diff = sorted(base ^ set(rep.aggregate))
            raise ManifestError(f"reports do not share a metric set; differing "
                                f"metrics: {diff}")
    cols = [k for k in TABLE_ORDER if k in base] + sorted(base - set(TABLE_ORDER))
    best: dict[str, list[str]] = {}
    for k in cols:
        direction = METRIC_DIRECTIONS.get(k)
        if direction is None:
            continue
        values = [round6(r.aggregate[k]) for r in reports]
        target = max(values) if direction == "up" else min(values)
        best[k] = [r.label for r, v in zip(reports, values) if v == target]

    if format == "json":
        doc = {"columns": cols,
               "directions": {k: METRIC_DIRECTIONS.get(k, "none") for k in cols},
               "best": best,
               "rows": [{"label": r.label,
                         "values": {k: round6(r.aggregate[k]) for k in cols}}
                        for r in reports]}
        return canonical_json(doc)
    if format == "csv":
        lines = ["method," + ",".join(cols)]
        lines += [r.label + "," + ",".join(fmt6(r.aggregate[k]) for k in cols)
                  for r in reports]
        return "\n".join(lines) + "\n"
    if format == "markdown":
        header = ["Method"] + [_column_title(k) for k in cols]
        rows = []
        for r in reports:
            cells = []
            for k in cols:
                text = fmt6(r.aggregate[k])
                if k in best and r.label in best[k]:
                    text = f"**{text}**"
                cells.append(text)
            rows.append([r.label] + cells)
        return _markdown_table(header, rows)
    raise ValueError(f"unknown table format {format!r}")
