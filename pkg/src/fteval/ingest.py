"""Parsers and writers for the on-disk input formats.

Landmark JSONL: one header line ``{"header": {"n":, "width":, "height":, "fps":}}``
(an optional ``"scheme"`` name is allowed), then one
``{"frame": t, "points": [[x, y], ...]}`` line per frame.  The canonical form
written here sorts frames and prints coordinates with exactly 6 decimal
places, so read -> write is byte-identical for canonical files.

Landmark CSV: header row ``frame,x0,y0,...,x{n-1},y{n-1}``; frame geometry
comes from sidecar arguments because CSV has no header object.

FTEV feature files are little-endian binary: magic ``FTEV``, u32 version (1),
u32 rows, u32 dim, then rows*dim float32 values row-major.  Feature CSV holds
one row per line; values are float32 precision by contract, so CSV input is
snapped through float32 to match the binary format exactly.

All parse errors carry the file path plus a line number or byte offset.
"""
from __future__ import annotations

import csv
import json
import math
import re
import struct
import warnings
from contextlib import contextmanager
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import IngestError, IngestWarning
from .model import FeatureSet, FrameSource, LandmarkScheme, LandmarkSequence

FTEV_MAGIC = b"FTEV"
FTEV_VERSION = 1
_FTEV_HEADER = struct.Struct("<4sIII")


def _sniff_landmark_format(path: Path) -> str:
    with open(path, "rb") as fh:
        head = fh.read(1)
    return "jsonl" if head == b"{" else "csv"


@contextmanager
def _text_lines(path: Path):
    """Open a text input, converting decode failures into located errors."""
    try:
        with open(path, encoding="utf-8") as fh:
            yield fh
    except UnicodeDecodeError as e:
        raise IngestError(f"not valid UTF-8 text: {e.reason}", path=path,
                          offset=e.start) from e


def read_landmarks(path, format: str | None = None, *, width: int | None = None,
                   height: int | None = None, fps: float | None = None,
                   scheme: LandmarkScheme | None = None) -> LandmarkSequence:
    """Parse a landmark file (jsonl or csv; sniffed from the first byte if unset)."""
    path = Path(path)
    if not path.is_file():
        raise IngestError("no such file", path=path)
    fmt = format or _sniff_landmark_format(path)
    if fmt == "jsonl":
        seq, header_scheme = _read_landmarks_jsonl(path)
    elif fmt == "csv":
        seq = _read_landmarks_csv(path, width=width, height=height, fps=fps)
        header_scheme = None
    else:
        raise IngestError(f"unknown landmark format {fmt!r}", path=path)
    if scheme is not None:
        if seq.n != scheme.total:
            raise IngestError(f"file has n={seq.n} landmarks but scheme "
                              f"'{scheme.name}' expects {scheme.total}", path=path)
        if header_scheme is not None and header_scheme != scheme.name:
            raise IngestError(f"file declares scheme '{header_scheme}' but "
                              f"'{scheme.name}' was requested", path=path, line=1)
    return seq


def _require_number(value, what: str, path: Path, line: int) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise IngestError(f"{what} must be a number, got {value!r}", path=path, line=line)
    if not math.isfinite(value):
        raise IngestError(f"{what} is non-finite ({value!r})", path=path, line=line)
    return float(value)


def _require_posint(value, what: str, path: Path, line: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise IngestError(f"{what} must be a positive integer, got {value!r}",
                          path=path, line=line)
    return value


def _check_frame_ordering(indexed: dict[int, np.ndarray], path: Path) -> np.ndarray:
    order = sorted(indexed)
    if order[0] != 0 or order[-1] != len(order) - 1:
        for want in range(len(order)):
            if want not in indexed:
                raise IngestError(f"missing frame {want}: frame indices must cover "
                                  f"0..T-1 without gaps", path=path)
    return np.stack([indexed[t] for t in order])


def _read_landmarks_jsonl(path: Path) -> tuple[LandmarkSequence, str | None]:
    header = None
    indexed: dict[int, np.ndarray] = {}
    n = None
    with _text_lines(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                raise IngestError("blank line", path=path, line=lineno)
            try:
                doc = json.loads(text)
            except json.JSONDecodeError as e:
                raise IngestError(f"malformed JSON: {e.msg}", path=path, line=lineno) from e
            if lineno == 1:
                if not isinstance(doc, dict) or "header" not in doc:
                    raise IngestError("first line must be the header object",
                                      path=path, line=1)
                header = doc["header"]
                if not isinstance(header, dict):
                    raise IngestError("header must be an object", path=path, line=1)
                missing = {"n", "width", "height"} - set(header)
                if missing:
                    raise IngestError(f"missing header fields: {sorted(missing)}",
                                      path=path, line=1)
                n = _require_posint(header["n"], "header n", path, 1)
                continue
            if not isinstance(doc, dict) or "frame" not in doc or "points" not in doc:
                raise IngestError("frame line needs 'frame' and 'points'",
                                  path=path, line=lineno)
            t = doc["frame"]
            if not isinstance(t, int) or isinstance(t, bool) or t < 0:
                raise IngestError(f"frame index must be a non-negative integer, "
                                  f"got {t!r}", path=path, line=lineno)
            if t in indexed:
                raise IngestError(f"duplicate frame {t}", path=path, line=lineno)
            pts = doc["points"]
            if not isinstance(pts, list) or len(pts) != n:
                got = len(pts) if isinstance(pts, list) else type(pts).__name__
                raise IngestError(f"frame {t} has {got} points, header says {n}",
                                  path=path, line=lineno)
            arr = np.empty((n, 2))
            for i, p in enumerate(pts):
                if not isinstance(p, list) or len(p) != 2:
                    raise IngestError(f"point {i} must be an [x, y] pair",
                                      path=path, line=lineno)
                arr[i, 0] = _require_number(p[0], f"point {i} x", path, lineno)
                arr[i, 1] = _require_number(p[1], f"point {i} y", path, lineno)
            indexed[t] = arr
    if header is None:
        raise IngestError("empty file: missing header line", path=path, line=1)
    if not indexed:
        raise IngestError("no frame lines after the header", path=path, line=1)
    coords = _check_frame_ordering(indexed, path)
    fps = _require_number(header.get("fps", 25.0), "header fps", path, 1)
    if fps <= 0:
        raise IngestError(f"header fps must be positive, got {fps}", path=path, line=1)
    scheme_name = header.get("scheme")
    if scheme_name is not None and not isinstance(scheme_name, str):
        raise IngestError(f"header scheme must be a string, got {scheme_name!r}",
                          path=path, line=1)
    seq = LandmarkSequence(coords,
                           _require_posint(header["width"], "header width", path, 1),
                           _require_posint(header["height"], "header height", path, 1),
                           fps)
    return seq, scheme_name


_CSV_HEADER_RE = re.compile(r"^frame(,x\d+,y\d+)+$")


def _read_landmarks_csv(path: Path, *, width: int | None, height: int | None,
                        fps: float | None) -> LandmarkSequence:
    if width is None or height is None:
        raise IngestError("missing header fields: CSV landmarks need width and height "
                          "sidecar values", path=path)
    indexed: dict[int, np.ndarray] = {}
    with _text_lines(path) as fh:
        reader = csv.reader(fh)
        try:
            head = next(reader)
        except StopIteration:
            raise IngestError("empty file", path=path, line=1) from None
        except csv.Error as e:
            raise IngestError(f"malformed CSV: {e}", path=path, line=1) from e
        if not _CSV_HEADER_RE.match(",".join(head)):
            raise IngestError("header row must be frame,x0,y0,...,x{n-1},y{n-1}",
                              path=path, line=1)
        n = (len(head) - 1) // 2
        while True:
            try:
                row = next(reader)
            except StopIteration:
                break
            except csv.Error as e:
                raise IngestError(f"malformed CSV: {e}", path=path,
                                  line=reader.line_num) from e
            lineno = reader.line_num
            if len(row) != 2 * n + 1:
                raise IngestError(f"row has {len(row)} fields, expected {2 * n + 1}",
                                  path=path, line=lineno)
            try:
                t = int(row[0])
                vals = [float(v) for v in row[1:]]
            except ValueError as e:
                raise IngestError(f"non-numeric field: {e}", path=path, line=lineno) from e
            if t < 0:
                raise IngestError(f"frame index must be >= 0, got {t}", path=path, line=lineno)
            if t in indexed:
                raise IngestError(f"duplicate frame {t}", path=path, line=lineno)
            if not all(math.isfinite(v) for v in vals):
                raise IngestError("non-finite coordinate", path=path, line=lineno)
            indexed[t] = np.array(vals).reshape(n, 2)
    if not indexed:
        raise IngestError("no data rows after the header", path=path, line=1)
    coords = _check_frame_ordering(indexed, path)
    return LandmarkSequence(coords, width, height, 25.0 if fps is None else fps)


def write_landmarks(seq: LandmarkSequence, path, format: str = "jsonl",
                    scheme_name: str | None = None) -> None:
    """Write the canonical form (sorted frames, 6-decimal coordinates)."""
    path = Path(path)
    if format == "jsonl":
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            scheme_part = f'"scheme": {json.dumps(scheme_name)}, ' if scheme_name else ""
            fh.write(f'{{"header": {{{scheme_part}"n": {seq.n}, "width": {seq.width}, '
                     f'"height": {seq.height}, "fps": {float(seq.fps)!r}}}}}\n')
            for t in range(seq.T):
                pts = ", ".join(f"[{x:.6f}, {y:.6f}]" for x, y in seq.coords[t])
                fh.write(f'{{"frame": {t}, "points": [{pts}]}}\n')
    elif format == "csv":
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            cols = ",".join(f"x{i},y{i}" for i in range(seq.n))
            fh.write(f"frame,{cols}\n")
            for t in range(seq.T):
                vals = ",".join(f"{v:.6f}" for v in seq.coords[t].reshape(-1))
                fh.write(f"{t},{vals}\n")
    else:
        raise ValueError(f"unknown landmark format {format!r}")


def _sniff_feature_format(path: Path) -> str:
    with open(path, "rb") as fh:
        return "ftev" if fh.read(4) == FTEV_MAGIC else "csv"


def read_features(path, format: str | None = None) -> FeatureSet:
    """Parse a feature matrix (ftev or csv; sniffed from the magic if unset)."""
    path = Path(path)
    if not path.is_file():
        raise IngestError("no such file", path=path)
    fmt = format or _sniff_feature_format(path)
    if fmt == "ftev":
        return _read_features_ftev(path)
    if fmt == "csv":
        return _read_features_csv(path)
    raise IngestError(f"unknown feature format {fmt!r}", path=path)


def _read_features_ftev(path: Path) -> FeatureSet:
    blob = path.read_bytes()
    if len(blob) < _FTEV_HEADER.size:
        raise IngestError(f"truncated header: {len(blob)} bytes, need "
                          f"{_FTEV_HEADER.size}", path=path, offset=len(blob))
    magic, version, rows, dim = _FTEV_HEADER.unpack_from(blob)
    if magic != FTEV_MAGIC:
        raise IngestError(f"bad magic {magic!r}, expected {FTEV_MAGIC!r}",
                          path=path, offset=0)
    if version != FTEV_VERSION:
        raise IngestError(f"unsupported version {version}", path=path, offset=4)
    if rows < 2:
        raise IngestError(f"header rows={rows}, need at least 2", path=path, offset=8)
    if dim < 1:
        raise IngestError(f"header dim={dim}, need at least 1", path=path, offset=12)
    expected = rows * dim * 4
    payload = blob[_FTEV_HEADER.size:]
    if len(payload) < expected:
        raise IngestError(f"truncated payload: {len(payload)} bytes, expected {expected}",
                          path=path, offset=len(blob))
    if len(payload) > expected:
        raise IngestError(f"{len(payload) - expected} trailing bytes after payload",
                          path=path, offset=_FTEV_HEADER.size + expected)
    values = np.frombuffer(payload, dtype="<f4").reshape(rows, dim)
    bad = ~np.isfinite(values).all(axis=1)
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise IngestError(f"non-finite value in row {row}", path=path,
                          offset=_FTEV_HEADER.size + row * dim * 4)
    return FeatureSet(values.astype(np.float64))


def _read_features_csv(path: Path) -> FeatureSet:
    rows: list[np.ndarray] = []
    dim = None
    with _text_lines(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                raise IngestError("blank line", path=path, line=lineno)
            fields = text.split(",")
            if dim is None:
                dim = len(fields)
            elif len(fields) != dim:
                raise IngestError(f"row has {len(fields)} values, expected {dim}",
                                  path=path, line=lineno)
            try:
                vals = np.array([float(v) for v in fields], dtype=np.float64)
            except ValueError as e:
                raise IngestError(f"non-numeric value: {e}", path=path, line=lineno) from e
            if not np.isfinite(vals).all():
                raise IngestError("non-finite value", path=path, line=lineno)
            rows.append(vals.astype(np.float32).astype(np.float64))
    if not rows:
        raise IngestError("empty file", path=path, line=1)
    if len(rows) < 2:
        raise IngestError(f"need at least 2 feature rows, got {len(rows)}",
                          path=path, line=1)
    return FeatureSet(np.stack(rows))


def write_features(features: FeatureSet, path, format: str = "ftev") -> None:
    """Write a feature matrix; values are quantized to float32 either way."""
    path = Path(path)
    quantized = features.values.astype("<f4")
    if format == "ftev":
        with open(path, "wb") as fh:
            fh.write(_FTEV_HEADER.pack(FTEV_MAGIC, FTEV_VERSION,
                                       features.rows, features.dim))
            fh.write(quantized.tobytes())
    elif format == "csv":
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for row in quantized:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
    else:
        raise ValueError(f"unknown feature format {format!r}")


_NUMERIC_RUN_RE = re.compile(r"\d+")


def read_frames(dir_path) -> FrameSource:
    """Load a directory of PNG frames, ordered lexicographically by filename."""
    dir_path = Path(dir_path)
    if not dir_path.is_dir():
        raise IngestError("not a directory", path=dir_path)
    names = sorted(p.name for p in dir_path.iterdir()
                   if p.is_file() and p.suffix.lower() == ".png")
    if not names:
        raise IngestError("no PNG files in directory", path=dir_path)
    digit_runs = {len(m.group()) for name in names
                  for m in [_NUMERIC_RUN_RE.search(Path(name).stem)] if m}
    if len(digit_runs) > 1:
        warnings.warn(f"{dir_path}: frame names are not uniformly zero-padded; "
                      f"lexicographic order may differ from numeric order",
                      IngestWarning, stacklevel=2)
    frames = []
    shape = None
    for name in names:
        fpath = dir_path / name
        try:
            with Image.open(fpath) as img:
                if img.mode.startswith("I") or img.mode == "F":
                    raise IngestError(f"unsupported bit depth (mode {img.mode}); "
                                      f"frames must be 8-bit", path=fpath)
                if img.mode == "L":
                    arr = np.asarray(img, dtype=np.uint8)[:, :, None]
                else:
                    arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
        except (UnidentifiedImageError, OSError) as e:
            raise IngestError(f"unreadable image: {e}", path=fpath) from e
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise IngestError(f"frame dimensions {arr.shape[1]}x{arr.shape[0]}x"
                              f"{arr.shape[2]} differ from first frame "
                              f"{shape[1]}x{shape[0]}x{shape[2]}", path=fpath)
        frames.append(arr)
    return FrameSource(np.stack(frames))


def write_frames(source: FrameSource, dir_path, prefix: str = "frame_") -> None:
    """Write frames as zero-padded PNGs (test fixtures and synth output)."""
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    for t in range(source.count):
        arr = source.frames[t]
        img = Image.fromarray(arr[:, :, 0] if source.channels == 1 else arr)
        img.save(dir_path / f"{prefix}{t:06d}.png")
