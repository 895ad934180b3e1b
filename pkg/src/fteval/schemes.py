"""Landmark scheme registry and on-disk scheme definitions.

A scheme file is JSON: ``{"name": str, "total": int, "mouth_indices": [int]}``.
``resolve_scheme`` looks up built-ins first, then ``$FTEVAL_SCHEME_DIR/<name>.json``,
then treats the argument as a literal path.
"""
from __future__ import annotations

import json
import os
from pathlib import Path

from .errors import IngestError
from .model import LandmarkScheme

SCHEME_DIR_ENV = "FTEVAL_SCHEME_DIR"

# 68-point convention: outer + inner lip ring occupies the last 20 indices.
IBUG68 = LandmarkScheme(name="ibug68", total=68, mouth_indices=tuple(range(48, 68)))

BUILTIN_SCHEMES = {"ibug68": IBUG68}


def load_scheme_file(path) -> LandmarkScheme:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as e:
        raise IngestError(f"cannot read scheme file: {e}", path=path) from e
    except json.JSONDecodeError as e:
        raise IngestError(f"invalid scheme JSON: {e.msg}", path=path, line=e.lineno) from e
    if not isinstance(doc, dict):
        raise IngestError("scheme file must hold a JSON object", path=path)
    missing = {"name", "total", "mouth_indices"} - doc.keys()
    if missing:
        raise IngestError(f"scheme file missing fields: {sorted(missing)}", path=path)
    return LandmarkScheme(name=str(doc["name"]), total=int(doc["total"]),
                          mouth_indices=tuple(int(i) for i in doc["mouth_indices"]))


def resolve_scheme(name: str) -> LandmarkScheme:
    """Map a scheme name or file path to a LandmarkScheme."""
    if name in BUILTIN_SCHEMES:
        return BUILTIN_SCHEMES[name]
    if name == "generic":
        raise IngestError("scheme 'generic' needs explicit mouth indices; pass a scheme "
                          "file or --mouth-indices")
    scheme_dir = os.environ.get(SCHEME_DIR_ENV)
    if scheme_dir:
        candidate = Path(scheme_dir) / f"{name}.json"
        if candidate.is_file():
            return load_scheme_file(candidate)
    if Path(name).is_file():
        return load_scheme_file(name)
    raise IngestError(f"unknown scheme '{name}' (not a built-in, not in "
                      f"${SCHEME_DIR_ENV}, not a file)")
