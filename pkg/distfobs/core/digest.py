"""
digest — JSON seals and atomic writes
=====================================
Reports are sealed with a SHA-256 over their sorted-key JSON, so identical
designs produce identical hashes. Files are written to a temp file in the
target directory and swapped into place with os.replace.
"""

import hashlib
import json
import logging
import os
import tempfile
from typing import Any, Callable, Dict, Iterable, Optional

import numpy as np

from ..exception import IoError

logger = logging.getLogger(__name__)

HASH_EXCLUDE = ("timestamp", "report_hash")


def jsonable(obj: Any) -> Any:
    """json.dumps default= hook for numpy values, complex numbers and sets."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def to_json(data: Any, indent: Optional[int] = 2) -> str:
    return json.dumps(data, indent=indent, sort_keys=True, default=jsonable)


def json_digest(data: Dict[str, Any], exclude: Iterable[str] = HASH_EXCLUDE) -> str:
    skip = set(exclude)
    body = {k: v for k, v in data.items() if k not in skip}
    serialized = json.dumps(body, sort_keys=True, default=jsonable)
    return hashlib.sha256(serialized.encode()).hexdigest()


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    try:
        with open(path, "rb") as f:
            for chunk in iter(lambda: f.read(1 << 16), b""):
                h.update(chunk)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    return h.hexdigest()


def atomic_write(path: str, write: Callable, newline: Optional[str] = None):
    """Run write(handle) against a temp file next to `path`, then swap it in."""
    dir_name = os.path.dirname(os.path.abspath(path)) or "."
    try:
        fd, tmp_path = tempfile.mkstemp(dir=dir_name, suffix=".tmp")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline=newline) as f:
            write(f)
        os.replace(tmp_path, path)
    except Exception as exc:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        if isinstance(exc, OSError) and not isinstance(exc, IoError):
            raise IoError(f"cannot write {path}: {exc}") from exc
        raise
    logger.debug("wrote %s", path)
