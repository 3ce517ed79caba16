"""
Utility functions for BornLens: canonical JSON, atomic writes, checksums
"""

import hashlib
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Union

import numpy as np

PathLike = Union[str, Path]


def to_jsonable(data: Any) -> Any:
    """
    Convert numpy scalars/arrays and non-finite floats into plain JSON values

    Non-finite floats become None so the output stays strict JSON.
    """
    if isinstance(data, dict):
        return {str(k): to_jsonable(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [to_jsonable(v) for v in data]
    if isinstance(data, np.ndarray):
        return [to_jsonable(v) for v in data.tolist()]
    if isinstance(data, (np.bool_, bool)):
        return bool(data)
    if isinstance(data, (np.integer, int)):
        return int(data)
    if isinstance(data, (np.floating, float)):
        value = float(data)
        return value if math.isfinite(value) else None
    return data


def canonical_json(data: Any, pretty: bool = False) -> str:
    """
    Deterministic JSON: sorted keys, fixed separators, no NaN

    Args:
        data: Data to format
        pretty: Indent for human reading (still deterministic)

    Returns:
        JSON string
    """
    payload = to_jsonable(data)
    if pretty:
        return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def atomic_write_bytes(path: PathLike, data: bytes) -> Path:
    """
    Write a file through a temporary sibling and an atomic rename

    Args:
        path: Destination
        data: File contents

    Returns:
        The destination path
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return target


def atomic_write_text(path: PathLike, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def sha256_file(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def format_float(value: float) -> str:
    """Shortest round-trip representation; platform independent"""
    return repr(float(value))


def series_csv(times: Iterable[float], values: Iterable[float], header: str = "t,value") -> str:
    """
    Render a two-column series as CSV text

    Args:
        times: First column
        values: Second column
        header: Header line

    Returns:
        CSV text with a trailing newline
    """
    lines = [header]
    lines.extend(f"{format_float(t)},{format_float(v)}" for t, v in zip(times, values))
    return "\n".join(lines) + "\n"


def param_dir(name: str, value: Any) -> str:
    """Directory name for one grid point, e.g. ``sigma=0.2``"""
    if isinstance(value, float):
        return f"{name}={value:g}"
    return f"{name}={value}"
