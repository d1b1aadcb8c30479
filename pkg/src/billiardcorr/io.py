"""Plain-text interchange: CSV with ``# key=value`` headers and key=value manifests.

Numbers are written with 17 significant digits so a write/read cycle is exact.
All writers go through a temporary file in the target directory followed by
``os.replace``, so a reader never sees a half-written file.
"""

from __future__ import annotations

import io
import os
import tempfile
from pathlib import Path

import numpy as np

FLOAT_FORMAT = "%.17g"


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (tuple, list, np.ndarray)):
        return ",".join(format_value(v) for v in value)
    return str(value)


def write_table(path, header: dict, data, columns=None) -> Path:
    """Write a 2-D array as CSV preceded by ``# key=value`` lines.

    ``columns`` (if given) is recorded as a ``# columns=`` header line.
    """
    arr = np.atleast_2d(np.asarray(data, dtype=float))
    if not np.all(np.isfinite(arr)):
        raise ValueError("refusing to write non-finite values")
    buf = io.StringIO()
    for key, value in header.items():
        buf.write(f"# {key}={format_value(value)}\n")
    if columns is not None:
        buf.write("# columns=" + ",".join(columns) + "\n")
    np.savetxt(buf, arr, fmt=FLOAT_FORMAT, delimiter=",")
    return atomic_write_text(path, buf.getvalue())


def read_table(path):
    """Return ``(header, data)``; header values are left as strings."""
    header = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].strip().partition("=")
                if sep:
                    header[key.strip()] = value.strip()
                continue
            rows.append([float(v) for v in line.split(",")])
    if not rows:
        return header, np.empty((0, 0))
    return header, np.array(rows)


def parse_floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(","))


def write_manifest(path, entries: dict) -> Path:
    lines = [f"{key}={format_value(value)}" for key, value in entries.items()]
    return atomic_write_text(path, "\n".join(lines) + "\n")


def read_manifest(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"malformed manifest line: {line!r}")
            out[key.strip()] = value.strip()
    return out
