"""CSV and JSON output with run manifests.

CSV: comma-separated, LF line endings, UTF-8, header row, floats written with
17 significant digits so every double round-trips.  JSON: a versioned document
``{"schema_version", "manifest", "results"}``; readers ignore unknown fields.
"""

from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from . import __version__

SCHEMA_VERSION = 1


def format_float(v: float) -> str:
    return "%.17g" % v


def _cell(v) -> str:
    if isinstance(v, enum.Enum):
        return str(v.value)
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(float(v))
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def to_jsonable(obj):
    """Convert results (dataclasses, enums, numpy, complex) to plain JSON types.

    Complex numbers become ``{"re": ..., "im": ...}``; NaN and infinities become
    ``null``.
    """
    if obj is None or isinstance(obj, (str, bool)):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


@dataclass
class RunManifest:
    command: str
    params: dict
    seeds: list = field(default_factory=list)
    generator: Optional[str] = None
    tool_version: str = __version__
    timestamp: str = ""

    def __post_init__(self):
        if not self.timestamp:
            self.timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def write_json(path: Path, manifest: RunManifest, results: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"schema_version": SCHEMA_VERSION,
           "manifest": to_jsonable(manifest),
           "results": to_jsonable(results)}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, allow_nan=False)
        fh.write("\n")
    return path


def read_json(path: Path) -> tuple[RunManifest, dict]:
    """Load a result document; unknown keys at any level are ignored."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    raw = doc.get("manifest", {})
    known = {f.name for f in dataclasses.fields(RunManifest)}
    manifest = RunManifest(**{k: v for k, v in raw.items() if k in known})
    return manifest, doc.get("results", {})
