"""File formats and model-zoo manifests.

RawBinary feature files (little-endian throughout)::

    offset  size  field
    0       4     magic b"TRFM"
    4       4     u32 version (= 1)
    8       8     u64 n (rows / samples)
    16      8     u64 d (columns / feature dims)
    24      4nd   binary32 values, row-major

Label files hold one value per line (LF or CRLF).  Manifests are JSON::

    {"task_kind": "classification",
     "labels_path": "labels.txt",            # shared default, optional
     "accuracy_path": "accuracy.csv",        # optional, "name,accuracy" rows
     "models": [{"name": "resnet18", "features_path": "r18.trfm",
                 "labels_path": "...", "pseudo_labels_path": "..."}]}

Relative paths resolve against the manifest's directory.
"""
import csv
import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import check_pseudo_labels
from .coding import CLASSIFICATION, REGRESSION, Labels
from .errors import (
    BadMagic,
    EmptyFile,
    FileFormatError,
    ManifestError,
    NonFiniteValue,
    NonInteger,
    RaggedCsv,
    TruncatedFile,
    VersionUnsupported,
)

MAGIC = b"TRFM"
VERSION = 1
HEADER = struct.Struct("<4sIQQ")

RAW = "raw"
CSV = "csv"


def write_feature_file(path, F):
    """Write ``F`` as a RawBinary file (values stored as binary32)."""
    F = np.asarray(F)
    if F.ndim != 2:
        raise ValueError("feature matrix must be 2-D")
    n, d = F.shape
    data = np.ascontiguousarray(F, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, n, d))
        fh.write(data.tobytes())


def _check_finite(F):
    bad = ~np.isfinite(F)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise NonFiniteValue(int(r), int(c))


def read_raw(path):
    blob = Path(path).read_bytes()
    if len(blob) < 4:
        raise TruncatedFile(f"{path}: {len(blob)} bytes, too short for a header")
    if blob[:4] != MAGIC:
        raise BadMagic(f"{path}: bad magic {blob[:4]!r}")
    if len(blob) < HEADER.size:
        raise TruncatedFile(f"{path}: header truncated")
    _, version, n, d = HEADER.unpack_from(blob)
    if version != VERSION:
        raise VersionUnsupported(f"{path}: version {version} unsupported")
    need = HEADER.size + 4 * n * d
    if len(blob) < need:
        raise TruncatedFile(f"{path}: expected {need} bytes, found {len(blob)}")
    if len(blob) > need:
        raise FileFormatError(f"{path}: {len(blob) - need} trailing bytes")
    if n < 1 or d < 1:
        raise FileFormatError(f"{path}: empty matrix {n}x{d}")
    F = np.frombuffer(blob, dtype="<f4", count=n * d, offset=HEADER.size).reshape(n, d)
    _check_finite(F)
    return F.astype(np.float64)


def _is_number(tok):
    try:
        float(tok)
    except ValueError:
        return False
    return True


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(t.strip() for t in r)]
    if not rows:
        raise EmptyFile(f"{path}: no rows")
    if not _is_number(rows[0][0].strip()):
        rows = rows[1:]
        if not rows:
            raise EmptyFile(f"{path}: header only")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise RaggedCsv(f"{path}: row {i} has {len(row)} fields, expected {width}")
        for j, tok in enumerate(row):
            try:
                out[i, j] = float(tok)
            except ValueError:
                raise FileFormatError(f"{path}: row {i}, column {j}: not a number {tok!r}") from None
    _check_finite(out)
    return out


def detect_format(path):
    suffix = Path(path).suffix.lower()
    if suffix in (".trfm", ".bin"):
        return RAW
    if suffix == ".csv":
        return CSV
    with open(path, "rb") as fh:
        return RAW if fh.read(4) == MAGIC else CSV


def read_feature_file(path, fmt=None):
    fmt = fmt or detect_format(path)
    if fmt == RAW:
        return read_raw(path)
    if fmt == CSV:
        return read_csv(path)
    raise ValueError(f"unknown feature format {fmt!r}")


def read_pseudo_labels(path, fmt=None):
    """Source-classifier softmax outputs, ``(n, C_s)``, stored like features."""
    P = read_feature_file(path, fmt)
    # binary32 storage perturbs row sums by up to about C_s ulps
    tol = max(1e-6, P.shape[1] * 2.0 ** -23)
    try:
        check_pseudo_labels(P, tol=tol)
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from None
    return P / P.sum(axis=1, keepdims=True)


def _lines(path):
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln.strip() for ln in text.replace("\r\n", "\n").split("\n")]
    while lines and not lines[-1]:
        lines.pop()
    if not lines:
        raise EmptyFile(f"{path}: no labels")
    return lines


def read_labels(path, kind=CLASSIFICATION):
    lines = _lines(path)
    if kind == CLASSIFICATION:
        vals = []
        for i, ln in enumerate(lines):
            try:
                v = int(ln)
            except ValueError:
                raise NonInteger(f"{path}: line {i + 1}: {ln!r} is not an integer class id") from None
            if v < 0:
                raise NonInteger(f"{path}: line {i + 1}: negative class id {v}")
            vals.append(v)
        return Labels.classification(np.array(vals, dtype=np.int64))
    if kind == REGRESSION:
        vals = np.empty(len(lines))
        for i, ln in enumerate(lines):
            try:
                vals[i] = float(ln)
            except ValueError:
                raise FileFormatError(f"{path}: line {i + 1}: not a number {ln!r}") from None
            if not math.isfinite(vals[i]):
                raise NonFiniteValue(i, 0)
        return Labels.regression(vals)
    raise ValueError(f"unknown label kind {kind!r}")


def write_labels(path, labels):
    vals = labels.values if isinstance(labels, Labels) else np.asarray(labels)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if np.issubdtype(vals.dtype, np.integer):
            fh.writelines(f"{int(v)}\n" for v in vals)
        else:
            fh.writelines(f"{fmt_float(v)}\n" for v in vals)


def read_accuracies(path):
    """``name,accuracy`` rows (optional header) into an ordered dict."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not row[0].strip():
                continue
            if len(row) != 2:
                raise RaggedCsv(f"{path}: row {i} must be name,accuracy")
            name, acc = row[0].strip(), row[1].strip()
            if i == 0 and not _is_number(acc):
                continue
            try:
                value = float(acc)
            except ValueError:
                raise FileFormatError(f"{path}: row {i}: bad accuracy {acc!r}") from None
            if not math.isfinite(value):
                raise NonFiniteValue(i, 1)
            if name in out:
                raise ManifestError(f"{path}: duplicate model {name!r}")
            out[name] = value
    return out


@dataclass
class ModelEntry:
    name: str
    features_path: Path
    labels_path: Path
    pseudo_labels_path: Path = None


@dataclass
class ZooManifest:
    task_kind: str
    models: list = field(default_factory=list)
    accuracy_path: Path = None

    def accuracies(self):
        if self.accuracy_path is None:
            raise ManifestError("manifest has no accuracy_path")
        acc = read_accuracies(self.accuracy_path)
        known = {m.name for m in self.models}
        extra = set(acc) - known
        if extra:
            raise ManifestError(f"accuracy file names unknown models: {sorted(extra)}")
        return acc


def read_manifest(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON: {exc}") from None
    root = path.parent

    def resolve(p):
        return None if p is None else (root / p)

    kind = doc.get("task_kind", CLASSIFICATION)
    if kind not in (CLASSIFICATION, REGRESSION):
        raise ManifestError(f"{path}: task_kind must be classification or regression")
    shared = doc.get("labels_path")
    models, seen = [], set()
    for i, m in enumerate(doc.get("models", [])):
        try:
            name = m["name"]
            feats = m["features_path"]
        except KeyError as exc:
            raise ManifestError(f"{path}: model {i} missing {exc.args[0]!r}") from None
        if name in seen:
            raise ManifestError(f"{path}: duplicate model name {name!r}")
        seen.add(name)
        labels = m.get("labels_path", shared)
        if labels is None:
            raise ManifestError(f"{path}: model {name!r} has no labels_path")
        models.append(ModelEntry(name, resolve(feats), resolve(labels),
                                 resolve(m.get("pseudo_labels_path"))))
    if not models:
        raise ManifestError(f"{path}: no models")
    return ZooManifest(kind, models, resolve(doc.get("accuracy_path")))


def write_manifest(path, manifest):
    path = Path(path)
    root = path.parent

    def rel(p):
        if p is None:
            return None
        p = Path(p)
        try:
            return p.relative_to(root).as_posix()
        except ValueError:
            return p.as_posix()

    doc = {"task_kind": manifest.task_kind, "models": []}
    if manifest.accuracy_path is not None:
        doc["accuracy_path"] = rel(manifest.accuracy_path)
    for m in manifest.models:
        entry = {"name": m.name, "features_path": rel(m.features_path), "labels_path": rel(m.labels_path)}
        if m.pseudo_labels_path is not None:
            entry["pseudo_labels_path"] = rel(m.pseudo_labels_path)
        doc["models"].append(entry)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


# -- serialisation helpers --------------------------------------------------

def fmt_float(v):
    """17 significant digits: round-trips any binary64 exactly."""
    return format(float(v), ".17g")


def dumps(obj, indent=2, _level=0):
    """JSON with every float written by ``fmt_float``; key order preserved."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            raise ValueError("cannot serialise non-finite number")
        return fmt_float(obj)
    return json.dumps(str(obj) if isinstance(obj, Path) else obj)
