"""Reading and writing feature files, matrices, affinity tables,
dendrograms and synthetic-study configs.

RSAF feature files (all integers little-endian)::

    offset  size  field
    0       4     magic b"RSAF"
    4       2     version (u16) = 1
    6       4     n_conditions (u32)
    10      4     n_features (u32)
    14      4     task name length in bytes (u32), then UTF-8 bytes
    ...           n_conditions condition ids, each u32 length + UTF-8 bytes
    ...           n_conditions * n_features float64, row-major by condition

Nothing may follow the payload.  Readers never repair input: any deviation
raises a :class:`~taskrsa.errors.FormatError` subclass carrying the byte
offset (binary) or row number (CSV) of the problem.
"""

from __future__ import annotations

import csv
import io as _stdio
import json
import math
import struct
from pathlib import Path

import numpy as np

from .clustering import Dendrogram, Merge
from .core import RDM, SYMMETRY_TOL, FeatureMatrix, SimilarityMatrix, TaskMatrix
from .errors import (
    AsymmetricBeyondTolerance,
    BadDiagonal,
    BadEncoding,
    BadMagic,
    DuplicateConditionId,
    DuplicateSource,
    EmptyTable,
    IoFailure,
    MalformedFile,
    MissingOrientation,
    NonFinite,
    NonFiniteScore,
    TrailingData,
    TruncatedPayload,
    ValidationError,
    VersionUnsupported,
)
from .selection import AffinityTable, Orientation
from .synthetic import Group, SyntheticSpec

MAGIC = b"RSAF"
VERSION = 1
_HEADER = struct.Struct("<4sHII")


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc.strerror or exc}") from exc


def _read_text(path) -> str:
    data = _read_bytes(path)
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise BadEncoding(f"{path}: not valid UTF-8", where=exc.start) from exc


def _write(path, data) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc.strerror or exc}") from exc


def fmt_float(x: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return format(float(x), ".17g")


# -- feature matrices -------------------------------------------------------


def encode_features(fm: FeatureMatrix) -> bytes:
    name = fm.task.encode("utf-8")
    parts = [_HEADER.pack(MAGIC, VERSION, fm.n_conditions, fm.n_features)]
    parts.append(struct.pack("<I", len(name)) + name)
    for cond in fm.conditions:
        raw = cond.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)) + raw)
    parts.append(np.ascontiguousarray(fm.data, dtype="<f8").tobytes())
    return b"".join(parts)


class _Cursor:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if n > len(self.buf) - self.pos:
            raise TruncatedPayload(
                f"truncated {what}: need {n} bytes at offset {self.pos}, "
                f"{len(self.buf) - self.pos} left",
                where=self.pos,
            )
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def text(self, what: str) -> str:
        n = self.u32(f"{what} length")
        start = self.pos
        raw = self.take(n, what)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BadEncoding(f"{what} is not valid UTF-8", where=start + exc.start) from exc


def decode_features(buf: bytes) -> FeatureMatrix:
    """Parse an in-memory RSAF file."""
    cur = _Cursor(buf)
    if len(buf) < 4 or buf[:4] != MAGIC:
        raise BadMagic(f"bad magic {bytes(buf[:4])!r}, expected {MAGIC!r}", where=0)
    cur.take(4, "magic")
    version = struct.unpack("<H", cur.take(2, "version"))[0]
    if version != VERSION:
        raise VersionUnsupported(f"unsupported RSAF version {version}", where=4)
    n_c = cur.u32("n_conditions")
    n_f = cur.u32("n_features")
    task = cur.text("task name")
    if not task:
        raise MalformedFile("empty task name", where=14)

    conditions, seen = [], set()
    for i in range(n_c):
        start = cur.pos
        cond = cur.text(f"condition id {i}")
        if cond in seen:
            raise DuplicateConditionId(f"duplicate condition id {cond!r}", where=start)
        seen.add(cond)
        conditions.append(cond)

    payload_at = cur.pos
    raw = cur.take(n_c * n_f * 8, "payload")
    if cur.pos != len(buf):
        raise TrailingData(f"{len(buf) - cur.pos} unexpected bytes after payload", where=cur.pos)
    data = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(n_c, n_f)
    bad = ~np.isfinite(data)
    if bad.any():
        flat = int(np.flatnonzero(bad.ravel())[0])
        raise NonFinite(
            f"non-finite value for condition {conditions[flat // n_f]!r}",
            where=payload_at + 8 * flat,
        )
    try:
        return FeatureMatrix(task, tuple(conditions), data)
    except ValidationError as exc:
        raise MalformedFile(str(exc), where=payload_at) from exc


def write_features(fm: FeatureMatrix, path) -> None:
    _write(path, encode_features(fm))


def parse_features_csv(text: str, task: str) -> FeatureMatrix:
    """CSV form: header row, then one row per condition (id, features...)."""
    rows = list(csv.reader(_stdio.StringIO(text)))
    if not rows:
        raise MalformedFile("empty CSV", where=1)
    header, body = rows[0], rows[1:]
    if len(header) < 3:
        raise MalformedFile("header needs an id column and at least 2 feature columns", where=1)
    conditions, data, seen = [], [], set()
    for lineno, row in enumerate(body, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise MalformedFile(f"row {lineno}: {len(row)} fields, expected {len(header)}", where=lineno)
        cond = row[0]
        if cond in seen:
            raise DuplicateConditionId(f"row {lineno}: duplicate condition id {cond!r}", where=lineno)
        seen.add(cond)
        try:
            values = [float(v) for v in row[1:]]
        except ValueError as exc:
            raise MalformedFile(f"row {lineno}: {exc}", where=lineno) from exc
        if not all(math.isfinite(v) for v in values):
            raise NonFinite(f"row {lineno}: non-finite feature value", where=lineno)
        conditions.append(cond)
        data.append(values)
    matrix = np.array(data, dtype=np.float64).reshape(len(data), len(header) - 1)
    try:
        return FeatureMatrix(task, tuple(conditions), matrix)
    except ValidationError as exc:
        raise MalformedFile(str(exc)) from exc


def read_features(path) -> FeatureMatrix:
    """Read an RSAF file, or a ``.csv`` feature table named after its task."""
    buf = _read_bytes(path)
    if buf[:4] == MAGIC or Path(path).suffix.lower() != ".csv":
        return decode_features(buf)
    try:
        text = buf.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise BadEncoding(f"{path}: not valid UTF-8", where=exc.start) from exc
    return parse_features_csv(text, Path(path).stem)


# -- square matrices --------------------------------------------------------


def format_matrix(matrix) -> str:
    if isinstance(matrix, RDM):
        corner, labels = f"rdm:{matrix.task}", matrix.conditions
    elif isinstance(matrix, SimilarityMatrix):
        corner, labels = "similarity", matrix.tasks
    else:
        raise TypeError(f"cannot write {type(matrix).__name__}")
    out = _stdio.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow([corner, *labels])
    for label, row in zip(labels, matrix.values):
        w.writerow([label, *(fmt_float(v) for v in row)])
    return out.getvalue()


def write_matrix(matrix, path) -> None:
    """Write an RDM or SimilarityMatrix as a labelled CSV table.

    The corner cell records the kind: ``rdm:<task>`` or ``similarity``.
    """
    _write(path, format_matrix(matrix))


def parse_matrix(text: str):
    rows = [r for r in csv.reader(_stdio.StringIO(text)) if r]
    if not rows:
        raise MalformedFile("empty matrix file", where=1)
    corner, labels = rows[0][0], rows[0][1:]
    n = len(labels)
    if len(rows) != n + 1:
        raise MalformedFile(f"{n} column labels but {len(rows) - 1} data rows", where=len(rows))
    values = np.empty((n, n))
    for i, row in enumerate(rows[1:]):
        lineno = i + 2
        if len(row) != n + 1:
            raise MalformedFile(f"row {lineno}: {len(row)} fields, expected {n + 1}", where=lineno)
        if row[0] != labels[i]:
            raise MalformedFile(f"row {lineno}: label {row[0]!r} != column label {labels[i]!r}", where=lineno)
        try:
            values[i] = [float(v) for v in row[1:]]
        except ValueError as exc:
            raise MalformedFile(f"row {lineno}: {exc}", where=lineno) from exc
        if not np.all(np.isfinite(values[i])):
            raise NonFinite(f"row {lineno}: non-finite value", where=lineno)

    if corner.startswith("rdm:"):
        kind, task, diag = "rdm", corner[4:], 0.0
    elif corner == "similarity":
        kind, task, diag = "similarity", None, 1.0
    else:
        raise MalformedFile(f"unknown matrix kind {corner!r}", where=1)
    for i in range(n):
        if values[i, i] != diag:
            raise BadDiagonal(f"row {i + 2}: diagonal is {values[i, i]!r}, expected {diag}", where=i + 2)
    if n:
        gap = np.abs(values - values.T)
        if gap.max() > SYMMETRY_TOL:
            i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
            raise AsymmetricBeyondTolerance(
                f"cells ({labels[i]}, {labels[j]}) and ({labels[j]}, {labels[i]}) differ by {gap[i, j]:.3g}",
                where=int(i) + 2,
            )
    # Within tolerance the lower triangle is authoritative.
    upper = np.triu_indices(n, k=1)
    values[upper] = values.T[upper]
    try:
        if kind == "rdm":
            return RDM(task, tuple(labels), values)
        return SimilarityMatrix(tuple(labels), values)
    except ValidationError as exc:
        raise MalformedFile(str(exc)) from exc


def read_matrix(path):
    """Read a matrix written by :func:`write_matrix`, re-checking invariants."""
    return parse_matrix(_read_text(path))


def read_task_matrix(path) -> TaskMatrix:
    """Read any labelled square matrix without structural checks.

    Meant for external matrices such as transfer affinities.
    """
    rows = [r for r in csv.reader(_stdio.StringIO(_read_text(path))) if r]
    if not rows:
        raise MalformedFile("empty matrix file", where=1)
    labels = rows[0][1:]
    if len(rows) != len(labels) + 1 or any(len(r) != len(labels) + 1 for r in rows[1:]):
        raise MalformedFile("matrix is not square")
    try:
        values = [[float(v) for v in r[1:]] for r in rows[1:]]
        return TaskMatrix(tuple(labels), np.array(values))
    except (ValueError, ValidationError) as exc:
        raise MalformedFile(str(exc)) from exc


# -- affinity tables --------------------------------------------------------


def format_affinity(table: AffinityTable) -> str:
    out = _stdio.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow([f"#target={table.target}", f"orientation={table.orientation.value}"])
    w.writerow(["source_task", "performance"])
    for source, perf in table.entries:
        w.writerow([source, fmt_float(perf)])
    return out.getvalue()


def write_affinity(table: AffinityTable, path) -> None:
    _write(path, format_affinity(table))


def parse_affinity(text: str) -> AffinityTable:
    """Parse an affinity CSV.

    The first row holds metadata, ``#target=<task>,orientation=<o>`` with
    ``o`` one of ``higher_better`` / ``lower_better``.  A
    ``source_task,performance`` header follows, then one row per source.
    """
    rows = list(csv.reader(_stdio.StringIO(text)))
    if not rows or not rows[0] or not rows[0][0].startswith("#"):
        raise MissingOrientation("first row must be '#target=...,orientation=...'", where=1)
    meta = {}
    for cell in rows[0]:
        key, sep, value = cell.lstrip("#").strip().partition("=")
        if sep:
            meta[key.strip()] = value.strip()
    if "orientation" not in meta:
        raise MissingOrientation("metadata row lacks orientation", where=1)
    try:
        orientation = Orientation(meta["orientation"])
    except ValueError:
        raise MissingOrientation(f"unknown orientation {meta['orientation']!r}", where=1) from None
    if not meta.get("target"):
        raise MalformedFile("metadata row lacks target", where=1)
    if len(rows) < 2 or [c.strip() for c in rows[1]] != ["source_task", "performance"]:
        raise MalformedFile("second row must be 'source_task,performance'", where=2)

    entries, seen = [], set()
    for lineno, row in enumerate(rows[2:], start=3):
        if not row:
            continue
        if len(row) != 2:
            raise MalformedFile(f"row {lineno}: expected 2 fields", where=lineno)
        source = row[0].strip()
        if not source:
            raise MalformedFile(f"row {lineno}: empty source task", where=lineno)
        if source in seen:
            raise DuplicateSource(f"row {lineno}: duplicate source task {source!r}", where=lineno)
        seen.add(source)
        try:
            perf = float(row[1])
        except ValueError as exc:
            raise MalformedFile(f"row {lineno}: {exc}", where=lineno) from exc
        if not math.isfinite(perf):
            raise NonFiniteScore(f"row {lineno}: non-finite score for {source!r}", where=lineno)
        entries.append((source, perf))
    if not entries:
        raise EmptyTable("affinity table has no entries")
    return AffinityTable(meta["target"], tuple(entries), orientation)


def read_affinity(path) -> AffinityTable:
    return parse_affinity(_read_text(path))


# -- dendrograms ------------------------------------------------------------

_NEWICK_SPECIAL = set(" \t\n()[]':;,")


def newick_label(name: str) -> str:
    if any(ch in _NEWICK_SPECIAL for ch in name):
        return "'" + name.replace("'", "''") + "'"
    return name


def to_newick(dend: Dendrogram) -> str:
    """Newick text; branch length = parent height - child height."""
    n = dend.n_leaves
    if n == 1:
        return newick_label(dend.leaves[0]) + ";"

    def render(node: int) -> str:
        if node < n:
            return newick_label(dend.leaves[node])
        m = dend.merges[node - n]
        parts = []
        for child in (m.left, m.right):
            length = m.height - dend.node_height(child)
            parts.append(f"{render(child)}:{max(length, 0.0)!r}")
        return "(" + ",".join(parts) + ")"

    return render(2 * n - 2) + ";"


def dendrogram_to_dict(dend: Dendrogram) -> dict:
    return {
        "leaves": list(dend.leaves),
        "merges": [{"left": m.left, "right": m.right, "height": m.height} for m in dend.merges],
        "linkage": dend.linkage,
        "tie_break": dend.tie_break,
    }


def dendrogram_from_dict(obj: dict) -> Dendrogram:
    try:
        return Dendrogram(
            tuple(obj["leaves"]),
            tuple(Merge(int(m["left"]), int(m["right"]), float(m["height"])) for m in obj["merges"]),
            linkage=obj.get("linkage", "average"),
            tie_break=obj.get("tie_break", "lexicographic-min-node-pair"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedFile(f"bad dendrogram JSON: {exc}") from exc


def write_dendrogram(dend: Dendrogram, path, format: str = "newick") -> None:
    fmt = format.lower()
    if fmt == "newick":
        _write(path, to_newick(dend) + "\n")
    elif fmt == "json":
        _write(path, json.dumps(dendrogram_to_dict(dend), indent=2) + "\n")
    else:
        raise ValueError(f"unknown dendrogram format {format!r}")


def read_dendrogram_json(path) -> Dendrogram:
    try:
        obj = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"invalid JSON: {exc}", where=exc.lineno) from exc
    return dendrogram_from_dict(obj)


# -- synthetic specs --------------------------------------------------------


def spec_to_dict(spec: SyntheticSpec) -> dict:
    obj = {
        "seed": spec.seed,
        "n_conditions": spec.n_conditions,
        "latent_dim": spec.latent_dim,
        "groups": [
            {"name": g.name, "members": list(g.members), "alpha": g.alpha,
             "shared_weight": g.shared_weight}
            for g in spec.groups
        ],
        "feature_dim_per_task": spec.feature_dim_per_task,
        "noise_sigma": spec.noise_sigma,
    }
    if spec.projection_seeds:
        obj["projection_seeds"] = dict(spec.projection_seeds)
    return obj


_SPEC_FIELDS = {"seed", "n_conditions", "latent_dim", "groups", "feature_dim_per_task",
                "noise_sigma", "projection_seeds"}
_GROUP_FIELDS = {"name", "members", "alpha", "shared_weight"}


def spec_from_dict(obj) -> SyntheticSpec:
    if not isinstance(obj, dict):
        raise ValidationError("synthetic spec must be a JSON object")
    problems = [f"{k}: unknown field" for k in obj if k not in _SPEC_FIELDS]
    problems += [f"{k}: missing" for k in sorted(_SPEC_FIELDS - {"projection_seeds"}) if k not in obj]
    groups = obj.get("groups")
    if not isinstance(groups, list):
        problems.append("groups: must be a list")
        groups = []
    for i, g in enumerate(groups):
        if not isinstance(g, dict):
            problems.append(f"groups[{i}]: must be an object")
            continue
        problems += [f"groups[{i}].{k}: unknown field" for k in g if k not in _GROUP_FIELDS]
        problems += [f"groups[{i}].{k}: missing" for k in ("name", "members", "alpha") if k not in g]
    if problems:
        raise ValidationError("invalid synthetic spec: " + "; ".join(problems))
    return SyntheticSpec(
        seed=obj["seed"],
        n_conditions=obj["n_conditions"],
        latent_dim=obj["latent_dim"],
        groups=tuple(Group(**g) for g in groups),
        feature_dim_per_task=obj["feature_dim_per_task"],
        noise_sigma=obj["noise_sigma"],
        projection_seeds=dict(obj.get("projection_seeds", {})),
    )


def read_spec(path) -> SyntheticSpec:
    try:
        obj = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"invalid JSON: {exc}", where=exc.lineno) from exc
    return spec_from_dict(obj)


def write_spec(spec: SyntheticSpec, path) -> None:
    _write(path, json.dumps(spec_to_dict(spec), indent=2) + "\n")
