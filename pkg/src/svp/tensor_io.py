"""Bit-exact file formats for exchanging tensors and training logs.

Two binary formats, both little-endian and platform-independent:

SVPT tensor file (dense real matrix, float32, row-major)
    bytes 0-3    magic ``SVPT``
    bytes 4-5    version, u16 LE, must be 1
    byte  6      dtype, u8, must be 0 (float32)
    byte  7      reserved, must be 0
    bytes 8-15   rows, u64 LE
    bytes 16-23  cols, u64 LE
    then         rows * cols float32 LE, row-major

SVPL training-log file (per-example per-step correctness)
    bytes 0-3    magic ``SVPL``
    bytes 4-5    version, u16 LE, must be 1
    bytes 6-7    reserved, must be 0
    bytes 8-15   n (examples), u64 LE
    bytes 16-23  E (observation steps), u64 LE
    then         n * E bytes, each 0 or 1, example-major

A training log may also be imported from CSV with header
``example_id,epoch,correct``; the (id, epoch) grid must be complete with no
duplicates. All writes go to a temporary file in the target directory and are
renamed into place, so no partial output survives an error.
"""

from __future__ import annotations

import csv
import os
import struct
import tempfile

import numpy as np

TENSOR_MAGIC = b"SVPT"
LOG_MAGIC = b"SVPL"
FORMAT_VERSION = 1
DTYPE_F32 = 0

_HEADER = struct.Struct("<4sHBBQQ")  # magic, version, dtype, reserved, rows, cols
_LOG_HEADER = struct.Struct("<4sHHQQ")  # magic, version, reserved, n, E


class FormatError(ValueError):
    """Base class for file-format violations."""


class BadMagicError(FormatError):
    pass


class UnsupportedVersionError(FormatError):
    pass


class UnsupportedDtypeError(FormatError):
    pass


class TruncatedPayloadError(FormatError):
    pass


class InvalidHeaderError(FormatError):
    """Header fields out of range (zero dims, nonzero reserved bytes)."""


class InvalidValueError(FormatError):
    """Payload or CSV cell holds a value the format forbids."""


class ProbMatrixError(ValueError):
    """Matrix failed probability validation; carries the offending row."""

    def __init__(self, message: str, row: int):
        super().__init__(message)
        self.row = row


def atomic_write_bytes(path: str, data: bytes) -> None:
    """Write to a temp file in the same directory, then rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".svp-tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def check_matrix(matrix: np.ndarray) -> np.ndarray:
    """Validate the dense-matrix invariants: 2-D, nonempty, finite."""
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"matrix must be nonempty, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("matrix contains non-finite values")
    return m


def write_tensor(matrix: np.ndarray, path: str) -> None:
    """Write a matrix as an SVPT file. Values are stored as float32."""
    m = check_matrix(matrix)
    with np.errstate(over="ignore"):
        payload = np.ascontiguousarray(m, dtype="<f4")
    if not np.isfinite(payload).all():
        raise ValueError("matrix values overflow float32")
    rows, cols = payload.shape
    header = _HEADER.pack(TENSOR_MAGIC, FORMAT_VERSION, DTYPE_F32, 0, rows, cols)
    atomic_write_bytes(path, header + payload.tobytes())


def read_tensor(path: str) -> np.ndarray:
    """Read an SVPT file into an (n, d) float32 matrix."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise TruncatedPayloadError(f"file is {len(data)} bytes, header needs {_HEADER.size}")
    magic, version, dtype, reserved, rows, cols = _HEADER.unpack_from(data)
    if magic != TENSOR_MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {TENSOR_MAGIC!r}")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"unsupported version {version}")
    if dtype != DTYPE_F32:
        raise UnsupportedDtypeError(f"unsupported dtype code {dtype}")
    if reserved != 0:
        raise InvalidHeaderError("reserved byte must be 0")
    if rows < 1 or cols < 1:
        raise InvalidHeaderError(f"dimensions must be positive, got {rows}x{cols}")
    expected = rows * cols * 4
    actual = len(data) - _HEADER.size
    if actual < expected:
        raise TruncatedPayloadError(f"payload holds {actual} bytes, header promises {expected}")
    if actual > expected:
        raise FormatError(f"{actual - expected} trailing bytes after payload")
    flat = np.frombuffer(data, dtype="<f4", offset=_HEADER.size)
    matrix = flat.reshape(rows, cols).astype(np.float32)
    if not np.isfinite(matrix).all():
        raise InvalidValueError("tensor payload contains non-finite values")
    return matrix


def validate_prob_matrix(matrix: np.ndarray, tol: float = 1e-5) -> np.ndarray:
    """Accept a matrix as per-row categorical distributions or reject it.

    Every entry must lie in [0, 1] and every row must sum to 1 within ``tol``.
    Rejection reports the first offending row (and its sum, for sum failures).
    """
    m = check_matrix(matrix)
    if m.shape[1] < 2:
        raise ProbMatrixError(f"need at least 2 classes, got {m.shape[1]}", row=-1)
    bad_entry = (m < 0.0) | (m > 1.0)
    if bad_entry.any():
        row = int(np.nonzero(bad_entry.any(axis=1))[0][0])
        raise ProbMatrixError(f"row {row} has an entry outside [0, 1]", row=row)
    sums = m.sum(axis=1)
    off = np.abs(sums - 1.0) > tol
    if off.any():
        row = int(np.nonzero(off)[0][0])
        raise ProbMatrixError(f"row {row} sums to {sums[row]!r}, expected 1 within {tol}", row=row)
    return m


def check_train_log(log: np.ndarray) -> np.ndarray:
    log = np.asarray(log)
    if log.ndim != 2:
        raise ValueError(f"train log must be 2-D, got ndim={log.ndim}")
    if log.shape[0] < 1 or log.shape[1] < 1:
        raise ValueError(f"train log must be nonempty, got shape {log.shape}")
    if log.dtype != np.bool_:
        as_int = np.asarray(log)
        if not np.isin(as_int, (0, 1)).all():
            raise ValueError("train log values must be 0 or 1")
        log = as_int.astype(np.bool_)
    return log


def write_train_log(log: np.ndarray, path: str) -> None:
    """Write an (n, E) boolean correctness record as an SVPL file."""
    log = check_train_log(log)
    n, steps = log.shape
    header = _LOG_HEADER.pack(LOG_MAGIC, FORMAT_VERSION, 0, n, steps)
    atomic_write_bytes(path, header + log.astype(np.uint8).tobytes())


def read_train_log(path: str) -> np.ndarray:
    """Read an SVPL file into an (n, E) boolean array."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _LOG_HEADER.size:
        raise TruncatedPayloadError(f"file is {len(data)} bytes, header needs {_LOG_HEADER.size}")
    magic, version, reserved, n, steps = _LOG_HEADER.unpack_from(data)
    if magic != LOG_MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {LOG_MAGIC!r}")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"unsupported version {version}")
    if reserved != 0:
        raise InvalidHeaderError("reserved bytes must be 0")
    if n < 1 or steps < 1:
        raise InvalidHeaderError(f"dimensions must be positive, got {n}x{steps}")
    expected = n * steps
    actual = len(data) - _LOG_HEADER.size
    if actual < expected:
        raise TruncatedPayloadError(f"payload holds {actual} bytes, header promises {expected}")
    if actual > expected:
        raise FormatError(f"{actual - expected} trailing bytes after payload")
    payload = np.frombuffer(data, dtype=np.uint8, offset=_LOG_HEADER.size)
    if not np.isin(payload, (0, 1)).all():
        bad = int(payload[~np.isin(payload, (0, 1))][0])
        raise InvalidValueError(f"log byte must be 0 or 1, found {bad}")
    return payload.reshape(n, steps).astype(np.bool_)


def read_train_log_csv(path: str) -> np.ndarray:
    """Import a training log from CSV with header ``example_id,epoch,correct``.

    The (example_id, epoch) grid must be complete: ids 0..n-1 and epochs
    0..E-1 with every cell present exactly once.
    """
    cells: dict[tuple[int, int], bool] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["example_id", "epoch", "correct"]:
            raise InvalidValueError(f"expected header example_id,epoch,correct, got {header}")
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != 3:
                raise InvalidValueError(f"line {lineno}: expected 3 fields, got {len(rec)}")
            try:
                ex, ep, val = int(rec[0]), int(rec[1]), int(rec[2])
            except ValueError as exc:
                raise InvalidValueError(f"line {lineno}: non-integer field") from exc
            if ex < 0 or ep < 0:
                raise InvalidValueError(f"line {lineno}: negative example_id or epoch")
            if val not in (0, 1):
                raise InvalidValueError(f"line {lineno}: correct must be 0 or 1, got {val}")
            if (ex, ep) in cells:
                raise InvalidValueError(f"line {lineno}: duplicate cell ({ex}, {ep})")
            cells[(ex, ep)] = bool(val)
    if not cells:
        raise InvalidValueError("log CSV holds no data rows")
    n = max(ex for ex, _ in cells) + 1
    steps = max(ep for _, ep in cells) + 1
    if len(cells) != n * steps:
        for ex in range(n):
            for ep in range(steps):
                if (ex, ep) not in cells:
                    raise InvalidValueError(f"missing cell (example_id={ex}, epoch={ep})")
    log = np.zeros((n, steps), dtype=np.bool_)
    for (ex, ep), val in cells.items():
        log[ex, ep] = val
    return log


def write_scores_csv(scores: np.ndarray, path: str) -> None:
    """Export per-example scores as CSV ``example_id,score``."""
    scores = np.asarray(scores, dtype=np.float64)
    lines = ["example_id,score"]
    lines.extend(f"{i},{float(v)!r}" for i, v in enumerate(scores))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_scores_csv(path: str) -> np.ndarray:
    """Read a CSV written by :func:`write_scores_csv` back to a float vector."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["example_id", "score"]:
            raise InvalidValueError(f"expected header example_id,score, got {header}")
        pairs = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != 2:
                raise InvalidValueError(f"line {lineno}: expected 2 fields, got {len(rec)}")
            try:
                pairs.append((int(rec[0]), float(rec[1])))
            except ValueError as exc:
                raise InvalidValueError(f"line {lineno}: malformed row") from exc
    if not pairs:
        raise InvalidValueError("scores CSV holds no data rows")
    ids = sorted(i for i, _ in pairs)
    if ids != list(range(len(pairs))):
        raise InvalidValueError("example_id column must cover 0..n-1 exactly once")
    out = np.empty(len(pairs), dtype=np.float64)
    for i, v in pairs:
        out[i] = v
    return out


def write_labels_csv(labels: np.ndarray, path: str) -> None:
    """Export integer class labels as CSV ``example_id,label``."""
    labels = np.asarray(labels)
    lines = ["example_id,label"]
    lines.extend(f"{i},{int(v)}" for i, v in enumerate(labels))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_labels_csv(path: str) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["example_id", "label"]:
            raise InvalidValueError(f"expected header example_id,label, got {header}")
        pairs = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != 2:
                raise InvalidValueError(f"line {lineno}: expected 2 fields, got {len(rec)}")
            try:
                pairs.append((int(rec[0]), int(rec[1])))
            except ValueError as exc:
                raise InvalidValueError(f"line {lineno}: malformed row") from exc
    if not pairs:
        raise InvalidValueError("labels CSV holds no data rows")
    ids = sorted(i for i, _ in pairs)
    if ids != list(range(len(pairs))):
        raise InvalidValueError("example_id column must cover 0..n-1 exactly once")
    out = np.empty(len(pairs), dtype=np.int64)
    for i, v in pairs:
        out[i] = v
    if (out < 0).any():
        raise InvalidValueError("labels must be nonnegative")
    return out
