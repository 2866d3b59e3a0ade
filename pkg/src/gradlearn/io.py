"""CSV and MNIST IDX readers/writers.

CSV values are written with 17 significant digits, so a write/read cycle
reproduces every float64 exactly.
"""

from __future__ import annotations

import csv
import gzip
import struct
from pathlib import Path

import numpy as np

from .data import Dataset
from .errors import DataFormatError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_matrix(path, M, header=None) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow(header)
        if M.shape[1] == 0:
            return
        for row in M:
            w.writerow([_fmt(v) for v in row])


def read_matrix(path, header: bool = False) -> tuple[np.ndarray, list[str] | None]:
    """Read a rectangular numeric CSV. Returns ``(matrix, header_names)``."""
    rows = []
    names = None
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if header and names is None:
                names = [c.strip() for c in row]
                width = len(names)
                continue
            if not row or all(not c.strip() for c in row):
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataFormatError(
                    f"{path}: row {lineno} has {len(row)} fields, expected {width}"
                )
            vals = []
            for col, cell in enumerate(row, start=1):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataFormatError(
                        f"{path}: non-numeric value {cell!r} at row {lineno}, column {col}"
                    ) from None
            rows.append(vals)
    if not rows:
        return np.zeros((0, width or 0)), names
    return np.array(rows, dtype=float), names


def write_dataset(path, data: Dataset, header: bool = True) -> None:
    names = [f"x{k + 1}" for k in range(data.p)] + ["y"] if header else None
    write_matrix(path, np.column_stack([data.X, data.y]), names)


def load_csv(path, label_column=-1, header: bool = False, classification: bool = False) -> Dataset:
    """Load features plus one response column.

    ``label_column`` is a column index (negative counts from the end) or,
    with ``header=True``, a column name.
    """
    M, names = read_matrix(path, header)
    if M.shape[1] < 2:
        raise DataFormatError(f"{path}: need at least one feature and a label column")
    if isinstance(label_column, str):
        if names is None or label_column not in names:
            raise DataFormatError(f"{path}: no label column named {label_column!r}")
        col = names.index(label_column)
    else:
        col = int(label_column)
        if not -M.shape[1] <= col < M.shape[1]:
            raise DataFormatError(f"{path}: label column {col} out of range")
        col %= M.shape[1]
    y = M[:, col]
    X = np.delete(M, col, axis=1)
    ds = Dataset(X, y)
    if classification and not ds.is_binary():
        bad = sorted(set(np.unique(y)) - {-1.0, 1.0})[:5]
        raise DataFormatError(f"{path}: classification labels must be +-1, found {bad}")
    return ds


def _open(path):
    path = Path(path)
    return gzip.open(path, "rb") if path.suffix == ".gz" else open(path, "rb")


def _read_idx(path, magic: int, ndims: int) -> np.ndarray:
    with _open(path) as fh:
        buf = fh.read()
    head = 4 + 4 * ndims
    if len(buf) < head:
        raise DataFormatError(f"{path}: truncated IDX header")
    found = struct.unpack(">I", buf[:4])[0]
    if found != magic:
        raise DataFormatError(
            f"{path}: bad IDX magic 0x{found:08x}, expected 0x{magic:08x}"
        )
    dims = struct.unpack(f">{ndims}I", buf[4:head])
    size = int(np.prod(dims))
    payload = buf[head:]
    if len(payload) < size:
        raise DataFormatError(
            f"{path}: truncated IDX payload ({len(payload)} of {size} bytes)"
        )
    return np.frombuffer(payload, dtype=np.uint8, count=size).reshape(dims)


def load_idx_images(path) -> np.ndarray:
    """Images as an ``n x (rows*cols)`` float array scaled to [0, 1]."""
    raw = _read_idx(path, IDX_IMAGES_MAGIC, 3)
    return raw.reshape(raw.shape[0], -1).astype(float) / 255.0


def load_idx_labels(path) -> np.ndarray:
    return _read_idx(path, IDX_LABELS_MAGIC, 1).astype(int)


def write_idx_images(path, images) -> None:
    images = np.asarray(images)
    if images.ndim != 3 or images.dtype != np.uint8:
        raise ValueError("expected a uint8 array of shape (n, rows, cols)")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, *images.shape))
        fh.write(images.tobytes())


def write_idx_labels(path, labels) -> None:
    labels = np.asarray(labels, dtype=np.uint8).reshape(-1)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, labels.size))
        fh.write(labels.tobytes())


def load_idx_dataset(images_path, labels_path, pair: tuple[int, int] | None = None) -> Dataset:
    """Images and labels as a Dataset.

    With ``pair=(a, b)`` only digits a and b are kept, labelled -1 and +1.
    """
    X = load_idx_images(images_path)
    labels = load_idx_labels(labels_path)
    if X.shape[0] != labels.shape[0]:
        raise DataFormatError(
            f"{X.shape[0]} images but {labels.shape[0]} labels"
        )
    if pair is None:
        return Dataset(X, labels.astype(float))
    neg, pos = pair
    keep = (labels == neg) | (labels == pos)
    return Dataset(X[keep], np.where(labels[keep] == pos, 1.0, -1.0))
