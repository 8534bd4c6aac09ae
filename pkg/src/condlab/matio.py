"""Matrix file ingestion: plain CSV and MatrixMarket array format.

CSV files are bare numeric rows, comma-separated, equal length, no header.
MatrixMarket array files carry the ``%%MatrixMarket matrix array real
general`` banner, optional % comments, a dims line, then values in
column-major order.  Writers emit shortest round-trip float representations
so a written file re-ingests bit-identically.
"""

from __future__ import annotations

import numpy as np

_MM_BANNER = "%%matrixmarket"


def read_matrix(path):
    """Load a matrix from CSV or MatrixMarket array format (sniffed)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.lower().startswith(_MM_BANNER):
        return _parse_matrix_market(text, path)
    return _parse_csv(text, path)


def _parse_csv(text, path):
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: ragged rows in CSV matrix")
    return np.asarray(rows, dtype=np.float64)


def _parse_matrix_market(text, path):
    lines = iter(text.splitlines())
    banner = next(lines).split()
    if [tok.lower() for tok in banner[:5]] != [
        "%%matrixmarket",
        "matrix",
        "array",
        "real",
        "general",
    ]:
        raise ValueError(f"{path}: unsupported MatrixMarket header {banner!r}")
    for line in lines:
        line = line.strip()
        if not line or line.startswith("%"):
            continue
        dims = line.split()
        break
    else:
        raise ValueError(f"{path}: missing dimensions line")
    if len(dims) != 2:
        raise ValueError(f"{path}: malformed dimensions line {dims!r}")
    rows, cols = int(dims[0]), int(dims[1])
    values = []
    for line in lines:
        line = line.strip()
        if not line or line.startswith("%"):
            continue
        values.append(float(line.split()[0]))
    if len(values) != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} values, found {len(values)}")
    return np.asarray(values, dtype=np.float64).reshape((cols, rows)).T


def read_vector(path):
    """Load a vector: a one-row or one-column matrix file."""
    m = read_matrix(path)
    if 1 not in m.shape:
        raise ValueError(f"{path}: expected a vector (one row or one column), got {m.shape}")
    return m.reshape(-1)


def write_matrix_csv(path, a):
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    with open(path, "w", encoding="utf-8") as fh:
        for row in a:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")


def write_matrix_market(path, a):
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    rows, cols = a.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("%%MatrixMarket matrix array real general\n")
        fh.write(f"{rows} {cols}\n")
        for j in range(cols):
            for i in range(rows):
                fh.write(repr(float(a[i, j])))
                fh.write("\n")
