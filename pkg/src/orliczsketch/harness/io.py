"""Matrix files.

``dense_csv``: one matrix row per line, comma-separated decimals.
``sparse_csv``: a header ``i,j,value`` followed by zero-based triplets. An
optional ``# shape n d`` comment before the header fixes the dimensions;
otherwise they are the largest indices plus one.

Values are written with ``repr`` so a save/load round trip is exact.
"""
import numpy as np

from ..matrix import MatrixHandle

FORMATS = ("dense_csv", "sparse_csv")


class MatrixFileError(ValueError):
    pass


def _float(tok, path, lineno):
    try:
        v = float(tok)
    except ValueError:
        raise MatrixFileError(f"{path}:{lineno}: cannot parse {tok.strip()!r} as a number") from None
    if not np.isfinite(v):
        raise MatrixFileError(f"{path}:{lineno}: non-finite value {tok.strip()!r}")
    return v


def _load_dense(path, lines):
    rows = []
    width = None
    for lineno, line in lines:
        vals = [_float(t, path, lineno) for t in line.split(",")]
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise MatrixFileError(f"{path}:{lineno}: expected {width} columns, found {len(vals)}")
        rows.append(vals)
    return MatrixHandle.from_dense(np.array(rows, dtype=float))


def _index(tok, path, lineno):
    tok = tok.strip()
    if not tok.isdigit():
        raise MatrixFileError(f"{path}:{lineno}: bad index {tok!r}")
    return int(tok)


def _load_sparse(path, lines, shape):
    lineno, header = lines[0]
    if [h.strip() for h in header.split(",")] != ["i", "j", "value"]:
        raise MatrixFileError(f"{path}:{lineno}: expected header 'i,j,value'")
    seen = {}
    rows, cols, vals = [], [], []
    for lineno, line in lines[1:]:
        parts = line.split(",")
        if len(parts) != 3:
            raise MatrixFileError(f"{path}:{lineno}: expected 3 fields, found {len(parts)}")
        i, j = _index(parts[0], path, lineno), _index(parts[1], path, lineno)
        if (i, j) in seen:
            raise MatrixFileError(
                f"{path}:{lineno}: duplicate entry ({i}, {j}), first at line {seen[i, j]}")
        seen[i, j] = lineno
        rows.append(i)
        cols.append(j)
        vals.append(_float(parts[2], path, lineno))
    if shape is None:
        if not rows:
            raise MatrixFileError(f"{path}: no entries and no '# shape' line")
        shape = (max(rows) + 1, max(cols) + 1)
    elif rows and (max(rows) >= shape[0] or max(cols) >= shape[1]):
        raise MatrixFileError(f"{path}: entry outside declared shape {shape}")
    return MatrixHandle.from_coo(np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64),
                                 np.array(vals, dtype=float), shape)


def load_matrix(path, fmt="dense_csv"):
    if fmt not in FORMATS:
        raise MatrixFileError(f"unknown matrix format {fmt!r}")
    with open(path) as fh:
        raw = fh.read().splitlines()
    lines = []
    shape = None
    for lineno, line in enumerate(raw, 1):
        text = line.strip()
        if not text:
            continue
        if text.startswith("#"):
            parts = text[1:].split()
            if parts[:1] == ["shape"]:
                try:
                    shape = (int(parts[1]), int(parts[2]))
                except (IndexError, ValueError):
                    raise MatrixFileError(f"{path}:{lineno}: bad shape line") from None
            continue
        lines.append((lineno, text))
    if not lines:
        raise MatrixFileError(f"{path}: empty file")
    if fmt == "dense_csv":
        return _load_dense(path, lines)
    return _load_sparse(path, lines, shape)


def save_matrix(A, path, fmt="dense_csv"):
    if fmt not in FORMATS:
        raise MatrixFileError(f"unknown matrix format {fmt!r}")
    A = MatrixHandle.wrap(A)
    with open(path, "w") as fh:
        if fmt == "dense_csv":
            for row in A.to_dense():
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
            return
        fh.write(f"# shape {A.n} {A.d}\n")
        fh.write("i,j,value\n")
        if A.is_sparse:
            trip = zip(A.rows, A.cols, A.vals)
        else:
            r, c = np.nonzero(A.dense)
            trip = zip(r, c, A.dense[r, c])
        for i, j, v in trip:
            fh.write(f"{int(i)},{int(j)},{float(v)!r}\n")


def matrix_io(path, direction, fmt="dense_csv", A=None):
    """``direction`` is ``load`` (returns a MatrixHandle) or ``save`` (writes ``A``)."""
    if direction == "load":
        return load_matrix(path, fmt)
    if direction == "save":
        if A is None:
            raise MatrixFileError("save needs a matrix")
        return save_matrix(A, path, fmt)
    raise MatrixFileError(f"direction must be load or save, got {direction!r}")


def load_vector(path):
    """One number per line, or a single comma-separated line."""
    A = load_matrix(path, "dense_csv").to_dense()
    if A.shape[1] == 1:
        return A[:, 0]
    if A.shape[0] == 1:
        return A[0]
    raise MatrixFileError(f"{path}: expected a vector, found shape {A.shape}")


def save_vector(x, path):
    with open(path, "w") as fh:
        for v in np.asarray(x, dtype=float).ravel():
            fh.write(repr(float(v)) + "\n")
