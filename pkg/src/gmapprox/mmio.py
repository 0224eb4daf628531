"""Matrix Market reader and writer.

Dense matrices use the ``array`` format (column-major values), sparse
matrices the ``coordinate`` format with 1-based indices. Values are written
with 17 significant digits, so ``read_matrix(write_matrix(A))`` reproduces
every float64 exactly.

Malformed input raises :class:`MatrixMarketError` whose ``kind`` names the
problem (``banner``, ``field``, ``symmetry``, ``size``, ``entry``,
``bounds``, ``duplicate``, ``count``) and whose ``lineno`` points at the
offending line.
"""

import numpy as np
import scipy.sparse

from .linalg import as_sparse, is_sparse

BANNER = "%%MatrixMarket"
REAL_FIELDS = ("real", "integer", "double")
SYMMETRIES = ("general", "symmetric")


class MatrixMarketError(ValueError):
    def __init__(self, kind, lineno, message, path=None):
        self.kind = kind
        self.lineno = lineno
        self.detail = message
        self.path = path
        where = f"{path}:{lineno}" if path else f"line {lineno}"
        super().__init__(f"{where}: {kind} error: {message}")


def _lines(fh):
    for lineno, line in enumerate(fh, start=1):
        yield lineno, line.strip()


def _data_lines(it):
    for lineno, line in it:
        if line and not line.startswith("%"):
            yield lineno, line


def _parse_ints(tokens, count, lineno, kind, what):
    if len(tokens) != count:
        raise MatrixMarketError(kind, lineno, f"expected {count} integers for {what}, got {len(tokens)} tokens")
    try:
        vals = [int(t) for t in tokens]
    except ValueError:
        raise MatrixMarketError(kind, lineno, f"non-integer token in {what}: {' '.join(tokens)!r}") from None
    if any(v < 0 for v in vals):
        raise MatrixMarketError(kind, lineno, f"negative value in {what}")
    return vals


def _parse_value(token, lineno):
    try:
        v = float(token)
    except ValueError:
        raise MatrixMarketError("entry", lineno, f"value {token!r} is not a real number") from None
    if not np.isfinite(v):
        raise MatrixMarketError("entry", lineno, f"value {token!r} is not finite")
    return v


def _read(fh):
    it = _lines(fh)
    first = next(it, None)
    if first is None:
        raise MatrixMarketError("banner", 1, "empty file")
    lineno, banner = first
    parts = banner.split()
    if len(parts) != 5 or parts[0] != BANNER or parts[1].lower() != "matrix":
        raise MatrixMarketError("banner", lineno, f"expected '{BANNER} matrix <format> <field> <symmetry>', got {banner!r}")
    fmt, fld, sym = (p.lower() for p in parts[2:])
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketError("banner", lineno, f"unknown format {fmt!r}")
    if fld not in REAL_FIELDS:
        raise MatrixMarketError("field", lineno, f"field {fld!r} is not real-valued")
    if sym not in SYMMETRIES:
        raise MatrixMarketError("symmetry", lineno, f"unsupported symmetry {sym!r}")

    body = _data_lines(it)
    size = next(body, None)
    if size is None:
        raise MatrixMarketError("size", lineno + 1, "missing size line")
    lineno, line = size
    if fmt == "coordinate":
        m, n, count = _parse_ints(line.split(), 3, lineno, "size", "size line 'rows cols nnz'")
    else:
        m, n = _parse_ints(line.split(), 2, lineno, "size", "size line 'rows cols'")
    if sym == "symmetric" and m != n:
        raise MatrixMarketError("size", lineno, f"symmetric matrix must be square, got {m}x{n}")

    if fmt == "array":
        return _read_array(body, m, n, sym, lineno)
    return _read_coordinate(body, m, n, count, sym, lineno)


def _read_array(body, m, n, sym, size_lineno):
    # column-major; symmetric files list the lower triangle only
    if sym == "symmetric":
        slots = [(i, j) for j in range(n) for i in range(j, m)]
    else:
        slots = None
    expected = len(slots) if slots is not None else m * n
    vals = np.empty(expected)
    k = 0
    last = size_lineno
    for lineno, line in body:
        tokens = line.split()
        if len(tokens) != 1:
            raise MatrixMarketError("entry", lineno, f"expected one value per line, got {len(tokens)}")
        if k >= expected:
            raise MatrixMarketError("count", lineno, f"more than the {expected} declared values")
        vals[k] = _parse_value(tokens[0], lineno)
        k += 1
        last = lineno
    if k != expected:
        raise MatrixMarketError("count", last, f"expected {expected} values, found {k}")
    if slots is None:
        return np.ascontiguousarray(vals.reshape((n, m)).T)
    A = np.zeros((m, n))
    rows, cols = np.array(slots, dtype=np.int64).reshape(-1, 2).T
    A[rows, cols] = vals
    A[cols, rows] = vals
    return A


def _read_coordinate(body, m, n, count, sym, size_lineno):
    rows = np.empty(count, dtype=np.int64)
    cols = np.empty(count, dtype=np.int64)
    vals = np.empty(count)
    seen = set()
    k = 0
    last = size_lineno
    for lineno, line in body:
        tokens = line.split()
        if len(tokens) != 3:
            raise MatrixMarketError("entry", lineno, f"expected 'row col value', got {len(tokens)} tokens")
        if k >= count:
            raise MatrixMarketError("count", lineno, f"more than the {count} declared entries")
        i, j = _parse_ints(tokens[:2], 2, lineno, "entry", "entry indices")
        if not (1 <= i <= m and 1 <= j <= n):
            raise MatrixMarketError("bounds", lineno, f"index ({i}, {j}) outside {m}x{n}")
        if sym == "symmetric" and j > i:
            raise MatrixMarketError("bounds", lineno, f"symmetric file has upper-triangle entry ({i}, {j})")
        if (i, j) in seen:
            raise MatrixMarketError("duplicate", lineno, f"entry ({i}, {j}) appears twice")
        seen.add((i, j))
        rows[k], cols[k], vals[k] = i - 1, j - 1, _parse_value(tokens[2], lineno)
        k += 1
        last = lineno
    if k != count:
        raise MatrixMarketError("count", last, f"expected {count} entries, found {k}")
    if sym == "symmetric":
        off = rows != cols
        rows, cols, vals = (np.concatenate([rows, cols[off]]), np.concatenate([cols, rows[off]]),
                            np.concatenate([vals, vals[off]]))
    return as_sparse(scipy.sparse.coo_array((vals, (rows, cols)), shape=(m, n)))


def read_matrix(path):
    """Read a real Matrix Market file: ndarray for ``array``, CSR for ``coordinate``."""
    try:
        with open(path, encoding="ascii") as fh:
            return _read(fh)
    except MatrixMarketError as e:
        raise MatrixMarketError(e.kind, e.lineno, e.detail, path) from None
    except UnicodeDecodeError:
        raise MatrixMarketError("banner", 1, "file is not ASCII text", path) from None


def _g17(values):
    return "\n".join(format(v, ".17g") for v in values.tolist())


def write_matrix(path, A, comment=None):
    """Write ``A``: coordinate format if sparse, array format if dense."""
    with open(path, "w", encoding="ascii") as fh:
        if is_sparse(A):
            A = as_sparse(A).tocoo()
            fh.write(f"{BANNER} matrix coordinate real general\n")
            if comment:
                fh.write(f"% {comment}\n")
            fh.write(f"{A.shape[0]} {A.shape[1]} {A.nnz}\n")
            order = np.lexsort((A.row, A.col))
            for i, j, v in zip(A.row[order].tolist(), A.col[order].tolist(), A.data[order].tolist()):
                fh.write(f"{i + 1} {j + 1} {v:.17g}\n")
        else:
            A = np.asarray(A, dtype=np.float64)
            if A.ndim != 2:
                raise ValueError(f"can only write 2-D matrices, got ndim={A.ndim}")
            fh.write(f"{BANNER} matrix array real general\n")
            if comment:
                fh.write(f"% {comment}\n")
            fh.write(f"{A.shape[0]} {A.shape[1]}\n")
            if A.size:
                fh.write(_g17(A.T.ravel()))
                fh.write("\n")
