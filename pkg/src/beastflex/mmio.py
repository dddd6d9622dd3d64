"""Matrix Market reader and writer for dense in-memory matrices.

Supports the ``coordinate`` and ``array`` formats with ``real``, ``integer``
and ``complex`` fields and ``general``, ``symmetric``, ``skew-symmetric`` and
``hermitian`` symmetry.  ``pattern`` files carry no values and are rejected.
"""
from __future__ import annotations

import os

import numpy as np


class MatrixMarketError(ValueError):
    pass


class ParseError(MatrixMarketError):
    pass


class ShapeError(MatrixMarketError):
    pass


class SymmetryError(MatrixMarketError):
    pass


_FIELDS = ("real", "integer", "complex", "double")
_SYMMETRIES = ("general", "symmetric", "skew-symmetric", "hermitian")


def _parse_header(line, path):
    parts = line.strip().split()
    if len(parts) != 5 or parts[0] != "%%MatrixMarket":
        raise ParseError(f"{path}: malformed Matrix Market banner: {line.strip()!r}")
    obj, fmt, fld, sym = (p.lower() for p in parts[1:])
    if obj != "matrix":
        raise ParseError(f"{path}: unsupported object {obj!r}")
    if fmt not in ("coordinate", "array"):
        raise ParseError(f"{path}: unsupported format {fmt!r}")
    if fld == "pattern":
        raise ParseError(f"{path}: unsupported field type 'pattern' (no numerical values)")
    if fld not in _FIELDS:
        raise ParseError(f"{path}: unsupported field type {fld!r}")
    if sym not in _SYMMETRIES:
        raise ParseError(f"{path}: unsupported symmetry {sym!r}")
    if fld != "complex" and sym == "hermitian":
        raise ParseError(f"{path}: hermitian symmetry requires a complex field")
    return fmt, fld, sym


def _value(tokens, fld, path, lineno):
    try:
        if fld == "complex":
            if len(tokens) != 2:
                raise ValueError
            return complex(float(tokens[0]), float(tokens[1]))
        if len(tokens) != 1:
            raise ValueError
        return float(int(tokens[0])) if fld == "integer" else float(tokens[0])
    except ValueError:
        raise ParseError(f"{path}:{lineno}: bad {fld} value {' '.join(tokens)!r}") from None


def _mirror(M, i, j, v, sym):
    if i == j:
        if sym == "skew-symmetric" and v != 0:
            raise ParseError("skew-symmetric matrix with a nonzero diagonal entry")
        return
    if sym == "symmetric":
        M[j, i] = v
    elif sym == "skew-symmetric":
        M[j, i] = -v
    elif sym == "hermitian":
        M[j, i] = np.conj(v)


def read_matrix_market(path, hermitian: bool = False):
    """Read a Matrix Market file into a dense ndarray.

    With ``hermitian`` the matrix must be square and Hermitian to 1e-12
    relative to its largest entry (checked after symmetric expansion).
    """
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such matrix file: {path}")
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(f"{path}: empty file")
    fmt, fld, sym = _parse_header(lines[0], path)

    body = [(no + 1, ln) for no, ln in enumerate(lines[1:], start=1)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise ParseError(f"{path}: missing size line")
    size_no, size_line = body[0]
    try:
        dims = [int(t) for t in size_line.split()]
    except ValueError:
        raise ParseError(f"{path}:{size_no}: bad size line {size_line!r}") from None
    entries = body[1:]

    dtype = complex if fld == "complex" else float
    if fmt == "coordinate":
        if len(dims) != 3:
            raise ParseError(f"{path}:{size_no}: coordinate size line needs 'rows cols nnz'")
        nrows, ncols, nnz = dims
        if sym != "general" and nrows != ncols:
            raise ShapeError(f"{path}: {sym} matrix must be square, got {nrows}x{ncols}")
        if len(entries) != nnz:
            raise ParseError(f"{path}: header declares {nnz} entries but file contains {len(entries)}")
        M = np.zeros((nrows, ncols), dtype=dtype)
        for lineno, ln in entries:
            tokens = ln.split()
            try:
                i, j = int(tokens[0]) - 1, int(tokens[1]) - 1
            except (ValueError, IndexError):
                raise ParseError(f"{path}:{lineno}: bad entry {ln!r}") from None
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise ParseError(f"{path}:{lineno}: index ({i + 1}, {j + 1}) out of range")
            if sym != "general" and j > i:
                raise ParseError(f"{path}:{lineno}: {sym} file stores an upper-triangle entry")
            v = _value(tokens[2:], fld, path, lineno)
            M[i, j] += v
            _mirror(M, i, j, v, sym)
    else:
        if len(dims) != 2:
            raise ParseError(f"{path}:{size_no}: array size line needs 'rows cols'")
        nrows, ncols = dims
        if sym != "general" and nrows != ncols:
            raise ShapeError(f"{path}: {sym} matrix must be square, got {nrows}x{ncols}")
        if sym == "general":
            positions = [(i, j) for j in range(ncols) for i in range(nrows)]
        elif sym == "skew-symmetric":
            positions = [(i, j) for j in range(ncols) for i in range(j + 1, nrows)]
        else:
            positions = [(i, j) for j in range(ncols) for i in range(j, nrows)]
        if len(entries) != len(positions):
            raise ParseError(f"{path}: expected {len(positions)} array entries but file contains {len(entries)}")
        M = np.zeros((nrows, ncols), dtype=dtype)
        for (i, j), (lineno, ln) in zip(positions, entries):
            v = _value(ln.split(), fld, path, lineno)
            M[i, j] = v
            _mirror(M, i, j, v, sym)

    if hermitian:
        if M.shape[0] != M.shape[1]:
            raise ShapeError(f"{path}: pencil matrix must be square, got {M.shape[0]}x{M.shape[1]}")
        scale = max(np.abs(M).max(initial=0.0), np.finfo(float).tiny)
        if np.abs(M - M.conj().T).max(initial=0.0) > 1e-12 * scale:
            raise SymmetryError(f"{path}: matrix is not Hermitian")
    return M


def write_matrix_market(path, M, symmetry: str = "general", comment: str | None = None):
    """Write a dense matrix in coordinate format; ``symmetry`` stores the lower triangle."""
    M = np.asarray(M)
    if symmetry not in _SYMMETRIES:
        raise ValueError(f"unknown symmetry {symmetry!r}")
    is_complex = np.iscomplexobj(M)
    if symmetry == "hermitian" and not is_complex:
        symmetry = "symmetric"
    fld = "complex" if is_complex else "real"
    rows, cols = M.shape
    if symmetry == "general":
        idx = [(i, j) for j in range(cols) for i in range(rows) if M[i, j] != 0]
    else:
        idx = [(i, j) for j in range(cols) for i in range(j, rows) if M[i, j] != 0]
    with open(path, "w") as fh:
        fh.write(f"%%MatrixMarket matrix coordinate {fld} {symmetry}\n")
        if comment:
            for ln in comment.splitlines():
                fh.write(f"% {ln}\n")
        fh.write(f"{rows} {cols} {len(idx)}\n")
        for i, j in idx:
            v = M[i, j]
            if is_complex:
                fh.write(f"{i + 1} {j + 1} {float(v.real)!r} {float(v.imag)!r}\n")
            else:
                fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")
