"""Plain-text matrix files.

Format: UTF-8; ``#`` starts a comment; the first non-blank line is
``rows cols``, followed by ``rows`` lines of ``cols`` numbers separated by
single spaces. Values are written with 17 significant digits so that a
write/read round trip is bit-exact.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import InputError

Mat = np.ndarray


class MatrixFormatError(InputError):
    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


def _content_lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def parse_matrix(text: str, source: str = "<string>") -> Mat:
    lines = list(_content_lines(text))
    if not lines:
        raise MatrixFormatError(source, 1, "missing 'rows cols' header")
    no, header = lines[0]
    parts = header.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise MatrixFormatError(source, no, f"expected 'rows cols' header, got {header!r}")
    rows, cols = int(parts[0]), int(parts[1])
    body = lines[1:]
    if len(body) != rows:
        last = body[-1][0] if body else no
        raise MatrixFormatError(source, last, f"expected {rows} rows, found {len(body)}")
    out = np.empty((rows, cols))
    for i, (no, line) in enumerate(body):
        tokens = line.split()
        if len(tokens) != cols:
            raise MatrixFormatError(source, no, f"expected {cols} values, found {len(tokens)}")
        for j, tok in enumerate(tokens):
            try:
                v = float(tok)
            except ValueError:
                raise MatrixFormatError(source, no, f"non-numeric token {tok!r}") from None
            if not np.isfinite(v):
                raise MatrixFormatError(source, no, f"non-finite value {tok!r}")
            out[i, j] = v
    return out


def read_matrix(path) -> Mat:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: cannot read matrix file ({exc})") from exc
    return parse_matrix(text, str(path))


def format_matrix(m: Mat) -> str:
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    if m.ndim != 2:
        raise InputError(f"expected a 2-D matrix, got {m.ndim} dimensions")
    if not np.all(np.isfinite(m)):
        raise InputError("matrix has non-finite entries")
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    lines += [" ".join(f"{v:.17g}" for v in row) for row in m]
    return "\n".join(lines) + "\n"


def write_matrix(path, m: Mat) -> None:
    Path(path).write_text(format_matrix(m), encoding="utf-8")
