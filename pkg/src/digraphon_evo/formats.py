"""Plain-text file formats.

* matrix: first line ``n``, then ``n`` lines of ``n`` space-separated numbers.
  Integer-only files read back as integer arrays, so 0/1 adjacency files
  round-trip unchanged.
* segments: ``row_lo row_hi col_lo col_hi weight`` per line; ``#`` starts a
  comment, blank lines are skipped.
* labels: one integer per line.
* report: ``key=value`` lines, then a ``[matrix]`` header and a matrix block.

Writers use ``repr`` for floats, so write -> read -> write is byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .grid_store import Segment


class FormatError(ValueError):
    def __init__(self, path, lineno: int | None, msg: str):
        where = f"{path}" if lineno is None else f"{path}:{lineno}"
        super().__init__(f"{where}: {msg}")


def format_matrix(m: np.ndarray) -> str:
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got {a.shape}")
    ints = np.issubdtype(a.dtype, np.integer) or a.dtype == bool
    lines = [str(a.shape[0])]
    for row in a:
        lines.append(" ".join(str(int(x)) if ints else repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str, path="<matrix>") -> np.ndarray:
    lines = [(i, ln.split()) for i, ln in enumerate(text.splitlines(), 1) if ln.strip()]
    if not lines:
        raise FormatError(path, None, "empty matrix file")
    lineno, head = lines[0]
    if len(head) != 1:
        raise FormatError(path, lineno, "first line must hold the size n")
    try:
        n = int(head[0])
    except ValueError:
        raise FormatError(path, lineno, f"bad size {head[0]!r}") from None
    if n < 1:
        raise FormatError(path, lineno, "size must be positive")
    rows = lines[1:]
    if len(rows) != n:
        raise FormatError(path, None, f"expected {n} rows, found {len(rows)}")
    tokens = []
    for lineno, toks in rows:
        if len(toks) != n:
            raise FormatError(path, lineno, f"expected {n} entries, found {len(toks)}")
        tokens.append((lineno, toks))
    try:
        return np.array([[int(t) for t in toks] for _, toks in tokens], dtype=np.int64)
    except ValueError:
        pass
    out = np.empty((n, n))
    for r, (lineno, toks) in enumerate(tokens):
        for c, t in enumerate(toks):
            try:
                out[r, c] = float(t)
            except ValueError:
                raise FormatError(path, lineno, f"bad number {t!r}") from None
    return out


def format_segments(segments: Sequence[Segment]) -> str:
    return "".join(f"{s.row_lo} {s.row_hi} {s.col_lo} {s.col_hi} {s.weight!r}\n" for s in segments)


def parse_segments(text: str, path="<segments>") -> list[Segment]:
    out = []
    for lineno, ln in enumerate(text.splitlines(), 1):
        body = ln.split("#", 1)[0].split()
        if not body:
            continue
        if len(body) != 5:
            raise FormatError(path, lineno, "expected 'row_lo row_hi col_lo col_hi weight'")
        try:
            out.append(Segment(*(int(t) for t in body[:4]), float(body[4])))
        except ValueError as e:
            raise FormatError(path, lineno, str(e)) from None
    if not out:
        raise FormatError(path, None, "no segments")
    return out


def format_labels(labels: Sequence[int]) -> str:
    return "".join(f"{int(x)}\n" for x in labels)


def parse_labels(text: str, path="<labels>") -> list[int]:
    out = []
    for lineno, ln in enumerate(text.splitlines(), 1):
        s = ln.strip()
        if not s:
            continue
        try:
            out.append(int(s))
        except ValueError:
            raise FormatError(path, lineno, f"bad label {s!r}") from None
        if out[-1] < 1:
            raise FormatError(path, lineno, "labels must be positive")
    return out


def format_vector(values) -> str:
    return "".join(f"{float(x)!r}\n" for x in values)


@dataclass
class Report:
    fields: dict[str, str] = field(default_factory=dict)
    matrix: np.ndarray | None = None

    def format(self) -> str:
        lines = [f"{k}={v}" for k, v in self.fields.items()]
        if self.matrix is not None:
            lines.append("[matrix]")
            return "\n".join(lines) + "\n" + format_matrix(self.matrix)
        return "\n".join(lines) + "\n"


def parse_report(text: str, path="<report>") -> Report:
    head, sep, tail = text.partition("[matrix]\n")
    rep = Report()
    for lineno, ln in enumerate(head.splitlines(), 1):
        if not ln:
            continue
        key, eq, value = ln.partition("=")
        if not eq:
            raise FormatError(path, lineno, "expected key=value")
        rep.fields[key] = value
    if sep:
        rep.matrix = parse_matrix(tail, path)
    return rep


def read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise FormatError(path, None, e.strerror or str(e)) from None


def write_text(path, text: str) -> None:
    Path(path).write_text(text)
