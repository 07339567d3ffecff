"""Plain-text tensor and decomposition files.

Tensor file::

    GDT 1
    <real|complex> <d> <n>
    one coordinate per line, lexicographic tuple order ("re im" if complex)

Decomposition file::

    GDD 1
    <real|complex> <d> <m> <r>
    r*d*m lines: block by block, column by column, entry by entry
    r coefficient lines

Numbers are written with Python's shortest round-trip ``repr``, so reading a
written file gives back the same doubles bit for bit.
"""
from __future__ import annotations

from math import comb
from pathlib import Path

import numpy as np

from .decompose import Decomposition
from .errors import ParseError
from .skew import SkewTensor


def _fmt(x, cplx: bool) -> str:
    if cplx:
        z = complex(x)
        return f"{z.real!r} {z.imag!r}"
    return repr(float(np.real(x)))


def _parse_scalar(line: str, cplx: bool, lineno: int):
    parts = line.split()
    try:
        if cplx:
            if len(parts) != 2:
                raise ValueError
            return complex(float(parts[0]), float(parts[1]))
        if len(parts) != 1:
            raise ValueError
        return float(parts[0])
    except ValueError:
        raise ParseError(f"line {lineno}: bad scalar {line!r}") from None


def _header(lines: list[str], tag: str, nfields: int):
    if not lines or lines[0].strip() != tag:
        raise ParseError(f"missing {tag!r} header")
    if len(lines) < 2:
        raise ParseError("truncated header")
    parts = lines[1].split()
    if len(parts) != nfields or parts[0] not in ("real", "complex"):
        raise ParseError(f"bad header line {lines[1]!r}")
    try:
        ints = [int(p) for p in parts[1:]]
    except ValueError:
        raise ParseError(f"bad header line {lines[1]!r}") from None
    return parts[0] == "complex", ints


def format_tensor(T: SkewTensor) -> str:
    cplx = T.field == "complex"
    body = "\n".join(_fmt(x, cplx) for x in T.coords)
    return f"GDT 1\n{T.field} {T.d} {T.n}\n{body}\n"


def parse_tensor(text: str) -> SkewTensor:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    cplx, (d, n) = _header(lines, "GDT 1", 3)
    if d < 1 or n < d:
        raise ParseError(f"invalid shape d={d}, n={n}")
    body = lines[2:]
    if len(body) != comb(n, d):
        raise ParseError(f"expected {comb(n, d)} coordinates, found {len(body)}")
    vals = [_parse_scalar(ln, cplx, i + 3) for i, ln in enumerate(body)]
    return SkewTensor(np.array(vals, dtype=complex if cplx else float), n, d)


def format_decomposition(D: Decomposition) -> str:
    cplx = D.field == "complex"
    out = ["GDD 1", f"{D.field} {D.d} {D.m} {D.r}"]
    for i in range(D.r):
        for k in range(D.d):
            out.extend(_fmt(x, cplx) for x in D.blocks[i, :, k])
    out.extend(_fmt(x, cplx) for x in D.coefficients)
    return "\n".join(out) + "\n"


def parse_decomposition(text: str) -> Decomposition:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    cplx, (d, m, r) = _header(lines, "GDD 1", 4)
    body = lines[2:]
    if min(d, m, r) < 1 or len(body) != r * d * m + r:
        raise ParseError(f"expected {r * d * m + r} body lines, found {len(body)}")
    vals = np.array([_parse_scalar(ln, cplx, i + 3) for i, ln in enumerate(body)],
                    dtype=complex if cplx else float)
    blocks = vals[: r * d * m].reshape(r, d, m).transpose(0, 2, 1)
    return Decomposition(np.ascontiguousarray(blocks), vals[r * d * m:])


def read_tensor(path) -> SkewTensor:
    return parse_tensor(Path(path).read_text())


def write_tensor(path, T: SkewTensor) -> None:
    Path(path).write_text(format_tensor(T))


def read_decomposition(path) -> Decomposition:
    return parse_decomposition(Path(path).read_text())


def write_decomposition(path, D: Decomposition) -> None:
    Path(path).write_text(format_decomposition(D))
