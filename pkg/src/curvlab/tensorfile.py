"""Text and JSON serialization of curvature tensors.

Text layout::

    CURVLAB-TENSOR 1 <n> <r> <kahler 0|1>
    <i> <j> <alpha> <beta> <re> <im>
    ...

Indices are 1-based.  Only tuples with ``(i, alpha) <= (j, beta)``
lexicographically are stored; the Hermitian partner of each record is
reconstructed on read.  Missing canonical tuples read as zero.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .tensor_core import CurvatureTensor, TensorError

FORMAT_VERSION = "1"
MAGIC = "CURVLAB-TENSOR"


class TensorFileError(TensorError):
    pass


def canonical_records(R: CurvatureTensor):
    """Yield ``(i, j, alpha, beta, re, im)`` (1-based) in canonical order.

    The remaining entries are implied by Hermitian symmetry, so diagonal
    records carry only their real part (any rounding-level imaginary part of
    a numerically assembled tensor is dropped).
    """
    e = R.entries
    for i in range(R.n):
        for j in range(R.n):
            for a in range(R.r):
                for b in range(R.r):
                    if (i, a) <= (j, b):
                        z = e[i, j, a, b]
                        im = 0.0 if (i, a) == (j, b) else float(z.imag)
                        yield i + 1, j + 1, a + 1, b + 1, float(z.real), im


def _assemble(n, r, kahler, records) -> CurvatureTensor:
    if not (isinstance(n, int) and isinstance(r, int)) or n < 1 or r < 1:
        raise TensorFileError(f"bad dimensions n={n!r}, r={r!r}")
    e = np.zeros((n, n, r, r), dtype=complex)
    seen = set()
    for rec in records:
        i, j, a, b, re, im = rec
        if not (1 <= i <= n and 1 <= j <= n and 1 <= a <= r and 1 <= b <= r):
            raise TensorFileError(f"index out of range in record {rec}")
        i, j, a, b = i - 1, j - 1, a - 1, b - 1
        if (i, a) > (j, b):
            raise TensorFileError(f"non-canonical record {rec}")
        if (i, j, a, b) in seen:
            raise TensorFileError(f"duplicate canonical entry {rec}")
        seen.add((i, j, a, b))
        if (i, a) == (j, b) and im != 0.0:
            raise TensorFileError(f"diagonal record {rec} must be real")
        e[i, j, a, b] = complex(re, im)
        e[j, i, b, a] = complex(re, -im)
    try:
        return CurvatureTensor(e, kahler=bool(kahler))
    except TensorError as exc:
        raise TensorFileError(str(exc)) from exc


def dumps_text(R: CurvatureTensor) -> str:
    lines = [f"{MAGIC} {FORMAT_VERSION} {R.n} {R.r} {int(R.kahler)}"]
    for i, j, a, b, re, im in canonical_records(R):
        lines.append(f"{i} {j} {a} {b} {re:.17g} {im:.17g}")
    return "\n".join(lines) + "\n"


def dumps_json(R: CurvatureTensor) -> str:
    doc = {
        "format": FORMAT_VERSION, "n": R.n, "r": R.r, "kahler_flag": bool(R.kahler),
        "entries": [dict(zip(("i", "j", "alpha", "beta", "re", "im"), rec))
                    for rec in canonical_records(R)],
    }
    return json.dumps(doc, indent=1)


def _int(tok: str, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise TensorFileError(f"malformed {what}: {tok!r}") from None


def _float(tok: str) -> float:
    try:
        x = float(tok)
    except ValueError:
        raise TensorFileError(f"malformed number {tok!r}") from None
    if not np.isfinite(x):
        raise TensorFileError(f"non-finite number {tok!r}")
    return x


def loads_text(text: str) -> CurvatureTensor:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise TensorFileError("empty tensor file")
    head = lines[0].split()
    if len(head) != 5 or head[0] != MAGIC:
        raise TensorFileError(f"bad header {lines[0]!r}")
    if head[1] != FORMAT_VERSION:
        raise TensorFileError(f"unsupported format version {head[1]!r}")
    n, r, k = (_int(t, "header field") for t in head[2:])
    if k not in (0, 1):
        raise TensorFileError(f"kahler flag must be 0 or 1, got {k}")
    records = []
    for ln in lines[1:]:
        tok = ln.split()
        if len(tok) != 6:
            raise TensorFileError(f"expected 6 fields, got {len(tok)}: {ln!r}")
        records.append(tuple(_int(t, "index") for t in tok[:4]) + (_float(tok[4]), _float(tok[5])))
    return _assemble(n, r, k, records)


def loads_json(text: str) -> CurvatureTensor:
    try:
        doc = json.loads(text)
        if str(doc["format"]) != FORMAT_VERSION:
            raise TensorFileError(f"unsupported format version {doc['format']!r}")
        records = [(int(d["i"]), int(d["j"]), int(d["alpha"]), int(d["beta"]),
                    float(d["re"]), float(d["im"])) for d in doc["entries"]]
        n, r, k = doc["n"], doc["r"], doc["kahler_flag"]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, TensorFileError):
            raise
        raise TensorFileError(f"malformed structured tensor: {exc}") from exc
    return _assemble(n, r, k, records)


def loads(text: str) -> CurvatureTensor:
    """Parse either layout, sniffing on the first non-blank character."""
    if text.lstrip().startswith("{"):
        return loads_json(text)
    return loads_text(text)


def read_tensor(path) -> CurvatureTensor:
    return loads(Path(path).read_text())


def write_tensor(R: CurvatureTensor, path, fmt: str = "text") -> None:
    if fmt not in ("text", "structured"):
        raise ValueError(f"unknown format {fmt!r}")
    Path(path).write_text(dumps_text(R) if fmt == "text" else dumps_json(R))
