"""Sequence containers and the discrete-dataset text format."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import FormatError, NonFinite


@dataclass(frozen=True)
class MultivariateSequence:
    """Real-valued R x n feature matrix (row r = feature dimension r over time)."""

    id: str
    label: str
    values: np.ndarray
    group: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"{self.id}: values must be 2-D (R x n), got shape {values.shape}")
        if values.shape[0] < 1:
            raise ValueError(f"{self.id}: R must be positive")
        if not np.all(np.isfinite(values)):
            raise NonFinite(f"{self.id}: values contain NaN or Inf")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def R(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class DiscreteSequence:
    """R parallel symbol rows.

    Symbols lie in ``[min_symbol, min_symbol + alphabet_size)``. DFQ output uses
    ``min_symbol=0`` and ``alphabet_size=B+2``; VQ output uses 1-based codeword
    ids, so ``min_symbol=1`` and ``alphabet_size=D``.
    """

    id: str
    label: str
    rows: np.ndarray
    alphabet_size: int
    min_symbol: int = 0
    group: str = ""

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise ValueError(f"{self.id}: rows must be a 2-D array with R >= 1")
        if rows.size and (rows.min() < self.min_symbol
                          or rows.max() >= self.min_symbol + self.alphabet_size):
            raise ValueError(f"{self.id}: symbol outside declared alphabet")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def R(self) -> int:
        return self.rows.shape[0]

    @property
    def n(self) -> int:
        return self.rows.shape[1]

    def shifted_rows(self) -> np.ndarray:
        """Rows re-based to 0 .. alphabet_size-1 (the kernel feature-map domain)."""
        if self.min_symbol == 0:
            return self.rows
        return self.rows - self.min_symbol


_HEADER = "dfq-discrete v1"


def save_discrete(dataset: Iterable[DiscreteSequence], path) -> None:
    dataset = list(dataset)
    if not dataset:
        raise FormatError("cannot save an empty discrete dataset")
    first = dataset[0]
    lines = [f"{_HEADER} N={len(dataset)} R={first.R} "
             f"alphabet={first.alphabet_size} offset={first.min_symbol}"]
    for seq in dataset:
        if (seq.R, seq.alphabet_size, seq.min_symbol) != (first.R, first.alphabet_size, first.min_symbol):
            raise FormatError(f"{seq.id}: inconsistent R/alphabet within dataset")
        lines.append(f"seq\t{seq.id}\t{seq.label}\t{seq.group}\t{seq.n}")
        for row in seq.rows:
            lines.append(" ".join(map(str, row.tolist())))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_header(line: str, magic: str) -> dict[str, str]:
    if not line.startswith(magic):
        raise FormatError(f"expected header starting with {magic!r}, got {line[:40]!r}")
    fields = {}
    for tok in line[len(magic):].split():
        key, sep, value = tok.partition("=")
        if not sep:
            raise FormatError(f"malformed header token {tok!r}")
        fields[key] = value
    return fields


def load_discrete(path) -> list[DiscreteSequence]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    hdr = _parse_header(lines[0], _HEADER)
    try:
        N, R = int(hdr["N"]), int(hdr["R"])
        alphabet, offset = int(hdr["alphabet"]), int(hdr["offset"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: bad header: {exc}") from None
    out = []
    pos = 1
    for _ in range(N):
        if pos >= len(lines):
            raise FormatError(f"{path}: expected {N} sequences, found {len(out)}")
        parts = lines[pos].split("\t")
        if len(parts) != 5 or parts[0] != "seq":
            raise FormatError(f"{path}:{pos + 1}: malformed sequence header")
        _, sid, label, group, n = parts
        n = int(n)
        body = lines[pos + 1:pos + 1 + R]
        if len(body) != R:
            raise FormatError(f"{path}: truncated rows for {sid}")
        rows = np.zeros((R, n), dtype=np.int64)
        for r, text in enumerate(body):
            vals = text.split()
            if len(vals) != n:
                raise FormatError(f"{path}:{pos + 2 + r}: expected {n} symbols, got {len(vals)}")
            if n:
                rows[r] = np.array(vals, dtype=np.int64)
        out.append(DiscreteSequence(sid, label, rows, alphabet, offset, group))
        pos += 1 + R
    if any(line.strip() for line in lines[pos:]):
        raise FormatError(f"{path}: trailing content after {N} sequences")
    return out
