"""Reading sequence data: manifests of time-major CSV files, and FASTA proteins
expanded into BLOSUM62 rows."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import MultivariateSequence
from .errors import (DuplicateId, FormatError, InconsistentColumns, MissingLabel, NaNOrInf,
                     NonNumericCell, UnknownResidue)

AMINO_ACIDS = "ARNDCQEGHILKMFPSTWYV"

# NCBI BLOSUM62, rows/columns in AMINO_ACIDS order.
BLOSUM62 = np.array([
    [4, -1, -2, -2, 0, -1, -1, 0, -2, -1, -1, -1, -1, -2, -1, 1, 0, -3, -2, 0],
    [-1, 5, 0, -2, -3, 1, 0, -2, 0, -3, -2, 2, -1, -3, -2, -1, -1, -3, -2, -3],
    [-2, 0, 6, 1, -3, 0, 0, 0, 1, -3, -3, 0, -2, -3, -2, 1, 0, -4, -2, -3],
    [-2, -2, 1, 6, -3, 0, 2, -1, -1, -3, -4, -1, -3, -3, -1, 0, -1, -4, -3, -3],
    [0, -3, -3, -3, 9, -3, -4, -3, -3, -1, -1, -3, -1, -2, -3, -1, -1, -2, -2, -1],
    [-1, 1, 0, 0, -3, 5, 2, -2, 0, -3, -2, 1, 0, -3, -1, 0, -1, -2, -1, -2],
    [-1, 0, 0, 2, -4, 2, 5, -2, 0, -3, -3, 1, -2, -3, -1, 0, -1, -3, -2, -2],
    [0, -2, 0, -1, -3, -2, -2, 6, -2, -4, -4, -2, -3, -3, -2, 0, -2, -2, -3, -3],
    [-2, 0, 1, -1, -3, 0, 0, -2, 8, -3, -3, -1, -2, -1, -2, -1, -2, -2, 2, -3],
    [-1, -3, -3, -3, -1, -3, -3, -4, -3, 4, 2, -3, 1, 0, -3, -2, -1, -3, -1, 3],
    [-1, -2, -3, -4, -1, -2, -3, -4, -3, 2, 4, -2, 2, 0, -3, -2, -1, -2, -1, 1],
    [-1, 2, 0, -1, -3, 1, 1, -2, -1, -3, -2, 5, -1, -3, -1, 0, -1, -3, -2, -2],
    [-1, -1, -2, -3, -1, 0, -2, -3, -2, 1, 2, -1, 5, 0, -2, -1, -1, -1, -1, 1],
    [-2, -3, -3, -3, -2, -3, -3, -3, -1, 0, 0, -3, 0, 6, -4, -2, -2, 1, 3, -1],
    [-1, -2, -2, -1, -3, -1, -1, -2, -2, -3, -3, -1, -2, -4, 7, -1, -1, -4, -3, -2],
    [1, -1, 1, 0, -1, 0, 0, 0, -1, -2, -2, 0, -1, -2, -1, 4, 1, -3, -2, -2],
    [0, -1, 0, -1, -1, -1, -1, -2, -2, -1, -1, -1, -1, -2, -1, 1, 5, -2, -2, 0],
    [-3, -3, -4, -4, -2, -2, -3, -2, -2, -3, -2, -3, -1, 1, -4, -3, -2, 11, 2, -3],
    [-2, -2, -2, -3, -2, -1, -2, -3, 2, -1, -1, -2, -1, 3, -3, -2, -2, 2, 7, -1],
    [0, -3, -3, -3, -1, -2, -2, -3, -3, 3, 1, -2, 1, -1, -2, -2, 0, -3, -1, 4],
], dtype=np.float64)
BLOSUM62.setflags(write=False)

_ZERO_SILENT = {"X"}
_ZERO_WARN = {"B", "Z", "U"}


@dataclass(frozen=True)
class ManifestRow:
    id: str
    label: str
    group: str
    path: Path


def _check_token(value: str, what: str, where: str) -> str:
    if not value or any(c in value for c in "\t\n\r"):
        raise FormatError(f"{where}: invalid {what} {value!r}")
    return value


def read_manifest(manifest_path) -> list[ManifestRow]:
    manifest_path = Path(manifest_path)
    rows, seen = [], set()
    with open(manifest_path, encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            cells = line.split("\t")
            if lineno == 1 and cells == ["id", "label", "group", "path"]:
                continue
            where = f"{manifest_path}:{lineno}"
            if len(cells) != 4:
                raise FormatError(f"{where}: expected 4 tab-separated columns, found {len(cells)}")
            sid, label, group, path = cells
            _check_token(sid, "id", where)
            _check_token(label, "label", where)
            if sid in seen:
                raise DuplicateId(f"{where}: duplicate id {sid!r}")
            seen.add(sid)
            p = Path(path)
            if not p.is_absolute():
                p = manifest_path.parent / p
            if not p.is_file():
                raise FormatError(f"{where}: sequence file {str(p)!r} not found")
            rows.append(ManifestRow(sid, label, group, p))
    return rows


def read_csv_matrix(path) -> np.ndarray:
    """Headerless time-major CSV -> (n, R) array. An empty file gives shape (0, 0)."""
    data, width = [], None
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, cells in enumerate(csv.reader(fh), 1):
            if not cells or all(not c.strip() for c in cells):
                continue
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise InconsistentColumns(f"{path}:{lineno}: expected {width} columns, found {len(cells)}")
            row = []
            for col, cell in enumerate(cells, 1):
                try:
                    v = float(cell)
                except ValueError:
                    raise NonNumericCell(f"{path}:{lineno}:{col}: non-numeric cell {cell.strip()!r}") from None
                if not math.isfinite(v):
                    raise NaNOrInf(f"{path}:{lineno}:{col}: non-finite value {cell.strip()!r}")
                row.append(v)
            data.append(row)
    if not data:
        return np.zeros((0, 0))
    return np.array(data, dtype=np.float64)


def ingest_csv(manifest_path) -> list[MultivariateSequence]:
    rows = read_manifest(manifest_path)
    mats = [read_csv_matrix(r.path) for r in rows]
    widths = {m.shape[1] for m in mats if m.shape[0]}
    if len(widths) > 1:
        raise InconsistentColumns(f"{manifest_path}: sequences disagree on R: {sorted(widths)}")
    if not widths:
        raise FormatError(f"{manifest_path}: no sequence has any observations")
    R = widths.pop()
    out = []
    for r, m in zip(rows, mats):
        values = m.T if m.shape[0] else np.zeros((R, 0))
        out.append(MultivariateSequence(r.id, r.label, values, r.group))
    return out


def read_fasta(path) -> list[tuple[str, str]]:
    records, name, chunks = [], None, []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith(";"):
                continue
            if line.startswith(">"):
                if name is not None:
                    records.append((name, "".join(chunks)))
                name = line[1:].split()[0] if line[1:].split() else ""
                if not name:
                    raise FormatError(f"{path}:{lineno}: FASTA header without an id")
                chunks = []
            elif name is None:
                raise FormatError(f"{path}:{lineno}: sequence data before the first header")
            else:
                chunks.append(line)
    if name is not None:
        records.append((name, "".join(chunks)))
    return records


def read_labels(path) -> dict[str, tuple[str, str]]:
    """``id<TAB>label[<TAB>group]`` lines -> {id: (label, group)}."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            cells = line.split("\t")
            if lineno == 1 and cells[:2] == ["id", "label"]:
                continue
            if len(cells) not in (2, 3):
                raise FormatError(f"{path}:{lineno}: expected id, label[, group]")
            out[cells[0]] = (cells[1], cells[2] if len(cells) == 3 else "")
    return out


def blosum_encode(sequence: str, seq_id: str = "") -> np.ndarray:
    """Residue string -> (20, n) matrix of BLOSUM62 rows."""
    index = {aa: i for i, aa in enumerate(AMINO_ACIDS)}
    out = np.zeros((len(AMINO_ACIDS), len(sequence)))
    warned = set()
    for pos, res in enumerate(sequence.upper()):
        if res in index:
            out[:, pos] = BLOSUM62[index[res]]
        elif res in _ZERO_SILENT:
            continue
        elif res in _ZERO_WARN:
            if res not in warned:
                warnings.warn(f"{seq_id}: ambiguous residue {res!r} mapped to a zero vector")
                warned.add(res)
        else:
            raise UnknownResidue(f"{seq_id}: unknown residue {res!r} at position {pos + 1}")
    return out


def ingest_fasta(fasta_path, labels_path) -> list[MultivariateSequence]:
    labels = read_labels(labels_path)
    out, seen = [], set()
    for sid, residues in read_fasta(fasta_path):
        if sid in seen:
            raise DuplicateId(f"{fasta_path}: duplicate id {sid!r}")
        seen.add(sid)
        if sid not in labels:
            raise MissingLabel(f"{labels_path}: no label for {sid!r}")
        if not residues:
            warnings.warn(f"{sid}: empty sequence record")
        label, group = labels[sid]
        out.append(MultivariateSequence(sid, label, blosum_encode(residues, sid), group))
    return out
