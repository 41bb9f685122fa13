"""Presence/absence CSV and spectrum TSV files."""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .geneprocess import OBSERVED, PresenceMatrix
from .stats import SpectrumCounts


class FormatError(ValueError):
    def __init__(self, path, line, message):
        self.path, self.line = path, line
        super().__init__(f"{path}:{line}: {message}")


def _data_lines(text):
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip() and not line.lstrip().startswith("#"):
            yield lineno, line


def read_matrix(path) -> PresenceMatrix:
    """Read a ``gene_id,<strain_1>,...`` CSV of 0/1 cells.

    Genes absent from every strain are dropped (they are not part of the
    sample's pangenome).
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = list(_data_lines(text))
    if not lines:
        raise FormatError(path, 1, "missing header row")
    header_no, header = lines[0]
    cols = next(csv.reader([header]))
    if len(cols) < 2 or cols[0].strip() != "gene_id":
        raise FormatError(path, header_no, "header must start with 'gene_id' and name >= 1 strain")
    strains = [c.strip() for c in cols[1:]]
    if len(set(strains)) != len(strains):
        raise FormatError(path, header_no, "duplicate strain names")
    ids, rows, seen = [], [], set()
    for lineno, line in lines[1:]:
        cells = next(csv.reader([line]))
        if len(cells) != len(cols):
            raise FormatError(path, lineno, f"expected {len(cols)} fields, got {len(cells)}")
        gid = cells[0].strip()
        if gid in seen:
            raise FormatError(path, lineno, f"duplicate gene_id {gid!r}")
        seen.add(gid)
        try:
            row = [int(c.strip()) for c in cells[1:]]
        except ValueError:
            raise FormatError(path, lineno, "cells must be 0 or 1") from None
        if any(v not in (0, 1) for v in row):
            raise FormatError(path, lineno, "cells must be 0 or 1")
        if any(row):
            ids.append(gid)
            rows.append(row)
    carriers = np.array(rows, dtype=bool).reshape(len(rows), len(strains))
    return PresenceMatrix(carriers, ids, [OBSERVED] * len(ids), strains)


def format_matrix(m: PresenceMatrix, comments=()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["gene_id", *m.strains])
    for gid, row in zip(m.gene_ids, m.carriers):
        w.writerow([gid, *row.astype(int)])
    return buf.getvalue()


def write_matrix(path, m: PresenceMatrix, comments=()):
    Path(path).write_text(format_matrix(m, comments), encoding="utf-8")


def _spectrum_values(path, parse):
    values = []
    for lineno, line in _data_lines(Path(path).read_text(encoding="utf-8")):
        fields = line.strip().split("\t")
        if len(fields) != 2:
            raise FormatError(path, lineno, "expected two tab-separated columns")
        if not values and not fields[0].strip().lstrip("-").isdigit():
            continue  # header
        try:
            k, c = int(fields[0]), parse(fields[1])
        except ValueError:
            raise FormatError(path, lineno, "bad k or count") from None
        if k != len(values) + 1:
            raise FormatError(path, lineno, f"expected k={len(values) + 1}, got {k}")
        if not c >= 0 or c == float("inf"):
            raise FormatError(path, lineno, "counts must be finite and nonnegative")
        values.append(c)
    if not values:
        raise FormatError(path, 1, "no spectrum rows")
    return values


def read_spectrum(path) -> SpectrumCounts:
    """Read ``k<TAB>count`` rows for ``k = 1..n``; a header row is optional."""
    values = _spectrum_values(path, int)
    return SpectrumCounts(len(values), values)


def read_spectrum_values(path) -> np.ndarray:
    """Like :func:`read_spectrum` but accepts real-valued (expected) counts."""
    return np.array(_spectrum_values(path, float))


def format_spectrum(spec: SpectrumCounts, comments=()) -> str:
    lines = [f"# {c}" for c in comments] + ["k\tcount"]
    lines += [f"{k}\t{c}" for k, c in enumerate(spec.counts, start=1)]
    return "\n".join(lines) + "\n"


def write_spectrum(path, spec: SpectrumCounts, comments=()):
    Path(path).write_text(format_spectrum(spec, comments), encoding="utf-8")
