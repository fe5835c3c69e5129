"""CSV samples and the persisted table of simulated critical values."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import KhmgofError
from .regression import Sample

__all__ = ["CsvParseError", "read_sample_csv", "write_sample_csv", "CriticalTable"]


class CsvParseError(KhmgofError, ValueError):
    """Malformed input file; ``line`` is 1-based."""

    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


def read_sample_csv(path) -> Sample:
    """Read an ``x,y`` CSV (header required, ``#`` lines ignored)."""
    xs, ys = [], []
    header_seen = False
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if row[0].lstrip().startswith("#"):
                continue
            cells = [c.strip() for c in row]
            if not header_seen:
                if [c.lower() for c in cells] != ["x", "y"]:
                    raise CsvParseError(f"expected header 'x,y', got {','.join(row)!r}", lineno)
                header_seen = True
                continue
            if len(cells) != 2:
                raise CsvParseError(f"expected 2 fields, got {len(cells)}", lineno)
            try:
                x, y = float(cells[0]), float(cells[1])
            except ValueError:
                raise CsvParseError(f"not a number in {','.join(row)!r}", lineno) from None
            if not (math.isfinite(x) and math.isfinite(y)):
                raise CsvParseError("values must be finite", lineno)
            xs.append(x)
            ys.append(y)
    if not header_seen:
        raise CsvParseError("missing 'x,y' header", 1)
    if not xs:
        raise CsvParseError("no data rows")
    return Sample(np.array(xs), np.array(ys))


def write_sample_csv(path, sample: Sample, header: str = ""):
    """Write with shortest round-trip decimal representations."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header:
            fh.write(f"# {header}\n")
        fh.write("x,y\n")
        for x, y in zip(sample.x.tolist(), sample.y.tolist()):
            fh.write(f"{x!r},{y!r}\n")


_KEY_FIELDS = ("statistic", "n", "bandwidth", "family", "level")


@dataclass
class CriticalTable:
    """Simulated critical values keyed by ``(statistic, n, bandwidth, family, level)``.

    Each entry remembers the replicate count and master seed that produced it.
    """

    entries: dict = field(default_factory=dict)

    @staticmethod
    def key(statistic, n, bandwidth, family, level):
        return (str(statistic), int(n), float(bandwidth), str(family), float(level))

    def lookup(self, statistic, n, bandwidth, family, level):
        hit = self.entries.get(self.key(statistic, n, bandwidth, family, level))
        return None if hit is None else hit[0]

    def update(self, statistic, n, bandwidth, family, level, value, reps, seed):
        value = float(value)
        if not value > 0:
            raise ValueError("critical values must be positive")
        self.entries[self.key(statistic, n, bandwidth, family, level)] = (value, int(reps), int(seed))

    def __len__(self):
        return len(self.entries)

    def to_tsv(self) -> str:
        lines = ["# critical value table", "statistic\tn\tbandwidth\tfamily\tlevel\tvalue\treps\tseed"]
        for k in sorted(self.entries):
            v, reps, seed = self.entries[k]
            s, n, a, fam, lv = k
            lines.append(f"{s}\t{n}\t{a!r}\t{fam}\t{lv!r}\t{v!r}\t{reps}\t{seed}")
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_tsv())

    @classmethod
    def load(cls, path) -> "CriticalTable":
        table = cls()
        with open(path, encoding="utf-8") as fh:
            rows = [ln.rstrip("\n").split("\t") for ln in fh if ln.strip() and not ln.startswith("#")]
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != 8:
                raise CsvParseError(f"critical table row has {len(row)} fields", lineno)
            s, n, a, fam, lv, v, reps, seed = row
            table.update(s, int(n), float(a), fam, float(lv), float(v), int(reps), int(seed))
        return table
