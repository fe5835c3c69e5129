"""Cadlag step paths for empirical-type processes and their TSV export."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = ["ProcessPath", "read_path_tsv"]


@dataclass(frozen=True)
class ProcessPath:
    """A right-continuous step function with stored left limits.

    ``points`` are the sorted jump (or sample) locations, ``values[i]`` is the
    path value on ``[points[i], points[i+1])`` and ``left_values[i]`` the left
    limit at ``points[i]``.  Below the first point the path equals ``before``.

    ``kind`` is ``"w"`` for martingale-transformed paths (sup taken over the
    order statistics) and ``"v"`` for empirical-type paths with continuous
    drift (sup taken over values and left limits).  ``exact`` optionally
    evaluates the underlying process off the stored grid.
    """

    name: str
    points: np.ndarray
    values: np.ndarray
    left_values: np.ndarray
    n: int
    kind: str = "w"
    family: str = ""
    before: float = 0.0
    exact: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size and np.any(np.diff(pts) < 0):
            raise ValueError("path points must be sorted")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "left_values", np.asarray(self.left_values, dtype=float))

    @property
    def scale(self) -> float:
        return float(np.sqrt(self.n))

    def __len__(self):
        return self.points.size

    def __call__(self, x):
        """Step-function value (right-continuous)."""
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.points, x, side="right") - 1
        out = np.where(idx >= 0, self.values[np.clip(idx, 0, None)], self.before)
        return float(out) if out.ndim == 0 else out

    def left_limit(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.points, x, side="left") - 1
        out = np.where(idx >= 0, self.values[np.clip(idx, 0, None)], self.before)
        # at a stored point the stored left limit is authoritative
        at = np.searchsorted(self.points, x, side="left")
        hit = (at < self.points.size) & (self.points[np.clip(at, 0, self.points.size - 1)] == x)
        out = np.where(hit, self.left_values[np.clip(at, 0, self.points.size - 1)], out)
        return float(out) if out.ndim == 0 else out

    def to_tsv(self) -> str:
        lines = [f"# process={self.name} n={self.n} kind={self.kind} family={self.family}"]
        for x, left, right in zip(self.points.tolist(), self.left_values.tolist(), self.values.tolist()):
            lines.append(f"{x!r}\t{left!r}")
            lines.append(f"{x!r}\t{right!r}")
        return "\n".join(lines) + "\n"

    def write_tsv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_tsv())


def read_path_tsv(path) -> ProcessPath:
    """Inverse of :meth:`ProcessPath.write_tsv` (the ``exact`` hook is lost).

    Other ``#`` lines, such as a leading config header, are skipped.
    """
    header, rows = None, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("# process="):
                header = line
            elif line.strip() and not line.startswith("#"):
                rows.append(line.split("\t"))
    if header is None:
        raise ValueError(f"{path}: no '# process=' header")
    meta = dict(tok.split("=", 1) for tok in header.lstrip("# ").split())
    data = np.array([[float(a), float(b)] for a, b in rows]).reshape(-1, 2, 2)
    return ProcessPath(
        name=meta["process"],
        points=data[:, 0, 0],
        values=data[:, 1, 1],
        left_values=data[:, 0, 1],
        n=int(meta["n"]),
        kind=meta.get("kind", "w"),
        family=meta.get("family", ""),
    )
