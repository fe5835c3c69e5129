"""Boxcar Nadaraya-Watson fit, residuals, the residual empirical process and
a robust scale estimate."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateSampleError, DomainError, EmptyWindowError
from .families import parse_family
from .paths import ProcessPath

__all__ = [
    "Sample",
    "ResidualSet",
    "nw_fit",
    "compute_residuals",
    "estimated_empirical_process",
    "scale_estimate",
    "DRIFT_GRID",
]

# F-grid points inserted between consecutive jumps of v-hat
DRIFT_GRID = 64


@dataclass(frozen=True)
class Sample:
    """Covariate/response pairs."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise DomainError("x and y must have the same length")
        if x.size == 0:
            raise DomainError("empty sample")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("sample values must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_pairs(cls, pairs):
        arr = np.asarray(list(pairs), dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def pairs(self):
        return np.column_stack([self.x, self.y])


@dataclass(frozen=True)
class ResidualSet:
    residuals: np.ndarray
    fitted: np.ndarray
    bandwidth: float

    @property
    def order_statistics(self):
        return np.sort(self.residuals)

    @property
    def n(self) -> int:
        return self.residuals.size


def _check_bandwidth(a):
    a = float(a)
    if not (a > 0 and math.isfinite(a)):
        raise DomainError(f"bandwidth must be positive, got {a!r}")
    return a


def nw_fit(sample: Sample, a: float, x: float) -> float:
    """Average of the responses whose covariate lies in ``[x - a, x + a]``."""
    a = _check_bandwidth(a)
    x = float(x)
    inside = (sample.x >= x - a) & (sample.x <= x + a)
    count = int(inside.sum())
    if count == 0:
        raise EmptyWindowError(x, a)
    return float(sample.y[inside].sum() / count)


def compute_residuals(sample: Sample, a: float) -> ResidualSet:
    a = _check_bandwidth(a)
    order = np.argsort(sample.x, kind="stable")
    fitted_sorted = kernels.boxcar_smooth(sample.x[order], sample.y[order], a)
    fitted = np.empty_like(fitted_sorted)
    fitted[order] = fitted_sorted
    return ResidualSet(residuals=sample.y - fitted, fitted=fitted, bandwidth=a)


def estimated_empirical_process(residuals, family, grid: int = DRIFT_GRID) -> ProcessPath:
    """``v_hat(x) = sqrt(n) [F_hat(x) - F(x)]`` sampled for sup computation.

    The returned path stores the jump points of the empirical d.f. together
    with ``grid`` points per gap that are equally spaced in ``F`` (plus the
    same number in each unbounded end), with exact left limits at the jumps.
    """
    family = parse_family(family)
    e = np.asarray(getattr(residuals, "residuals", residuals), dtype=float).ravel()
    if e.size == 0:
        raise DomainError("empty residual set")
    n = e.size
    root = math.sqrt(n)
    uniq, counts = np.unique(e, return_counts=True)
    Fu = np.asarray(family.cdf(uniq), dtype=float)
    cum = np.cumsum(counts) / n

    # interior points, equally spaced in F, strictly inside each gap
    knots = np.concatenate([[0.0], Fu, [1.0]])
    frac = np.arange(1, grid + 1) / (grid + 1)
    fill = (knots[:-1, None] + np.diff(knots)[:, None] * frac[None, :]).ravel()
    fill = fill[(fill > 0.0) & (fill < 1.0)]
    fill_x = np.asarray(family.quantile(fill), dtype=float)
    fill_x = fill_x[~np.isin(fill_x, uniq)]

    pts = np.concatenate([uniq, fill_x])
    is_jump = np.concatenate([np.ones(uniq.size, bool), np.zeros(fill_x.size, bool)])
    order = np.argsort(pts, kind="stable")
    pts, is_jump = pts[order], is_jump[order]
    Fhat = np.concatenate([[0.0], cum])[np.searchsorted(uniq, pts, side="right")]
    Fx = np.asarray(family.cdf(pts), dtype=float)
    values = root * (Fhat - Fx)
    left_hat = np.concatenate([[0.0], cum])[np.searchsorted(uniq, pts, side="left")]
    left = root * (left_hat - Fx)

    def exact(x):
        x = np.asarray(x, dtype=float)
        Fh = np.concatenate([[0.0], cum])[np.searchsorted(uniq, x, side="right")]
        return root * (Fh - np.asarray(family.cdf(x), dtype=float))

    return ProcessPath(
        name="v_hat_n",
        points=pts,
        values=values,
        left_values=np.where(is_jump, left, values),
        n=n,
        kind="v",
        family=family.spec,
        exact=exact,
    )


def scale_estimate(residuals, family) -> float:
    """``MAD(e) / F^{-1}(3/4)`` (consistent for symmetric ``F``)."""
    family = parse_family(family)
    e = np.asarray(getattr(residuals, "residuals", residuals), dtype=float).ravel()
    if e.size < 2:
        raise DegenerateSampleError("scale estimate needs at least two residuals")
    mad = float(np.median(np.abs(e - np.median(e))))
    if mad <= 0.0:
        raise DegenerateSampleError("median absolute deviation is zero")
    return mad / family.quantile(0.75)
