"""Sup-norm statistics, the law of sup |Brownian motion| on [0, 1], critical
values, p-values and the test report."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import kernels
from .errors import DomainError
from .paths import ProcessPath

__all__ = [
    "TestReport",
    "sup_statistic",
    "sup_abs_bm_cdf",
    "sup_abs_bm_sf",
    "critical_value",
    "p_value",
    "empirical_critical_value",
    "STATISTICS",
]

STATISTICS = ("V_hat", "W", "W_tilde")
_SERIES_TOL = 1e-17
_SQRT2 = math.sqrt(2.0)


def sup_statistic(path: ProcessPath) -> float:
    """``sup |path|``.

    Transformed (``kind == "w"``) paths take the maximum over the order
    statistics.  Empirical-type paths also visit every stored left limit,
    because the drift makes the supremum approach a jump from the left.
    """
    if len(path) == 0:
        raise DomainError("empty path")
    if path.kind == "w":
        return float(np.max(np.abs(path.values)))
    return kernels.path_abs_max(path.values, path.left_values)


def _norm_sf(z):
    return float(0.5 * special.erfc(z / _SQRT2))


def sup_abs_bm_sf(a: float) -> float:
    """``P(sup_{t<=1} |b(t)| > a)``."""
    a = float(a)
    if math.isnan(a) or a < 0:
        raise DomainError(f"a must be non-negative, got {a!r}")
    if a < 1.0:
        return 1.0 - sup_abs_bm_cdf(a)
    # reflection principle: 4 sum_{j>=1} (-1)^{j+1} P(N > (2j-1) a)
    total = 0.0
    j = 1
    while True:
        term = _norm_sf((2 * j - 1) * a)
        total += term if j % 2 else -term
        if term < _SERIES_TOL:
            break
        j += 1
    return 4.0 * total


def sup_abs_bm_cdf(a: float) -> float:
    """``P(sup_{t<=1} |b(t)| <= a)``.

    Small ``a`` uses the eigenfunction (theta) series, which converges
    fastest there; larger ``a`` uses the reflection series.
    """
    a = float(a)
    if math.isnan(a) or a < 0:
        raise DomainError(f"a must be non-negative, got {a!r}")
    if a < 0.01:
        # exp(-pi^2 / (8 a^2)) underflows
        return 0.0
    if math.isinf(a):
        return 1.0
    if a >= 1.0:
        return 1.0 - sup_abs_bm_sf(a)
    c = math.pi**2 / (8.0 * a * a)
    total = 0.0
    k = 0
    while True:
        m = 2 * k + 1
        term = math.exp(-m * m * c) / m
        total += -term if k % 2 else term
        if term < _SERIES_TOL:
            break
        k += 1
    return min(max(4.0 / math.pi * total, 0.0), 1.0)


def critical_value(level: float, tol: float = 1e-9) -> float:
    """``a`` with ``P(sup |b| > a) = level``, by bisection."""
    level = float(level)
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level!r}")
    lo, hi = 0.0, 1.0
    while sup_abs_bm_sf(hi) > level:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if sup_abs_bm_sf(mid) > level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def p_value(stat: float) -> float:
    stat = float(stat)
    if math.isnan(stat) or stat < 0:
        raise DomainError(f"statistic must be non-negative, got {stat!r}")
    if math.isinf(stat):
        return 0.0
    return float(min(max(sup_abs_bm_sf(stat), 0.0), 1.0))


def empirical_critical_value(null_values, level: float) -> float:
    """Upper ``level`` quantile of a simulated null sample.

    Rejection is ``stat > value``; level 1 returns 0 (everything rejects).
    """
    vals = np.sort(np.asarray(null_values, dtype=float))
    if vals.size == 0:
        raise DomainError("empty null sample")
    level = float(level)
    if not 0.0 < level <= 1.0:
        raise DomainError(f"level must lie in (0, 1], got {level!r}")
    if level == 1.0:
        return 0.0
    # smallest c with #{stat > c} <= level * reps
    k = int(math.floor(level * vals.size + 1e-9))
    return float(vals[vals.size - 1 - k]) if k < vals.size else 0.0


@dataclass(frozen=True)
class TestReport:
    """Outcome of one goodness-of-fit test.

    For ``V_hat`` the limiting law does not apply: the critical value must be
    a simulated one and no p-value is reported.
    """

    __test__ = False  # not a pytest class

    statistic: str
    value: float
    level: float
    critical_value: float
    p_value: float = math.nan
    reject: bool = False
    family: str = ""
    n: int = 0
    bandwidth: float = math.nan
    seed: object = None
    note: str = field(default="")

    @classmethod
    def from_limit_law(cls, statistic, value, level, **meta):
        if statistic == "V_hat":
            raise DomainError(
                "the limiting law of V_hat depends on the regression estimator; "
                "use a simulated critical value"
            )
        crit = critical_value(level)
        return cls(statistic, float(value), float(level), crit, p_value(value),
                   bool(value > crit), **meta)

    @classmethod
    def from_simulated(cls, statistic, value, level, crit, **meta):
        note = "critical value simulated under the null; no limiting-law p-value"
        return cls(statistic, float(value), float(level), float(crit), math.nan,
                   bool(value > crit), note=note, **meta)

    def __post_init__(self):
        if self.statistic not in STATISTICS:
            raise DomainError(f"unknown statistic {self.statistic!r}")

    def to_text(self) -> str:
        def fmt(v):
            if isinstance(v, bool):
                return "true" if v else "false"
            if isinstance(v, float):
                return "nan" if math.isnan(v) else repr(v)
            return "" if v is None else str(v)

        keys = ("statistic", "value", "level", "critical_value", "p_value", "reject",
                "family", "n", "bandwidth", "seed")
        lines = [f"{k}={fmt(getattr(self, k))}" for k in keys]
        if self.note:
            lines.append(f"note={self.note}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TestReport":
        kv = dict(line.split("=", 1) for line in text.splitlines() if "=" in line)
        seed = kv.get("seed", "")
        return cls(
            statistic=kv["statistic"],
            value=float(kv["value"]),
            level=float(kv["level"]),
            critical_value=float(kv["critical_value"]),
            p_value=float(kv["p_value"]),
            reject=kv["reject"] == "true",
            family=kv.get("family", ""),
            n=int(kv.get("n", 0)),
            bandwidth=float(kv.get("bandwidth", "nan")),
            seed=int(seed) if seed.lstrip("-").isdigit() else (seed or None),
            note=kv.get("note", ""),
        )
