"""Seeded Monte Carlo experiments: null distributions, power, the
Brownian-bridge divergence check and tail-growth diagnostics.

Every random draw comes from a per-replicate stream derived from
``(master_seed, stream, replicate_index)`` through ``numpy.random.SeedSequence``
so results do not depend on execution order or on the number of workers.
Stream 0 feeds null replicates and stream 1 alternative replicates; all
bandwidths of one replicate share the same sample.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import integrate

from . import kernels
from .errors import ConfigurationError, ExperimentError, KhmgofError
from .families import parse_family
from .regression import (
    Sample,
    compute_residuals,
    estimated_empirical_process,
    scale_estimate,
)
from .supstats import empirical_critical_value, critical_value, sup_abs_bm_cdf, sup_statistic
from .transform import gamma_matrix, scale_transform_path, transform_path, weighted_norm

__all__ = [
    "ExperimentConfig",
    "NullDistribution",
    "PowerTable",
    "BridgeCheckConfig",
    "BridgeResult",
    "TailGrowth",
    "model_errors",
    "sample_model",
    "replicate_statistics",
    "null_distribution_experiment",
    "power_experiment",
    "bridge_divergence_check",
    "tail_growth_diagnostic",
    "em2",
    "em2_quadrature",
    "ks_distance",
    "MAX_ABORT_FRACTION",
    "STANDARD_LAPLACE",
    "TAIL_TIMES",
]

MAX_ABORT_FRACTION = 0.01
# unit-variance Laplace
STANDARD_LAPLACE = f"laplace:{math.sqrt(2.0)!r}"
TAIL_TIMES = (0.5, 0.9, 0.99, 0.999, 0.9999)
NULL_STREAM, ALT_STREAM = 0, 1


def _fmt_list(vals):
    return ",".join(repr(float(v)) for v in vals)


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation design.

    The regression is fixed: ``Y = exp(X) + e`` with ``X ~ U[0, 2]``.
    ``mixture`` is ``"fixed"`` (exactly ``round(p n)`` contaminated errors) or
    ``"binomial"`` (each error contaminated independently with probability
    ``p``).  ``scale`` is ``"known"`` (statistic W) or ``"estimate"``
    (statistic W_tilde on MAD-standardized residuals).
    """

    n: int = 200
    reps: int = 2000
    bandwidths: tuple = (0.04,)
    null_family: str = "normal"
    alt_weight: Optional[float] = None
    alt_family: str = STANDARD_LAPLACE
    master_seed: int = 20090101
    levels: tuple = (0.10, 0.05, 0.025, 0.01)
    error_scale: float = 1.0
    mixture: str = "fixed"
    scale: str = "known"

    def __post_init__(self):
        object.__setattr__(self, "bandwidths", tuple(float(a) for a in np.atleast_1d(self.bandwidths)))
        object.__setattr__(self, "levels", tuple(float(a) for a in np.atleast_1d(self.levels)))
        object.__setattr__(self, "null_family", parse_family(self.null_family).spec)
        object.__setattr__(self, "alt_family", parse_family(self.alt_family).spec)
        if int(self.n) < 1 or int(self.reps) < 1:
            raise ConfigurationError("n and reps must be positive")
        if not self.bandwidths or any(not (a > 0 and math.isfinite(a)) for a in self.bandwidths):
            raise ConfigurationError("bandwidths must be positive")
        if any(not 0.0 < lv < 1.0 for lv in self.levels):
            raise ConfigurationError("levels must lie in (0, 1)")
        if self.alt_weight is not None and not 0.0 <= self.alt_weight <= 1.0:
            raise ConfigurationError("mixture weight must lie in [0, 1]")
        if self.mixture not in ("fixed", "binomial"):
            raise ConfigurationError(f"unknown mixture mode {self.mixture!r}")
        if self.scale not in ("known", "estimate"):
            raise ConfigurationError(f"unknown scale mode {self.scale!r}")
        if not self.error_scale > 0:
            raise ConfigurationError("error scale must be positive")

    @property
    def has_alternative(self):
        return self.alt_weight is not None and self.alt_weight > 0

    @property
    def statistic(self):
        return "W" if self.scale == "known" else "W_tilde"

    def null_config(self):
        return replace(self, alt_weight=None)

    def canonical(self) -> str:
        parts = [
            f"n={self.n}",
            f"reps={self.reps}",
            f"bandwidths={_fmt_list(self.bandwidths)}",
            f"null={self.null_family}",
            f"alt_weight={'none' if self.alt_weight is None else repr(float(self.alt_weight))}",
            f"alt={self.alt_family}",
            f"mixture={self.mixture}",
            f"scale={self.scale}",
            f"error_scale={self.error_scale!r}",
            f"levels={_fmt_list(self.levels)}",
            f"seed={self.master_seed}",
        ]
        return " ".join(parts)


def _rng(config, stream, index):
    ss = np.random.SeedSequence(entropy=int(config.master_seed), spawn_key=(int(stream), int(index)))
    return np.random.default_rng(ss)


def _draw(family, rng, size):
    u = rng.random(size)
    u = np.where(u == 0.0, 2.0**-54, u)
    return np.asarray(family.quantile(u), dtype=float).reshape(size)


def model_errors(config: ExperimentConfig, replicate_index: int, stream: Optional[int] = None):
    """Errors and contamination labels of one replicate (plus its covariates).

    Returns ``(x, errors, contaminated)``.
    """
    if not 0 <= replicate_index < config.reps:
        raise ConfigurationError(f"replicate index {replicate_index} outside [0, {config.reps})")
    if stream is None:
        stream = ALT_STREAM if config.has_alternative else NULL_STREAM
    rng = _rng(config, stream, replicate_index)
    n = int(config.n)
    x = rng.uniform(0.0, 2.0, size=n)
    errors = _draw(parse_family(config.null_family), rng, n)
    labels = np.zeros(n, dtype=bool)
    p = config.alt_weight or 0.0
    if stream == ALT_STREAM and p > 0:
        if config.mixture == "fixed":
            labels[: int(round(p * n))] = True
        else:
            labels = rng.random(n) < p
        k = int(labels.sum())
        if k:
            errors[labels] = _draw(parse_family(config.alt_family), rng, k)
    return x, config.error_scale * errors, labels


def sample_model(config: ExperimentConfig, replicate_index: int, stream: Optional[int] = None) -> Sample:
    x, e, _ = model_errors(config, replicate_index, stream)
    return Sample(x, np.exp(x) + e)


def replicate_statistics(config: ExperimentConfig, replicate_index: int, stream: int):
    """``(V, W)`` arrays over the bandwidths for one replicate."""
    sample = sample_model(config, replicate_index, stream)
    fam = parse_family(config.null_family)
    nb = len(config.bandwidths)
    V = np.empty(nb)
    W = np.empty(nb)
    for j, a in enumerate(config.bandwidths):
        res = compute_residuals(sample, a)
        V[j] = sup_statistic(estimated_empirical_process(res, fam))
        if config.scale == "known":
            W[j] = sup_statistic(transform_path(res, fam))
        else:
            W[j] = sup_statistic(scale_transform_path(res, scale_estimate(res, fam), fam))
    return V, W


def _safe_replicate(args):
    config, index, stream = args
    try:
        return replicate_statistics(config, index, stream)
    except KhmgofError as exc:  # aborted replicate
        return exc


def _run(config, stream, workers):
    jobs = [(config, i, stream) for i in range(config.reps)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_safe_replicate, jobs, chunksize=max(1, config.reps // (8 * workers))))
    else:
        out = [_safe_replicate(j) for j in jobs]
    nb = len(config.bandwidths)
    V = np.full((config.reps, nb), np.nan)
    W = np.full((config.reps, nb), np.nan)
    aborted = []
    for i, r in enumerate(out):
        if isinstance(r, Exception):
            aborted.append((i, f"{type(r).__name__}: {r}"))
        else:
            V[i], W[i] = r
    if len(aborted) > MAX_ABORT_FRACTION * config.reps:
        raise ExperimentError(
            f"{len(aborted)} of {config.reps} replicates aborted (limit "
            f"{MAX_ABORT_FRACTION:.0%}); first: {aborted[0][1]}"
        )
    return V, W, aborted


def ks_distance(values, cdf=sup_abs_bm_cdf) -> float:
    """Kolmogorov distance between the empirical d.f. of ``values`` and ``cdf``."""
    x = np.sort(np.asarray(values, dtype=float))
    x = x[np.isfinite(x)]
    m = x.size
    G = np.array([cdf(v) for v in x])
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - G), np.max(G - (i - 1) / m)))


@dataclass
class NullDistribution:
    config: ExperimentConfig
    V: np.ndarray  # (reps, nbandwidths)
    W: np.ndarray
    aborted: list
    ks_distance_W_to_limit: dict
    critical_V: dict  # (bandwidth, level) -> value
    critical_W: dict
    size_W: dict  # (bandwidth, level) -> rejection rate at the limiting-law critical value

    def edf(self, which: str, bandwidth: float):
        j = self.config.bandwidths.index(float(bandwidth))
        col = (self.W if which == "W" else self.V)[:, j]
        x = np.sort(col[np.isfinite(col)])
        return x, np.arange(1, x.size + 1) / x.size

    def edf_tsv(self, which: str, bandwidth: float) -> str:
        x, p = self.edf(which, bandwidth)
        head = f"# config={self.config.canonical()} statistic={which} bandwidth={bandwidth!r}\n"
        return head + "".join(f"{a!r}\t{b!r}\n" for a, b in zip(x.tolist(), p.tolist()))

    def to_tsv(self) -> str:
        stat = self.config.statistic
        lines = [f"# config={self.config.canonical()}",
                 f"bandwidth\tlevel\tcrit_V_hat\tcrit_{stat}\tsize_{stat}_limit\tks_{stat}"]
        for a in self.config.bandwidths:
            for lv in self.config.levels:
                lines.append(
                    f"{a!r}\t{lv!r}\t{self.critical_V[a, lv]!r}\t{self.critical_W[a, lv]!r}"
                    f"\t{self.size_W[a, lv]!r}\t{self.ks_distance_W_to_limit[a]!r}"
                )
        return "\n".join(lines) + "\n"


def null_distribution_experiment(config: ExperimentConfig, workers: int = 1) -> NullDistribution:
    cfg = config.null_config()
    V, W, aborted = _run(cfg, NULL_STREAM, workers)
    ks, cV, cW, size = {}, {}, {}, {}
    for j, a in enumerate(cfg.bandwidths):
        v = V[np.isfinite(V[:, j]), j]
        w = W[np.isfinite(W[:, j]), j]
        ks[a] = ks_distance(w)
        for lv in cfg.levels:
            cV[a, lv] = empirical_critical_value(v, lv)
            cW[a, lv] = empirical_critical_value(w, lv)
            size[a, lv] = float(np.mean(w > critical_value(lv)))
    return NullDistribution(cfg, V, W, aborted, ks, cV, cW, size)


@dataclass
class PowerTable:
    config: ExperimentConfig
    rows: dict  # (bandwidth, level) -> {"power_V", "power_W", "se_V", "se_W"}
    reps: int
    aborted: list = field(default_factory=list)

    def power(self, bandwidth, level, which="W"):
        return self.rows[float(bandwidth), float(level)][f"power_{which}"]

    def to_tsv(self) -> str:
        stat = self.config.statistic
        lines = [f"# config={self.config.canonical()}",
                 f"bandwidth\tlevel\tpower_V_hat\tpower_{stat}\tse_V_hat\tse_{stat}"]
        for (a, lv), r in self.rows.items():
            lines.append(f"{a!r}\t{lv!r}\t{r['power_V']!r}\t{r['power_W']!r}\t{r['se_V']!r}\t{r['se_W']!r}")
        return "\n".join(lines) + "\n"


def _se(p, reps):
    return math.sqrt(max(p * (1.0 - p), 0.0) / reps)


def power_experiment(config: ExperimentConfig, null: Optional[NullDistribution] = None,
                     workers: int = 1, extra_levels=()) -> PowerTable:
    """Rejection rates under the mixture alternative at the simulated null
    critical values.  ``extra_levels`` may include 1.0 (everything rejects)."""
    if not config.has_alternative:
        raise ConfigurationError("power experiment needs a mixture weight > 0")
    if null is None:
        null = null_distribution_experiment(config, workers)
    V, W, aborted = _run(config, ALT_STREAM, workers)
    rows = {}
    levels = list(config.levels) + [float(lv) for lv in extra_levels]
    for j, a in enumerate(config.bandwidths):
        v = V[np.isfinite(V[:, j]), j]
        w = W[np.isfinite(W[:, j]), j]
        vn = null.V[np.isfinite(null.V[:, j]), j]
        wn = null.W[np.isfinite(null.W[:, j]), j]
        for lv in levels:
            cv = null.critical_V.get((a, lv)) if lv < 1 else None
            cw = null.critical_W.get((a, lv)) if lv < 1 else None
            cv = empirical_critical_value(vn, lv) if cv is None else cv
            cw = empirical_critical_value(wn, lv) if cw is None else cw
            pv = float(np.mean(v > cv))
            pw = float(np.mean(w > cw))
            rows[a, lv] = {"power_V": pv, "power_W": pw,
                           "se_V": _se(pv, v.size), "se_W": _se(pw, w.size)}
    return PowerTable(config, rows, config.reps, aborted)


# ---------------------------------------------------------------------------
# Brownian bridge divergence
# ---------------------------------------------------------------------------

def em2(tau):
    """``int_0^tau z / (1 + z)^2 dz = ln(1 + tau) + 1 / (1 + tau) - 1``."""
    tau = np.asarray(tau, dtype=float)
    out = np.log1p(tau) + 1.0 / (1.0 + tau) - 1.0
    return float(out) if out.ndim == 0 else out


def em2_quadrature(tau: float) -> float:
    val, _ = integrate.quad(lambda z: z / (1.0 + z) ** 2, 0.0, float(tau), limit=200)
    return val


@dataclass(frozen=True)
class BridgeCheckConfig:
    """``s`` is the main evaluation point; ``profile`` adds further points
    computed on the same simulated bridges."""

    s: float = 1.0 - 1e-4
    reps: int = 500
    grid: int = 10**6
    seed: int = 20090102
    profile: tuple = ()

    def __post_init__(self):
        pts = self.points
        if any(not 0.0 < v < 1.0 for v in pts):
            raise ConfigurationError("evaluation points must lie in (0, 1)")
        if self.reps < 1:
            raise ConfigurationError("reps must be positive")
        coarse = [v for v in pts if (1.0 - v) * self.grid < 100 * (1 - 1e-9)]
        if coarse:
            raise ConfigurationError(
                f"grid of {self.grid} steps resolves 1 - s = {1 - min(coarse):.3g} "
                "by fewer than 100 points"
            )

    @property
    def points(self):
        return tuple(sorted(set([float(self.s), *map(float, self.profile)])))

    def canonical(self):
        return (f"s={self.s!r} reps={self.reps} grid={self.grid} seed={self.seed} "
                f"profile={_fmt_list(self.profile)}")


@dataclass
class BridgeResult:
    config: BridgeCheckConfig
    ratios: dict  # s -> array of per-bridge ratios

    def median(self, s=None):
        s = self.config.s if s is None else float(s)
        return float(np.median(self.ratios[s]))

    def iqr_at(self, s=None):
        s = self.config.s if s is None else float(s)
        q1, q3 = np.percentile(self.ratios[s], [25, 75])
        return float(q3 - q1)

    @property
    def median_ratio(self):
        return self.median()

    @property
    def iqr(self):
        return self.iqr_at()

    def to_tsv(self):
        lines = [f"# config={self.config.canonical()}", "s\tmedian_ratio\tiqr\tmean_ratio\texpected_mean"]
        for s in self.config.points:
            tau = s / (1.0 - s)
            lines.append(f"{s!r}\t{self.median(s)!r}\t{self.iqr_at(s)!r}"
                         f"\t{float(np.mean(self.ratios[s]))!r}\t{em2(tau) / math.log1p(tau)!r}")
        return "\n".join(lines) + "\n"


def bridge_divergence_check(config: BridgeCheckConfig, increments=None) -> BridgeResult:
    """Normalized ``int_0^s u^2/(1-t)^2 dt / (-ln(1-s))`` over simulated bridges.

    ``increments`` optionally replaces the Gaussian step generator; it is
    called as ``increments(rng, grid)`` and must return ``grid`` steps.
    """
    dt = 1.0 / config.grid
    pts = config.points
    keeps = np.array([int(round(s * config.grid)) for s in pts], dtype=np.int64)
    norm = np.array([-math.log1p(-s) for s in pts])
    out = np.empty((config.reps, len(pts)))
    sd = math.sqrt(dt)
    for r in range(config.reps):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=int(config.seed), spawn_key=(r,)))
        if increments is None:
            inc = rng.standard_normal(config.grid) * sd
        else:
            inc = np.asarray(increments(rng, config.grid), dtype=float)
        out[r] = kernels.bridge_ratio_integral(inc, dt, keeps) / norm
    return BridgeResult(config, {s: out[:, i] for i, s in enumerate(pts)})


# ---------------------------------------------------------------------------
# tail growth
# ---------------------------------------------------------------------------

@dataclass
class TailGrowth:
    family: str
    t: tuple
    values: tuple
    rank_deficient: tuple
    bounded: bool

    def to_tsv(self):
        lines = [f"# family={self.family}", "t\tscaled_norm\trank_deficient"]
        for t, v, d in zip(self.t, self.values, self.rank_deficient):
            lines.append(f"{t!r}\t{v!r}\t{'true' if d else 'false'}")
        lines.append(f"# bounded={'true' if self.bounded else 'false'}")
        return "\n".join(lines) + "\n"


def tail_growth_diagnostic(family, times=TAIL_TIMES) -> TailGrowth:
    """``(1 - t) gamma^T Gamma_t^{-1} gamma`` along ``times``.

    ``bounded`` is true when the last value does not exceed the largest
    earlier one by more than 5% (no growth toward ``t = 1``).
    """
    fam = parse_family(family)
    vals, deg = [], []
    for t in times:
        vals.append((1.0 - t) * weighted_norm(fam, t))
        deg.append(gamma_matrix(fam, t).rank_deficient)
    bounded = bool(np.all(np.isfinite(vals)))
    if len(vals) > 1:
        bounded = bounded and vals[-1] <= 1.05 * max(vals[:-1])
    return TailGrowth(fam.spec, tuple(times), tuple(vals), tuple(deg), bounded)
