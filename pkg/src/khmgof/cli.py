"""``khmgof`` command line: ``test``, ``simulate`` and ``diagnose``."""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .datafiles import CriticalTable, CsvParseError, read_sample_csv
from .errors import (
    ConfigurationError,
    DomainError,
    ExperimentError,
    FamilySpecError,
    IllConditionedError,
    KhmgofError,
    TailOverflowError,
)
from .families import parse_family
from .harness import (
    BridgeCheckConfig,
    ExperimentConfig,
    bridge_divergence_check,
    null_distribution_experiment,
    power_experiment,
    tail_growth_diagnostic,
)
from .regression import compute_residuals, estimated_empirical_process, scale_estimate
from .supstats import TestReport, sup_statistic
from .transform import InformationColumn, K_direct, scale_transform_path, transform_path

__all__ = ["main", "RunConfig", "cmd_test", "cmd_simulate", "cmd_diagnose", "EXIT_CODES", "MIN_N"]

EXIT_OK, EXIT_PARSE, EXIT_DOMAIN, EXIT_EXPERIMENT = 0, 2, 3, 4
EXIT_CODES = {"ok": EXIT_OK, "parse": EXIT_PARSE, "domain": EXIT_DOMAIN, "experiment": EXIT_EXPERIMENT}
MIN_N = 10
CRITICAL_TABLE = "critical_values.tsv"
IDENTITY_TOL = 1e-6


@dataclass(frozen=True)
class RunConfig:
    command: str
    family: str = "normal"
    input_path: Optional[str] = None
    bandwidth: float = 0.04
    level: float = 0.05
    scale_mode: str = "known"
    seed: int = 0
    reps: Optional[int] = None
    n: Optional[int] = None
    output_dir: str = "."
    bandwidths: tuple = (0.04,)
    levels: tuple = (0.10, 0.05, 0.025, 0.01)
    alt_weight: Optional[float] = None
    alt_family: str = "laplace:1.4142135623730951"
    mixture: str = "fixed"
    workers: int = 1
    bridge_check: bool = False
    critical_table: Optional[str] = None

    def __post_init__(self):
        if self.command not in ("test", "simulate", "diagnose"):
            raise ConfigurationError(f"unknown command {self.command!r}")
        if self.command == "test" and not self.input_path:
            raise ConfigurationError("test requires --input")
        if self.command == "simulate" and (self.reps is None or self.n is None):
            raise ConfigurationError("simulate requires --reps and --n")
        if not 0.0 < self.level < 1.0:
            raise ConfigurationError("level must lie in (0, 1)")
        if self.scale_mode not in ("known", "estimate"):
            raise ConfigurationError("scale mode must be 'known' or 'estimate'")

    def canonical(self) -> str:
        if self.command == "test":
            return (f"khmgof test --input {self.input_path} --family {self.family} "
                    f"--bandwidth {self.bandwidth!r} --level {self.level!r} "
                    f"--scale {self.scale_mode} --out {self.output_dir}")
        if self.command == "simulate":
            alt = "" if self.alt_weight is None else (
                f" --alt-weight {self.alt_weight!r} --alt-family {self.alt_family}")
            return (f"khmgof simulate --n {self.n} --reps {self.reps} --family {self.family}{alt} "
                    f"--bandwidths {','.join(repr(a) for a in self.bandwidths)} "
                    f"--levels {','.join(repr(a) for a in self.levels)} --seed {self.seed} "
                    f"--scale {self.scale_mode} --mixture {self.mixture} --out {self.output_dir}")
        flag = " --bridge-check" if self.bridge_check else ""
        return f"khmgof diagnose --family {self.family}{flag}"


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _table_path(config):
    return config.critical_table or os.path.join(config.output_dir, CRITICAL_TABLE)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_test(config: RunConfig) -> TestReport:
    family = parse_family(config.family)
    sample = read_sample_csv(config.input_path)
    if sample.n < MIN_N:
        raise DomainError(f"sample has {sample.n} rows; at least {MIN_N} are required")
    res = compute_residuals(sample, config.bandwidth)
    meta = dict(family=family.spec, n=sample.n, bandwidth=config.bandwidth, seed=config.seed)
    try:
        if config.scale_mode == "known":
            path = transform_path(res, family)
            name = "W"
        else:
            sigma = scale_estimate(res, family)
            path = scale_transform_path(res, sigma, family)
            name = "W_tilde"
    except TailOverflowError as exc:
        raise TailOverflowError(
            f"{exc} -- the largest residual is too extreme for the hypothesized law at this scale; "
            "check for outliers or rerun with --scale estimate",
            point=exc.point,
        ) from exc
    report = TestReport.from_limit_law(name, sup_statistic(path), config.level, **meta)

    os.makedirs(config.output_dir, exist_ok=True)
    header = f"# config={config.canonical()}\n"
    text = header + report.to_text()

    vhat = sup_statistic(estimated_empirical_process(res, family))
    table_file = _table_path(config)
    crit = None
    if os.path.exists(table_file):
        crit = CriticalTable.load(table_file).lookup(
            "V_hat", sample.n, config.bandwidth, family.spec, config.level)
    if crit is not None:
        text += "\n" + TestReport.from_simulated("V_hat", vhat, config.level, crit, **meta).to_text()
    else:
        text += (f"\nstatistic=V_hat\nvalue={vhat!r}\n"
                 "note=no simulated critical value for this (n, bandwidth, family, level); "
                 "the limiting law does not apply to V_hat, run 'khmgof simulate' first\n")
    _write(os.path.join(config.output_dir, "report.txt"), text)
    _write(os.path.join(config.output_dir, f"{path.name}.tsv"), header + path.to_tsv())
    sys.stdout.write(text)
    return report


def cmd_simulate(config: RunConfig):
    exp = ExperimentConfig(
        n=config.n,
        reps=config.reps,
        bandwidths=config.bandwidths,
        null_family=config.family,
        alt_weight=config.alt_weight,
        alt_family=config.alt_family,
        master_seed=config.seed,
        levels=config.levels,
        mixture=config.mixture,
        scale=config.scale_mode,
    )
    os.makedirs(config.output_dir, exist_ok=True)
    header = f"# command={config.canonical()}\n"
    null = null_distribution_experiment(exp, workers=config.workers)
    _write(os.path.join(config.output_dir, "null_summary.tsv"), header + null.to_tsv())
    stat = exp.statistic
    for a in exp.bandwidths:
        _write(os.path.join(config.output_dir, f"edf_{stat}_a{a!r}.tsv"), header + null.edf_tsv("W", a))
        _write(os.path.join(config.output_dir, f"edf_V_hat_a{a!r}.tsv"), header + null.edf_tsv("V", a))

    table_file = _table_path(config)
    table = CriticalTable.load(table_file) if os.path.exists(table_file) else CriticalTable()
    fam = parse_family(config.family).spec
    for (a, lv), v in null.critical_V.items():
        if v > 0:
            table.update("V_hat", exp.n, a, fam, lv, v, exp.reps, exp.master_seed)
    for (a, lv), v in null.critical_W.items():
        if v > 0:
            table.update(stat, exp.n, a, fam, lv, v, exp.reps, exp.master_seed)
    table.save(table_file)

    power = None
    if exp.has_alternative:
        power = power_experiment(exp, null, workers=config.workers)
        _write(os.path.join(config.output_dir, "power.tsv"), header + power.to_tsv())
        sys.stdout.write(power.to_tsv())
    else:
        sys.stdout.write(null.to_tsv())
    if null.aborted:
        sys.stderr.write(f"warning: {len(null.aborted)} null replicates aborted\n")
    return null, power


def _closed_form_target(family):
    """``(value, rtol, t_from)`` for the limit of ``(1 - t) gamma^T Gamma^{-1} gamma``."""
    kind = family.kind
    if kind == "logistic":
        return 4.0, 1e-8, 0.0
    if kind == "laplace":
        return 1.0, 1e-12, 0.5
    if kind == "normal":
        return 2.0, 0.05, 0.9999
    if kind == "student_t":
        return 2.0 * (family.k + 1) / family.k, 0.05, 0.9999
    return None


def identity_check(family, points: int = 50):
    """Max per-coordinate ``|H(x) - K(x, H^T)|`` over ``F(x)`` in [0.001, 0.995]."""
    family = parse_family(family)
    xs = family.quantile(np.linspace(0.001, 0.995, points))
    err = 0.0
    for x in np.atleast_1d(xs):
        k = K_direct(family, x, [InformationColumn(0), InformationColumn(1)])
        err = max(err, float(abs(k[0] - family.cdf(x))), float(abs(k[1] + family.pdf(x))))
    return err


def cmd_diagnose(config: RunConfig) -> str:
    family = parse_family(config.family)
    growth = tail_growth_diagnostic(family)
    target = _closed_form_target(family)
    rows = ["check\tt\tmeasured\ttarget\tbranch\tstatus"]
    all_ok = True
    for t, v, deg in zip(growth.t, growth.values, growth.rank_deficient):
        branch = "degenerate" if deg else "full"
        status, tgt = "info", ""
        if target is not None and t >= target[2] and (family.kind != "laplace" or t > 0.5):
            ok = abs(v - target[0]) <= target[1] * abs(target[0])
            if family.kind == "laplace":
                ok = ok and deg
            status, tgt = ("pass" if ok else "fail"), repr(target[0])
            all_ok &= ok
        rows.append(f"scaled_norm\t{t!r}\t{v!r}\t{tgt}\t{branch}\t{status}")
    rows.append(f"bounded_growth\t\t{'true' if growth.bounded else 'false'}\ttrue\t\t"
                f"{'pass' if growth.bounded else 'fail'}")
    all_ok &= growth.bounded
    ident = identity_check(family)
    ok = ident < IDENTITY_TOL
    all_ok &= ok
    rows.append(f"identity_max_error\t\t{ident!r}\t<{IDENTITY_TOL!r}\t\t{'pass' if ok else 'fail'}")
    if config.bridge_check:
        res = bridge_divergence_check(BridgeCheckConfig(profile=(0.99, 0.999)))
        meds = [res.median(s) for s in res.config.points]
        mono = all(a < b for a, b in zip(meds, meds[1:]))
        band = 0.8 <= res.median_ratio <= 1.2
        for s in res.config.points:
            rows.append(f"bridge_median_ratio\t{s!r}\t{res.median(s)!r}\t\t\tinfo")
        rows.append(f"bridge_monotone\t\t{'true' if mono else 'false'}\ttrue\t\t{'pass' if mono else 'fail'}")
        rows.append(f"bridge_band\t{res.config.s!r}\t{res.median_ratio!r}\t[0.8,1.2]\t\t"
                    f"{'pass' if band else 'fail'}")
        all_ok &= mono and band
    text = f"# config={config.canonical()}\n" + "\n".join(rows) + "\n"
    text += f"# overall={'pass' if all_ok else 'fail'}\n"
    if config.output_dir and config.output_dir != ".":
        os.makedirs(config.output_dir, exist_ok=True)
        _write(os.path.join(config.output_dir, f"diagnose_{family.kind}.tsv"), text)
    sys.stdout.write(text)
    return text


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _float_list(text):
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def build_parser():
    p = argparse.ArgumentParser(prog="khmgof", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="test a data set against a hypothesized error law")
    t.add_argument("--input", required=True, help="CSV file with header x,y")
    t.add_argument("--family", default="normal", help="normal, logistic, laplace:<alpha> or t:<k>")
    t.add_argument("--bandwidth", type=float, default=0.04, help="boxcar half-width a")
    t.add_argument("--level", type=float, default=0.05)
    t.add_argument("--scale", choices=("known", "estimate"), default="known")
    t.add_argument("--seed", type=int, default=0, help="recorded in the report only")
    t.add_argument("--critical-table", default=None, help="TSV of simulated critical values")
    t.add_argument("--out", default=".")

    s = sub.add_parser("simulate", help="null distributions, critical values and power")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--reps", type=int, required=True)
    s.add_argument("--family", default="normal")
    s.add_argument("--alt-weight", type=float, default=None)
    s.add_argument("--alt-family", default="laplace:1.4142135623730951")
    s.add_argument("--bandwidths", type=_float_list, default=(0.04,))
    s.add_argument("--levels", type=_float_list, default=(0.10, 0.05, 0.025, 0.01))
    s.add_argument("--seed", type=int, default=20090101)
    s.add_argument("--scale", choices=("known", "estimate"), default="known")
    s.add_argument("--mixture", choices=("fixed", "binomial"), default="fixed")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--critical-table", default=None)
    s.add_argument("--out", default=".")

    d = sub.add_parser("diagnose", help="closed-form and tail diagnostics for a family")
    d.add_argument("--family", required=True)
    d.add_argument("--bridge-check", action="store_true")
    d.add_argument("--out", default=".")
    return p


def _to_config(args) -> RunConfig:
    common = dict(command=args.command, family=args.family, output_dir=args.out)
    if args.command == "test":
        return RunConfig(input_path=args.input, bandwidth=args.bandwidth, level=args.level,
                         scale_mode=args.scale, seed=args.seed,
                         critical_table=args.critical_table, **common)
    if args.command == "simulate":
        return RunConfig(n=args.n, reps=args.reps, alt_weight=args.alt_weight,
                         alt_family=args.alt_family, bandwidths=args.bandwidths,
                         levels=args.levels, seed=args.seed, scale_mode=args.scale,
                         mixture=args.mixture, workers=args.workers,
                         critical_table=args.critical_table, **common)
    return RunConfig(bridge_check=args.bridge_check, **common)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _to_config(args)
        parse_family(config.family)
        if config.command == "test":
            cmd_test(config)
        elif config.command == "simulate":
            cmd_simulate(config)
        else:
            cmd_diagnose(config)
    except (CsvParseError, FamilySpecError, ConfigurationError) as exc:
        sys.stderr.write(f"khmgof: error: {exc}\n")
        return EXIT_PARSE
    except FileNotFoundError as exc:
        sys.stderr.write(f"khmgof: error: {exc}\n")
        return EXIT_PARSE
    except ExperimentError as exc:
        sys.stderr.write(f"khmgof: experiment failed: {exc}\n")
        return EXIT_EXPERIMENT
    except (DomainError, IllConditionedError) as exc:
        sys.stderr.write(f"khmgof: error: {exc}\n")
        return EXIT_DOMAIN
    except KhmgofError as exc:
        sys.stderr.write(f"khmgof: error: {exc}\n")
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
