"""Command-line front end.

Exit codes: 0 all checks passed, 2 assertion violations, 3 hypothesis check
failed under ``--strict``, 4 configuration / input error.
"""

from __future__ import annotations

import csv
import json
import math
import sys
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import click

from orlicz_lab import __version__, lab
from orlicz_lab.measure import from_csv
from orlicz_lab.norms import LorentzIndex, lorentz_norm, lp_norm, luxemburg_norm, orlicz_norm
from orlicz_lab.randseries import RvFamily
from orlicz_lab.young import SaturationError, YoungFunction, check_hypothesis, parse_hypothesis

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_HYPOTHESIS = 3
EXIT_CONFIG = 4

EXPERIMENTS = (
    "khinchin-orlicz",
    "khinchin-lorentz",
    "mz-orlicz",
    "mz-lorentz",
    "exp-moment",
    "interpolation",
    "kp-bound",
    "holder-lorentz",
    "rearrangement",
)
MC_EXPERIMENTS = ("mz-orlicz", "mz-lorentz", "kp-bound")
EXACT_RANGE_EXPERIMENTS = ("khinchin-orlicz", "khinchin-lorentz", "exp-moment", "interpolation")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    experiment: str
    psi: YoungFunction | None = None
    lorentz: tuple | None = None
    family: RvFamily | None = None
    N_list: list | None = None
    M: int | None = None
    seed: int | None = None
    seeds: int | None = None
    random_per_n: int = 100
    tolerances: dict = field(default_factory=dict)
    strict: bool = False
    output: str | None = None
    format: str = "json"

    def validate(self) -> "RunConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from "
                              + ", ".join(EXPERIMENTS))
        for k, v in self.tolerances.items():
            if not (isinstance(v, (int, float)) and v > 0):
                raise ConfigError(f"tolerance {k} must be positive, got {v!r}")
        if self.experiment in MC_EXPERIMENTS and self.seed is None:
            raise ConfigError(f"{self.experiment} is a Monte Carlo experiment and needs --seed")
        if self.format not in ("json", "csv", "both"):
            raise ConfigError(f"format must be json, csv or both, got {self.format!r}")
        if self.experiment in ("khinchin-lorentz", "mz-lorentz"):
            if self.lorentz is None:
                raise ConfigError(f"{self.experiment} needs --p and --q")
            try:
                LorentzIndex(*self.lorentz)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.M is not None and self.M < 1:
            raise ConfigError("M must be >= 1")
        if self.seed is not None and not (-(2**63) <= self.seed < 2**64):
            raise ConfigError("seed must fit in 64 bits")
        return self


# -- parsing helpers -----------------------------------------------------------


def _parse_q(text) -> float:
    if isinstance(text, (int, float)):
        return float(text)
    t = str(text).strip().lower()
    return math.inf if t in ("inf", "infinity", "oo") else float(t)


def _parse_n(text) -> list:
    if isinstance(text, int):
        return [text]
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    parts = [p for p in str(text).replace(" ", "").split(",") if p]
    return [int(p) for p in parts]


def _parse_psi(value) -> YoungFunction:
    if isinstance(value, str) and value.strip().startswith("{"):
        value = json.loads(value)
    return YoungFunction.from_config(value)


def _parse_family(value) -> RvFamily:
    if isinstance(value, str) and value.strip().startswith("{"):
        value = json.loads(value)
    return RvFamily.from_config(value)


def load_config_file(path: str) -> dict:
    """TOML key/value file, or JSON."""
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: neither JSON nor TOML ({exc})") from None


def build_config(experiment: str, file_values: dict, flags: dict) -> RunConfig:
    """Merge config-file values with command-line flags (flags win)."""
    merged = dict(file_values)
    merged.update({k: v for k, v in flags.items() if v is not None})
    try:
        cfg = RunConfig(experiment=merged.get("experiment", experiment))
        if experiment and cfg.experiment != experiment:
            cfg.experiment = experiment
        if "psi" in merged:
            cfg.psi = _parse_psi(merged["psi"])
        if "lorentz" in merged:
            p, q = merged["lorentz"]
            cfg.lorentz = (float(p), _parse_q(q))
        if "p" in merged or "q" in merged:
            old = cfg.lorentz or (None, None)
            p = float(merged["p"]) if "p" in merged else old[0]
            q = _parse_q(merged["q"]) if "q" in merged else old[1]
            if p is None or q is None:
                raise ConfigError("Lorentz experiments need both p and q")
            cfg.lorentz = (p, q)
        if "family" in merged:
            cfg.family = _parse_family(merged["family"])
        n = merged.get("N_list", merged.get("n"))
        if n is not None:
            cfg.N_list = _parse_n(n)
            if not cfg.N_list or min(cfg.N_list) < 1:
                raise ConfigError("N values must be positive integers")
        if "M" in merged or "m" in merged:
            cfg.M = int(merged.get("m", merged.get("M")))
        if "seed" in merged:
            cfg.seed = int(merged["seed"])
        if "seeds" in merged:
            cfg.seeds = int(merged["seeds"])
        if "random_per_n" in merged:
            cfg.random_per_n = int(merged["random_per_n"])
        tols = dict(merged.get("tolerances", {}))
        if "tol" in merged:
            tols["tol"] = float(merged["tol"])
        cfg.tolerances = tols
        cfg.strict = bool(merged.get("strict", False))
        cfg.output = merged.get("output", merged.get("out"))
        cfg.format = merged.get("format", "json")
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from None
    return cfg.validate()


# -- dispatch --------------------------------------------------------------------


def _sweep(cfg: RunConfig, default_max: int):
    n = cfg.N_list or [default_max]
    if len(n) == 1 and cfg.experiment in EXACT_RANGE_EXPERIMENTS:
        n = list(range(1, n[0] + 1))
    if max(n) > 16:
        raise ConfigError("exact enumeration drivers accept N <= 16")
    return lab.coefficient_sweep(n, random_per_n=cfg.random_per_n, seed=cfg.seed or 0)


def run_experiment(cfg: RunConfig) -> lab.ExperimentReport:
    tol = cfg.tolerances
    psi = cfg.psi
    exp = cfg.experiment
    if exp == "khinchin-orlicz":
        return lab.khinchin_orlicz(psi or YoungFunction.power(1.0), _sweep(cfg, 12),
                                   tol=tol.get("tol", lab.LAB_TOL), band=tol.get("band", 4.0))
    if exp == "khinchin-lorentz":
        return lab.khinchin_lorentz(LorentzIndex(*cfg.lorentz), _sweep(cfg, 12),
                                    band=tol.get("band", 4.0))
    if exp == "exp-moment":
        return lab.exp_moment_check(_sweep(cfg, 16))
    if exp == "interpolation":
        return lab.interpolation_check(_sweep(cfg, 16))
    family = cfg.family or RvFamily.rademacher()
    if exp == "mz-orlicz":
        return lab.mz_orlicz(psi or YoungFunction.power(1.5), family,
                             cfg.N_list or (2, 4, 8, 16), M=cfg.M or 100_000, seed=cfg.seed,
                             n_seeds=cfg.seeds or 20, band=tol.get("band", 2.0),
                             tol=tol.get("tol", 1e-10))
    if exp == "mz-lorentz":
        return lab.mz_lorentz(LorentzIndex(*cfg.lorentz), family, cfg.N_list or (2, 4, 8, 16),
                              M=cfg.M or 100_000, seed=cfg.seed, n_seeds=cfg.seeds or 20,
                              band=tol.get("band", 2.0))
    if exp == "kp-bound":
        n = cfg.N_list or (1, 2, 4, 8, 16)
        sweep = lab.coefficient_sweep(n, random_per_n=cfg.random_per_n, seed=cfg.seed)
        return lab.kp_bound(psi or YoungFunction.power(1.5), family, sweep, M=cfg.M or 10_000,
                            seed=cfg.seed, n_seeds=cfg.seeds or 1,
                            floor=tol.get("floor", 0.2), eps_mc=tol.get("eps_mc"),
                            stability=tol.get("stability", 0.2), tol=tol.get("tol", 1e-10))
    if exp == "holder-lorentz":
        return lab.holder_lorentz(n_pairs=int(tol.get("pairs", 1000)), seed=cfg.seed or 0,
                                  stability=tol.get("stability", 0.10))
    return lab.rearrangement_suite(n_pairs=int(tol.get("pairs", 1000)), seed=cfg.seed or 0)


def _out_paths(base: str) -> dict:
    p = Path(base)
    stem = p.with_suffix("") if p.suffix in (".json", ".csv") else p
    return {
        "json": stem.with_name(stem.name + ".json"),
        "summary": stem.with_name(stem.name + ".summary.csv"),
        "cases": stem.with_name(stem.name + ".cases.csv"),
        "timing": stem.with_name(stem.name + ".timing.json"),
    }


def _write_csv_rows(path: Path, rows: list, append: bool):
    if not rows:
        return
    fields = list(rows[0])
    for r in rows[1:]:
        fields.extend(k for k in r if k not in fields)
    new = not (append and path.exists())
    with path.open("a" if append else "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        if new:
            w.writeheader()
        for r in rows:
            w.writerow({k: _csv_cell(v) for k, v in r.items()})


def _csv_cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v)
    return v


def emit_report(report: lab.ExperimentReport, cfg: RunConfig):
    if cfg.output is None:
        if cfg.format in ("json", "both"):
            click.echo(report.to_json(), nl=False)
        if cfg.format in ("csv", "both"):
            row = report.summary_row()
            click.echo(",".join(row))
            click.echo(",".join(str(_csv_cell(v)) for v in row.values()))
        return
    paths = _out_paths(cfg.output)
    try:
        paths["json"].parent.mkdir(parents=True, exist_ok=True)
        if cfg.format in ("json", "both"):
            paths["json"].write_text(report.to_json())
        if cfg.format in ("csv", "both"):
            _write_csv_rows(paths["summary"], [report.summary_row()], append=True)
            _write_csv_rows(paths["cases"], report.rows, append=False)
        paths["timing"].write_text(json.dumps(report.timing(), indent=2) + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write output {cfg.output!r}: {exc}") from None


def exit_code(report: lab.ExperimentReport, strict: bool) -> int:
    if strict and not report.hypothesis_ok:
        return EXIT_HYPOTHESIS
    return EXIT_OK if report.passed else EXIT_VIOLATION


# -- click commands --------------------------------------------------------------


@click.group()
@click.version_option(__version__, prog_name="orlicz-lab")
def cli():
    """Orlicz/Lorentz norm calculator and inequality verification harness."""


@cli.group()
def young():
    """Young-function utilities."""


@young.command("check")
@click.option("--psi", required=True, help="Young function, e.g. power:1.5, exp, exp_square.")
@click.option("--hypothesis", "hyp", default="young",
              help="young | linear_below_exp_above | linear_below_square_above | delta2")
@click.option("--grid-min", type=float, default=None)
@click.option("--grid-max", type=float, default=None)
@click.option("--points", type=int, default=512)
@click.option("--cap", type=float, default=100.0, help="Bound on the hypothesis ratios.")
@click.option("--strict", is_flag=True, help="Exit 3 when the check fails.")
def young_check(psi, hyp, grid_min, grid_max, points, cap, strict):
    """Check growth hypotheses of a Young function on a log grid."""
    import numpy as np

    psi_f = _parse_psi(psi)
    h = parse_hypothesis(hyp)
    grid = None
    if grid_min is not None or grid_max is not None:
        lo = grid_min if grid_min is not None else (1e-6 if h.value == "young" else 1.0)
        hi = grid_max if grid_max is not None else (1e6 if h.value == "young" else 1e3)
        grid = np.logspace(math.log10(lo), math.log10(hi), points)
    if h.value == "young":
        from orlicz_lab.young import verify_young_conditions

        rep = verify_young_conditions(psi_f, grid)
    else:
        rep = check_hypothesis(psi_f, h, grid, cap=cap)
    click.echo(json.dumps({"psi": psi_f.to_config(), **rep.to_dict()}, indent=2, sort_keys=True))
    return EXIT_HYPOTHESIS if strict and not rep.satisfied else EXIT_OK


@cli.command()
@click.argument("kind", type=click.Choice(["luxemburg", "orlicz", "lp", "lorentz"]))
@click.argument("input_csv", type=click.Path(dir_okay=False))
@click.option("--psi", default=None, help="Young function (luxemburg/orlicz).")
@click.option("--p", "p", type=float, default=None)
@click.option("--q", "q", default=None, help="Lorentz q (number or inf).")
@click.option("--tol", type=float, default=1e-10)
def norm(kind, input_csv, psi, p, q, tol):
    """Compute a norm of the function stored in INPUT_CSV (point_id,value,mass)."""
    try:
        text = Path(input_csv).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {input_csv}: {exc}") from None
    try:
        f = from_csv(text)
    except ValueError as exc:
        raise ConfigError(f"{input_csv}: {exc}") from None
    if kind in ("luxemburg", "orlicz"):
        if psi is None:
            raise ConfigError(f"{kind} norm needs --psi")
        fn = luxemburg_norm if kind == "luxemburg" else orlicz_norm
        val = fn(_parse_psi(psi), f, tol)
    elif kind == "lp":
        if p is None:
            raise ConfigError("lp norm needs --p")
        val = lp_norm(p, f)
    else:
        if p is None or q is None:
            raise ConfigError("lorentz norm needs --p and --q")
        val = lorentz_norm(LorentzIndex(p, _parse_q(q)), f)
    out = val.to_dict()
    out["value"] = float(val.format())
    click.echo(json.dumps(out))
    return EXIT_OK


@cli.command()
@click.argument("experiment", type=click.Choice(EXPERIMENTS))
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="TOML or JSON file; flags override its values.")
@click.option("--psi", default=None)
@click.option("--p", "p", type=float, default=None)
@click.option("--q", "q", default=None)
@click.option("--family", default=None, help="e.g. rademacher, uniform:1.7320508, two_point:3:-1:0.25")
@click.option("--n", "n", default=None,
              help="N list (2,4,8) or a single N; exact drivers sweep 1..N for a single value.")
@click.option("--m", "m", type=int, default=None, help="Monte Carlo sample count.")
@click.option("--seed", type=int, default=None)
@click.option("--seeds", type=int, default=None, help="Number of Monte Carlo seeds.")
@click.option("--random-per-n", type=int, default=None)
@click.option("--tol", type=float, default=None)
@click.option("--strict", is_flag=True, default=None)
@click.option("--out", default=None, help="Output path stem for report files.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "both"]), default=None)
def verify(experiment, config_path, psi, p, q, family, n, m, seed, seeds, random_per_n, tol,
           strict, out, fmt):
    """Run one inequality-verification experiment and emit its report."""
    file_values = load_config_file(config_path) if config_path else {}
    flags = {"psi": psi, "p": p, "q": q, "family": family, "n": n, "m": m, "seed": seed,
             "seeds": seeds, "random_per_n": random_per_n, "tol": tol, "strict": strict,
             "output": out, "format": fmt}
    cfg = build_config(experiment, file_values, flags)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", lab.HypothesisWarning)
        try:
            report = run_experiment(cfg)
        except SaturationError as exc:
            raise ConfigError(f"saturation: {exc}") from None
    emit_report(report, cfg)
    code = exit_code(report, cfg.strict)
    if code != EXIT_OK:
        failed = [k for k, c in report.checks.items() if not c["passed"]]
        click.echo(f"{experiment}: exit {code} (violations={report.violations}, "
                   f"failed checks={failed}, hypothesis_ok={report.hypothesis_ok})", err=True)
    return code


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="orlicz-lab", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_CONFIG
    except (ConfigError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_CONFIG
    except click.Abort:
        return 1
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
