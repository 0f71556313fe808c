"""Experiment drivers: one per inequality, each producing an ExperimentReport.

Equivalence constants are estimated, never asserted against invented values.
What a driver *does* assert is boundedness/stability of the empirical ratios
and the one-sided bounds that hold with an explicit constant.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from orlicz_lab import __version__
from orlicz_lab.measure import (
    SimpleFunction,
    combine,
    constant,
    distribution_function,
    random_simple,
    rearrangement,
    uniform_atoms,
)
from orlicz_lab.norms import LorentzIndex, lorentz_norm, lp_norm, luxemburg_norm
from orlicz_lab.randseries import (
    ROLE_SWEEP,
    RvFamily,
    counter_rng,
    monte_carlo_matrix,
    rademacher_sum_distribution,
    sample_matrix,
    square_function,
    sum_functions,
)
from orlicz_lab.young import (
    GrowthReport,
    Hypothesis,
    SaturationError,
    YoungFunction,
    check_hypothesis,
    sqrt_gauge,
)

SCHEMA_VERSION = 1
TWO_E = 2 * math.e
LAB_TOL = 1e-12


class HypothesisWarning(UserWarning):
    pass


def thread_count() -> int:
    env = os.environ.get("ORLICZ_LAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def parallel_map(fn, items, threads: int | None = None) -> list:
    """``[fn(x) for x in items]``, possibly threaded; order is preserved."""
    items = list(items)
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def config_hash(params: dict) -> str:
    blob = json.dumps(params, sort_keys=True, default=_jsonable)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _clean(obj):
    """Recursively replace non-finite floats so json output stays strict."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj


@dataclass
class ExperimentReport:
    experiment: str
    hypothesis_check: dict | None
    cases: int
    ratio_min: float
    ratio_median: float
    ratio_max: float
    violations: int
    seed: int | None
    config_hash: str
    runtime_ms: float
    params: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    @property
    def hypothesis_ok(self) -> bool:
        hc = self.hypothesis_check
        return hc is None or bool(hc.get("satisfied", True))

    @property
    def passed(self) -> bool:
        return self.violations == 0 and all(c["passed"] for c in self.checks.values())

    def to_dict(self) -> dict:
        """Deterministic payload: runtime lives in :meth:`timing` instead."""
        return _clean({
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            "experiment": self.experiment,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "params": self.params,
            "hypothesis_check": self.hypothesis_check,
            "cases": self.cases,
            "ratio_min": self.ratio_min,
            "ratio_median": self.ratio_median,
            "ratio_max": self.ratio_max,
            "violations": self.violations,
            "checks": self.checks,
            "passed": self.passed,
            "extras": self.extras,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def timing(self) -> dict:
        return {"experiment": self.experiment, "config_hash": self.config_hash,
                "runtime_ms": self.runtime_ms}

    def summary_row(self) -> dict:
        return {
            "experiment": self.experiment,
            "config_hash": self.config_hash,
            "seed": "" if self.seed is None else self.seed,
            "cases": self.cases,
            "ratio_min": repr(self.ratio_min),
            "ratio_median": repr(self.ratio_median),
            "ratio_max": repr(self.ratio_max),
            "violations": self.violations,
            "hypothesis_ok": self.hypothesis_ok,
            "passed": self.passed,
        }


def _check(passed: bool, **detail) -> dict:
    return {"passed": bool(passed), **detail}


def _stats(ratios) -> tuple:
    r = np.asarray(ratios, dtype=float)
    if r.size == 0:
        return math.nan, math.nan, math.nan
    return float(r.min()), float(np.median(r)), float(r.max())


def _finish(name, t0, params, hyp, ratios, violations, checks, extras=None, rows=None,
            seed=None) -> ExperimentReport:
    lo, med, hi = _stats(ratios)
    full = {"experiment": name, **params}
    return ExperimentReport(
        experiment=name,
        hypothesis_check=None if hyp is None else hyp.to_dict(),
        cases=len(ratios),
        ratio_min=lo,
        ratio_median=med,
        ratio_max=hi,
        violations=int(violations),
        seed=seed,
        config_hash=config_hash(full),
        runtime_ms=(time.perf_counter() - t0) * 1e3,
        params=_clean(full),
        checks=checks,
        extras=_clean(extras or {}),
        rows=rows or [],
    )


def _hypothesis(psi: YoungFunction, hyp: Hypothesis, name: str) -> GrowthReport:
    rep = check_hypothesis(psi, hyp)
    if not rep.satisfied:
        warnings.warn(f"{name}: {psi.label} fails {hyp.value} on the check grid; running anyway",
                      HypothesisWarning, stacklevel=3)
    return rep


# -- coefficient sweeps -------------------------------------------------------


def coefficient_sweep(n_values, random_per_n: int = 100, seed: int = 0,
                      complex_per_n: int = 0) -> list:
    """Default sweep: all unit vectors, equal weights, geometric (2^-i) and
    harmonic (1/i) decay, and random unit vectors, for each N.

    Every vector is normalised to ‖x‖₂ = 1.  Returns ``(label, x)`` pairs.
    """
    out = []
    for n in n_values:
        n = int(n)
        idx = np.arange(1, n + 1, dtype=float)
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            out.append((f"unit{i + 1}/N={n}", e))
        out.append((f"equal/N={n}", np.full(n, 1.0 / math.sqrt(n))))
        geo = 2.0 ** -idx
        out.append((f"geometric/N={n}", geo / np.linalg.norm(geo)))
        har = 1.0 / idx
        out.append((f"harmonic/N={n}", har / np.linalg.norm(har)))
        rng = counter_rng(seed, ROLE_SWEEP, n)
        for j in range(random_per_n):
            x = rng.standard_normal(n)
            out.append((f"random{j}/N={n}", x / np.linalg.norm(x)))
        crng = counter_rng(seed, ROLE_SWEEP, 10_000 + n)
        for j in range(complex_per_n):
            z = crng.standard_normal(n) + 1j * crng.standard_normal(n)
            out.append((f"complex{j}/N={n}", z / np.linalg.norm(z)))
    return out


def random_unit_sweep(count: int, n_max: int = 16, seed: int = 0) -> list:
    """``count`` random unit vectors with N uniform on 1..n_max."""
    rng = counter_rng(seed, ROLE_SWEEP, 20_000)
    out = []
    for j in range(count):
        n = int(rng.integers(1, n_max + 1))
        x = rng.standard_normal(n)
        out.append((f"random{j}/N={n}", x / np.linalg.norm(x)))
    return out


def _sweep_params(sweep) -> dict:
    """Sweep identity for the config hash: case count plus a digest of the vectors."""
    blob = json.dumps([[label, _vec_json(x)] for label, x in sweep])
    return {"cases": len(sweep), "sha256": hashlib.sha256(blob.encode()).hexdigest()[:16]}


def _vec_json(x):
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return [[float(v.real), float(v.imag)] for v in x]
    return [float(v) for v in x]


def _n_of(x) -> int:
    return int(np.asarray(x).size)


# -- Khinchin ---------------------------------------------------------------------


def _khinchin(name, norm_fn, sweep, scale, scale_tol, band, threads, extra_params, hyp):
    t0 = time.perf_counter()

    def run_case(item):
        label, x = item
        x = np.asarray(x)
        s = rademacher_sum_distribution(x)
        l2 = float(np.linalg.norm(x))
        val = norm_fn(s)
        val_scaled = norm_fn(s.scaled(scale))
        r = val / l2
        r_scaled = val_scaled / (scale * l2)
        row = {"label": label, "N": x.size, "norm": val, "l2": l2, "ratio": r,
               "ratio_scaled": r_scaled, "complex": bool(np.iscomplexobj(x))}
        if np.iscomplexobj(x) and np.any(x.imag) and np.any(x.real):
            re = norm_fn(rademacher_sum_distribution(x.real))
            im = norm_fn(rademacher_sum_distribution(x.imag))
            row["split_bound"] = re + im
        return row

    rows = parallel_map(run_case, sweep, threads)
    ratios = [r["ratio"] for r in rows]
    scale_dev = max(abs(r["ratio"] - r["ratio_scaled"]) / r["ratio"] for r in rows)
    split_bad = [r["label"] for r in rows
                 if "split_bound" in r and r["norm"] > r["split_bound"] * (1 + 1e-9)]
    lo, med, hi = _stats(ratios)
    k = int(np.argmin(ratios))
    per_n = {}
    for r in rows:
        per_n.setdefault(r["N"], []).append(r["ratio"])
    checks = {
        "band": _check(lo > 0 and hi / lo <= band, ratio_spread=hi / lo, band=band),
        "scale_invariance": _check(scale_dev <= scale_tol, max_rel_deviation=scale_dev,
                                   scale=scale, tol=scale_tol),
        "complex_split": _check(not split_bad, cases=sum("split_bound" in r for r in rows),
                                failures=split_bad),
    }
    extras = {
        "argmin": {"label": rows[k]["label"], "x": _vec_json(sweep[k][1]), "ratio": ratios[k]},
        "argmax_label": rows[int(np.argmax(ratios))]["label"],
        "per_n": {str(n): {"min": min(v), "median": float(np.median(v)), "max": max(v)}
                  for n, v in sorted(per_n.items())},
    }
    params = {**extra_params, "sweep": _sweep_params(sweep), "scale": scale,
              "scale_tol": scale_tol, "band": band}
    return _finish(name, t0, params, hyp, ratios, 0, checks, extras, rows)


def khinchin_orlicz(psi: YoungFunction, sweep=None, tol: float = LAB_TOL, band: float = 4.0,
                    scale_tol: float = 1e-10, threads: int | None = None) -> ExperimentReport:
    """ratio = ‖Σ x_n r_n‖_ψ / ‖x‖₂ over a coefficient sweep, exact enumeration."""
    sweep = coefficient_sweep(range(1, 13)) if sweep is None else list(sweep)
    if any(_n_of(x) > 16 for _, x in sweep):
        raise ValueError("khinchin_orlicz enumerates exactly and accepts N <= 16")
    hyp = _hypothesis(psi, Hypothesis.LINEAR_BELOW_EXP_ABOVE, "khinchin_orlicz")
    return _khinchin("khinchin-orlicz", lambda f: luxemburg_norm(psi, f, tol).value, sweep,
                     2.0, scale_tol, band, threads,
                     {"psi": psi.to_config(), "tol": tol}, hyp)


def khinchin_lorentz(idx: LorentzIndex, sweep=None, band: float = 4.0, scale_tol: float = 1e-10,
                     threads: int | None = None) -> ExperimentReport:
    """ratio = ‖Σ x_n r_n‖_{p,q} / ‖x‖₂; p = 1 is rejected by LorentzIndex."""
    if not isinstance(idx, LorentzIndex):
        idx = LorentzIndex(*idx)
    sweep = coefficient_sweep(range(1, 13)) if sweep is None else list(sweep)
    if any(_n_of(x) > 16 for _, x in sweep):
        raise ValueError("khinchin_lorentz enumerates exactly and accepts N <= 16")
    rep = _khinchin("khinchin-lorentz", lambda f: lorentz_norm(idx, f).value, sweep, 3.0,
                    scale_tol, band, threads, {"lorentz": [idx.p, _q_json(idx.q)]}, None)
    if idx.p == 2 and idx.q == 2:
        dev = max(abs(r - 1.0) for r in (row["ratio"] for row in rep.rows))
        rep.checks["l22_equals_l2"] = _check(dev <= 1e-10, max_abs_deviation=dev, tol=1e-10)
    return rep


def _q_json(q):
    return "inf" if math.isinf(q) else q


# -- Marcinkiewicz-Zygmund ----------------------------------------------------------


def _mz(name, norm_fn, family, n_values, M, seed, n_seeds, band, threads, extra_params, hyp,
        unit_case: bool, khinchin_fn):
    t0 = time.perf_counter()
    n_values = [int(n) for n in n_values]
    tasks = [(n, seed + s) for n in n_values for s in range(n_seeds)]

    def run_case(task):
        n, sd = task
        xs = monte_carlo_matrix(family, n, M, sd)
        top = norm_fn(sum_functions(xs))
        bottom = norm_fn(square_function(xs))
        return {"N": n, "seed": sd, "sum_norm": top, "square_norm": bottom,
                "ratio": top / bottom}

    rows = parallel_map(run_case, tasks, threads)
    ratios = [r["ratio"] for r in rows]
    medians = {}
    iqr = {}
    for n in n_values:
        rn = [r["ratio"] for r in rows if r["N"] == n]
        medians[n] = float(np.median(rn))
        q75, q25 = np.percentile(rn, [75, 25])
        iqr[n] = float(q75 - q25)
    spread = max(medians.values()) / min(medians.values())
    checks = {"stability": _check(spread <= band, median_spread=spread, band=band)}
    if 1 in n_values:
        dev = max(abs(r["ratio"] - 1.0) for r in rows if r["N"] == 1)
        checks["n1_exact"] = _check(dev <= 1e-12, max_abs_deviation=dev)
    if unit_case:
        dev = max(abs(m - 1.0) for m in medians.values())
        checks["orthogonality"] = _check(dev <= 0.02, max_median_deviation=dev, tol=0.02)
    if family.kind.value == "rademacher" and khinchin_fn is not None:
        diffs = {}
        # the square function of n signs is the constant √n, so the MC ratio is the
        # Khinchin ratio for equal weights divided by the norm of the constant 1
        unit_norm = khinchin_fn(constant(1.0))
        for n in n_values:
            s = rademacher_sum_distribution(np.full(n, 1.0 / math.sqrt(n)))
            exact = khinchin_fn(s) / unit_norm
            diffs[str(n)] = {"mc_median": medians[n], "exact": exact,
                             "abs_diff": abs(medians[n] - exact)}
        worst = max(d["abs_diff"] for d in diffs.values())
        checks["rademacher_cross_check"] = _check(worst <= 0.05, max_abs_diff=worst, tol=0.05,
                                                  per_n=diffs)
    extras = {"median_by_n": {str(n): v for n, v in medians.items()},
              "iqr_by_n": {str(n): v for n, v in iqr.items()}}
    if M < 1000:
        extras["warning"] = f"M={M} < 1000: Monte Carlo noise dominates"
    params = {**extra_params, "family": family.to_config(), "N": n_values, "M": M,
              "seeds": n_seeds, "band": band}
    return _finish(name, t0, params, hyp, ratios, 0, checks, extras, rows, seed=seed)


def mz_orlicz(psi: YoungFunction, family: RvFamily, n_values=(2, 4, 8, 16), M: int = 100_000,
              seed: int = 0, n_seeds: int = 20, band: float = 2.0, tol: float = 1e-10,
              threads: int | None = None) -> ExperimentReport:
    """ratio = ‖Σ X_n‖_ψ / ‖(Σ|X_n|²)^{1/2}‖_ψ on a shared M-sample space."""
    hyp = _hypothesis(psi, Hypothesis.DELTA2, "mz_orlicz")
    norm_fn = lambda f: luxemburg_norm(psi, f, tol).value  # noqa: E731
    unit = psi.family.value == "power" and psi.params[0] == 2.0
    return _mz("mz-orlicz", norm_fn, family, n_values, M, seed, n_seeds, band, threads,
               {"psi": psi.to_config(), "tol": tol}, hyp, unit, norm_fn)


def mz_lorentz(idx: LorentzIndex, family: RvFamily, n_values=(2, 4, 8, 16), M: int = 100_000,
               seed: int = 0, n_seeds: int = 20, band: float = 2.0,
               threads: int | None = None) -> ExperimentReport:
    """Lorentz analogue of :func:`mz_orlicz`."""
    if not isinstance(idx, LorentzIndex):
        idx = LorentzIndex(*idx)
    norm_fn = lambda f: lorentz_norm(idx, f).value  # noqa: E731
    unit = idx.p == 2 and idx.q == 2
    return _mz("mz-lorentz", norm_fn, family, n_values, M, seed, n_seeds, band, threads,
               {"lorentz": [idx.p, _q_json(idx.q)]}, None, unit, norm_fn)


# -- proof ingredients -------------------------------------------------------------


def exp_moment_check(sweep=None, threads: int | None = None,
                     rtol: float = 1e-12) -> ExperimentReport:
    """E e^{|S_N|} <= 2e and E e^{±S_N} = Π cosh(x_n) for unit coefficient vectors."""
    t0 = time.perf_counter()
    sweep = coefficient_sweep(range(1, 17), random_per_n=10) if sweep is None else list(sweep)

    def run_case(item):
        label, x = item
        x = np.asarray(x, dtype=float)
        norm = float(np.linalg.norm(x))
        if abs(norm - 1.0) > 1e-12 or x.size > 16:
            raise ValueError(f"{label}: exp_moment_check needs unit vectors with N <= 16")
        s = rademacher_sum_distribution(x)
        e_abs = float(np.dot(s.masses, np.exp(np.abs(s.values))))
        e_pos = float(np.dot(s.masses, np.exp(s.values)))
        e_neg = float(np.dot(s.masses, np.exp(-s.values)))
        cosh = float(np.prod(np.cosh(x)))
        dev = max(abs(e_pos - cosh), abs(e_neg - cosh)) / cosh
        return {"label": label, "N": x.size, "e_abs": e_abs, "e_pos": e_pos, "e_neg": e_neg,
                "cosh_product": cosh, "cosh_rel_dev": dev}

    rows = parallel_map(run_case, sweep, threads)
    values = [r["e_abs"] for r in rows]
    over = [r["label"] for r in rows if r["e_abs"] > TWO_E]
    worst_dev = max(r["cosh_rel_dev"] for r in rows)
    cosh_bad = [r["label"] for r in rows if r["cosh_rel_dev"] > rtol]
    checks = {
        "two_e_bound": _check(not over, bound=TWO_E, margin=TWO_E - max(values), failures=over),
        "cosh_identity": _check(not cosh_bad, max_rel_dev=worst_dev, rtol=rtol,
                                failures=cosh_bad),
    }
    params = {"sweep": _sweep_params(sweep), "rtol": rtol}
    return _finish("exp-moment", t0, params, None, values, len(over) + len(cosh_bad), checks,
                   {"bound": TWO_E}, rows)


def interpolation_check(sweep=None, threads: int | None = None,
                        rtol: float = 1e-12) -> ExperimentReport:
    """Hölder chain ‖S‖₂³ <= ‖S‖₁·‖S‖₄²; ratio is the left side over the right."""
    t0 = time.perf_counter()
    sweep = coefficient_sweep(range(1, 17), random_per_n=10) if sweep is None else list(sweep)

    def run_case(item):
        label, x = item
        s = rademacher_sum_distribution(np.asarray(x))
        n1, n2, n4 = (lp_norm(p, s).value for p in (1, 2, 4))
        lhs, rhs = n2**3, n1 * n4**2
        return {"label": label, "N": _n_of(x), "l1": n1, "l2": n2, "l4": n4,
                "ratio": lhs / rhs}

    rows = parallel_map(run_case, sweep, threads)
    ratios = [r["ratio"] for r in rows]
    bad = [r["label"] for r in rows if r["ratio"] > 1 + rtol]
    checks = {"holder_chain": _check(not bad, rtol=rtol, slack_min=1 - max(ratios),
                                     failures=bad)}
    return _finish("interpolation", t0, {"sweep": _sweep_params(sweep), "rtol": rtol}, None,
                   ratios, len(bad), checks, {}, rows)


def kp_bound(psi: YoungFunction, family: RvFamily, sweep=None, M: int = 10_000, seed: int = 0,
             n_seeds: int = 1, floor: float = 0.2, eps_mc: float | None = None,
             stability: float = 0.2, tol: float = 1e-10,
             threads: int | None = None) -> ExperimentReport:
    """C‖ξ‖₁‖a‖₂ <= ‖Σ a_i ξ_i‖_ψ <= ‖ξ‖₂‖a‖₂ for i.i.d. mean-zero ξ.

    The upper half is checked with slack ε_MC (default 5/√M); the lower ratio
    ‖Σ a_i ξ_i‖_ψ / (‖ξ‖₁‖a‖₂) is minimised over the sweep to give Ĉ.
    """
    t0 = time.perf_counter()
    hyp = _hypothesis(psi, Hypothesis.LINEAR_BELOW_SQUARE_ABOVE, "kp_bound")
    sweep = coefficient_sweep((1, 2, 4, 8, 16)) if sweep is None else list(sweep)
    eps = 5.0 / math.sqrt(M) if eps_mc is None else eps_mc
    xi1, xi2 = family.l1(), family.l2()
    k_max = max(_n_of(a) for _, a in sweep)
    seeds = [seed + s for s in range(n_seeds)]
    tasks = [(sd, j) for sd in seeds for j in range(len(sweep))]
    mats = {sd: sample_matrix(family, k_max, M, sd) for sd in seeds}

    def run_case(task):
        sd, j = task
        label, a = sweep[j]
        a = np.asarray(a, dtype=float)
        a2 = float(np.linalg.norm(a))
        y = uniform_atoms(a @ mats[sd][: a.size])
        val = luxemburg_norm(psi, y, tol).value
        return {"label": label, "seed": sd, "k": a.size, "norm": val,
                "upper": xi2 * a2 * (1 + eps), "lower_ratio": val / (xi1 * a2)}

    rows = parallel_map(run_case, tasks, threads)
    over = [(r["label"], r["seed"]) for r in rows if r["norm"] > r["upper"]]
    c_by_seed = {}
    for r in rows:
        c_by_seed[r["seed"]] = min(c_by_seed.get(r["seed"], math.inf), r["lower_ratio"])
    c_hat = min(c_by_seed.values())
    c_spread = max(c_by_seed.values()) / c_hat - 1.0
    checks = {
        "upper_bound": _check(not over, eps_mc=eps, failures=[list(o) for o in over]),
        "c_floor": _check(c_hat >= floor, c_hat=c_hat, floor=floor),
        "c_stability": _check(c_spread <= stability, rel_spread=c_spread, tol=stability),
    }
    extras = {"c_hat_by_seed": {str(k): v for k, v in c_by_seed.items()},
              "xi_l1": xi1, "xi_l2": xi2, "eps_mc": eps}
    params = {"psi": psi.to_config(), "family": family.to_config(), "M": M, "seeds": n_seeds,
              "floor": floor, "eps_mc": eps, "tol": tol, "stability": stability,
              "sweep": _sweep_params(sweep)}
    return _finish("kp-bound", t0, params, hyp, [r["lower_ratio"] for r in rows], len(over),
                   checks, extras, rows, seed=seed)


def sqrt_psi_modular_report(psi: YoungFunction, f: SimpleFunction) -> ExperimentReport:
    """Σ mass·sqrt(ψ(|value|)) for a conditional second-moment function.

    Diagnostic only: sqrt(ψ) need not be convex, so no norm is claimed.
    """
    t0 = time.perf_counter()
    hyp = _hypothesis(psi, Hypothesis.LINEAR_BELOW_SQUARE_ABOVE, "sqrt_psi_modular_report")
    try:
        value = float(np.dot(f.masses, sqrt_gauge(psi, f.abs_values)))
        finite, note = math.isfinite(value), ""
    except SaturationError as exc:
        value, finite, note = math.inf, False, str(exc)
    checks = {"finite": _check(finite, note=note)}
    params = {"psi": psi.to_config(), "f": f.to_json()}
    return _finish("sqrt-psi-modular", t0, params, hyp, [value], 0, checks,
                   {"modular": value, "finite": finite})


# -- rearrangement and Lorentz Hölder ------------------------------------------------


def _lambda_grid(*fs) -> np.ndarray:
    vals = np.unique(np.concatenate([f.abs_values for f in fs] + [np.zeros(1)]))
    mids = 0.5 * (vals[1:] + vals[:-1])
    return np.unique(np.concatenate([vals, mids, vals * 0.5, [vals[-1] * 1.5 + 1.0]]))


def _random_pair(rng, max_atoms):
    f = random_simple(rng, max_atoms)
    g = f.with_values(rng.standard_normal(len(f)) * np.exp(rng.standard_normal(len(f))))
    return f, g


def rearrangement_suite(n_pairs: int = 1000, seed: int = 0, max_atoms: int = 64,
                        atol: float = 1e-12) -> ExperimentReport:
    """Layer-cake consistency and d_{f+g}(2λ) <= d_f(λ) + d_g(λ) on random pairs.

    Also counts pairs on which the literal same-λ form d_{f+g}(λ) <= d_f(λ) + d_g(λ)
    fails; that form is not a theorem and is reported, not asserted.
    """
    t0 = time.perf_counter()
    rng = counter_rng(seed, ROLE_SWEEP, 30_000)
    layer_bad = moment_bad = sub_bad = literal_fail = 0
    ratios = []
    for _ in range(n_pairs):
        f, g = _random_pair(rng, max_atoms)
        h = combine(f, g, "add")
        grid = _lambda_grid(f, g, h)
        for fn in (f, g, h):
            r = rearrangement(fn)
            d = distribution_function(fn, grid)
            rec = r.measure_above(grid)
            layer_bad += int(np.any(np.abs(d - rec) > atol))
            for p in (1, 2, 4):
                exact = float(np.dot(fn.masses, fn.abs_values**p))
                if abs(r.integral_power(p) - exact) > 1e-12 * exact:
                    moment_bad += 1
        df = distribution_function(f, grid)
        dg = distribution_function(g, grid)
        dh2 = distribution_function(h, 2 * grid)
        dh = distribution_function(h, grid)
        sub_bad += int(np.any(dh2 > df + dg + atol))
        literal_fail += int(np.any(dh > df + dg + atol))
        pos = (df + dg) > 0
        ratios.append(float(np.max(dh2[pos] / (df + dg)[pos])) if np.any(pos) else 0.0)
    checks = {
        "layer_cake": _check(layer_bad == 0, failures=layer_bad, atol=atol),
        "moments": _check(moment_bad == 0, failures=moment_bad),
        "subadditivity_2lambda": _check(sub_bad == 0, failures=sub_bad),
    }
    extras = {"literal_same_lambda_failures": literal_fail}
    params = {"pairs": n_pairs, "max_atoms": max_atoms, "atol": atol}
    return _finish("rearrangement", t0, params, None, ratios, layer_bad + moment_bad + sub_bad,
                   checks, extras, seed=seed)


DEFAULT_HOLDER_TUPLES = (
    (4.0, 4.0, 4.0, 4.0),
    (3.0, 2.0, 6.0, 2.0),
    (4.0, math.inf, 4.0, 2.0),
    (3.0, 6.0, 3.0, 3.0),
    (6.0, math.inf, 6.0, math.inf),
    (4.0, 2.0, 4.0, math.inf),
)


def _holder_target(p1, q1, p2, q2) -> LorentzIndex:
    p = 1.0 / (1.0 / p1 + 1.0 / p2)
    inv_q = (0.0 if math.isinf(q1) else 1.0 / q1) + (0.0 if math.isinf(q2) else 1.0 / q2)
    return LorentzIndex(p, math.inf if inv_q == 0 else 1.0 / inv_q)


def _holder_corpus_max(tuples, n_pairs, seed, stream, max_atoms):
    rng = counter_rng(seed, ROLE_SWEEP, stream)
    pairs = [_random_pair(rng, max_atoms) for _ in range(n_pairs)]
    out = []
    for tup in tuples:
        p1, q1, p2, q2 = tup
        target = _holder_target(*tup)
        i1, i2 = LorentzIndex(p1, q1), LorentzIndex(p2, q2)
        cs = []
        for f, g in pairs:
            fg = combine(f, g, "mul")
            denom = lorentz_norm(i1, f).value * lorentz_norm(i2, g).value
            cs.append(lorentz_norm(target, fg).value / denom)
        out.append(cs)
    return out


def holder_lorentz(tuples=DEFAULT_HOLDER_TUPLES, n_pairs: int = 1000, seed: int = 0,
                   max_atoms: int = 64, stability: float = 0.10) -> ExperimentReport:
    """Empirical constant in ‖fg‖_{p,q} <= C‖f‖_{p1,q1}‖g‖_{p2,q2}.

    Two independent corpora are drawn; the per-tuple maximum of C must be
    finite and agree across them within ``stability`` (relative).
    """
    t0 = time.perf_counter()
    tuples = [tuple(float(v) for v in t) for t in tuples]
    a = _holder_corpus_max(tuples, n_pairs, seed, 40_000, max_atoms)
    b = _holder_corpus_max(tuples, n_pairs, seed, 40_001, max_atoms)
    per_tuple = {}
    ratios = []
    worst = 0.0
    for tup, ca, cb in zip(tuples, a, b):
        ma, mb = max(ca), max(cb)
        rel = abs(ma - mb) / max(ma, mb)
        worst = max(worst, rel)
        key = ",".join("inf" if math.isinf(v) else f"{v:g}" for v in tup)
        per_tuple[key] = {"target": str(_holder_target(*tup)), "max_a": ma, "max_b": mb,
                          "rel_diff": rel, "median_a": float(np.median(ca))}
        ratios.extend(ca)
    finite = all(math.isfinite(r) for r in ratios)
    checks = {"finite": _check(finite),
              "max_stability": _check(worst < stability, worst_rel_diff=worst, tol=stability)}
    params = {"tuples": [[_q_json(v) for v in t] for t in tuples], "pairs": n_pairs,
              "max_atoms": max_atoms, "stability": stability}
    return _finish("holder-lorentz", t0, params, None, ratios, 0, checks,
                   {"per_tuple": per_tuple}, seed=seed)
