"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines are
written past pytest's output capture.
"""

import math
import time
import warnings

import numpy as np
import pytest

from orlicz_lab import lab
from orlicz_lab.measure import constant, random_simple
from orlicz_lab.norms import (
    LorentzIndex,
    dual_norm_oracle,
    lorentz_norm,
    lp_norm,
    luxemburg_norm,
    orlicz_norm,
)
from orlicz_lab.randseries import ROLE_SWEEP, RvFamily, counter_rng, rademacher_sum_distribution
from orlicz_lab.young import YoungFunction

CORPUS_SIZE = 1000


@pytest.fixture(scope="module")
def corpus():
    rng = counter_rng(2024, ROLE_SWEEP, 50_000)
    return [random_simple(rng, max_atoms=64) for _ in range(CORPUS_SIZE)]


@pytest.fixture
def emit(capsys):
    def _emit(n, title, ok, elapsed, limit, detail):
        status = "PASS" if ok else "FAIL"
        limit_s = f"< {limit:g} s" if limit else "n/a"
        with capsys.disabled():
            print(f"\n[criterion {n:2d}] {status}  {title}: {detail}; "
                  f"runtime {elapsed:.2f} s (limit {limit_s})")
    return _emit


@pytest.fixture(autouse=True)
def quiet_hypothesis_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", lab.HypothesisWarning)
        yield


def test_criterion_01_luxemburg_matches_lp(corpus, emit):
    t0 = time.perf_counter()
    worst = 0.0
    for p in (1.0, 1.5, 2.0, 3.0):
        psi = YoungFunction.power(p)
        for f in corpus:
            ref = lp_norm(p, f).value
            worst = max(worst, abs(luxemburg_norm(psi, f).value - ref) / ref)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 5
    emit(1, "Luxemburg(Power(p)) vs L^p", ok, elapsed, 5, f"max rel err {worst:.3e} (tol 1e-9)")
    assert worst <= 1e-9
    assert elapsed < 5


def test_criterion_02_lorentz_pp_equals_lp(corpus, emit):
    t0 = time.perf_counter()
    worst = 0.0
    for p in (1.5, 2.0, 3.0):
        idx = LorentzIndex(p, p)
        for f in corpus:
            ref = lp_norm(p, f).value
            worst = max(worst, abs(lorentz_norm(idx, f).value - ref) / ref)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 2
    emit(2, "L^{p,p} = L^p", ok, elapsed, 2, f"max rel err {worst:.3e} (tol 1e-10)")
    assert worst <= 1e-10
    assert elapsed < 2


def test_criterion_03_sandwich_and_dual_oracle(corpus, emit):
    small = [f for f in corpus if len(f) <= 3]
    t0 = time.perf_counter()
    sandwich_bad = 0
    worst = 0.0
    for psi in (YoungFunction.power(1.5), YoungFunction.power(2), YoungFunction.exp_minus_one()):
        for f in small:
            lux = luxemburg_norm(psi, f).value
            am = orlicz_norm(psi, f).value
            if not (lux <= am * (1 + 1e-12) and am <= 2 * lux + 1e-9):
                sandwich_bad += 1
            worst = max(worst, abs(am - dual_norm_oracle(psi, f).value) / am)
    elapsed = time.perf_counter() - t0
    ok = sandwich_bad == 0 and worst <= 1e-3 and elapsed < 30 and small
    emit(3, "Orlicz/Luxemburg sandwich + dual oracle", ok, elapsed, 30,
         f"{len(small)} cases x 3 psi, sandwich violations {sandwich_bad}, "
         f"max rel |amemiya-oracle| {worst:.3e} (tol 1e-3)")
    assert small
    assert sandwich_bad == 0
    assert worst <= 1e-3
    assert elapsed < 30


def test_criterion_04_cosh_identity_and_2e(emit):
    t0 = time.perf_counter()
    rep = lab.exp_moment_check(lab.random_unit_sweep(1000, n_max=16, seed=0), rtol=1e-12)
    elapsed = time.perf_counter() - t0
    c = rep.checks
    ok = rep.cases == 1000 and c["two_e_bound"]["passed"] and c["cosh_identity"]["passed"] \
        and rep.violations == 0 and elapsed < 60
    emit(4, "cosh identity and E e^|S| <= 2e", ok, elapsed, 60,
         f"max E e^|S| {rep.ratio_max:.6f} <= {lab.TWO_E:.6f}, "
         f"cosh rel dev {c['cosh_identity']['max_rel_dev']:.2e}, violations {rep.violations}")
    assert rep.cases == 1000 and rep.violations == 0
    assert c["two_e_bound"]["passed"] and c["cosh_identity"]["passed"]
    assert elapsed < 60


def test_criterion_05_khinchin_orlicz(emit):
    t0 = time.perf_counter()
    sweep = lab.coefficient_sweep(range(1, 13))
    reps = {}
    for psi in (YoungFunction.power(1), YoungFunction.power(1.5), YoungFunction.exp_minus_one()):
        reps[psi.label] = lab.khinchin_orlicz(psi, sweep)
    eq16 = luxemburg_norm(YoungFunction.power(1), rademacher_sum_distribution(np.full(16, 0.25)))
    elapsed = time.perf_counter() - t0
    bands_ok = all(r.ratio_min > 0 and r.ratio_max / r.ratio_min <= 4 for r in reps.values())
    p1 = reps["x^1"]
    min_ok = abs(p1.ratio_min - 0.70711) <= 0.005
    clt_ok = abs(eq16.value - 0.7979) <= 0.02
    ok = bands_ok and min_ok and clt_ok and elapsed < 120
    spreads = ", ".join(f"{k}: [{r.ratio_min:.4f}, {r.ratio_max:.4f}]" for k, r in reps.items())
    emit(5, "Khinchin in Orlicz", ok, elapsed, 120,
         f"{spreads}; Power(1) min {p1.ratio_min:.5f} at {p1.extras['argmin']['label']}; "
         f"equal N=16 {eq16.value:.5f}")
    assert bands_ok
    assert min_ok
    assert clt_ok
    assert elapsed < 120


def test_criterion_06_khinchin_lorentz(emit):
    t0 = time.perf_counter()
    sweep = lab.coefficient_sweep(range(1, 13))
    reps = {}
    for p in (1.5, 2.0, 3.0):
        for q in (1.0, 2.0, math.inf):
            reps[(p, q)] = lab.khinchin_lorentz(LorentzIndex(p, q), sweep)
    elapsed = time.perf_counter() - t0
    bands_ok = all(r.ratio_min > 0 and r.ratio_max / r.ratio_min <= 4 for r in reps.values())
    r22 = reps[(2.0, 2.0)]
    dev22 = max(abs(r22.ratio_min - 1), abs(r22.ratio_max - 1))
    worst_band = max(r.ratio_max / r.ratio_min for r in reps.values())
    ok = bands_ok and dev22 <= 1e-10 and elapsed < 120
    emit(6, "Khinchin in Lorentz", ok, elapsed, 120,
         f"9 indices, worst band {worst_band:.4f} (<= 4), (2,2) deviation {dev22:.2e}")
    assert bands_ok
    assert dev22 <= 1e-10
    assert elapsed < 120


def test_criterion_07_marcinkiewicz_zygmund(emit):
    families = (RvFamily.rademacher(), RvFamily.uniform_centered(), RvFamily.two_point())
    psis = (YoungFunction.power(1.5), YoungFunction.power(2), YoungFunction.power(3))
    idxs = (LorentzIndex(1.5, 1), LorentzIndex(2, 2), LorentzIndex(3, math.inf))
    n_values = (2, 4, 8, 16)
    eq_sweep = [(f"equal/N={n}", np.full(n, 1 / math.sqrt(n))) for n in n_values]
    norms_of_one = {psi.label: luxemburg_norm(psi, constant(1.0)).value for psi in psis}
    norms_of_one.update({str(idx): lorentz_norm(idx, constant(1.0)).value for idx in idxs})
    t0 = time.perf_counter()
    failures = []
    worst_spread = worst_unit = worst_cross = 0.0
    for fam in families:
        runs = [(psi.label, lab.mz_orlicz(psi, fam, n_values, M=100_000, seed=0, n_seeds=20),
                 lambda psi=psi: lab.khinchin_orlicz(psi, eq_sweep)) for psi in psis]
        runs += [(str(idx), lab.mz_lorentz(idx, fam, n_values, M=100_000, seed=0, n_seeds=20),
                  lambda idx=idx: lab.khinchin_lorentz(idx, eq_sweep)) for idx in idxs]
        for name, rep, khinchin in runs:
            tag = f"{fam.describe()}/{name}"
            worst_spread = max(worst_spread, rep.checks["stability"]["median_spread"])
            if not rep.checks["stability"]["passed"]:
                failures.append(f"{tag}: stability")
            if "orthogonality" in rep.checks:
                worst_unit = max(worst_unit, rep.checks["orthogonality"]["max_median_deviation"])
                if not rep.checks["orthogonality"]["passed"]:
                    failures.append(f"{tag}: unit ratio")
            if fam.kind.value == "rademacher":
                # square function of n signs is √n·1, so divide by the norm of 1
                unit = norms_of_one[name]
                exact = {row["N"]: row["ratio"] / unit for row in khinchin().rows}
                meds = rep.extras["median_by_n"]
                diff = max(abs(meds[str(n)] - exact[n]) for n in n_values)
                worst_cross = max(worst_cross, diff)
                if diff > 0.05:
                    failures.append(f"{tag}: Khinchin cross-check {diff:.3f}")
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 300
    emit(7, "MZ in Orlicz/Lorentz", ok, elapsed, 300,
         f"18 runs, worst median spread {worst_spread:.4f} (<= 2), worst unit-case deviation "
         f"{worst_unit:.4f} (<= 0.02), worst Rademacher cross-check {worst_cross:.4f} (<= 0.05)"
         + (f"; failures {failures}" if failures else ""))
    assert not failures
    assert elapsed < 300


def test_criterion_08_kp_bound(emit):
    t0 = time.perf_counter()
    reps = [lab.kp_bound(YoungFunction.power(p), RvFamily.uniform_centered(), M=10_000, seed=0,
                         n_seeds=10, floor=0.2, stability=0.2) for p in (1.2, 1.5)]
    elapsed = time.perf_counter() - t0
    ok = all(r.passed and r.hypothesis_ok for r in reps) and elapsed < 180
    detail = "; ".join(
        f"Power({r.params['psi']['p']:g}): upper violations {r.violations}, C_hat "
        f"{r.checks['c_floor']['c_hat']:.4f}, seed spread {r.checks['c_stability']['rel_spread']:.4f}"
        for r in reps)
    emit(8, "KP bound", ok, elapsed, 180, detail)
    for r in reps:
        assert r.hypothesis_ok
        assert r.violations == 0
        assert r.checks["c_floor"]["passed"]
        assert r.checks["c_stability"]["passed"]
    assert elapsed < 180


def test_criterion_09_rearrangement(emit):
    t0 = time.perf_counter()
    rep = lab.rearrangement_suite(n_pairs=1000, seed=0)
    elapsed = time.perf_counter() - t0
    ok = rep.passed and rep.violations == 0 and elapsed < 5
    emit(9, "rearrangement suite", ok, elapsed, 5,
         f"1000 pairs, violations {rep.violations} (layer-cake, moments, d_(f+g)(2l))")
    assert rep.violations == 0 and rep.passed
    assert elapsed < 5


def test_criterion_10_lorentz_holder(emit):
    t0 = time.perf_counter()
    rep = lab.holder_lorentz(n_pairs=1000, seed=0, stability=0.10)
    elapsed = time.perf_counter() - t0
    worst = rep.checks["max_stability"]["worst_rel_diff"]
    ok = rep.passed and elapsed < 30
    emit(10, "Lorentz Hölder", ok, elapsed, 30,
         f"{len(rep.extras['per_tuple'])} tuples, C finite {rep.checks['finite']['passed']}, "
         f"worst corpus-to-corpus change of max C {worst:.4f} (< 0.10)")
    assert rep.checks["finite"]["passed"]
    assert rep.checks["max_stability"]["passed"]
    assert elapsed < 30


def test_criterion_11_determinism(emit, monkeypatch):
    t0 = time.perf_counter()
    sweep = lab.coefficient_sweep(range(1, 13), random_per_n=20)

    def exact_reports():
        return [
            lab.khinchin_orlicz(YoungFunction.power(1.5), sweep).to_json(),
            lab.khinchin_lorentz(LorentzIndex(3, 1), sweep).to_json(),
            lab.exp_moment_check().to_json(),
            lab.interpolation_check().to_json(),
            lab.rearrangement_suite(n_pairs=200).to_json(),
            lab.holder_lorentz(n_pairs=100).to_json(),
        ]

    def mc_reports():
        return [
            lab.mz_orlicz(YoungFunction.power(1.5), RvFamily.two_point(), (2, 4, 8), M=20_000,
                          seed=17, n_seeds=4).to_json(),
            lab.mz_lorentz(LorentzIndex(2, math.inf), RvFamily.uniform_centered(), (2, 4),
                           M=20_000, seed=17, n_seeds=4).to_json(),
            lab.kp_bound(YoungFunction.power(1.5), RvFamily.two_point(),
                         lab.coefficient_sweep((1, 4, 16), random_per_n=5), M=5000, seed=17,
                         n_seeds=2).to_json(),
        ]

    monkeypatch.setenv("ORLICZ_LAB_THREADS", "1")
    exact_a, mc_a = exact_reports(), mc_reports()
    exact_b = exact_reports()
    monkeypatch.setenv("ORLICZ_LAB_THREADS", "4")
    exact_c, mc_c = exact_reports(), mc_reports()
    elapsed = time.perf_counter() - t0
    exact_ok = exact_a == exact_b == exact_c
    mc_ok = mc_a == mc_c
    emit(11, "determinism", exact_ok and mc_ok, elapsed, None,
         f"exact drivers identical across runs/threads {exact_ok}, "
         f"MC drivers identical across 1 vs 4 threads {mc_ok}")
    assert exact_ok
    assert mc_ok
