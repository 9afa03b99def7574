"""Acceptance criteria, one test per criterion.

Each test appends a single ``PASS``/``FAIL`` line to the terminal summary
(and prints it), then asserts at the stated tolerance.
"""

from __future__ import annotations

import time

import numpy as np
import pytest
from tests_support import ACCEPTANCE_LINES

from nslab import bounds
from nslab import experiments as ex
from nslab.cjt import cjt_diagonalize
from nslab.feedback import FeedbackOracle
from nslab.linalg import gram, hermitian, hermitian_with_spectrum, reference_evd
from nslab.linesearch import determine_smi, n_bisections, one_bit_binary_search
from nslab.obnsla import Observer, extract_precoder, run_modified_obnsla, run_obnsla

pytestmark = pytest.mark.acceptance


def report(num: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


# --------------------------------------------------------------------------
# 1


def test_criterion_1_two_by_two_example(two_by_two):
    H, null = two_by_two
    eta = 1e-4
    t0 = time.perf_counter()
    oracle = FeedbackOracle(H)
    state = run_modified_obnsla(oracle, 2, 1, eta)
    w = extract_precoder(state, oracle, 1)[:, 0]
    elapsed = time.perf_counter() - t0
    leak = float(np.linalg.norm(H @ w) ** 2)
    bound = bounds.rotation_residual_bound(eta, np.linalg.norm(gram(H)))
    align = float(abs(np.vdot(w, null)))
    ok = leak <= bound and align >= 0.9999 and elapsed < 1.0
    report(1, ok, f"||Hw||^2={leak:.3e} <= {bound:.3e}, alignment={align:.10f}, "
                  f"runtime={elapsed:.3f}s")
    assert ok


# --------------------------------------------------------------------------
# 2-4 share one batch of seeded ideal-feedback trials

N_TRIALS = 200
SWEEPS = 20
ETAS = (1e-2, 1e-3, 1e-4)


def cell(i: int) -> tuple[int, float]:
    return 2 + i % 3, ETAS[(i // 3) % 3]


@pytest.fixture(scope="module")
def ideal_trials():
    t0 = time.perf_counter()
    trials = []
    for i in range(N_TRIALS):
        n_t, eta = cell(i)
        trials.append(ex.convergence_trial(n_t, n_t - 1, eta, SWEEPS, ex.trial_seed(2024, i)))
    return trials, time.perf_counter() - t0


def test_criterion_2_per_sweep_linear_bound(ideal_trials):
    trials, elapsed = ideal_trials
    checked = failed = 0
    for t in trials:
        for a, b in zip(t.sweep_P[:-1], t.sweep_P[1:]):
            checked += 1
            failed += b**2 > bounds.linear_bound_rhs(a**2, t.n_t, t.eta, t.G_norm)
    ok = failed == 0 and elapsed < 60
    report(2, ok, f"{checked - failed}/{checked} sweeps satisfy the per-sweep bound "
                  f"over {len(trials)} trials, runtime={elapsed:.1f}s")
    assert ok


def test_criterion_3_interference_below_twice_P_squared(ideal_trials):
    trials, _ = ideal_trials
    checked = failed = 0
    worst = 0.0
    for t in trials:
        for P, mi in zip(t.P_k, t.max_interference):
            checked += 1
            if mi > 2 * P**2:
                failed += 1
                worst = max(worst, mi / (2 * P**2))
    report(3, failed == 0, f"{failed}/{checked} rotations violate max_q ||H t_q||^2 <= 2 P_k^2"
                           + (f" (worst ratio {worst:.1f})" if failed else ""))
    assert failed == 0


def test_criterion_4_limsup_tail(ideal_trials):
    trials, _ = ideal_trials
    failed = 0
    worst = 0.0
    for t in trials:
        tail = max(p**2 for p in t.sweep_P[10:])
        lim = bounds.limsup_bound(t.n_t, t.eta, t.G_norm)
        worst = max(worst, tail / lim)
        failed += tail > lim
    report(4, failed == 0, f"{len(trials) - failed}/{len(trials)} trials have tail P_k^2 "
                           f"<= limsup bound (worst tail/bound={worst:.3g})")
    assert failed == 0


# --------------------------------------------------------------------------
# 5


def test_criterion_5_eta_squared_plateau():
    cfg = ex.ExperimentConfig()
    cfg.sweep.trials = 50
    cfg.sweep.eta = [1e-2, 1e-3, 1e-4, 1e-5]
    rows = ex.convergence_campaign(cfg, 5)
    slope = ex.plateau_slope(rows)
    ok = abs(slope - 2.0) <= 0.3
    report(5, ok, f"log-log slope of final max interference vs eta = {slope:.3f} (2.0 +/- 0.3)")
    assert ok


# --------------------------------------------------------------------------
# 6


def separated_spectrum(rng: np.random.Generator, n: int, min_delta: float = 0.1) -> np.ndarray:
    """Random spectrum with unit norm and one-third minimum gap at least ``min_delta``."""
    while True:
        lam = np.cumsum(0.3 + rng.uniform(0, 0.5, n)) - rng.uniform(0, 1.5)
        lam /= np.linalg.norm(lam)
        if bounds.min_gap(lam) / 3 >= min_delta:
            return lam


def quadratic_ratios(sweep_P, delta: float, cutoff: float) -> list[float]:
    """``P_{s+1}^2 delta^2 / P_s^4`` for sweeps ``s >= 1`` with ``P_{s+1}`` above ``cutoff``."""
    return [b**2 * delta**2 / a**4 for a, b in zip(sweep_P[1:-1], sweep_P[2:]) if b > cutoff]


def test_criterion_6_quadratic_rate():
    eta = 1e-8
    rng = np.random.default_rng(6)
    cjt_r, ob_r = [], []
    for n in (3, 4, 5):
        for _ in range(20):
            lam = separated_spectrum(rng, n)
            G = hermitian_with_spectrum(rng, lam)
            delta = bounds.compute_gaps(lam).delta
            ref = cjt_diagonalize(G, stop_tol=0.0, max_sweeps=8)
            cjt_r += quadratic_ratios(ref.sweep_P(), delta, 1e3 * np.finfo(float).eps)
            st = run_obnsla(FeedbackOracle(G=G), n, eta, 8, observer=Observer(G),
                            stop_on_convergence=False)
            ob_r += quadratic_ratios(st.sweep_P, delta, 1e3 * eta)
    C = max(cjt_r + ob_r)
    ok = bool(cjt_r) and bool(ob_r) and C <= 10
    report(6, ok, f"C = max P_(s+1)^2 delta^2 / P_s^4 = {C:.3g} (cjt {max(cjt_r):.3g} over "
                  f"{len(cjt_r)} pairs, one-bit {max(ob_r):.3g} over {len(ob_r)} pairs), C <= 10")
    assert ok


# --------------------------------------------------------------------------
# 7

CLUSTER_SPECTRUM = [1.0, 0.5 + 1e-4, 0.5 - 1e-4, 0.0]
C_REGION = 10.0


def region_checks(Ps: list[float], info, eta: float, n_t: int) -> dict:
    reg = [bounds.classify_region(p**2, info) for p in Ps]
    m = n_t * (n_t - 1) // 2
    out = {
        "monotone": all(a <= b for a, b in zip(reg, reg[1:])),
        "ends": reg[0] == 1 and reg[-1] == 4,
        "all_four": set(reg) == {1, 2, 3, 4},
        "region3_len": reg.count(3),
        "ratios": [],
    }
    # one sweep after entering a quadratic region, P^2 obeys that region's bound
    for region, gap, mode in ((2, info.delta_c, "cluster"), (4, info.delta, "distinct")):
        if region in reg:
            e = reg.index(region)
            if e + m < len(Ps):
                rhs = bounds.quadratic_bound_rhs(Ps[e], gap, eta, n_t, 1.0, mode)
                out["ratios"].append(Ps[e + m] ** 2 / rhs)
    out["sequence"] = [r for i, r in enumerate(reg) if i == 0 or r != reg[i - 1]]
    return out


def test_criterion_7_cluster_regions():
    info = bounds.compute_gaps(CLUSTER_SPECTRUM, cluster=[1, 2])
    n_t, eta = 4, 1e-10
    results = []
    for seed in range(20):
        G = hermitian_with_spectrum(np.random.default_rng(seed), CLUSTER_SPECTRUM)
        ref = cjt_diagonalize(G, stop_tol=0.0, max_sweeps=10)
        results.append(region_checks([ref.P0] + [s.P for s in ref.trace], info, 0.0, n_t))
        st = run_obnsla(FeedbackOracle(G=G), n_t, eta, 10, observer=Observer(G),
                        stop_on_convergence=False)
        results.append(region_checks([st.sweep_P[0]] + [r.P for r in st.trace], info, eta, n_t))
    monotone = all(r["monotone"] and r["ends"] for r in results)
    plateau_free = max(r["region3_len"] for r in results) <= 2 * n_t * (n_t - 1) // 2
    worst = max(x for r in results for x in r["ratios"])
    frac = np.mean([r["all_four"] for r in results])
    seq0 = results[0]["sequence"]
    ok = monotone and plateau_free and worst <= C_REGION and frac >= 0.8 and seq0 == [1, 2, 3, 4]
    report(7, ok, f"monotone 1->4 in {sum(r['monotone'] and r['ends'] for r in results)}/"
                  f"{len(results)} traces, all four regions in {frac:.0%}, longest region 3 = "
                  f"{max(r['region3_len'] for r in results)} rotations, worst quadratic ratio "
                  f"{worst:.3g} <= {C_REGION:g}, seed 0 sequence {seq0}")
    assert ok


# --------------------------------------------------------------------------
# 8


def test_criterion_8_line_search_suite(ideal_trials):
    rng = np.random.default_rng(8)
    smi_fail = 0
    for _ in range(10_000):
        L = rng.choice([np.pi, np.pi / 2])
        A, B = rng.uniform(0.01, 5), rng.uniform(-5, 5)
        z0 = rng.uniform(-L, L)
        w = lambda z: B - A * np.cos(np.pi * (z - z0) / L)
        lo, hi = determine_smi(lambda a, b: 1 if w(a) >= w(b) else 0, L)
        if not any(lo - 1e-9 <= z0 + 2 * L * k <= hi + 1e-9 for k in (-1, 0, 1)):
            smi_fail += 1
    bs_fail = 0
    for _ in range(2000):
        eta = 10 ** rng.uniform(-8, -1)
        A, z0 = rng.uniform(0.01, 5), rng.uniform(-np.pi / 4, np.pi / 4)
        w = lambda z: -A * np.cos(z - z0)
        z = one_bit_binary_search(lambda a, b: 1 if w(a) >= w(b) else 0,
                                  (-np.pi / 4, np.pi / 4), eta)
        bs_fail += abs(z - z0) > eta
    trials, _ = ideal_trials
    tc_fail = 0
    worst_tc = 0.0
    for t in trials:
        budget = 2 * (5 + n_bisections(np.pi / 2, t.eta))
        worst_tc = max(worst_tc, max(t.tc_per_rotation) / budget)
        tc_fail += max(t.tc_per_rotation) > budget
    ok = smi_fail == 0 and bs_fail == 0 and tc_fail == 0
    report(8, ok, f"SMI failures {smi_fail}/10000, binary-search failures {bs_fail}/2000, "
                  f"TC budget violations {tc_fail}/{len(trials)} (worst use {worst_tc:.0%})")
    assert ok


# --------------------------------------------------------------------------
# 9


def test_criterion_9_cjt_reference():
    rng = np.random.default_rng(9)
    worst_eig = 0.0
    non_monotone = 0
    for i in range(500):
        n = 2 + i % 5
        X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        G = hermitian(X)
        res = cjt_diagonalize(G)
        ref = reference_evd(G)[0]
        worst_eig = max(worst_eig, float(np.max(np.abs(np.sort(res.diag)[::-1] - ref))))
        Ps = [res.P0] + [s.P for s in res.trace]
        tol = 1e-12 * np.linalg.norm(G)
        non_monotone += any(b > a + tol for a, b in zip(Ps, Ps[1:]))
    ok = worst_eig <= 1e-9 and non_monotone == 0
    report(9, ok, f"max eigenvalue error {worst_eig:.2e} <= 1e-9, non-monotone traces "
                  f"{non_monotone}/500")
    assert ok


# --------------------------------------------------------------------------
# 10


def test_criterion_10_link_level_trends():
    t0 = time.perf_counter()
    trials = 200
    cfg = ex.ExperimentConfig()
    cfg.sweep.trials = trials
    cfg.learning.algorithms = ["obnsla"]
    cfg.sweep.bits = [1, 2, 3, 4, 5, 6, 7, 8]
    quant = {r["bits"]: r["reduction_db_mean"] for r in ex.quantization_sweep(cfg, 10)}
    top = quant[8]
    sat = min(b for b in cfg.sweep.bits if quant[b] >= top - 1.0)
    ok_a = 3 <= sat <= 5 and quant[1] < quant[4]

    cfg.sweep.doppler_pp_hz = [150.0]
    pp = ex.doppler_sweep(cfg, 10, "pp")[0]["reduction_db_mean"]
    ok_b = pp >= 5.0

    cfg.learning.algorithms = ["obnsla", "bnsla"]
    cfg.sweep.doppler_ps_hz = [1.0]
    low = {r["algorithm"]: r["reduction_db_mean"] for r in ex.doppler_sweep(cfg, 10, "ps")}
    gap = abs(low["obnsla"] - low["bnsla"])
    ok_c = gap <= 3.0
    elapsed = time.perf_counter() - t0
    ok = ok_a and ok_b and ok_c and elapsed <= 600
    curve = ", ".join(f"{b}:{quant[b]:.1f}" for b in cfg.sweep.bits)
    report(10, ok, f"(a) saturation at {sat} bits [{curve}] dB; (b) H_pp 150 Hz reduction "
                   f"{pp:.1f} dB >= 5; (c) one-bit {low['obnsla']:.1f} vs magnitude "
                   f"{low['bnsla']:.1f} dB, gap {gap:.1f} <= 3; runtime {elapsed:.0f}s")
    assert ok


# --------------------------------------------------------------------------
# supplementary checks on the criterion 3 batch (not acceptance criteria)


def test_interference_within_sqrt2_P(ideal_trials):
    trials, _ = ideal_trials
    for t in trials:
        for P, mi in zip(t.P_k, t.max_interference):
            assert mi <= bounds.interference_bound_hw(P)


def test_twice_P_squared_holds_for_two_antennas(ideal_trials):
    trials, _ = ideal_trials
    for t in trials:
        if t.n_t == 2:
            for P, mi in zip(t.P_k, t.max_interference):
                assert mi <= 2 * P**2 * (1 + 1e-9) + 1e-300
