"""The fourteen acceptance criteria, at their stated tolerances.

Each criterion records a pass/fail line through the ``acceptance`` fixture;
the lines are repeated in the terminal summary.
"""
import math
import os
import time

import numpy as np
import pytest

from xyotto import analysis, cycle, dynamics, model, verify
from xyotto.analysis import axis
from xyotto.cycle import Regime
from xyotto.dynamics import FieldSchedule
from xyotto.model import ModelParams

FIG2 = ModelParams(10.0, 2.0, 4.0, 1.0)
FIG5 = ModelParams(10.0, 1.6, 4.0, 1.0)
WEAK = ModelParams(0.01, 2.0, 4.0, 1.0)
STRONG = ModelParams(10.0, 2.6, 4.0, 1.0)
FIG4 = ModelParams(0.01, 0.8, 4.0, 1.0, T2=0.2)
DEFAULT_GRID = axis(0.01, 6.0, 201)
WIDE_GRID = axis(0.01, 40.0, 201)
WORKERS = min(4, os.cpu_count() or 1)


def test_criterion_01_quench(acceptance):
    t0 = time.perf_counter()
    closed = model.quench_adiabaticity(FIG2)
    ode = dynamics.adiabaticity(FIG2, FieldSchedule(4.0, 1.0, 1e-4))
    dt = time.perf_counter() - t0
    ok = abs(closed - 0.929) <= 1e-3 and abs(ode - 0.929) <= 1e-3 and dt < 1.0
    assert acceptance(1, "quench", ok, f"closed={closed:.6f} ode={ode:.6f} in {dt:.3f}s")


def test_criterion_02_adiabatic_limit(acceptance):
    t0 = time.perf_counter()
    P = dynamics.adiabaticity(FIG2, FieldSchedule(4.0, 1.0, 50.0))
    dt = time.perf_counter() - t0
    assert acceptance(2, "tau=50", P >= 0.999 and dt < 10.0, f"P={P:.8f} in {dt:.3f}s")


def test_criterion_03_fig5_quench(acceptance):
    P = model.quench_adiabaticity(FIG5)
    ode = dynamics.adiabaticity(FIG5, FieldSchedule(4.0, 1.0, 1e-4))
    ok = abs(P - 0.932) <= 1e-3 and abs(ode - 0.932) <= 1e-3
    assert acceptance(3, "quench", ok, f"closed={P:.6f} ode={ode:.6f}")


def test_criterion_04_oracle_equivalence(acceptance):
    rng = np.random.default_rng(2024)
    worst_p = worst_e = 0.0
    n = 60
    for i in range(n):
        p, tau = verify.random_params(rng)
        s = FieldSchedule(p.h1, p.h2, tau, ("sqrt-linear", "linear-h")[i % 2])
        P_ode = dynamics.adiabaticity(p, s)
        orc = cycle.oracle_energetics(p, s)
        worst_p = max(worst_p, abs(P_ode - orc["P"]))
        worst_e = max(worst_e, cycle.energetics_deviation(p, cycle.stroke_energetics(p, P_ode), orc))
    ok = worst_p < 1e-6 and worst_e < 1e-8
    assert acceptance(4, "ode/oracle", ok, f"{n} sets: max|dP|={worst_p:.2e}, max energetics gap={worst_e:.2e}")


def test_criterion_05_microreversibility(acceptance):
    rng = np.random.default_rng(7)
    n = 60
    worst = max(
        dynamics.microreversibility_check(p, FieldSchedule(p.h1, p.h2, tau)).max_deviation
        for p, tau in (verify.random_params(rng) for _ in range(n))
    )
    assert acceptance(5, "symmetry", worst < 1e-8, f"{n} sets: max deviation={worst:.2e}")


def _all_sweeps():
    # every map evaluated by the topology criteria
    yield analysis.sweep_regimes(WEAK, 1.0, DEFAULT_GRID, DEFAULT_GRID, workers=WORKERS)
    yield analysis.sweep_regimes(WEAK, 0.97, DEFAULT_GRID, DEFAULT_GRID, workers=WORKERS)
    yield analysis.sweep_regimes(WEAK, 0.93, DEFAULT_GRID, DEFAULT_GRID, workers=WORKERS)
    for P in (1.0, 0.95):
        yield analysis.sweep_regimes(STRONG, P, WIDE_GRID, WIDE_GRID, workers=WORKERS)
    for jy in (1.0, 1.4, 1.5, 1.6, 1.7, 2.0, 2.6):
        yield analysis.sweep_regimes(ModelParams(10.0, jy, 4.0, 1.0), 1.0, WIDE_GRID, WIDE_GRID, workers=WORKERS)
    yield analysis.sweep_regimes(ModelParams(1e-9, 1e-9, 4.0, 1.0), 1.0, DEFAULT_GRID, DEFAULT_GRID)


def test_criterion_06_first_law(acceptance):
    worst = cells = 0
    for rm in _all_sweeps():
        worst = max(worst, float(np.max(np.abs(rm.w_cyc + rm.q1 + rm.q2))))
        cells += rm.codes.size
    assert acceptance(6, "every cell", worst < 1e-10, f"{cells} cells, max residual={worst:.2e}")


def test_criterion_07_weak_topology(acceptance):
    maps = {P: analysis.sweep_regimes(WEAK, P, DEFAULT_GRID, DEFAULT_GRID) for P in (1.0, 0.93)}
    regions = maps[1.0].engine_regions()
    single = len(regions) == 1 and bool(regions[0][:, 0].any())
    lows = {}
    for P, rm in maps.items():
        rows = rm.engine_mask().any(axis=1)
        lows[P] = float(rm.t1_axis[rows].min()) if rows.any() else math.inf
    rises = lows[0.93] > lows[1.0]
    acceptance(7, "P=1 single region at min T2", single, f"{len(regions)} region(s)")
    acceptance(7, "P=0.93 shifts up", rises, f"min T1 {lows[1.0]:.4g} -> {lows[0.93]:.4g}")
    assert single and rises


def test_criterion_08_strong_topology(acceptance):
    rm = analysis.sweep_regimes(STRONG, 1.0, WIDE_GRID, WIDE_GRID, workers=WORKERS)
    reg, ctr = rm.engine_regions("regular"), rm.engine_regions("counter-rotating")
    two = len(rm.engine_regions()) == 2 and len(reg) == 1 and len(ctr) == 1
    col = not rm.engine_mask()[:, 0].any()
    scan = []
    for jy in (1.0, 1.4, 1.5, 1.6, 1.7, 2.0, 2.6):
        p = ModelParams(10.0, jy, 4.0, 1.0)
        m = analysis.sweep_regimes(p, 1.0, WIDE_GRID, WIDE_GRID, workers=WORKERS)
        has = bool(m.engine_mask("counter-rotating").any())
        scan.append((jy, has, analysis.counter_rotating_condition(p)))
    iff = all(h == c for _, h, c in scan)
    acceptance(8, "two disjoint regions", two, f"regular={len(reg)} counter={len(ctr)}")
    acceptance(8, "min-T2 column empty", col, "")
    acceptance(8, "iff JxJy>h1^2", iff, ", ".join(f"Jy={j}:{int(h)}" for j, h, _ in scan))
    assert two and col and iff


def test_criterion_09_temperature_gap(acceptance):
    t0 = time.perf_counter()
    analysis.sweep_regimes(STRONG, 1.0, WIDE_GRID, WIDE_GRID, workers=WORKERS)
    rep = analysis.find_temperature_gap(STRONG, 1.0, WIDE_GRID, WIDE_GRID, P_series=[0.95])
    dt = time.perf_counter() - t0
    (_, w95), = rep.widened_vs_P
    ordered = rep.T1_a < rep.T2_0 < rep.T1_b
    ok = ordered and rep.verified and w95 > rep.width and dt < 120.0
    assert acceptance(9, "gap", ok, f"T1_a={rep.T1_a:.4g} T2_0={rep.T2_0:.4g} T1_b={rep.T1_b:.4g} "
                                    f"width {rep.width:.4g} -> {w95:.4g} at P=0.95, "
                                    f"verified={rep.verified}, {dt:.2f}s")


def _max_eta(params, hot, P, vary):
    eta = analysis.efficiency_curve(params, hot, [P], vary=vary)[float(P)]
    return float(np.nanmax(eta)) if np.isfinite(eta).any() else float("nan")


def test_criterion_10_regular_beyond_otto(acceptance):
    hot = axis(0.2, 10.0, 4000)
    exceed = lambda P: _max_eta(FIG4, hot, P, "T1") > 0.75  # noqa: E731
    lo, hi = 0.999, 1.0
    assert exceed(hi) and not exceed(lo)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if exceed(mid) else (mid, hi)
    ok = exceed(1.0) and 0.9994 <= hi <= 0.9998
    assert acceptance(10, "regular (Jy=0.8)", ok,
                      f"max eta at P=1 {_max_eta(FIG4, hot, 1.0, 'T1'):.4f}; exceedance vanishes at P={hi:.6f}")


def test_criterion_10_counter_rotating_beyond_otto(acceptance):
    # stated with (Jx=10, Jy=1.6, T1=0.05); JxJy equals h1^2 exactly here
    p = FIG5.replace(T1=0.05)
    hot = axis(0.06, 40.0, 4000)
    m1 = _max_eta(p, hot, 1.0, "T2")
    mq = _max_eta(p, hot, 0.932, "T2")
    ok = m1 > 0.75 and not (mq > 0.75)
    assert acceptance(10, "counter-rotating (Jy=1.6)", ok,
                      f"max eta P=1: {m1:.4f}, P=0.932: {mq:.4f} (nan = no engine cell; JxJy = h1^2)")


def test_criterion_11_eta_increasing_in_p(acceptance):
    rng = np.random.default_rng(11)
    n, good = 25, 0
    for _ in range(n):
        *_, eta_hi, eta_lo = verify._engine_point(rng)
        good += eta_hi > eta_lo
    assert acceptance(11, "finite differences", good == n, f"{good}/{n} engine points")


def test_criterion_12_bound_exceeded_by_quench(acceptance):
    rng = np.random.default_rng(12)
    worst, arg, n = math.inf, None, 2000
    for _ in range(n):
        p, _ = verify.random_params(rng)
        gap = model.quench_adiabaticity(p) - model.inversion_bound(p)
        if gap < worst:
            worst, arg = gap, p
    ok = worst > 0
    assert acceptance(12, "P(tau->0) > sqrt bound", ok,
                      f"min margin {worst:.3e} over {n} sets at Jx={arg.Jx:.4g} Jy={arg.Jy:.4g} "
                      f"h1={arg.h1:.4g} h2={arg.h2:.4g}")


def test_criterion_12_expansion_work_negative(acceptance):
    rng = np.random.default_rng(120)
    n, bad = 2000, 0
    for _ in range(n):
        p, _ = verify.random_params(rng)
        q = model.quench_adiabaticity(p)
        for P in (q, q + rng.uniform() * (1 - q), 1.0):
            bad += cycle.stroke_energetics(p, float(P)).W21 >= 0
    assert acceptance(12, "W21 < 0 for P >= P(tau->0)", bad == 0, f"{bad} violations over {3 * n} points")


def test_criterion_13_uncoupled_limit(acceptance):
    p = ModelParams(1e-9, 1e-9, 4.0, 1.0)
    rm = analysis.sweep_regimes(p, 1.0, DEFAULT_GRID, DEFAULT_GRID)
    T1, T2 = np.meshgrid(DEFAULT_GRID, DEFAULT_GRID, indexing="ij")
    r = p.h1 / p.h2
    zone = np.select([T1 > r * T2, T1 > T2, T1 < T2],
                     [Regime.ENGINE, Regime.REFRIGERATOR, Regime.ACCELERATOR], Regime.DEGENERATE)
    bad = np.argwhere(rm.codes != zone)
    # every mismatch must have a boundary line crossing its one-cell neighbourhood
    n = len(DEFAULT_GRID)
    far = 0
    for i, j in bad:
        near = {zone[a, b] for a in range(max(i - 1, 0), min(i + 2, n)) for b in range(max(j - 1, 0), min(j + 2, n))}
        far += len(near) == 1
    assert acceptance(13, "analytic zones", far == 0, f"{len(bad)} boundary mismatches, {far} away from boundaries")


def test_criterion_14_g_suite(acceptance):
    checks = verify.g_suite(np.random.default_rng(14), 10_000)
    ok = len(checks) == 7 and all(c.passed for c in checks)
    assert acceptance(14, "seven properties", ok, ", ".join(f"{c.name}={'ok' if c.passed else 'FAIL'}" for c in checks))
