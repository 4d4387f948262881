"""Randomised invariant suites for every module.

Each suite takes a ``numpy.random.Generator`` and returns a list of
:class:`Check`.  The same generator seed always yields the same report.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import analysis, cycle, dynamics, model
from .model import ModelParams, g, g_complement, log_g, log_g_complement

__all__ = [
    "Check",
    "random_params",
    "g_less",
    "g_derivative_sign",
    "g_suite",
    "model_suite",
    "dynamics_suite",
    "cycle_suite",
    "analysis_suite",
    "run_all",
]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _check(name, ok, detail) -> Check:
    return Check(name, bool(ok), detail)


def random_params(rng: np.random.Generator, *, tau_range=(1e-3, 20.0)) -> tuple[ModelParams, float]:
    """A valid parameter set plus a log-uniform stroke duration."""
    h1 = rng.uniform(0.5, 6.0)
    h2 = h1 * rng.uniform(0.05, 0.9)
    Jx, Jy = rng.uniform(0.0, 12.0, 2)
    T1, T2 = np.exp(rng.uniform(np.log(0.05), np.log(20.0), 2))
    tau = float(np.exp(rng.uniform(*np.log(tau_range))))
    return ModelParams(float(Jx), float(Jy), float(h1), float(h2), float(T1), float(T2), tau), tau


# -- g function ---------------------------------------------------------------


def g_less(x1, y1, x2, y2):
    """Elementwise ``g(x1, y1) < g(x2, y2)`` resolved beyond double rounding.

    Near 1 the complements are compared, elsewhere the logarithms, so values
    that round to 1.0 or underflow to 0.0 are still ordered.
    """
    hi = (g(x1, y1) > 0.5) & (g(x2, y2) > 0.5)
    return np.where(
        hi,
        log_g_complement(x1, y1) > log_g_complement(x2, y2),
        log_g(x1, y1) < log_g(x2, y2),
    )


def g_derivative_sign(x, y):
    """Sign of ``dg/dx``.

    The numerator of the derivative, rescaled by ``exp(-x(1+y))``, is
    ``(1+a)(1+b) - y(1-a)(1-b) + 4 exp(-x(1+y))`` with ``a = exp(-2x)`` and
    ``b = exp(-2xy)``; every term stays finite for large ``x``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = np.exp(-2.0 * x)
    b = np.exp(-2.0 * x * y)
    return np.sign((1 + a) * (1 + b) - y * (1 - a) * (1 - b) + 4.0 * np.exp(-x * (1 + y)))


def g_suite(rng: np.random.Generator, n: int = 10_000) -> list[Check]:
    """The seven listed properties of ``g`` on ``n`` draws of ``(x, y, r)``."""
    # half-open (0, 50] x (0, 5], r in (1, 5]
    x = 50.0 * (1.0 - rng.random(n))
    y = 5.0 * (1.0 - rng.random(n))
    r = 1.0 + 4.0 * (1.0 - rng.random(n))
    out = []

    G = g(x, y)
    ok = np.all(G >= 0) & np.all(g_complement(x, y) > 0)
    out.append(_check("g.bounds", ok, f"0 <= g < 1 on {n} draws"))

    zero = np.all(g(np.zeros(n), y) == 0.0)
    pos = np.all(np.isfinite(log_g(x, y)))
    out.append(_check("g.zero_iff_x_zero", zero and pos, "g(0, y) = 0 and log g(x>0, y) finite"))

    weak = y < 1
    strong = y > 1
    gap = np.abs(1.0 - y)
    X = 60.0 + 60.0 / gap
    lim_ok = (
        np.all(log_g_complement(X[weak], y[weak]) < -25)
        and np.all(log_g(X[strong], y[strong]) < -25)
        and np.all(np.abs(g(x + 40.0, 1.0) - 0.5) < 1e-15)
    )
    # monotone approach for y <= 1: g increases along x, 2x, 4x, ...
    ladder = x[weak][:, None] * 2.0 ** np.arange(6)
    mono = np.all(g_less(ladder[:, :-1], y[weak][:, None], ladder[:, 1:], y[weak][:, None]))
    out.append(_check("g.limits", lim_ok and mono, "limits 1, 1/2, 0 reached; monotone for y <= 1"))

    dx = 1e-6 * np.maximum(x, 1.0)
    fd_x = g_less(x[~strong], y[~strong], x[~strong] + dx[~strong], y[~strong])
    out.append(_check("g.increasing_in_x", np.all(fd_x), f"{fd_x.mean():.4f} of {fd_x.size} y<=1 draws"))

    ys = y[strong]
    top = np.maximum(50.0, 50.0 / (ys - 1.0))
    grid = np.exp(np.linspace(np.log(1e-3), np.log(top), 800).T)
    changes = (np.diff(g_derivative_sign(grid, ys[:, None]), axis=1) != 0).sum(axis=1)
    out.append(_check(
        "g.single_maximum", np.all(changes == 1),
        f"exactly one stationary point on {int(np.sum(changes == 1))}/{ys.size} y>1 draws",
    ))

    fd_y = g_less(x, y + 1e-6, x, y)
    out.append(_check("g.decreasing_in_y", np.all(fd_y), f"{fd_y.mean():.4f} of {n} draws"))

    sc = g_less(x, r * y, r * x, y)
    out.append(_check("g.scaling", np.all(sc), f"g(rx, y) > g(x, ry) on {sc.mean():.4f} of {n} draws"))
    return out


# -- model ----------------------------------------------------------------------


def model_suite(rng: np.random.Generator, n: int = 200) -> list[Check]:
    worst_spec = worst_pop = worst_wf = 0.0
    quench_ok = cp_ok = cr_ok = True
    for _ in range(n):
        p, _ = random_params(rng)
        h = float(rng.uniform(p.h2, p.h1))
        spec = model.spectrum(p, h)
        num = np.linalg.eigvalsh(model.hamiltonian_matrix(p.Jx, p.Jy, h))
        worst_spec = max(worst_spec, float(np.max(np.abs(np.sort(spec.as_array()) - num))))
        beta = p.beta1
        pops = model.thermal_populations(spec, beta)
        worst_pop = max(worst_pop, abs(pops.as_array().sum() - 1.0))
        e4 = spec.eps4
        f = model.work_function(beta, e4, p.e3)
        gv = g(beta * e4, p.e3 / e4) if e4 > 0 else 0.0
        worst_wf = max(worst_wf, abs(f - gv) / max(abs(f), 1e-300), abs(f - (pops.p1 - pops.p4)))
        quench_ok &= model.quench_adiabaticity(p) > model.p_min(p)
        Ps = np.linspace(0.5, 1.0, 101)
        cp_ok &= bool(np.all(np.diff(model.c_of_p(p, Ps)) > 0))
        cr_ok &= analysis.counter_rotating_condition(p) == (p.e3 / p.e4_1 > 1.0)
    return [
        _check("model.spectrum_matches_numeric", worst_spec < 1e-10, f"max |dE| = {worst_spec:.2e}"),
        _check("model.populations_normalised", worst_pop < 1e-14, f"max |sum - 1| = {worst_pop:.2e}"),
        _check("model.work_function_is_g", worst_wf < 1e-12, f"max rel gap = {worst_wf:.2e}"),
        _check("model.quench_above_p_min", quench_ok, f"{n} draws"),
        _check("model.c_of_p_increasing", cp_ok, f"{n} draws, 101-point P grid"),
        _check("model.strong_coupling_equivalence", cr_ok, "Jx Jy > h1^2 iff e3/e4(h1) > 1"),
    ]


# -- dynamics -------------------------------------------------------------------


def dynamics_suite(rng: np.random.Generator, n: int = 50) -> list[Check]:
    worst_p = worst_mr = worst_norm = 0.0
    kinds = ("sqrt-linear", "linear-h")
    for i in range(n):
        p, tau = random_params(rng)
        s = dynamics.FieldSchedule(p.h1, p.h2, tau, kinds[i % 2])
        st = dynamics.integrate_amplitudes(p, s)
        mr = dynamics.microreversibility_check(p, s)
        worst_p = max(worst_p, abs(st.p1 - mr.forward.P))
        worst_mr = max(worst_mr, mr.max_deviation)
        worst_norm = max(worst_norm, st.norm_defect)
    return [
        _check("dynamics.ode_matches_propagator", worst_p < 1e-6, f"max |P_ode - P_oracle| = {worst_p:.2e} over {n} sets"),
        _check("dynamics.microreversibility", worst_mr < 1e-8, f"max deviation = {worst_mr:.2e} over {n} sets"),
        _check("dynamics.norm_conserved", worst_norm < 1e-8, f"max | |c1|^2+|c4|^2 - 1 | = {worst_norm:.2e}"),
    ]


# -- cycle ----------------------------------------------------------------------


def cycle_suite(rng: np.random.Generator, n: int = 50, n_closed: int = 2000) -> list[Check]:
    worst_oracle = 0.0
    for i in range(n):
        p, tau = random_params(rng)
        s = dynamics.FieldSchedule(p.h1, p.h2, tau, "sqrt-linear")
        out = cycle.run_cycle(p, s, check=False)
        worst_oracle = max(worst_oracle, cycle.energetics_deviation(p, out.energetics, cycle.oracle_energetics(p, s)))
    worst_fl = 0.0
    above_pmin = bound_w21 = quench_w21 = cond_ok = True
    for _ in range(n_closed):
        p, _ = random_params(rng)
        P = float(rng.uniform(0.0, 1.0))
        e = cycle.stroke_energetics(p, P)
        worst_fl = max(worst_fl, abs(e.first_law_residual))
        # engine condition f1 < c(P) f2, only meaningful away from the sign tolerance
        if abs(e.W_cyc) > 1e-9 * max(p.e4_1, 1.0) and P > 0.5:
            cond_ok &= (e.W_cyc < 0) == (e.f1 < model.c_of_p(p, P) * e.f2)
        # W21 changes sign exactly at P_min; the printed sqrt bound lies above it
        q = model.quench_adiabaticity(p)
        above_pmin &= q > model.p_min(p)
        Pb = float(rng.uniform(model.inversion_bound(p), 1.0))
        bound_w21 &= cycle.stroke_energetics(p, Pb).W21 < 0
        Pq = float(rng.uniform(q, 1.0))
        quench_w21 &= cycle.stroke_energetics(p, Pq).W21 < 0
    return [
        _check("cycle.closed_form_matches_propagation", worst_oracle < cycle.ORACLE_RTOL,
               f"max scaled gap = {worst_oracle:.2e} over {n} sets"),
        _check("cycle.first_law", worst_fl < 1e-10, f"max |W + Q1 + Q2| (corner heats) = {worst_fl:.2e} over {n_closed} sets"),
        _check("cycle.engine_condition", cond_ok, f"W_cyc < 0 iff f1 < c(P) f2, {n_closed} sets"),
        _check("cycle.no_inversion_above_bound", bound_w21, f"W21 < 0 for P above the sqrt bound, {n_closed} sets"),
        _check("cycle.quench_above_p_min", above_pmin, f"P(tau->0) > P_min, {n_closed} sets"),
        _check("cycle.expansion_work_extracted", quench_w21, f"W21 < 0 for P >= P(tau->0), {n_closed} sets"),
    ]


# -- analysis -------------------------------------------------------------------


def _engine_point(rng):
    """Random regular-engine point with a working margin below ``P``."""
    while True:
        p, _ = random_params(rng)
        P = float(rng.uniform(max(model.quench_adiabaticity(p), 0.9), 1.0))
        out = cycle.classify(p, cycle.stroke_energetics(p, P), P)
        dP = 1e-6
        if out.regime is cycle.Regime.ENGINE and P - dP > 0.5:
            low = cycle.classify(p, cycle.stroke_energetics(p, P - dP), P - dP)
            if low.regime is cycle.Regime.ENGINE:
                return p, P, dP, out.efficiency, low.efficiency


def analysis_suite(rng: np.random.Generator, n: int = 20) -> list[Check]:
    mono = []
    for _ in range(n):
        _, _, _, eta_hi, eta_lo = _engine_point(rng)
        mono.append(eta_hi > eta_lo)
    weak = ModelParams(0.01, 0.8, 4.0, 1.0)
    axis = analysis.axis(0.01, 6.0, 61)
    regions = analysis.high_efficiency_region(weak, [1.0, 0.99995, 0.9998], axis, axis)
    keys = sorted(regions, reverse=True)
    nested = all(not np.any(regions[b] & ~regions[a]) for a, b in zip(keys, keys[1:]))
    thr = [analysis.find_threshold_T1(ModelParams(0.01, 2.0, 4.0, 1.0), P) for P in (1.0, 0.99, 0.97, 0.93)]
    return [
        _check("analysis.efficiency_increasing_in_P", all(mono), f"{sum(mono)}/{n} engine points"),
        _check("analysis.high_efficiency_nested", nested, f"regions nested over P = {keys}"),
        _check("analysis.threshold_rises_as_P_drops", all(np.diff(thr) > 0),
               "T1_0 = " + ", ".join(f"{t:.4g}" for t in thr)),
    ]


def run_all(seed: int = 0, *, n_random: int = 50, n_g: int = 10_000) -> list[Check]:
    """All suites, each fed from its own child stream of ``seed``."""
    streams = np.random.SeedSequence(seed).spawn(5)
    gen = [np.random.default_rng(s) for s in streams]
    return (
        g_suite(gen[0], n_g)
        + model_suite(gen[1])
        + dynamics_suite(gen[2], n_random)
        + cycle_suite(gen[3], n_random)
        + analysis_suite(gen[4])
    )
