"""Parameter-space studies over bath temperatures, adiabaticity and stroke time."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, optimize

from .cycle import Regime, energetics_arrays, regime_codes, regime_codes_from
from .dynamics import FieldSchedule, IntegrationError, adiabaticity
from .model import ModelParams, c_of_p, g, p_min

__all__ = [
    "RegimeMap",
    "GapReport",
    "GapNotFound",
    "BracketError",
    "counter_rotating_condition",
    "sweep_regimes",
    "adiabaticity_curve",
    "efficiency_curve",
    "find_threshold_T1",
    "find_temperature_gap",
    "high_efficiency_region",
    "axis",
]

ETA_OTTO_TOL = 0.0
ROOT_RTOL = 1e-8
MAX_DOUBLINGS = 60


class BracketError(RuntimeError):
    pass


class GapNotFound(RuntimeError):
    pass


def axis(lo: float, hi: float, count: int, scale: str = "linear") -> np.ndarray:
    if count < 2 or not lo < hi:
        raise ValueError("axis needs count >= 2 and min < max")
    if scale == "log":
        if lo <= 0:
            raise ValueError("log axis needs min > 0")
        return np.geomspace(lo, hi, count)
    if scale != "linear":
        raise ValueError(f"unknown axis scale {scale!r}")
    return np.linspace(lo, hi, count)


def counter_rotating_condition(params: ModelParams) -> bool:
    """Strong coupling ``Jx Jy > h1**2``: counter-rotating engines exist."""
    return params.Jx * params.Jy > params.h1 ** 2


# -- regime maps -------------------------------------------------------------


@dataclass
class RegimeMap:
    """Regimes on a ``len(t1_axis) x len(t2_axis)`` grid (index ``[i, j]``)."""

    t1_axis: np.ndarray
    t2_axis: np.ndarray
    codes: np.ndarray
    w_cyc: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    eta: np.ndarray
    params: ModelParams
    P: float
    first_law_max: float

    def labels(self) -> np.ndarray:
        names = np.array([r.label for r in Regime])
        out = names[self.codes].astype(object)
        eng = self.codes == Regime.ENGINE
        regular = self.t1_axis[:, None] > self.t2_axis[None, :]
        out[eng & regular] = "engine-regular"
        out[eng & ~regular] = "engine-counter-rotating"
        return out

    def engine_mask(self, rotation: str | None = None) -> np.ndarray:
        mask = self.codes == Regime.ENGINE
        regular = self.t1_axis[:, None] > self.t2_axis[None, :]
        if rotation == "regular":
            mask &= regular
        elif rotation == "counter-rotating":
            mask &= ~regular
        elif rotation is not None:
            raise ValueError("rotation must be 'regular', 'counter-rotating' or None")
        return mask

    def engine_regions(self, rotation: str | None = None) -> list[np.ndarray]:
        """Edge-connected components of engine cells, largest first."""
        lab, n = ndimage.label(self.engine_mask(rotation))
        regions = [lab == k for k in range(1, n + 1)]
        return sorted(regions, key=lambda m: -int(m.sum()))

    def records(self):
        labels = self.labels()
        for i, t1 in enumerate(self.t1_axis):
            for j, t2 in enumerate(self.t2_axis):
                yield dict(
                    t1=float(t1), t2=float(t2), regime=labels[i, j],
                    w_cyc=float(self.w_cyc[i, j]), q1=float(self.q1[i, j]),
                    q2=float(self.q2[i, j]), eta=float(self.eta[i, j]),
                )


def _energetics_block(args):
    Jx, Jy, h1, h2, t1, t2, P = args
    r = energetics_arrays(Jx, Jy, h1, h2, t1[:, None], t2[None, :], P)
    return tuple(r[k] for k in _BLOCK_KEYS)


_BLOCK_KEYS = ("W_cyc", "Q1", "Q2", "tol_W", "tol_Q1", "tol_Q2", "Q1_corner", "Q2_corner")


def _grid_energetics(params, P, t1_axis, t2_axis, workers):
    base = (params.Jx, params.Jy, params.h1, params.h2)
    if workers <= 1 or len(t1_axis) < 2 * workers:
        return _energetics_block(base + (t1_axis, t2_axis, P))
    chunks = np.array_split(t1_axis, workers)
    with ProcessPoolExecutor(workers) as pool:
        parts = list(pool.map(_energetics_block, [base + (c, t2_axis, P) for c in chunks]))
    return tuple(np.concatenate([p[k] for p in parts], axis=0) for k in range(len(_BLOCK_KEYS)))


def sweep_regimes(
    params: ModelParams,
    P: float,
    t1_axis,
    t2_axis,
    *,
    workers: int = 1,
) -> RegimeMap:
    """Classify every ``(T1, T2)`` cell; the temperatures in ``params`` are ignored."""
    t1 = np.asarray(t1_axis, dtype=float)
    t2 = np.asarray(t2_axis, dtype=float)
    if np.any(t1 <= 0) or np.any(t2 <= 0):
        raise ValueError("temperature grids must be positive")
    W, Q1, Q2, tW, tQ1, tQ2, C1, C2 = _grid_energetics(params, P, t1, t2, workers)
    T1g, T2g = np.meshgrid(t1, t2, indexing="ij")
    codes = regime_codes(W, Q1, Q2, T1g, T2g, (tW, tQ1, tQ2))
    q_hot = np.where(T1g > T2g, Q1, Q2)
    eta = np.where(codes == Regime.ENGINE, -W / np.where(q_hot == 0, np.nan, q_hot), np.nan)
    residual = float(np.max(np.abs(W + C1 + C2)))
    return RegimeMap(t1, t2, codes, W, Q1, Q2, eta, params, float(P), residual)


# -- adiabaticity and efficiency curves -----------------------------------------


def _p_point(args):
    params, tau, kind = args
    try:
        return tau, adiabaticity(params, FieldSchedule(params.h1, params.h2, tau, kind)), None
    except IntegrationError as exc:
        return tau, float("nan"), str(exc)


def adiabaticity_curve(
    params: ModelParams, taus, kind: str = "sqrt-linear", *, workers: int = 1
) -> list[tuple[float, float, str | None]]:
    """``(tau, P, error)`` per stroke duration; failures are reported per point."""
    jobs = [(params, float(t), kind) for t in taus]
    if any(t <= 0 for _, t, _ in jobs):
        raise ValueError("stroke durations must be positive")
    if workers <= 1:
        return [_p_point(j) for j in jobs]
    with ProcessPoolExecutor(workers) as pool:
        return list(pool.map(_p_point, jobs))


def efficiency_curve(params: ModelParams, hot_axis, P_list, vary: str = "T1") -> dict:
    """Efficiency against the hot-bath temperature for each ``P``.

    ``vary="T1"`` scans ``T1`` with ``params.T2`` as the cold bath (regular
    engine); ``vary="T2"`` scans ``T2`` with ``params.T1`` cold.  Non-engine
    points are NaN.
    """
    hot = np.asarray(hot_axis, dtype=float)
    if vary == "T1":
        T1, T2 = hot, np.full_like(hot, params.T2)
    elif vary == "T2":
        T1, T2 = np.full_like(hot, params.T1), hot
    else:
        raise ValueError("vary must be 'T1' or 'T2'")
    out = {}
    for P in P_list:
        r = energetics_arrays(params.Jx, params.Jy, params.h1, params.h2, T1, T2, P)
        codes = regime_codes_from(r, T1, T2)
        q_hot = np.where(T1 > T2, r["Q1"], r["Q2"])
        out[float(P)] = np.where(codes == Regime.ENGINE, -r["W_cyc"] / q_hot, np.nan)
    return out


def high_efficiency_region(params: ModelParams, P_list, t1_axis, t2_axis, rotation=None) -> dict:
    """Cells whose engine efficiency exceeds ``1 - h2/h1``, per ``P``."""
    eta_otto = 1.0 - params.h2 / params.h1
    out = {}
    for P in P_list:
        rm = sweep_regimes(params, P, t1_axis, t2_axis)
        mask = rm.engine_mask(rotation) & (np.nan_to_num(rm.eta, nan=-1.0) > eta_otto)
        out[float(P)] = mask
    return out


# -- root finding ----------------------------------------------------------------


def _bisect(fn, lo, hi):
    return optimize.bisect(fn, lo, hi, xtol=1e-300, rtol=ROOT_RTOL, maxiter=500)


def _expand_up(pred, start):
    x = start
    for _ in range(MAX_DOUBLINGS):
        if pred(x):
            return x
        x *= 2.0
    raise BracketError(f"no bracket found expanding upward from {start:g} ({MAX_DOUBLINGS} doublings)")


def _expand_down(pred, start):
    x = start
    for _ in range(MAX_DOUBLINGS):
        if pred(x):
            return x
        x /= 2.0
    raise BracketError(f"no bracket found expanding downward from {start:g} ({MAX_DOUBLINGS} halvings)")


def _f1(params: ModelParams, T1):
    a = params.e4_1
    return g(a / T1, params.e3 / a)


def find_threshold_T1(params: ModelParams, P: float) -> float:
    """Lowest ``T1`` admitting an engine as ``T2 -> 0`` (weak coupling).

    Solves ``f1(T1) = c(P)``.  Returns ``0.0`` when every ``T1`` works and
    ``math.inf`` when ``P <= P_min`` (no engine at all).
    """
    if params.e3 > params.e4_1:
        raise ValueError("threshold T1 is defined for weak coupling (Jx Jy <= h1**2) only")
    if P <= p_min(params):
        return math.inf
    c = c_of_p(params, P)
    if c >= 1.0:
        return 0.0
    fn = lambda T: _f1(params, T) - c  # noqa: E731
    scale = params.e4_1
    try:
        lo = _expand_down(lambda T: fn(T) > 0, scale)
    except BracketError:
        return 0.0
    hi = _expand_up(lambda T: fn(T) < 0, max(lo, scale))
    return _bisect(fn, lo, hi)


# -- temperature gap ---------------------------------------------------------------


@dataclass
class GapReport:
    """Temperature gap in ``T1`` at the expansion-work optimum ``T2_0``.

    ``verified`` is a finite certificate: ``W_cyc > 0`` was checked at every
    grid ``T1`` inside the gap against every grid ``T2``.
    """

    T2_0: float
    T1_a: float
    T1_b: float
    P: float
    verified: bool
    cells_checked: int
    widened_vs_P: list[tuple[float, float]] = field(default_factory=list)
    note: str = "gap certificate sampled on the T2 grid only"

    @property
    def width(self) -> float:
        return self.T1_b - self.T1_a


def _expansion_work(params, P, T2):
    r = energetics_arrays(params.Jx, params.Jy, params.h1, params.h2, 1.0, T2, P)
    return r["W21"]


def _w_cyc(params, P, T1, T2):
    return energetics_arrays(params.Jx, params.Jy, params.h1, params.h2, T1, T2, P)["W_cyc"]


def _optimal_t2(params, P, t2_grid):
    w = np.asarray(_expansion_work(params, P, t2_grid))
    i = int(np.argmin(w))
    if i == 0 or i == len(t2_grid) - 1:
        raise GapNotFound(
            f"expansion-work optimum sits on the T2 grid edge (index {i}, "
            f"T2={t2_grid[i]:g}, grid [{t2_grid[0]:g}, {t2_grid[-1]:g}])"
        )
    neg = lambda T: float(_expansion_work(params, P, T))  # noqa: E731
    return float(optimize.golden(neg, brack=(t2_grid[i - 1], t2_grid[i], t2_grid[i + 1]), tol=1e-10))


def find_temperature_gap(
    params: ModelParams,
    P: float,
    t2_grid,
    t1_grid,
    *,
    P_series=(),
) -> GapReport:
    """Locate ``(T1_a, T1_b)`` where no engine runs, for strong coupling."""
    if not counter_rotating_condition(params):
        raise ValueError("temperature gap requires strong coupling (Jx Jy > h1**2)")
    if P <= p_min(params):
        raise ValueError(f"P={P} must exceed P_min={p_min(params):.6g}")
    t1 = np.asarray(t1_grid, dtype=float)
    t2 = np.asarray(t2_grid, dtype=float)
    T2_0 = _optimal_t2(params, P, t2)
    w = lambda T1: float(_w_cyc(params, P, T1, T2_0))  # noqa: E731
    vals = np.asarray(_w_cyc(params, P, t1, T2_0))
    pos = np.flatnonzero(vals > 0)
    if pos.size == 0:
        raise GapNotFound(
            f"W_cyc(T1, T2_0={T2_0:g}) is never positive on the T1 grid "
            f"[{t1[0]:g}, {t1[-1]:g}] ({t1.size} points)"
        )
    i0, i1 = pos[0], pos[-1]
    if np.any(vals[i0 : i1 + 1] <= 0):
        raise GapNotFound("positive W_cyc cells at T2_0 are not contiguous on the T1 grid")
    if i0 == 0:
        lo = _expand_down(lambda T: w(T) < 0, t1[0])
        T1_a = _bisect(w, lo, t1[0])
    else:
        T1_a = _bisect(w, t1[i0 - 1], t1[i0])
    if i1 == t1.size - 1:
        hi = _expand_up(lambda T: w(T) < 0, t1[-1])
        T1_b = _bisect(w, t1[-1], hi)
    else:
        T1_b = _bisect(w, t1[i1], t1[i1 + 1])
    inside = t1[(t1 > T1_a) & (t1 < T1_b)]
    W = np.asarray(_w_cyc(params, P, inside[:, None], t2[None, :]))
    report = GapReport(T2_0, T1_a, T1_b, float(P), bool(np.all(W > 0)), int(W.size))
    for Pk in P_series:
        sub = find_temperature_gap(params, Pk, t2, t1)
        report.widened_vs_P.append((float(Pk), sub.width))
    return report
