"""Four-stroke Otto cycle: corner energies, work/heat splits and regimes.

Closed forms are written for numpy broadcasting so that regime maps can be
evaluated on whole temperature grids at once.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import FieldSchedule, adiabaticity, schrodinger_oracle
from .model import ModelParams, g_complement, hamiltonian_matrix, work_function

__all__ = [
    "Regime",
    "StrokeEnergetics",
    "CycleOutcome",
    "ConsistencyError",
    "energetics_arrays",
    "corner_energies",
    "stroke_energetics",
    "sign_tolerance",
    "regime_codes",
    "regime_codes_from",
    "SIGN_RTOL",
    "classify",
    "efficiency",
    "run_cycle",
    "oracle_energetics",
    "energetics_deviation",
    "ORACLE_RTOL",
]


class Regime(enum.IntEnum):
    DEGENERATE = 0
    ENGINE = 1
    REFRIGERATOR = 2
    ACCELERATOR = 3
    HEATER = 4

    @property
    def label(self) -> str:
        return self.name.lower()


class ConsistencyError(RuntimeError):
    """Closed-form energetics disagree with the density-matrix propagation."""


def _gibbs_shifted(energies: np.ndarray, beta) -> np.ndarray:
    """Populations along the last axis of ``energies`` (broadcast against beta)."""
    e = np.asarray(energies, dtype=float)
    beta = np.asarray(beta, dtype=float)[..., None]
    w = np.exp(-beta * (e - e.min(axis=-1, keepdims=True)))
    return w / w.sum(axis=-1, keepdims=True)


SIGN_RTOL = 1e-12


def energetics_arrays(Jx, Jy, h1, h2, T1, T2, P) -> dict:
    """All cycle energetics, broadcasting over ``T1``, ``T2`` and ``P``.

    ``W_cyc``, ``Q1`` and ``Q2`` come from the split formulas written without
    cancellation: when both work functions are close to 1 their difference is
    taken between the complements ``1 - f``.  ``tol_*`` is ``SIGN_RTOL`` times
    the magnitude of the terms each quantity is summed from, so a sign is only
    trusted when it is clear of roundoff.  ``Q1_corner``/``Q2_corner`` are the
    corner-energy differences, kept as an independent first-law check.
    """
    T1, T2, P = np.broadcast_arrays(
        np.asarray(T1, float), np.asarray(T2, float), np.asarray(P, float)
    )
    d = Jx - Jy
    e3 = Jx + Jy
    a = math.hypot(2.0 * h1, d)
    b = math.hypot(2.0 * h2, d)
    beta1 = 1.0 / T1
    beta2 = 1.0 / T2
    lv1 = np.array([-a, -e3, e3, a])
    lv2 = np.array([-b, -e3, e3, b])
    p1 = _gibbs_shifted(lv1, beta1)
    p2 = _gibbs_shifted(lv2, beta2)
    f1 = work_function(beta1, a, e3)
    f2 = work_function(beta2, b, e3)
    c1 = g_complement(beta1 * a, e3 / a)
    c2 = g_complement(beta2 * b, e3 / b)
    q = 1.0 - P

    E1 = p1 @ lv1
    E3 = p2 @ lv2
    # doubly stochastic transfer within the working pair, idle levels untouched
    E2 = (
        -b * (P * p1[..., 0] + q * p1[..., 3])
        + b * (q * p1[..., 0] + P * p1[..., 3])
        - e3 * p1[..., 1]
        + e3 * p1[..., 2]
    )
    E4 = (
        -a * (P * p2[..., 0] + q * p2[..., 3])
        + a * (q * p2[..., 0] + P * p2[..., 3])
        - e3 * p2[..., 1]
        + e3 * p2[..., 2]
    )
    W12_ad = f1 * (a - b)
    W12_na = 2.0 * q * f1 * b
    W21_ad = f2 * (b - a)
    W21_na = 2.0 * q * f2 * a

    near_one = (f1 > 0.5) & (f2 > 0.5)
    df = np.where(near_one, c2 - c1, f1 - f2)
    sf = np.where(near_one, np.maximum(c1, c2), np.maximum(f1, f2))
    idle = (p1[..., 2] - p2[..., 2]) - (p1[..., 1] - p2[..., 1])
    idle_scale = e3 * (p1[..., 1] + p2[..., 1] + p1[..., 2] + p2[..., 2])

    W_cyc = df * (a - b) + W12_na + W21_na
    Q1_ad = idle * e3 - df * a
    Q2_ad = -idle * e3 + df * b
    return dict(
        E1=E1, E2=E2, E3=E3, E4=E4,
        f1=f1, f2=f2,
        W12_ad=W12_ad, W12_na=W12_na, W21_ad=W21_ad, W21_na=W21_na,
        W12=W12_ad + W12_na, W21=W21_ad + W21_na, W_cyc=W_cyc,
        Q1=Q1_ad - W21_na, Q2=Q2_ad - W12_na,
        Q1_ad=Q1_ad, Q2_ad=Q2_ad, Q1_na=-W21_na, Q2_na=-W12_na,
        Q1_corner=E1 - E4, Q2_corner=E3 - E2,
        tol_W=SIGN_RTOL * (sf * (a - b) + W12_na + W21_na),
        tol_Q1=SIGN_RTOL * (idle_scale + sf * a + W21_na),
        tol_Q2=SIGN_RTOL * (idle_scale + sf * b + W12_na),
    )


def regime_codes_from(r: dict, T1, T2) -> np.ndarray:
    """Regimes for an ``energetics_arrays`` result with its own tolerances."""
    return regime_codes(r["W_cyc"], r["Q1"], r["Q2"], T1, T2, (r["tol_W"], r["tol_Q1"], r["tol_Q2"]))


@dataclass(frozen=True)
class StrokeEnergetics:
    W12_ad: float
    W12_na: float
    W21_ad: float
    W21_na: float
    Q1: float
    Q2: float
    Q1_ad: float
    Q1_na: float
    Q2_ad: float
    Q2_na: float
    E1: float
    E2: float
    E3: float
    E4: float
    f1: float
    f2: float
    tol_W: float = 0.0
    tol_Q1: float = 0.0
    tol_Q2: float = 0.0

    @property
    def W12(self) -> float:
        return self.W12_ad + self.W12_na

    @property
    def W21(self) -> float:
        return self.W21_ad + self.W21_na

    @property
    def W_cyc(self) -> float:
        return self.W12 + self.W21

    @property
    def first_law_residual(self) -> float:
        """``W_cyc`` against the heats read off the corner energies."""
        return self.W_cyc + (self.E1 - self.E4) + (self.E3 - self.E2)


def _check_p(P: float) -> None:
    if not 0.0 <= P <= 1.0:
        raise ValueError(f"adiabaticity P must lie in [0, 1], got {P}")


def corner_energies(params: ModelParams, P: float) -> tuple[float, float, float, float]:
    _check_p(P)
    r = energetics_arrays(params.Jx, params.Jy, params.h1, params.h2, params.T1, params.T2, P)
    return tuple(float(r[k]) for k in ("E1", "E2", "E3", "E4"))


def stroke_energetics(params: ModelParams, P: float) -> StrokeEnergetics:
    _check_p(P)
    r = energetics_arrays(params.Jx, params.Jy, params.h1, params.h2, params.T1, params.T2, P)
    return StrokeEnergetics(**{k: float(r[k]) for k in StrokeEnergetics.__dataclass_fields__})


def sign_tolerance(params: ModelParams) -> float:
    """Fixed-scale tolerance for callers that only have bare W, Q1, Q2 values."""
    return SIGN_RTOL * max(params.e4_1, 1.0)


def _sign(x, tol):
    return np.where(x > tol, 1, np.where(x < -tol, -1, 0))


def regime_codes(W, Q1, Q2, T1, T2, tol) -> np.ndarray:
    """Vectorised sign table.

    ``tol`` is one tolerance or a ``(tol_W, tol_Q1, tol_Q2)`` triple, each
    broadcastable.  Any quantity within its tolerance of zero, equal
    temperatures, or a sign combination not in the table gives
    ``Regime.DEGENERATE``.
    """
    tw, t1, t2 = tol if isinstance(tol, tuple) else (tol, tol, tol)
    W, Q1, Q2, T1, T2 = np.broadcast_arrays(*(np.asarray(v, float) for v in (W, Q1, Q2, T1, T2)))
    sw = _sign(W, tw)
    s1 = _sign(Q1, t1)
    s2 = _sign(Q2, t2)
    # orient heats as (hot, cold)
    regular = T1 > T2
    sh = np.where(regular, s1, s2)
    sc = np.where(regular, s2, s1)
    out = np.full(W.shape, Regime.DEGENERATE, dtype=np.int8)
    valid = (T1 != T2) & (sw != 0) & (sh != 0) & (sc != 0)
    out[valid & (sh > 0) & (sc < 0) & (sw < 0)] = Regime.ENGINE
    out[valid & (sh < 0) & (sc > 0) & (sw > 0)] = Regime.REFRIGERATOR
    out[valid & (sh > 0) & (sc < 0) & (sw > 0)] = Regime.ACCELERATOR
    out[valid & (sh < 0) & (sc < 0) & (sw > 0)] = Regime.HEATER
    return out


@dataclass(frozen=True)
class CycleOutcome:
    energetics: StrokeEnergetics
    P: float
    regime: Regime
    rotation: str
    efficiency: float | None
    oracle_deviation: float | None = None

    @property
    def W_cyc(self) -> float:
        return self.energetics.W_cyc

    @property
    def label(self) -> str:
        if self.regime is Regime.ENGINE:
            return f"engine-{self.rotation}"
        return self.regime.label


def efficiency(regime: Regime, W_cyc: float, Q1: float, Q2: float, T1: float, T2: float):
    """``-W / Q_hot`` for engines, ``None`` otherwise."""
    if regime != Regime.ENGINE:
        return None
    q_hot = Q1 if T1 > T2 else Q2
    return -W_cyc / q_hot


def classify(params: ModelParams, e: StrokeEnergetics, P: float = float("nan")) -> CycleOutcome:
    code = Regime(int(regime_codes(e.W_cyc, e.Q1, e.Q2, params.T1, params.T2, (e.tol_W, e.tol_Q1, e.tol_Q2))))
    rotation = "regular" if params.T1 > params.T2 else "counter-rotating"
    eta = efficiency(code, e.W_cyc, e.Q1, e.Q2, params.T1, params.T2)
    return CycleOutcome(e, P, code, rotation, eta)


def _thermal_state(H: np.ndarray, beta: float) -> np.ndarray:
    w, v = np.linalg.eigh(H)
    p = np.exp(-beta * (w - w.min()))
    p /= p.sum()
    return (v * p) @ v.conj().T


def oracle_energetics(params: ModelParams, s: FieldSchedule, **kw) -> dict:
    """Propagate density matrices through all four strokes.

    Uses the stepped propagator for both unitary strokes and exact Gibbs
    states for the thermalisations; no closed forms are involved.
    """
    fwd = schrodinger_oracle(params, s, "forward", **kw)
    rev = schrodinger_oracle(params, s, "reversed", **kw)
    H1 = hamiltonian_matrix(params.Jx, params.Jy, params.h1)
    H2 = hamiltonian_matrix(params.Jx, params.Jy, params.h2)
    rho1 = _thermal_state(H1, params.beta1)
    rho2 = fwd.U @ rho1 @ fwd.U.conj().T
    rho3 = _thermal_state(H2, params.beta2)
    rho4 = rev.U @ rho3 @ rev.U.conj().T
    E = [float(np.trace(r @ H).real) for r, H in ((rho1, H1), (rho2, H2), (rho3, H2), (rho4, H1))]
    E1, E2, E3, E4 = E
    return dict(
        E1=E1, E2=E2, E3=E3, E4=E4,
        W12=E2 - E1, W21=E4 - E3, W_cyc=E2 - E1 + E4 - E3,
        Q1=E1 - E4, Q2=E3 - E2, P=fwd.P, P_reversed=rev.probabilities[0, 0],
    )


ORACLE_RTOL = 1e-8


def energetics_deviation(params: ModelParams, closed: StrokeEnergetics, oracle: dict) -> float:
    """Largest gap over corner energies, works and heats, in units of ``max(e4(h1), 1)``."""
    scale = max(params.e4_1, 1.0)
    pairs = (
        (closed.E1, oracle["E1"]), (closed.E2, oracle["E2"]),
        (closed.E3, oracle["E3"]), (closed.E4, oracle["E4"]),
        (closed.W12, oracle["W12"]), (closed.W21, oracle["W21"]),
        (closed.Q1, oracle["Q1"]), (closed.Q2, oracle["Q2"]),
    )
    return max(abs(a - b) for a, b in pairs) / scale


def run_cycle(
    params: ModelParams,
    schedule: FieldSchedule | None = None,
    P: float | None = None,
    *,
    check: bool = True,
) -> CycleOutcome:
    """End-to-end cycle from either a field schedule or an explicit ``P``.

    With a schedule, ``P`` comes from the amplitude ODE and (if ``check``)
    the closed forms are compared against the density-matrix propagation.
    """
    if (schedule is None) == (P is None):
        raise ValueError("give exactly one of schedule or P")
    deviation = None
    if schedule is not None:
        P = adiabaticity(params, schedule)
    e = stroke_energetics(params, P)
    if schedule is not None and check:
        deviation = energetics_deviation(params, e, oracle_energetics(params, schedule))
        if deviation > ORACLE_RTOL:
            raise ConsistencyError(
                f"closed-form energetics deviate from the propagated cycle by {deviation:.3e}"
            )
    out = classify(params, e, P)
    return CycleOutcome(out.energetics, P, out.regime, out.rotation, out.efficiency, deviation)
