"""Unitary strokes: field schedules, the amplitude ODE and a brute-force propagator."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _backend
from .model import ModelParams, hamiltonian_matrix, quench_adiabaticity

__all__ = [
    "SCHEDULE_KINDS",
    "FieldSchedule",
    "AmplitudeState",
    "PropagatorResult",
    "Microreversibility",
    "IntegrationError",
    "OracleError",
    "QUENCH_TAU",
    "schedule_eval",
    "integrate_amplitudes",
    "adiabaticity",
    "schrodinger_oracle",
    "microreversibility_check",
    "endpoint_eigenvectors",
]

# "linear-h2" is the same curve as "sqrt-linear": h(t)**2 interpolates linearly.
SCHEDULE_KINDS = {"sqrt-linear": 0, "linear-h2": 0, "linear-h": 1}

QUENCH_TAU = 1e-6
RTOL = 1e-10
ATOL = 1e-12


class IntegrationError(RuntimeError):
    """The amplitude integrator could not reach the end of the stroke."""


class OracleError(RuntimeError):
    """The stepped propagator lost unitarity or failed to converge."""


@dataclass(frozen=True)
class FieldSchedule:
    """Field protocol ``h(t)`` on ``[0, tau]``.

    The forward stroke runs ``h1 -> h2``; ``reversed=True`` gives
    ``h~(t) = h(tau - t)``.
    """

    h1: float
    h2: float
    tau: float
    kind: str = "sqrt-linear"
    reversed: bool = False

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(
                f"unknown schedule kind {self.kind!r}; expected one of {sorted(SCHEDULE_KINDS)}"
            )
        if not self.tau > 0:
            raise ValueError("tau must be > 0")
        if not (self.h1 > 0 and self.h2 > 0):
            raise ValueError("schedule endpoints must be positive")

    @classmethod
    def from_params(cls, params: ModelParams, kind: str = "sqrt-linear", tau=None):
        return cls(params.h1, params.h2, params.tau if tau is None else tau, kind)

    @property
    def code(self) -> int:
        return SCHEDULE_KINDS[self.kind]

    def reverse(self) -> "FieldSchedule":
        return replace(self, reversed=not self.reversed)

    def field(self, t):
        """Vectorised ``(h, dh/dt)``; ``t`` is clipped to ``[0, tau]``."""
        t = np.asarray(t, dtype=float)
        s = np.clip(t / self.tau, 0.0, 1.0)
        sign = 1.0
        if self.reversed:
            s = 1.0 - s
            sign = -1.0
        h1, h2, tau = self.h1, self.h2, self.tau
        if self.code == 0:
            h = np.sqrt(h1 * h1 + (h2 * h2 - h1 * h1) * s)
            hd = sign * (h2 * h2 - h1 * h1) / (2.0 * tau * h)
        else:
            h = h1 + (h2 - h1) * s
            hd = np.full_like(h, sign * (h2 - h1) / tau)
        return h, hd


def schedule_eval(s: FieldSchedule, t: float) -> tuple[float, float]:
    if not 0.0 <= t <= s.tau:
        raise ValueError(f"t={t} outside [0, {s.tau}]")
    h, hd = s.field(t)
    return float(h), float(hd)


@dataclass(frozen=True)
class AmplitudeState:
    """Amplitudes of the coupled pair at time ``t``.

    ``c2`` and ``c3`` never change and are not stored.  ``theta1`` is the
    accumulated dynamical phase of level 1.
    """

    c1: complex
    c4: complex
    theta1: float
    t: float
    steps: int = 0
    rejected: int = 0
    norm_defect: float = 0.0

    @property
    def p1(self) -> float:
        return abs(self.c1) ** 2

    @property
    def p4(self) -> float:
        return abs(self.c4) ** 2


def _phase_closed_form(params: ModelParams, s: FieldSchedule) -> float:
    from scipy.integrate import quad

    val, _ = quad(lambda t: math.hypot(2.0 * s.field(t)[0], params.delta), 0.0, s.tau)
    return val


def integrate_amplitudes(
    params: ModelParams,
    s: FieldSchedule,
    m: int = 1,
    *,
    rtol: float = RTOL,
    atol: float = ATOL,
    max_steps: int = 2_000_000,
    kernel=None,
) -> AmplitudeState:
    """Integrate the coupled (c1, c4, theta1) system from level ``m`` to ``tau``.

    ``kernel`` overrides the backend chosen at import (used by the benchmark).
    """
    if m not in (1, 4):
        raise ValueError("initial level m must be 1 or 4")
    if params.delta == 0.0:
        c1, c4 = (1.0 + 0j, 0j) if m == 1 else (0j, 1.0 + 0j)
        return AmplitudeState(c1, c4, _phase_closed_form(params, s), s.tau)
    fn = kernel or _backend.integrate_block
    c1, c4, theta, t, n_acc, n_rej, defect, status = fn(
        params.Jx, params.Jy, s.h1, s.h2, s.tau, s.code, int(s.reversed), m,
        rtol, atol, max_steps,
    )
    if status != 0:
        reason = "max_steps exhausted" if status == 1 else "step size underflow"
        raise IntegrationError(
            f"amplitude integration failed ({reason}) at t={t:.6g} of tau={s.tau:.6g} "
            f"after {n_acc} accepted / {n_rej} rejected steps; "
            f"Jx={params.Jx}, Jy={params.Jy}, h1={s.h1}, h2={s.h2}, kind={s.kind}"
        )
    return AmplitudeState(c1, c4, theta, t, n_acc, n_rej, defect)


def adiabaticity(params: ModelParams, s: FieldSchedule, **kw) -> float:
    """Survival probability ``|c1(tau)|**2`` of the lower working level."""
    if params.delta == 0.0:
        return 1.0
    if s.tau < QUENCH_TAU:
        return quench_adiabaticity(params)
    state = integrate_amplitudes(params, s, 1, **kw)
    return min(1.0, max(0.0, state.p1))


# -- brute-force propagator ------------------------------------------------

_GAUSS = (0.5 - math.sqrt(3.0) / 6.0, 0.5 + math.sqrt(3.0) / 6.0)
_CHUNK = 1 << 15


@dataclass(frozen=True)
class PropagatorResult:
    P: float
    U: np.ndarray
    tau: float
    probabilities: np.ndarray
    unitarity_defect: float
    steps: int


def endpoint_eigenvectors(Jx: float, Jy: float, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Numerically diagonalise ``H(h)`` sector by sector.

    ``sz1 sz2`` parity is conserved, so the {|uu>, |dd>} and {|ud>, |du>}
    blocks are diagonalised separately; this fixes the level labels even at
    crossings.  Returns ``(energies, vectors)`` with columns ordered as levels
    1..4.
    """
    H = hamiltonian_matrix(Jx, Jy, h).real
    vecs = np.zeros((4, 4))
    energies = np.zeros(4)
    for idx, cols in (((0, 3), (0, 3)), ((1, 2), (1, 2))):
        sub = H[np.ix_(idx, idx)]
        w, v = np.linalg.eigh(sub)
        for k, col in enumerate(cols):
            energies[col] = w[k]
            vecs[list(idx), col] = v[:, k]
    return energies, vecs


def _step_exponentials(Jx, Jy, s: FieldSchedule, t0: np.ndarray, dt: float, order: int):
    if order == 2:
        h, _ = s.field(t0 + 0.5 * dt)
        M = dt * hamiltonian_matrix(Jx, Jy, h)
    else:
        ha, _ = s.field(t0 + _GAUSS[0] * dt)
        hb, _ = s.field(t0 + _GAUSS[1] * dt)
        Ha = hamiltonian_matrix(Jx, Jy, ha)
        Hb = hamiltonian_matrix(Jx, Jy, hb)
        comm = Hb @ Ha - Ha @ Hb
        M = 0.5 * dt * (Ha + Hb) - 1j * (math.sqrt(3.0) / 12.0) * dt * dt * comm
    w, v = np.linalg.eigh(M)
    return (v * np.exp(-1j * w)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def _ordered_product(mats: np.ndarray) -> np.ndarray:
    """``mats[-1] @ ... @ mats[0]`` by pairwise reduction."""
    while len(mats) > 1:
        if len(mats) % 2:
            mats = np.concatenate([mats, np.eye(4, dtype=complex)[None]], axis=0)
        mats = mats[1::2] @ mats[0::2]
    return mats[0]


def _propagate(Jx, Jy, s: FieldSchedule, n: int, order: int) -> np.ndarray:
    dt = s.tau / n
    U = np.eye(4, dtype=complex)
    for start in range(0, n, _CHUNK):
        idx = np.arange(start, min(n, start + _CHUNK))
        U = _ordered_product(_step_exponentials(Jx, Jy, s, idx * dt, dt, order)) @ U
    return U


def schrodinger_oracle(
    params: ModelParams,
    s: FieldSchedule,
    direction: str = "forward",
    *,
    order: int = 4,
    tol: float = 1e-11,
    max_steps: int = 1 << 22,
    defect_tol: float = 1e-9,
) -> PropagatorResult:
    """Propagate the full 4x4 Schroedinger equation in the product basis.

    Each step is an exact exponential of a Hermitian generator (midpoint rule
    for ``order=2``, two-point Gauss Magnus for ``order=4``).  The step count
    doubles until successive propagators agree to ``tol`` in Frobenius norm.
    """
    if direction not in ("forward", "reversed"):
        raise ValueError("direction must be 'forward' or 'reversed'")
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    sched = replace(s, reversed=(direction == "reversed"))
    Jx, Jy = params.Jx, params.Jy
    omega = math.hypot(2.0 * max(s.h1, s.h2), Jx - Jy) + (Jx + Jy)
    n = max(8, int(math.ceil(sched.tau * omega / 0.5)))
    U = _propagate(Jx, Jy, sched, n, order)
    while True:
        if 2 * n > max_steps:
            raise OracleError(
                f"propagator did not converge to {tol:g} within {max_steps} steps "
                f"(tau={s.tau}, Jx={Jx}, Jy={Jy}, h1={s.h1}, h2={s.h2})"
            )
        U2 = _propagate(Jx, Jy, sched, 2 * n, order)
        diff = np.linalg.norm(U2 - U)
        n *= 2
        U = U2
        if diff < tol:
            break
    defect = float(np.linalg.norm(U.conj().T @ U - np.eye(4)))
    if defect > defect_tol:
        raise OracleError(f"unitarity defect {defect:.3e} exceeds {defect_tol:g}")
    h_start, h_end = sched.field(np.array([0.0, sched.tau]))[0]
    _, vin = endpoint_eigenvectors(Jx, Jy, h_start)
    _, vout = endpoint_eigenvectors(Jx, Jy, h_end)
    amp = vout.T @ U @ vin
    probs = np.abs(amp) ** 2
    return PropagatorResult(float(probs[0, 0]), U, s.tau, probs, defect, n)


@dataclass(frozen=True)
class Microreversibility:
    """Forward/reversed comparison.

    ``probability_deviation`` is the largest entrywise gap between
    ``|<i(2)|U|j(1)>|^2`` and ``|<j(1)|V|i(2)>|^2``; ``symmetry_deviation`` is
    ``||V - conj(U^dagger)||_F``, i.e. ``V = K U^dagger K^dagger`` with ``K``
    complex conjugation in the product basis.
    """

    probability_deviation: float
    symmetry_deviation: float
    forward: PropagatorResult
    reverse: PropagatorResult

    @property
    def max_deviation(self) -> float:
        return max(self.probability_deviation, self.symmetry_deviation)


def microreversibility_check(params: ModelParams, s: FieldSchedule, **kw) -> Microreversibility:
    fwd = schrodinger_oracle(params, s, "forward", **kw)
    rev = schrodinger_oracle(params, s, "reversed", **kw)
    # rev.probabilities[j, i] = |<j(1)|V|i(2)>|^2
    prob_dev = float(np.max(np.abs(fwd.probabilities - rev.probabilities.T)))
    sym_dev = float(np.linalg.norm(rev.U - np.conj(fwd.U.conj().T)))
    return Microreversibility(prob_dev, sym_dev, fwd, rev)
