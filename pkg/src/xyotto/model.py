"""Static quantities of the two-qubit XY working substance.

Hamiltonian ``H = Jx sx sx + Jy sy sy + h (sz1 + sz2)`` with hbar = k_B = 1.
Levels are labelled 1..4 as ``(-e4, -e3, e3, e4)`` where ``e4`` depends on the
field and ``e3 = Jx + Jy`` does not.  Everything here is closed form and works
elementwise on numpy arrays unless noted otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelParams",
    "Spectrum",
    "EigenBasis",
    "ThermalPopulations",
    "spectrum",
    "eigenbasis",
    "thermal_populations",
    "work_function",
    "g",
    "g_complement",
    "log_g",
    "log_g_complement",
    "quench_adiabaticity",
    "p_min",
    "c_of_p",
    "inversion_bound",
    "hamiltonian_matrix",
]


@dataclass(frozen=True)
class ModelParams:
    """Full cycle configuration.

    ``T1``/``T2`` are the temperatures of the baths met at field ``h1``/``h2``;
    ``tau`` is the duration of each unitary stroke.
    """

    Jx: float
    Jy: float
    h1: float
    h2: float
    T1: float = 1.0
    T2: float = 1.0
    tau: float = 1.0

    def __post_init__(self):
        for name in ("Jx", "Jy", "h1", "h2", "T1", "T2", "tau"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValueError(f"{name} must be a finite number, got {v!r}")
        if self.Jx < 0 or self.Jy < 0:
            raise ValueError("couplings must satisfy Jx >= 0 and Jy >= 0")
        if not self.h1 > self.h2 > 0:
            raise ValueError(
                f"fields must satisfy h1 > h2 > 0 (got h1={self.h1}, h2={self.h2})"
            )
        if self.T1 <= 0 or self.T2 <= 0:
            raise ValueError("temperatures T1, T2 must be > 0")
        if self.tau <= 0:
            raise ValueError("stroke duration tau must be > 0")

    @property
    def beta1(self) -> float:
        return 1.0 / self.T1

    @property
    def beta2(self) -> float:
        return 1.0 / self.T2

    @property
    def delta(self) -> float:
        """Anisotropy ``Jx - Jy``; couples the ``|uu>, |dd>`` pair."""
        return self.Jx - self.Jy

    @property
    def e3(self) -> float:
        return self.Jx + self.Jy

    @property
    def e4_1(self) -> float:
        return math.hypot(2.0 * self.h1, self.delta)

    @property
    def e4_2(self) -> float:
        return math.hypot(2.0 * self.h2, self.delta)

    def replace(self, **changes) -> "ModelParams":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class Spectrum:
    eps1: float
    eps2: float
    eps3: float
    eps4: float

    def as_array(self) -> np.ndarray:
        return np.array([self.eps1, self.eps2, self.eps3, self.eps4])


@dataclass(frozen=True)
class EigenBasis:
    """Mixing amplitudes of ``|e4> = a+ |uu> + a- |dd>`` (``|e1>`` is orthogonal)."""

    alpha_plus: float
    alpha_minus: float


@dataclass(frozen=True)
class ThermalPopulations:
    p1: float
    p2: float
    p3: float
    p4: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3, self.p4])


def spectrum(params: ModelParams, h: float) -> Spectrum:
    if h < 0:
        raise ValueError("field h must be >= 0")
    e4 = math.hypot(2.0 * h, params.delta)
    e3 = params.e3
    return Spectrum(-e4, -e3, e3, e4)


def eigenbasis(params: ModelParams, h: float) -> EigenBasis:
    """Amplitudes with the normalising root in the denominator.

    For ``Jx == Jy`` the pair is unmixed for every ``h > 0`` and the
    continuous choice ``(1, 0)`` is returned.
    """
    if h < 0:
        raise ValueError("field h must be >= 0")
    e4 = math.hypot(2.0 * h, params.delta)
    if e4 == 0.0:
        return EigenBasis(1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0))
    if params.delta == 0.0:
        return EigenBasis(1.0, 0.0)
    r = 2.0 * h / e4
    return EigenBasis(math.sqrt(0.5 * (1.0 + r)), math.sqrt(0.5 * (1.0 - r)))


def thermal_populations(spec: Spectrum, beta: float) -> ThermalPopulations:
    if not (beta > 0 and math.isfinite(beta)):
        raise ValueError("beta must be finite and > 0")
    e = spec.as_array()
    w = np.exp(-beta * (e - e.min()))
    w /= w.sum()
    return ThermalPopulations(*(float(v) for v in w))


def work_function(beta, eps4, eps3):
    """Population difference ``p1 - p4`` of the working pair in a Gibbs state.

    Evaluates ``sinh(b e4) / (cosh(b e3) + cosh(b e4))`` after dividing through
    by ``exp(b * max(e3, e4))`` so that large ``beta`` does not overflow.
    """
    beta = np.asarray(beta, dtype=float)
    a = beta * np.asarray(eps4, dtype=float)
    b = beta * np.asarray(eps3, dtype=float)
    m = np.maximum(a, b)
    num = np.exp(a - m) - np.exp(-a - m)
    den = np.exp(b - m) + np.exp(-b - m) + np.exp(a - m) + np.exp(-a - m)
    out = num / den
    return float(out) if out.ndim == 0 else out


def g(x, y):
    """``(e^x - e^-x) / (e^{xy} + e^{-xy} + e^x + e^-x)`` for ``x, y >= 0``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xy = x * y
    m = np.maximum(x, xy)
    num = np.exp(x - m) - np.exp(-x - m)
    den = np.exp(xy - m) + np.exp(-xy - m) + np.exp(x - m) + np.exp(-x - m)
    out = num / den
    return float(out) if out.ndim == 0 else out


def g_complement(x, y):
    """``1 - g(x, y)`` without cancellation when ``g`` is close to 1."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xy = x * y
    m = np.maximum(x, xy)
    num = np.exp(xy - m) + np.exp(-xy - m) + 2.0 * np.exp(-x - m)
    den = np.exp(xy - m) + np.exp(-xy - m) + np.exp(x - m) + np.exp(-x - m)
    out = num / den
    return float(out) if out.ndim == 0 else out


def log_g(x, y):
    """``log g(x, y)`` for ``x > 0``; finite where ``g`` itself underflows."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xy = x * y
    lnum = x + np.log1p(-np.exp(-2.0 * x))
    lden = np.logaddexp(np.logaddexp(xy, -xy), np.logaddexp(x, -x))
    out = lnum - lden
    return float(out) if out.ndim == 0 else out


def log_g_complement(x, y):
    """``log(1 - g(x, y))``, resolved when ``g`` is within rounding of 1."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xy = x * y
    lnum = np.logaddexp(np.logaddexp(xy, -xy), np.log(2.0) - x)
    lden = np.logaddexp(np.logaddexp(xy, -xy), np.logaddexp(x, -x))
    out = lnum - lden
    return float(out) if out.ndim == 0 else out


def _e4_pair(params: ModelParams) -> tuple[float, float]:
    return params.e4_1, params.e4_2


def quench_adiabaticity(params: ModelParams) -> float:
    """Ground-pair survival probability for an instantaneous stroke."""
    d2 = params.delta ** 2
    e1, e2 = _e4_pair(params)
    return 0.5 * (1.0 + (4.0 * params.h1 * params.h2 + d2) / (e1 * e2))


def p_min(params: ModelParams) -> float:
    """Adiabaticity at or below which no engine exists for any temperatures."""
    e1, e2 = _e4_pair(params)
    return 0.5 * (1.0 + e2 / e1)


def inversion_bound(params: ModelParams) -> float:
    """The expansion work can only change sign for ``P`` below this value."""
    e1, e2 = _e4_pair(params)
    return 0.5 * (1.0 + math.sqrt(e2 / e1))


def c_of_p(params: ModelParams, P):
    """Factor ``c(P)`` in the engine condition ``f1 < c(P) f2``."""
    e1, e2 = _e4_pair(params)
    P = np.asarray(P, dtype=float)
    out = (e1 - e2 - 2.0 * (1.0 - P) * e1) / (e1 - e2 + 2.0 * (1.0 - P) * e2)
    return float(out) if out.ndim == 0 else out


# product basis order: |uu>, |ud>, |du>, |dd>
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)
_I2 = np.eye(2, dtype=complex)
_XX = np.kron(_SX, _SX)
_YY = np.kron(_SY, _SY)
_ZSUM = np.kron(_SZ, _I2) + np.kron(_I2, _SZ)


def hamiltonian_matrix(Jx: float, Jy: float, h) -> np.ndarray:
    """Dense 4x4 Hamiltonian built from Pauli products.

    ``h`` may be an array, in which case a stack of shape ``h.shape + (4, 4)``
    is returned.
    """
    h = np.asarray(h, dtype=float)
    base = Jx * _XX + Jy * _YY
    return base + h[..., None, None] * _ZSUM
