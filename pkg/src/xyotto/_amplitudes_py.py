"""Pure-Python amplitude integrator (fallback for the compiled kernel).

Both implementations share one contract::

    integrate_block(jx, jy, h1, h2, tau, kind, reverse, m, rtol, atol, max_steps)
        -> (c1, c4, theta, t, n_accepted, n_rejected, max_norm_defect, status)

``kind`` is 0 for the square-root schedule (linear in h**2) and 1 for the
linear-in-h schedule.  ``status`` is 0 on success, 1 when ``max_steps`` was
exhausted and 2 when the step size underflowed.
"""
import math

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40


def _field(t, h1, h2, tau, kind, reverse):
    s = t / tau
    sign = 1.0
    if reverse:
        s = 1.0 - s
        sign = -1.0
    if s < 0.0:
        s = 0.0
    elif s > 1.0:
        s = 1.0
    if kind == 0:
        h = math.sqrt(h1 * h1 + (h2 * h2 - h1 * h1) * s)
        hd = sign * (h2 * h2 - h1 * h1) / (2.0 * tau * h)
    else:
        h = h1 + (h2 - h1) * s
        hd = sign * (h2 - h1) / tau
    return h, hd


def _rhs(t, y, ad, h1, h2, tau, kind, reverse):
    h, hd = _field(t, h1, h2, tau, kind, reverse)
    e4sq = 4.0 * h * h + ad * ad
    k = hd * ad / e4sq
    c = math.cos(2.0 * y[4])
    s = math.sin(2.0 * y[4])
    c1r, c1i, c4r, c4i = y[0], y[1], y[2], y[3]
    return (
        k * (c * c4r + s * c4i),
        k * (c * c4i - s * c4r),
        -k * (c * c1r - s * c1i),
        -k * (c * c1i + s * c1r),
        math.sqrt(e4sq),
    )


def integrate_block(jx, jy, h1, h2, tau, kind, reverse, m, rtol, atol, max_steps):
    ad = abs(jx - jy)
    y = [1.0, 0.0, 0.0, 0.0, 0.0] if m == 1 else [0.0, 0.0, 1.0, 0.0, 0.0]
    t = 0.0
    f0 = _rhs(t, y, ad, h1, h2, tau, kind, reverse)
    scale = abs(f0[4]) + abs(f0[0]) + abs(f0[1]) + abs(f0[2]) + abs(f0[3])
    dt = min(tau, 0.05 / scale) if scale > 0 else tau
    k1 = f0
    n_acc = 0
    n_rej = 0
    max_def = 0.0
    status = 0
    while t < tau:
        if n_acc + n_rej >= max_steps:
            status = 1
            break
        if dt < 1e-15 * max(tau, 1.0):
            status = 2
            break
        last = False
        if t + dt >= tau:
            dt = tau - t
            last = True
        y2 = [y[i] + dt * _A21 * k1[i] for i in range(5)]
        k2 = _rhs(t + _C2 * dt, y2, ad, h1, h2, tau, kind, reverse)
        y3 = [y[i] + dt * (_A31 * k1[i] + _A32 * k2[i]) for i in range(5)]
        k3 = _rhs(t + _C3 * dt, y3, ad, h1, h2, tau, kind, reverse)
        y4 = [y[i] + dt * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i]) for i in range(5)]
        k4 = _rhs(t + _C4 * dt, y4, ad, h1, h2, tau, kind, reverse)
        y5 = [
            y[i] + dt * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
            for i in range(5)
        ]
        k5 = _rhs(t + _C5 * dt, y5, ad, h1, h2, tau, kind, reverse)
        y6 = [
            y[i]
            + dt * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
            for i in range(5)
        ]
        k6 = _rhs(t + dt, y6, ad, h1, h2, tau, kind, reverse)
        yn = [
            y[i]
            + dt * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
            for i in range(5)
        ]
        tn = tau if last else t + dt
        k7 = _rhs(tn, yn, ad, h1, h2, tau, kind, reverse)
        acc = 0.0
        for i in range(5):
            e = dt * (
                _E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i]
            )
            sc = atol + rtol * max(abs(y[i]), abs(yn[i]))
            acc += (e / sc) ** 2
        err = math.sqrt(acc / 5.0)
        if err <= 1.0:
            t = tn
            y = yn
            k1 = k7
            n_acc += 1
            d = abs(y[0] ** 2 + y[1] ** 2 + y[2] ** 2 + y[3] ** 2 - 1.0)
            if d > max_def:
                max_def = d
            fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
        else:
            n_rej += 1
            fac = max(0.2, 0.9 * err ** -0.2)
        dt *= fac
    return (
        complex(y[0], y[1]),
        complex(y[2], y[3]),
        y[4],
        t,
        n_acc,
        n_rej,
        max_def,
        status,
    )
