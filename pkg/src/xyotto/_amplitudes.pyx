# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince integrator for the coupled amplitude pair.

Same contract and arithmetic as ``_amplitudes_py.integrate_block``.
"""
from libc.math cimport sqrt, cos, sin, fabs, pow

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920
cdef double E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40


cdef struct Sched:
    double h1
    double h2
    double tau
    double ad
    int kind
    int reverse


cdef inline void rhs(double t, double* y, double* out, Sched* s) noexcept nogil:
    cdef double u = t / s.tau
    cdef double sign = 1.0
    cdef double h, hd, e4sq, k, c, sn
    if s.reverse:
        u = 1.0 - u
        sign = -1.0
    if u < 0.0:
        u = 0.0
    elif u > 1.0:
        u = 1.0
    if s.kind == 0:
        h = sqrt(s.h1 * s.h1 + (s.h2 * s.h2 - s.h1 * s.h1) * u)
        hd = sign * (s.h2 * s.h2 - s.h1 * s.h1) / (2.0 * s.tau * h)
    else:
        h = s.h1 + (s.h2 - s.h1) * u
        hd = sign * (s.h2 - s.h1) / s.tau
    e4sq = 4.0 * h * h + s.ad * s.ad
    k = hd * s.ad / e4sq
    c = cos(2.0 * y[4])
    sn = sin(2.0 * y[4])
    out[0] = k * (c * y[2] + sn * y[3])
    out[1] = k * (c * y[3] - sn * y[2])
    out[2] = -k * (c * y[0] - sn * y[1])
    out[3] = -k * (c * y[1] + sn * y[0])
    out[4] = sqrt(e4sq)


def integrate_block(double jx, double jy, double h1, double h2, double tau,
                    int kind, int reverse, int m, double rtol, double atol,
                    long max_steps):
    cdef Sched s
    s.h1 = h1
    s.h2 = h2
    s.tau = tau
    s.ad = fabs(jx - jy)
    s.kind = kind
    s.reverse = reverse
    cdef double y[5]
    cdef double yt[5]
    cdef double yn[5]
    cdef double k1[5]
    cdef double k2[5]
    cdef double k3[5]
    cdef double k4[5]
    cdef double k5[5]
    cdef double k6[5]
    cdef double k7[5]
    cdef int i
    cdef double t = 0.0, dt, tn, err, acc, e, sc, d, fac, scale
    cdef long n_acc = 0, n_rej = 0
    cdef double max_def = 0.0
    cdef int status = 0
    cdef bint last
    for i in range(5):
        y[i] = 0.0
    if m == 1:
        y[0] = 1.0
    else:
        y[2] = 1.0
    rhs(t, y, k1, &s)
    scale = fabs(k1[4]) + fabs(k1[0]) + fabs(k1[1]) + fabs(k1[2]) + fabs(k1[3])
    if scale > 0:
        dt = min(tau, 0.05 / scale)
    else:
        dt = tau
    with nogil:
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
            for i in range(5):
                yt[i] = y[i] + dt * A21 * k1[i]
            rhs(t + C2 * dt, yt, k2, &s)
            for i in range(5):
                yt[i] = y[i] + dt * (A31 * k1[i] + A32 * k2[i])
            rhs(t + C3 * dt, yt, k3, &s)
            for i in range(5):
                yt[i] = y[i] + dt * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
            rhs(t + C4 * dt, yt, k4, &s)
            for i in range(5):
                yt[i] = y[i] + dt * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
            rhs(t + C5 * dt, yt, k5, &s)
            for i in range(5):
                yt[i] = y[i] + dt * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                     + A64 * k4[i] + A65 * k5[i])
            rhs(t + dt, yt, k6, &s)
            for i in range(5):
                yn[i] = y[i] + dt * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i]
                                     + B5 * k5[i] + B6 * k6[i])
            if last:
                tn = tau
            else:
                tn = t + dt
            rhs(tn, yn, k7, &s)
            acc = 0.0
            for i in range(5):
                e = dt * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                          + E6 * k6[i] + E7 * k7[i])
                sc = atol + rtol * max(fabs(y[i]), fabs(yn[i]))
                acc += (e / sc) * (e / sc)
            err = sqrt(acc / 5.0)
            if err <= 1.0:
                t = tn
                for i in range(5):
                    y[i] = yn[i]
                    k1[i] = k7[i]
                n_acc += 1
                d = fabs(y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3] - 1.0)
                if d > max_def:
                    max_def = d
                if err == 0.0:
                    fac = 5.0
                else:
                    fac = min(5.0, 0.9 * pow(err, -0.2))
            else:
                n_rej += 1
                fac = max(0.2, 0.9 * pow(err, -0.2))
            dt *= fac
    return (complex(y[0], y[1]), complex(y[2], y[3]), y[4], t,
            n_acc, n_rej, max_def, status)
