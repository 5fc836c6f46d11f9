"""Compiled inner loops for the reduced system.

The region sweep integrates tens of thousands of long trajectories, which is
too slow through the generic Python integrator. This is the same
Dormand-Prince 5(4) scheme and the same sign-change crossing rule as
:mod:`hebbian_kuramoto.ode`, specialised to the three-dimensional field.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi

# exit status codes
OK = 0
STILL = 1  # stopped early at an equilibrium
MAX_STEPS = 2
NON_FINITE = 3


@njit(cache=True, inline="always")
def _f(phi, gamma, k, m, omega, alpha, out):
    out[0] = gamma
    out[1] = (-gamma + omega - k * math.sin(phi)) / m
    out[2] = alpha * math.cos(phi) - k


@njit(cache=True)
def _event_sign(phi):
    # sin(phi/2) changes sign exactly at the multiples of 2 pi
    v = math.sin(0.5 * phi)
    if v > 0:
        return 1
    if v < 0:
        return -1
    return 0


@njit(cache=True, inline="always")
def _sheets(lo, hi):
    return hi - lo + 1 if hi >= lo else 0


@njit(cache=True)
def pair_crossings(m, omega, alpha, x0, horizon, atol, rtol, h0, max_steps, check_interval, still_tol, still_count):
    """Count section crossings along one trajectory.

    Returns ``(crossings, sheets, t_end, status)``: every sign change, and
    the number of distinct 2 pi multiples of the lifted phase that were
    crossed (back-and-forth passes over one multiple count once). The derivative max-norm is tested
    every ``check_interval``; ``still_count`` consecutive values below
    ``still_tol`` end the run early with the count frozen.
    """
    c2, c3, c4, c5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
    a21 = 1 / 5
    a31, a32 = 3 / 40, 9 / 40
    a41, a42, a43 = 44 / 45, -56 / 15, 32 / 9
    a51, a52, a53, a54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
    a61, a62, a63, a64, a65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
    b1, b3, b4, b5, b6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
    e1 = 35 / 384 - 5179 / 57600
    e3 = 500 / 1113 - 7571 / 16695
    e4 = 125 / 192 - 393 / 640
    e5 = -2187 / 6784 + 92097 / 339200
    e6 = 11 / 84 - 187 / 2100
    e7 = -1 / 40

    x = np.empty(3)
    x[:] = x0
    k1 = np.empty(3)
    k2 = np.empty(3)
    k3 = np.empty(3)
    k4 = np.empty(3)
    k5 = np.empty(3)
    k6 = np.empty(3)
    k7 = np.empty(3)
    y = np.empty(3)
    xn = np.empty(3)

    t = 0.0
    h = min(h0, horizon)
    _f(x[0], x[1], x[2], m, omega, alpha, k1)
    last_sign = _event_sign(x[0])
    last_phi = x[0]
    crossings = 0
    sheet_lo = 1 << 62
    sheet_hi = -(1 << 62)
    next_check = check_interval
    still = 0
    steps = 0
    while t < horizon:
        if steps >= max_steps:
            return crossings, _sheets(sheet_lo, sheet_hi), t, MAX_STEPS
        steps += 1
        landing = t + h >= horizon
        if landing:
            h = horizon - t
        for i in range(3):
            y[i] = x[i] + h * a21 * k1[i]
        _f(y[0], y[1], y[2], m, omega, alpha, k2)
        for i in range(3):
            y[i] = x[i] + h * (a31 * k1[i] + a32 * k2[i])
        _f(y[0], y[1], y[2], m, omega, alpha, k3)
        for i in range(3):
            y[i] = x[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i])
        _f(y[0], y[1], y[2], m, omega, alpha, k4)
        for i in range(3):
            y[i] = x[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i])
        _f(y[0], y[1], y[2], m, omega, alpha, k5)
        for i in range(3):
            y[i] = x[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i])
        _f(y[0], y[1], y[2], m, omega, alpha, k6)
        for i in range(3):
            xn[i] = x[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i])
        _f(xn[0], xn[1], xn[2], m, omega, alpha, k7)
        err = 0.0
        finite = True
        for i in range(3):
            ev = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i])
            sc = atol + rtol * max(abs(x[i]), abs(xn[i]))
            err += (ev / sc) ** 2
            if not math.isfinite(xn[i]):
                finite = False
        err = math.sqrt(err / 3.0)
        if not finite or not math.isfinite(err):
            h *= 0.25
            if h < 1e-14 * max(1.0, horizon):
                return crossings, _sheets(sheet_lo, sheet_hi), t, NON_FINITE
            continue
        if err <= 1.0:
            t = horizon if landing else t + h
            for i in range(3):
                x[i] = xn[i]
                k1[i] = k7[i]
            s = _event_sign(x[0])
            if s != 0:
                if last_sign != 0 and s != last_sign:
                    crossings += 1
                    # exactly one multiple of 2 pi lies between the two phases
                    sheet = int(math.floor(max(last_phi, x[0]) / TWO_PI))
                    sheet_lo = min(sheet_lo, sheet)
                    sheet_hi = max(sheet_hi, sheet)
                last_sign = s
                last_phi = x[0]
            if t >= next_check:
                next_check += check_interval
                norm = max(abs(k1[0]), max(abs(k1[1]), abs(k1[2])))
                if norm < still_tol:
                    still += 1
                    if still >= still_count:
                        return crossings, _sheets(sheet_lo, sheet_hi), t, STILL
                else:
                    still = 0
            if err == 0.0:
                h *= 10.0
            else:
                h *= min(10.0, 0.9 * err ** -0.2)
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
        if h < 1e-14 * max(1.0, horizon):
            return crossings, _sheets(sheet_lo, sheet_hi), t, NON_FINITE
    return crossings, _sheets(sheet_lo, sheet_hi), t, OK


@njit(cache=True)
def batch_crossings(m, omega, alpha, x0s, horizon, atol, rtol, h0, max_steps, check_interval, still_tol, still_count):
    n = x0s.shape[0]
    counts = np.empty(n, dtype=np.int64)
    sheets = np.empty(n, dtype=np.int64)
    t_end = np.empty(n)
    status = np.empty(n, dtype=np.int64)
    for j in range(n):
        c, sh, te, st = pair_crossings(
            m, omega, alpha, x0s[j], horizon, atol, rtol, h0, max_steps, check_interval, still_tol, still_count
        )
        counts[j] = c
        sheets[j] = sh
        t_end[j] = te
        status[j] = st
    return counts, sheets, t_end, status
