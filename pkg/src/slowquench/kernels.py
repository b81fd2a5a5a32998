"""Compiled adaptive Dormand-Prince 5(4) cores.

One stepper family per state representation: two-level complex spinor
(4 reals, fully scalar-unrolled), four-level pair of spinors carrying a
rank-2 density operator (16 reals), and the real Bloch 3-vector. Each
family has a single-step core plus three drivers: plain propagation,
trajectory recording, and windowed averaging with a raised-cosine weight.

No fastmath and a fixed summation order everywhere: identical inputs give
bit-identical outputs, which the scan determinism contract relies on.

Status codes: 0 = reached the requested time, 1 = step size underflow
(the returned time locates the failure), 2 = step budget exhausted.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# fifth-order minus fourth-order weights (the k2 weight vanishes in both)
_E1 = 35.0 / 384.0 - 5179.0 / 57600.0
_E3 = 500.0 / 1113.0 - 7571.0 / 16695.0
_E4 = 125.0 / 192.0 - 393.0 / 640.0
_E5 = -2187.0 / 6784.0 + 92097.0 / 339200.0
_E6 = 11.0 / 84.0 - 187.0 / 2100.0
_E7 = -1.0 / 40.0

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_STEP_BUDGET = 2


@njit(cache=True, inline="always")
def _quench(kind, coup, t):
    if kind == 0:
        return coup / t
    if t < 0.0:
        return coup * t
    return 0.0


@njit(cache=True, inline="always")
def _grow(err, h):
    if err == 0.0:
        return h * _MAX_FACTOR
    fac = _SAFETY * err ** -0.2
    if fac > _MAX_FACTOR:
        fac = _MAX_FACTOR
    return h * fac


@njit(cache=True, inline="always")
def _shrink(err, h):
    fac = _SAFETY * err ** -0.2
    if fac < _MIN_FACTOR:
        fac = _MIN_FACTOR
    return h * fac


# ---------------------------------------------------------------------------
# two-level spinor, state = (ur, ui, vr, vi)


@njit(cache=True, inline="always")
def _deriv2(kind, coup, axis, hx, hy, hz, t, ur, ui, vr, vi):
    # d/dt (u, v) = -i H (u, v), H = ax sx + ay sy + az sz with the quench
    # term added to the component selected by axis (0, 1, 2)
    q = _quench(kind, coup, t)
    ax = hx
    ay = hy
    az = hz
    if axis == 0:
        ax += q
    elif axis == 1:
        ay += q
    else:
        az += q
    fur = az * ui + ax * vi - ay * vr
    fui = -az * ur - ax * vr - ay * vi
    fvr = ax * ui + ay * ur - az * vi
    fvi = -ax * ur + ay * ui + az * vr
    return fur, fui, fvr, fvi


@njit(cache=True)
def _initial_step(field_scale, kind, coup, t0):
    scale = abs(_quench(kind, coup, t0)) + field_scale
    if scale == 0.0:
        scale = 1.0
    return 0.01 / scale


@njit(cache=True)
def _step2(kind, coup, axis, hx, hy, hz, t, t1, h, max_step,
           ur, ui, vr, vi, k1r, k1i, k1vr, k1vi, rtol):
    """One attempted step. Returns (accepted, t, h_used, h_next, state..., k1...).

    accepted: 1 step taken, 0 rejected (retry with h_next), -1 underflow.
    On acceptance k1 already holds the derivative at the new point.
    """
    if h > max_step:
        h = max_step
    if t + h > t1:
        h = t1 - t
    if h < 1e-14 * max(abs(t), 1.0):
        return -1, t, h, h, ur, ui, vr, vi, k1r, k1i, k1vr, k1vi

    y2r = ur + h * _A21 * k1r
    y2i = ui + h * _A21 * k1i
    y2vr = vr + h * _A21 * k1vr
    y2vi = vi + h * _A21 * k1vi
    k2r, k2i, k2vr, k2vi = _deriv2(kind, coup, axis, hx, hy, hz, t + _C2 * h, y2r, y2i, y2vr, y2vi)

    y3r = ur + h * (_A31 * k1r + _A32 * k2r)
    y3i = ui + h * (_A31 * k1i + _A32 * k2i)
    y3vr = vr + h * (_A31 * k1vr + _A32 * k2vr)
    y3vi = vi + h * (_A31 * k1vi + _A32 * k2vi)
    k3r, k3i, k3vr, k3vi = _deriv2(kind, coup, axis, hx, hy, hz, t + _C3 * h, y3r, y3i, y3vr, y3vi)

    y4r = ur + h * (_A41 * k1r + _A42 * k2r + _A43 * k3r)
    y4i = ui + h * (_A41 * k1i + _A42 * k2i + _A43 * k3i)
    y4vr = vr + h * (_A41 * k1vr + _A42 * k2vr + _A43 * k3vr)
    y4vi = vi + h * (_A41 * k1vi + _A42 * k2vi + _A43 * k3vi)
    k4r, k4i, k4vr, k4vi = _deriv2(kind, coup, axis, hx, hy, hz, t + _C4 * h, y4r, y4i, y4vr, y4vi)

    y5r = ur + h * (_A51 * k1r + _A52 * k2r + _A53 * k3r + _A54 * k4r)
    y5i = ui + h * (_A51 * k1i + _A52 * k2i + _A53 * k3i + _A54 * k4i)
    y5vr = vr + h * (_A51 * k1vr + _A52 * k2vr + _A53 * k3vr + _A54 * k4vr)
    y5vi = vi + h * (_A51 * k1vi + _A52 * k2vi + _A53 * k3vi + _A54 * k4vi)
    k5r, k5i, k5vr, k5vi = _deriv2(kind, coup, axis, hx, hy, hz, t + _C5 * h, y5r, y5i, y5vr, y5vi)

    y6r = ur + h * (_A61 * k1r + _A62 * k2r + _A63 * k3r + _A64 * k4r + _A65 * k5r)
    y6i = ui + h * (_A61 * k1i + _A62 * k2i + _A63 * k3i + _A64 * k4i + _A65 * k5i)
    y6vr = vr + h * (_A61 * k1vr + _A62 * k2vr + _A63 * k3vr + _A64 * k4vr + _A65 * k5vr)
    y6vi = vi + h * (_A61 * k1vi + _A62 * k2vi + _A63 * k3vi + _A64 * k4vi + _A65 * k5vi)
    k6r, k6i, k6vr, k6vi = _deriv2(kind, coup, axis, hx, hy, hz, t + h, y6r, y6i, y6vr, y6vi)

    nur = ur + h * (_B1 * k1r + _B3 * k3r + _B4 * k4r + _B5 * k5r + _B6 * k6r)
    nui = ui + h * (_B1 * k1i + _B3 * k3i + _B4 * k4i + _B5 * k5i + _B6 * k6i)
    nvr = vr + h * (_B1 * k1vr + _B3 * k3vr + _B4 * k4vr + _B5 * k5vr + _B6 * k6vr)
    nvi = vi + h * (_B1 * k1vi + _B3 * k3vi + _B4 * k4vi + _B5 * k5vi + _B6 * k6vi)
    k7r, k7i, k7vr, k7vi = _deriv2(kind, coup, axis, hx, hy, hz, t + h, nur, nui, nvr, nvi)

    eur = _E1 * k1r + _E3 * k3r + _E4 * k4r + _E5 * k5r + _E6 * k6r + _E7 * k7r
    eui = _E1 * k1i + _E3 * k3i + _E4 * k4i + _E5 * k5i + _E6 * k6i + _E7 * k7i
    evr = _E1 * k1vr + _E3 * k3vr + _E4 * k4vr + _E5 * k5vr + _E6 * k6vr + _E7 * k7vr
    evi = _E1 * k1vi + _E3 * k3vi + _E4 * k4vi + _E5 * k5vi + _E6 * k6vi + _E7 * k7vi
    err = h * math.sqrt(eur * eur + eui * eui + evr * evr + evi * evi) / rtol

    if err <= 1.0:
        # the true flow is unitary: rescale the accepted state to unit norm
        # and the FSAL derivative with it (the equation is linear), keeping
        # the drift at rounding level over arbitrarily long runs
        nrm2 = nur * nur + nui * nui + nvr * nvr + nvi * nvi
        if nrm2 > 0.0:
            c = 1.0 / math.sqrt(nrm2)
            nur *= c
            nui *= c
            nvr *= c
            nvi *= c
            k7r *= c
            k7i *= c
            k7vr *= c
            k7vi *= c
        return 1, t + h, h, _grow(err, h), nur, nui, nvr, nvi, k7r, k7i, k7vr, k7vi
    return 0, t, h, _shrink(err, h), ur, ui, vr, vi, k1r, k1i, k1vr, k1vi


@njit(cache=True)
def dp45_propagate2(kind, coup, axis, hx, hy, hz, t0, t1, ur, ui, vr, vi, rtol, max_step, max_steps):
    """Evolve (u, v) from t0 to t1. Returns (status, t, ur, ui, vr, vi)."""
    t = t0
    h = _initial_step(math.sqrt(hx * hx + hy * hy + hz * hz), kind, coup, t0)
    k1r, k1i, k1vr, k1vi = _deriv2(kind, coup, axis, hx, hy, hz, t0, ur, ui, vr, vi)
    steps = 0
    while t < t1:
        if steps >= max_steps:
            return STATUS_STEP_BUDGET, t, ur, ui, vr, vi
        acc, t, _, h, ur, ui, vr, vi, k1r, k1i, k1vr, k1vi = _step2(
            kind, coup, axis, hx, hy, hz, t, t1, h, max_step,
            ur, ui, vr, vi, k1r, k1i, k1vr, k1vi, rtol)
        if acc == -1:
            return STATUS_UNDERFLOW, t, ur, ui, vr, vi
        steps += 1
    return STATUS_OK, t, ur, ui, vr, vi


@njit(cache=True)
def dp45_record2(kind, coup, axis, hx, hy, hz, t0, t1, ur, ui, vr, vi, rtol, max_step, max_steps):
    """Evolve and record every accepted step.

    Returns (status, t, n, ts, states); states rows are (ur, ui, vr, vi)
    and only the first n rows are valid.
    """
    cap = 4096
    ts = np.empty(cap)
    ys = np.empty((cap, 4))
    ts[0] = t0
    ys[0, 0] = ur
    ys[0, 1] = ui
    ys[0, 2] = vr
    ys[0, 3] = vi
    n = 1
    t = t0
    h = _initial_step(math.sqrt(hx * hx + hy * hy + hz * hz), kind, coup, t0)
    k1r, k1i, k1vr, k1vi = _deriv2(kind, coup, axis, hx, hy, hz, t0, ur, ui, vr, vi)
    steps = 0
    while t < t1:
        if steps >= max_steps:
            return STATUS_STEP_BUDGET, t, n, ts, ys
        acc, t, _, h, ur, ui, vr, vi, k1r, k1i, k1vr, k1vi = _step2(
            kind, coup, axis, hx, hy, hz, t, t1, h, max_step,
            ur, ui, vr, vi, k1r, k1i, k1vr, k1vi, rtol)
        if acc == -1:
            return STATUS_UNDERFLOW, t, n, ts, ys
        if acc == 1:
            if n == cap:
                nts = np.empty(cap * 2)
                nys = np.empty((cap * 2, 4))
                nts[:cap] = ts
                nys[:cap] = ys
                ts = nts
                ys = nys
                cap *= 2
            ts[n] = t
            ys[n, 0] = ur
            ys[n, 1] = ui
            ys[n, 2] = vr
            ys[n, 3] = vi
            n += 1
        steps += 1
    return STATUS_OK, t, n, ts, ys


@njit(cache=True)
def dp45_average2(kind, coup, axis, hx, hy, hz, t1, t2, ur, ui, vr, vi, rtol, max_step, max_steps):
    """Evolve across [t1, t2] accumulating the raised-cosine weighted
    trapezoidal average of the spin expectation.

    The weight w(t) = 1 - cos(2 pi (t - t1)/(t2 - t1)) vanishes with its
    first derivative at both window ends, which suppresses the spectral
    leakage of the fast precession into the average far below a flat
    window's O(1/(omega T)).

    Returns (status, t, sx, sy, sz, ur, ui, vr, vi) with the weighted
    averages already normalized.
    """
    span = t2 - t1
    omega = 2.0 * math.pi / span
    t = t1
    h = _initial_step(math.sqrt(hx * hx + hy * hy + hz * hz), kind, coup, t1)
    k1r, k1i, k1vr, k1vi = _deriv2(kind, coup, axis, hx, hy, hz, t1, ur, ui, vr, vi)
    # previous node values of w * s and w
    w_prev = 0.0
    fx_prev = 0.0
    fy_prev = 0.0
    fz_prev = 0.0
    ax = 0.0
    ay = 0.0
    az = 0.0
    aw = 0.0
    steps = 0
    while t < t2:
        if steps >= max_steps:
            return STATUS_STEP_BUDGET, t, 0.0, 0.0, 0.0, ur, ui, vr, vi
        acc, t, h_used, h, ur, ui, vr, vi, k1r, k1i, k1vr, k1vi = _step2(
            kind, coup, axis, hx, hy, hz, t, t2, h, max_step,
            ur, ui, vr, vi, k1r, k1i, k1vr, k1vi, rtol)
        if acc == -1:
            return STATUS_UNDERFLOW, t, 0.0, 0.0, 0.0, ur, ui, vr, vi
        if acc == 1:
            w = 1.0 - math.cos(omega * (t - t1))
            sx = 2.0 * (ur * vr + ui * vi)
            sy = 2.0 * (ur * vi - ui * vr)
            sz = ur * ur + ui * ui - vr * vr - vi * vi
            fx = w * sx
            fy = w * sy
            fz = w * sz
            half = 0.5 * h_used
            ax += half * (fx_prev + fx)
            ay += half * (fy_prev + fy)
            az += half * (fz_prev + fz)
            aw += half * (w_prev + w)
            w_prev = w
            fx_prev = fx
            fy_prev = fy
            fz_prev = fz
        steps += 1
    return STATUS_OK, t, ax / aw, ay / aw, az / aw, ur, ui, vr, vi


# ---------------------------------------------------------------------------
# four-level pair of spinors, state = 16 reals: two 4-component complex
# spinors at offsets 0 and 8, component j at (re, im) = (2j, 2j+1)


@njit(cache=True, inline="always")
def _deriv16(kind, coup, h0, h1, h2, h3, t, y, out):
    hq = _quench(kind, coup, t) + h0
    for base in (0, 8):
        p0r = y[base + 0]
        p0i = y[base + 1]
        p1r = y[base + 2]
        p1i = y[base + 3]
        p2r = y[base + 4]
        p2i = y[base + 5]
        p3r = y[base + 6]
        p3i = y[base + 7]
        w0r = hq * p1r + h1 * p2r + h2 * p2i + h3 * p0r
        w0i = hq * p1i + h1 * p2i - h2 * p2r + h3 * p0i
        w1r = hq * p0r + h1 * p3r + h2 * p3i - h3 * p1r
        w1i = hq * p0i + h1 * p3i - h2 * p3r - h3 * p1i
        w2r = h1 * p0r - h2 * p0i - hq * p3r - h3 * p2r
        w2i = h1 * p0i + h2 * p0r - hq * p3i - h3 * p2i
        w3r = h1 * p1r - h2 * p1i - hq * p2r + h3 * p3r
        w3i = h1 * p1i + h2 * p1r - hq * p2i + h3 * p3i
        out[base + 0] = w0i
        out[base + 1] = -w0r
        out[base + 2] = w1i
        out[base + 3] = -w1r
        out[base + 4] = w2i
        out[base + 5] = -w2r
        out[base + 6] = w3i
        out[base + 7] = -w3r


@njit(cache=True, inline="always")
def _gamma_expectations(y):
    """Mean <gamma_i> of the rank-2 density operator carried by the pair."""
    g0 = 0.0
    g1 = 0.0
    g2 = 0.0
    g3 = 0.0
    for base in (0, 8):
        p0r = y[base + 0]
        p0i = y[base + 1]
        p1r = y[base + 2]
        p1i = y[base + 3]
        p2r = y[base + 4]
        p2i = y[base + 5]
        p3r = y[base + 6]
        p3i = y[base + 7]
        g0 += 2.0 * (p0r * p1r + p0i * p1i) - 2.0 * (p2r * p3r + p2i * p3i)
        g1 += 2.0 * (p0r * p2r + p0i * p2i) + 2.0 * (p1r * p3r + p1i * p3i)
        g2 += 2.0 * (p0r * p2i - p0i * p2r) + 2.0 * (p1r * p3i - p1i * p3r)
        g3 += (p0r * p0r + p0i * p0i) - (p1r * p1r + p1i * p1i) \
            - (p2r * p2r + p2i * p2i) + (p3r * p3r + p3i * p3i)
    return 0.5 * g0, 0.5 * g1, 0.5 * g2, 0.5 * g3


@njit(cache=True)
def _step16(kind, coup, h0, h1, h2, h3, t, t1, h, max_step, y, k, ytmp, ynew, rtol):
    """One attempted step on the 16-real state.

    k is (7, 16) stage storage with k[0] holding the entry derivative;
    y and k[0] are updated in place on acceptance.
    Returns (accepted, t, h_used, h_next).
    """
    if h > max_step:
        h = max_step
    if t + h > t1:
        h = t1 - t
    if h < 1e-14 * max(abs(t), 1.0):
        return -1, t, h, h

    for j in range(16):
        ytmp[j] = y[j] + h * _A21 * k[0, j]
    _deriv16(kind, coup, h0, h1, h2, h3, t + _C2 * h, ytmp, k[1])
    for j in range(16):
        ytmp[j] = y[j] + h * (_A31 * k[0, j] + _A32 * k[1, j])
    _deriv16(kind, coup, h0, h1, h2, h3, t + _C3 * h, ytmp, k[2])
    for j in range(16):
        ytmp[j] = y[j] + h * (_A41 * k[0, j] + _A42 * k[1, j] + _A43 * k[2, j])
    _deriv16(kind, coup, h0, h1, h2, h3, t + _C4 * h, ytmp, k[3])
    for j in range(16):
        ytmp[j] = y[j] + h * (_A51 * k[0, j] + _A52 * k[1, j] + _A53 * k[2, j] + _A54 * k[3, j])
    _deriv16(kind, coup, h0, h1, h2, h3, t + _C5 * h, ytmp, k[4])
    for j in range(16):
        ytmp[j] = y[j] + h * (_A61 * k[0, j] + _A62 * k[1, j] + _A63 * k[2, j]
                              + _A64 * k[3, j] + _A65 * k[4, j])
    _deriv16(kind, coup, h0, h1, h2, h3, t + h, ytmp, k[5])
    for j in range(16):
        ynew[j] = y[j] + h * (_B1 * k[0, j] + _B3 * k[2, j] + _B4 * k[3, j]
                              + _B5 * k[4, j] + _B6 * k[5, j])
    _deriv16(kind, coup, h0, h1, h2, h3, t + h, ynew, k[6])

    err2 = 0.0
    for j in range(16):
        e = (_E1 * k[0, j] + _E3 * k[2, j] + _E4 * k[3, j]
             + _E5 * k[4, j] + _E6 * k[5, j] + _E7 * k[6, j])
        err2 += e * e
    err = h * math.sqrt(err2) / rtol

    if err <= 1.0:
        # rescale each spinor of the pair to unit norm (see _step2)
        for b in range(2):
            base = 8 * b
            n2 = 0.0
            for j in range(base, base + 8):
                n2 += ynew[j] * ynew[j]
            if n2 > 0.0:
                c = 1.0 / math.sqrt(n2)
                for j in range(base, base + 8):
                    ynew[j] *= c
                    k[6, j] *= c
        for j in range(16):
            y[j] = ynew[j]
            k[0, j] = k[6, j]
        return 1, t + h, h, _grow(err, h)
    return 0, t, h, _shrink(err, h)


@njit(cache=True)
def dp45_propagate16(kind, coup, h0, h1, h2, h3, t0, t1, y, rtol, max_step, max_steps):
    """Evolve the spinor pair in place from t0 to t1. Returns (status, t)."""
    k = np.empty((7, 16))
    ytmp = np.empty(16)
    ynew = np.empty(16)
    t = t0
    h = _initial_step(math.sqrt(h0 * h0 + h1 * h1 + h2 * h2 + h3 * h3), kind, coup, t0)
    _deriv16(kind, coup, h0, h1, h2, h3, t0, y, k[0])
    steps = 0
    while t < t1:
        if steps >= max_steps:
            return STATUS_STEP_BUDGET, t
        acc, t, _, h = _step16(kind, coup, h0, h1, h2, h3, t, t1, h, max_step,
                               y, k, ytmp, ynew, rtol)
        if acc == -1:
            return STATUS_UNDERFLOW, t
        steps += 1
    return STATUS_OK, t


@njit(cache=True)
def dp45_record16(kind, coup, h0, h1, h2, h3, t0, t1, y, rtol, max_step, max_steps):
    """Evolve the pair recording (t, state) at every accepted step.

    Returns (status, t, n, ts, states) with states rows of 16 reals.
    """
    cap = 4096
    ts = np.empty(cap)
    ys = np.empty((cap, 16))
    ts[0] = t0
    for j in range(16):
        ys[0, j] = y[j]
    n = 1
    k = np.empty((7, 16))
    ytmp = np.empty(16)
    ynew = np.empty(16)
    t = t0
    h = _initial_step(math.sqrt(h0 * h0 + h1 * h1 + h2 * h2 + h3 * h3), kind, coup, t0)
    _deriv16(kind, coup, h0, h1, h2, h3, t0, y, k[0])
    steps = 0
    while t < t1:
        if steps >= max_steps:
            return STATUS_STEP_BUDGET, t, n, ts, ys
        acc, t, _, h = _step16(kind, coup, h0, h1, h2, h3, t, t1, h, max_step,
                               y, k, ytmp, ynew, rtol)
        if acc == -1:
            return STATUS_UNDERFLOW, t, n, ts, ys
        if acc == 1:
            if n == cap:
                nts = np.empty(cap * 2)
                nys = np.empty((cap * 2, 16))
                nts[:cap] = ts
                nys[:cap] = ys
                ts = nts
                ys = nys
                cap *= 2
            ts[n] = t
            for j in range(16):
                ys[n, j] = y[j]
            n += 1
        steps += 1
    return STATUS_OK, t, n, ts, ys


@njit(cache=True)
def dp45_average16(kind, coup, h0, h1, h2, h3, t1, t2, y, rtol, max_step, max_steps):
    """Raised-cosine weighted trapezoidal average of <gamma_i> over [t1, t2].

    Returns (status, t, g0, g1, g2, g3) and leaves the pair evolved to t2.
    """
    span = t2 - t1
    omega = 2.0 * math.pi / span
    k = np.empty((7, 16))
    ytmp = np.empty(16)
    ynew = np.empty(16)
    t = t1
    h = _initial_step(math.sqrt(h0 * h0 + h1 * h1 + h2 * h2 + h3 * h3), kind, coup, t1)
    _deriv16(kind, coup, h0, h1, h2, h3, t1, y, k[0])
    w_prev = 0.0
    f0_prev = 0.0
    f1_prev = 0.0
    f2_prev = 0.0
    f3_prev = 0.0
    a0 = 0.0
    a1 = 0.0
    a2 = 0.0
    a3 = 0.0
    aw = 0.0
    steps = 0
    while t < t2:
        if steps >= max_steps:
            return STATUS_STEP_BUDGET, t, 0.0, 0.0, 0.0, 0.0
        acc, t, h_used, h = _step16(kind, coup, h0, h1, h2, h3, t, t2, h, max_step,
                                    y, k, ytmp, ynew, rtol)
        if acc == -1:
            return STATUS_UNDERFLOW, t, 0.0, 0.0, 0.0, 0.0
        if acc == 1:
            w = 1.0 - math.cos(omega * (t - t1))
            g0, g1, g2, g3 = _gamma_expectations(y)
            f0 = w * g0
            f1 = w * g1
            f2 = w * g2
            f3 = w * g3
            half = 0.5 * h_used
            a0 += half * (f0_prev + f0)
            a1 += half * (f1_prev + f1)
            a2 += half * (f2_prev + f2)
            a3 += half * (f3_prev + f3)
            aw += half * (w_prev + w)
            w_prev = w
            f0_prev = f0
            f1_prev = f1
            f2_prev = f2
            f3_prev = f3
        steps += 1
    return STATUS_OK, t, a0 / aw, a1 / aw, a2 / aw, a3 / aw


# ---------------------------------------------------------------------------
# Bloch vector, state = (sx, sy, sz), ds/dt = -2 s x h(t)


@njit(cache=True, inline="always")
def _deriv3(kind, coup, axis, hx, hy, hz, t, sx, sy, sz):
    q = _quench(kind, coup, t)
    ax = hx
    ay = hy
    az = hz
    if axis == 0:
        ax += q
    elif axis == 1:
        ay += q
    else:
        az += q
    fx = -2.0 * (sy * az - sz * ay)
    fy = -2.0 * (sz * ax - sx * az)
    fz = -2.0 * (sx * ay - sy * ax)
    return fx, fy, fz


@njit(cache=True)
def _step3(kind, coup, axis, hx, hy, hz, t, t1, h, max_step,
           sx, sy, sz, k1x, k1y, k1z, rtol):
    if h > max_step:
        h = max_step
    if t + h > t1:
        h = t1 - t
    if h < 1e-14 * max(abs(t), 1.0):
        return -1, t, h, h, sx, sy, sz, k1x, k1y, k1z

    y2x = sx + h * _A21 * k1x
    y2y = sy + h * _A21 * k1y
    y2z = sz + h * _A21 * k1z
    k2x, k2y, k2z = _deriv3(kind, coup, axis, hx, hy, hz, t + _C2 * h, y2x, y2y, y2z)

    y3x = sx + h * (_A31 * k1x + _A32 * k2x)
    y3y = sy + h * (_A31 * k1y + _A32 * k2y)
    y3z = sz + h * (_A31 * k1z + _A32 * k2z)
    k3x, k3y, k3z = _deriv3(kind, coup, axis, hx, hy, hz, t + _C3 * h, y3x, y3y, y3z)

    y4x = sx + h * (_A41 * k1x + _A42 * k2x + _A43 * k3x)
    y4y = sy + h * (_A41 * k1y + _A42 * k2y + _A43 * k3y)
    y4z = sz + h * (_A41 * k1z + _A42 * k2z + _A43 * k3z)
    k4x, k4y, k4z = _deriv3(kind, coup, axis, hx, hy, hz, t + _C4 * h, y4x, y4y, y4z)

    y5x = sx + h * (_A51 * k1x + _A52 * k2x + _A53 * k3x + _A54 * k4x)
    y5y = sy + h * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y)
    y5z = sz + h * (_A51 * k1z + _A52 * k2z + _A53 * k3z + _A54 * k4z)
    k5x, k5y, k5z = _deriv3(kind, coup, axis, hx, hy, hz, t + _C5 * h, y5x, y5y, y5z)

    y6x = sx + h * (_A61 * k1x + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x)
    y6y = sy + h * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y)
    y6z = sz + h * (_A61 * k1z + _A62 * k2z + _A63 * k3z + _A64 * k4z + _A65 * k5z)
    k6x, k6y, k6z = _deriv3(kind, coup, axis, hx, hy, hz, t + h, y6x, y6y, y6z)

    nx = sx + h * (_B1 * k1x + _B3 * k3x + _B4 * k4x + _B5 * k5x + _B6 * k6x)
    ny = sy + h * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
    nz = sz + h * (_B1 * k1z + _B3 * k3z + _B4 * k4z + _B5 * k5z + _B6 * k6z)
    k7x, k7y, k7z = _deriv3(kind, coup, axis, hx, hy, hz, t + h, nx, ny, nz)

    ex = _E1 * k1x + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x
    ey = _E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y
    ez = _E1 * k1z + _E3 * k3z + _E4 * k4z + _E5 * k5z + _E6 * k6z + _E7 * k7z
    err = h * math.sqrt(ex * ex + ey * ey + ez * ez) / rtol

    if err <= 1.0:
        # the cross-product flow conserves |sigma|: rescale the accepted
        # vector back to the entry magnitude, FSAL derivative with it
        old2 = sx * sx + sy * sy + sz * sz
        new2 = nx * nx + ny * ny + nz * nz
        if new2 > 0.0:
            c = math.sqrt(old2 / new2)
            nx *= c
            ny *= c
            nz *= c
            k7x *= c
            k7y *= c
            k7z *= c
        return 1, t + h, h, _grow(err, h), nx, ny, nz, k7x, k7y, k7z
    return 0, t, h, _shrink(err, h), sx, sy, sz, k1x, k1y, k1z


@njit(cache=True)
def dp45_record3(kind, coup, axis, hx, hy, hz, t0, t1, sx, sy, sz, rtol, max_step, max_steps):
    """Evolve a Bloch vector recording every accepted step.

    Returns (status, t, n, ts, spins) with spins rows (sx, sy, sz).
    """
    cap = 4096
    ts = np.empty(cap)
    ys = np.empty((cap, 3))
    ts[0] = t0
    ys[0, 0] = sx
    ys[0, 1] = sy
    ys[0, 2] = sz
    n = 1
    t = t0
    h = _initial_step(math.sqrt(hx * hx + hy * hy + hz * hz), kind, coup, t0)
    k1x, k1y, k1z = _deriv3(kind, coup, axis, hx, hy, hz, t0, sx, sy, sz)
    steps = 0
    while t < t1:
        if steps >= max_steps:
            return STATUS_STEP_BUDGET, t, n, ts, ys
        acc, t, _, h, sx, sy, sz, k1x, k1y, k1z = _step3(
            kind, coup, axis, hx, hy, hz, t, t1, h, max_step,
            sx, sy, sz, k1x, k1y, k1z, rtol)
        if acc == -1:
            return STATUS_UNDERFLOW, t, n, ts, ys
        if acc == 1:
            if n == cap:
                nts = np.empty(cap * 2)
                nys = np.empty((cap * 2, 3))
                nts[:cap] = ts
                nys[:cap] = ys
                ts = nts
                ys = nys
                cap *= 2
            ts[n] = t
            ys[n, 0] = sx
            ys[n, 1] = sy
            ys[n, 2] = sz
            n += 1
        steps += 1
    return STATUS_OK, t, n, ts, ys
