"""Compiled orbit loop shared by single-orbit iteration and tiled rendering."""

from __future__ import annotations

import math

import numpy as np
from numba import njit

CONVERGED = 0
PARABOLIC = 1
PREIMAGE = 2
INFINITY = 3
UNDECIDED = 4

MAX_Q = 25


@njit(cache=True, nogil=True)
def _horner(c, z):
    acc = 0j
    for i in range(c.size - 1, -1, -1):
        acc = acc * z + c[i]
    return acc


@njit(cache=True, nogil=True)
def _horner_rev(c, w):
    # w**deg * c(1/w)
    acc = 0j
    for i in range(c.size):
        acc = acc * w + c[i]
    return acc


@njit(cache=True, nogil=True)
def step(num, den, z, zinf, inf_image, inf_image_inf, big):
    """One application of num/den on the sphere; returns (value, is_infinite)."""
    if zinf:
        return inf_image, inf_image_inf
    if abs(z) > big:
        w = 1.0 / z
        a = _horner_rev(num, w)
        b = _horner_rev(den, w)
        k = (num.size - 1) - (den.size - 1)
        if k > 0:
            b = b * w ** k
        elif k < 0:
            a = a * w ** (-k)
    else:
        a = _horner(num, z)
        b = _horner(den, z)
    if b == 0:
        return 0j, True
    r = a / b
    if not (math.isfinite(r.real) and math.isfinite(r.imag)):
        return 0j, True
    return r, False


@njit(cache=True, nogil=True)
def chordal(z, zinf, a):
    if zinf:
        return 2.0 / math.sqrt(1.0 + abs(a) ** 2)
    return 2.0 * abs(z - a) / math.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(a) ** 2))


@njit(cache=True, nogil=True)
def orbit(z0, z0inf, num, den, inf_image, inf_image_inf,
          att_loc, att_para, att_q,
          conv_tol, conv_hits, budget, para_budget, para_radius, para_window,
          preimage_tol, inf_patience, big, trace):
    """Iterate until an attractor test fires; returns (outcome, attractor, iterations, trace_len, stride)."""
    na = att_loc.size
    hits = np.zeros(na, dtype=np.int64)
    mono = np.zeros(na, dtype=np.int64)
    hist = np.zeros((na, MAX_Q))
    any_para = False
    for j in range(na):
        if att_para[j]:
            any_para = True
    limit = para_budget if any_para else budget
    z = z0
    zinf = z0inf
    far = 0
    ntrace = 0
    stride = 1
    cap = trace.size
    for n in range(limit + 1):
        if cap > 0 and n % stride == 0:
            if ntrace == cap:
                for i in range(cap // 2):
                    trace[i] = trace[2 * i]
                ntrace = cap // 2
                stride *= 2
            if n % stride == 0:
                trace[ntrace] = complex(math.inf, 0.0) if zinf else z
                ntrace += 1
        for j in range(na):
            d = chordal(z, zinf, att_loc[j])
            if att_para[j]:
                if d <= preimage_tol:
                    return PREIMAGE, j, n, ntrace, stride
                e = math.inf if zinf else abs(z - att_loc[j])
                q = att_q[j]
                slot = n % q
                if n >= q and e < para_radius and e < hist[j, slot]:
                    mono[j] += 1
                    if mono[j] >= para_window:
                        return PARABOLIC, j, n, ntrace, stride
                else:
                    mono[j] = 0
                hist[j, slot] = e
            elif d < conv_tol:
                hits[j] += 1
                if hits[j] >= conv_hits:
                    return CONVERGED, j, n, ntrace, stride
            else:
                hits[j] = 0
        if zinf:
            if inf_image_inf:
                return INFINITY, -1, n, ntrace, stride
            far += 1
        elif abs(z) > big:
            far += 1
        else:
            far = 0
        if far >= inf_patience:
            return UNDECIDED, -1, n, ntrace, stride
        if n == limit:
            break
        z, zinf = step(num, den, z, zinf, inf_image, inf_image_inf, big)
    return UNDECIDED, -1, limit, ntrace, stride


@njit(cache=True, nogil=True)
def orbit_block(points, num, den, inf_image, inf_image_inf,
                att_loc, att_para, att_q,
                conv_tol, conv_hits, budget, para_budget, para_radius, para_window,
                preimage_tol, inf_patience, big, out_code, out_att, out_iter):
    """Run :func:`orbit` over a flat array of finite start points."""
    empty = np.zeros(0, dtype=np.complex128)
    for i in range(points.size):
        code, att, it, _, _ = orbit(points[i], False, num, den, inf_image, inf_image_inf,
                                    att_loc, att_para, att_q,
                                    conv_tol, conv_hits, budget, para_budget, para_radius, para_window,
                                    preimage_tol, inf_patience, big, empty)
        out_code[i] = code
        out_att[i] = att
        out_iter[i] = it
