"""Hot numeric kernels: numba-jitted with a pure-numpy fallback.

The FFTs that dominate the time stepper live in scipy.fft and are not
touched here.  What this module covers are the quadrature-heavy loops that
sit outside the transforms: mollifier multiplier assembly (Q x N^2 complex
exponentials), commutator increment accumulation (Q x N^2 fused products)
and piecewise polynomial evaluation for the renormalizer family.

Path selection: the numba path is used when numba imports cleanly, unless
the environment variable DDNS2D_NO_NUMBA is set to a non-empty value.
``benchmarks/bench_kernels.py`` times both paths against each other.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = bool(os.environ.get("DDNS2D_NO_NUMBA"))

try:
    if _DISABLED:
        raise ImportError("numba disabled by DDNS2D_NO_NUMBA")
    from numba import njit

    USING_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag in the bench
    USING_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def deco(fn):
            return fn

        return deco


# ---------------------------------------------------------------------------
# mollifier multiplier: m(k) = sum_q w_q exp(-i k . d_q)
# The node set is symmetric and the weights even, so the sum is real; both
# paths accumulate cos(k . d_q) in the same node order.
# ---------------------------------------------------------------------------

def _multiplier_numpy(kx, ky, offsets, weights):
    m = np.zeros(kx.shape, dtype=np.float64)
    for q in range(offsets.shape[0]):
        m += weights[q] * np.cos(kx * offsets[q, 0] + ky * offsets[q, 1])
    return m


@njit(cache=True)
def _multiplier_numba(kx, ky, offsets, weights):  # pragma: no cover - jitted
    n0, n1 = kx.shape
    m = np.zeros((n0, n1), dtype=np.float64)
    for q in range(offsets.shape[0]):
        dx = offsets[q, 0]
        dy = offsets[q, 1]
        w = weights[q]
        for i in range(n0):
            for j in range(n1):
                m[i, j] += w * np.cos(kx[i, j] * dx + ky[i, j] * dy)
    return m


def mollifier_multiplier(kx, ky, offsets, weights):
    """Fourier multiplier of the discrete kernel quadrature."""
    if USING_NUMBA:
        return _multiplier_numba(kx, ky, offsets, weights)
    return _multiplier_numpy(kx, ky, offsets, weights)


# ---------------------------------------------------------------------------
# commutator accumulation: out_i += w (u_i(x-d) - u_i(x)) (b(x-d) - b(x))
# ---------------------------------------------------------------------------

def _accum_numpy(out1, out2, u1s, u2s, bs, u1, u2, b, w):
    db = bs - b
    out1 += w * (u1s - u1) * db
    out2 += w * (u2s - u2) * db


@njit(cache=True)
def _accum_numba(out1, out2, u1s, u2s, bs, u1, u2, b, w):  # pragma: no cover
    n0, n1 = out1.shape
    for i in range(n0):
        for j in range(n1):
            db = bs[i, j] - b[i, j]
            out1[i, j] += w * (u1s[i, j] - u1[i, j]) * db
            out2[i, j] += w * (u2s[i, j] - u2[i, j]) * db


def accumulate_increment_products(out1, out2, u1s, u2s, bs, u1, u2, b, w):
    """Accumulate one quadrature node of the increment tensor, in place."""
    if USING_NUMBA:
        _accum_numba(out1, out2, u1s, u2s, bs, u1, u2, b, w)
    else:
        _accum_numpy(out1, out2, u1s, u2s, bs, u1, u2, b, w)


# ---------------------------------------------------------------------------
# renormalizer family: identity on [-m, m], degree-7 taper on [m, 2m], zero
# beyond.  coeffs are the taper polynomial coefficients in the scaled
# variable s = (|y| - m)/m, highest degree first; deriv selects the value,
# first or second derivative of beta.
# ---------------------------------------------------------------------------

def _beta_numpy(y, m, coeffs, dcoeffs, ddcoeffs, deriv):
    a = np.abs(y)
    s = np.clip((a - m) / m, 0.0, 1.0)
    taper = a > m
    inside = a <= 2.0 * m
    if deriv == 0:
        out = np.where(taper, np.sign(y) * m * np.polyval(coeffs, s), y)
    elif deriv == 1:
        out = np.where(taper, np.polyval(dcoeffs, s), 1.0)
    else:
        out = np.where(taper, np.sign(y) * np.polyval(ddcoeffs, s) / m, 0.0)
    return np.where(inside, out, 0.0)


@njit(cache=True)
def _beta_numba(y, m, coeffs, dcoeffs, ddcoeffs, deriv):  # pragma: no cover
    out = np.empty(y.shape, dtype=np.float64)
    flat_y = y.ravel()
    flat_o = out.ravel()
    for i in range(flat_y.size):
        v = flat_y[i]
        a = abs(v)
        if a > 2.0 * m:
            flat_o[i] = 0.0
            continue
        if a <= m:
            if deriv == 0:
                flat_o[i] = v
            elif deriv == 1:
                flat_o[i] = 1.0
            else:
                flat_o[i] = 0.0
            continue
        s = (a - m) / m
        sign = 1.0 if v >= 0.0 else -1.0
        if deriv == 0:
            p = 0.0
            for c in coeffs:
                p = p * s + c
            flat_o[i] = sign * m * p
        elif deriv == 1:
            p = 0.0
            for c in dcoeffs:
                p = p * s + c
            flat_o[i] = p
        else:
            p = 0.0
            for c in ddcoeffs:
                p = p * s + c
            flat_o[i] = sign * p / m
    return out


def beta_family_eval(y, m, coeffs, dcoeffs, ddcoeffs, deriv):
    """Evaluate the renormalizer (or a derivative) on an array of values."""
    y = np.asarray(y, dtype=np.float64)
    if USING_NUMBA:
        return _beta_numba(np.ascontiguousarray(y), float(m), coeffs,
                           dcoeffs, ddcoeffs, int(deriv))
    return _beta_numpy(y, float(m), coeffs, dcoeffs, ddcoeffs, deriv)
