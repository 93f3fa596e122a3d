"""Hot numeric kernels: numba-jitted loops with a pure-numpy fallback.

Path selection happens once at import time.  numba is used when it is
importable unless the environment sets STYLFACTS_NO_NUMBA=1, in which case
the numpy implementations take over.  Both paths implement the same
arithmetic; `benchmarks/bench_kernels.py` times them against each other and
checks agreement.

Kernels live here because they are the measured hot spots: the GARCH/GJR
likelihood filter runs once per optimizer evaluation (thousands of times per
fit), the simulators are sequential recursions that numpy cannot vectorize,
rolling window estimators touch every bar, and the Zumbach null band
resamples the series a thousand times.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.signal import lfilter

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an install-time choice
    numba = None
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("STYLFACTS_NO_NUMBA", "") != "1"


# ---------------------------------------------------------------------------
# GARCH / GJR conditional-variance filters
# ---------------------------------------------------------------------------

def garch_filter_np(eps2, omega, alpha, beta, h1):
    """Conditional variance path h_t for demeaned squared returns eps2.

    h[0] = h1, h[t] = omega + alpha*eps2[t-1] + beta*h[t-1].  The recursion is
    linear in h, so the numpy path runs it through a first-order IIR filter.
    """
    forcing = np.empty_like(eps2)
    forcing[0] = h1
    forcing[1:] = omega + alpha * eps2[:-1]
    return lfilter([1.0], [1.0, -beta], forcing)


def _garch_filter_loop(eps2, omega, alpha, beta, h1):
    n = eps2.shape[0]
    h = np.empty(n)
    h[0] = h1
    for t in range(1, n):
        h[t] = omega + alpha * eps2[t - 1] + beta * h[t - 1]
    return h


def gjr_filter_np(eps2, neg, omega, alpha, gamma, beta, h1):
    """GJR variant: the ARCH coefficient is alpha + gamma on bars where the
    demeaned return was negative (neg is a 0/1 array)."""
    coef = alpha + gamma * neg
    forcing = np.empty_like(eps2)
    forcing[0] = h1
    forcing[1:] = omega + coef[:-1] * eps2[:-1]
    return lfilter([1.0], [1.0, -beta], forcing)


def _gjr_filter_loop(eps2, neg, omega, alpha, gamma, beta, h1):
    n = eps2.shape[0]
    h = np.empty(n)
    h[0] = h1
    for t in range(1, n):
        h[t] = omega + (alpha + gamma * neg[t - 1]) * eps2[t - 1] + beta * h[t - 1]
    return h


# ---------------------------------------------------------------------------
# Recursive simulators (state-dependent coefficients, not lfilter-able)
# ---------------------------------------------------------------------------

def _garch_sim_loop(z, omega, alpha, gamma, beta, h1, burn):
    """Simulate r_t = sqrt(h_t) z_t; gamma=0 gives plain GARCH.

    z covers burn + n steps; the first `burn` draws warm up the recursion and
    are discarded.  Returns (r, h) for the kept steps.
    """
    total = z.shape[0]
    n = total - burn
    r = np.empty(n)
    h_out = np.empty(n)
    h = h1
    for t in range(total):
        zt = z[t]
        rt = np.sqrt(h) * zt
        if t >= burn:
            r[t - burn] = rt
            h_out[t - burn] = h
        h = omega + (alpha + (gamma if zt < 0.0 else 0.0)) * rt * rt + beta * h
    return r, h_out


def garch_sim_np(z, omega, alpha, gamma, beta, h1, burn):
    return _garch_sim_loop(z, omega, alpha, gamma, beta, h1, burn)


def ou_path_np(z, x0, mu, b, noise_scale):
    """Exact OU discretization x_{t+1} = mu + (x_t - mu) * b + noise_scale * z_t.

    Returns the path including x0 (length len(z) + 1).  Linear recursion, so
    the numpy path uses an IIR filter on the deviations from mu.
    """
    dev = lfilter([1.0], [1.0, -b], noise_scale * z, zi=np.array([b * (x0 - mu)]))[0]
    out = np.empty(z.shape[0] + 1)
    out[0] = x0
    out[1:] = mu + dev
    return out


def _ou_path_loop(z, x0, mu, b, noise_scale):
    n = z.shape[0]
    out = np.empty(n + 1)
    out[0] = x0
    x = x0
    for t in range(n):
        x = mu + (x - mu) * b + noise_scale * z[t]
        out[t + 1] = x
    return out


# ---------------------------------------------------------------------------
# Rolling window reductions
# ---------------------------------------------------------------------------

def rolling_var_np(x, n, stride):
    """Sample variance (ddof=1) over windows [i*stride, i*stride + n)."""
    win = np.lib.stride_tricks.sliding_window_view(x, n)[::stride]
    return win.var(axis=1, ddof=1)


def _rolling_var_loop(x, n, stride):
    count = (x.shape[0] - n) // stride + 1
    out = np.empty(count)
    for i in range(count):
        s = i * stride
        m = 0.0
        for j in range(s, s + n):
            m += x[j]
        m /= n
        acc = 0.0
        for j in range(s, s + n):
            d = x[j] - m
            acc += d * d
        out[i] = acc / (n - 1)
    return out


def rolling_mean_np(x, n, stride):
    """Plain mean over the same window layout (feeds Parkinson / RS)."""
    win = np.lib.stride_tricks.sliding_window_view(x, n)[::stride]
    return win.mean(axis=1)


def _rolling_mean_loop(x, n, stride):
    count = (x.shape[0] - n) // stride + 1
    out = np.empty(count)
    for i in range(count):
        s = i * stride
        acc = 0.0
        for j in range(s, s + n):
            acc += x[j]
        out[i] = acc / n
    return out


# ---------------------------------------------------------------------------
# Zumbach statistic and its block-bootstrap null band
# ---------------------------------------------------------------------------

def zumbach_z_np(a, b, n_lags):
    """Z(delta) = C(delta) - C(-delta) for delta = 1..n_lags.

    a is the (squared) volatility proxy, b the squared returns, aligned on the
    same grid.  C(delta) pairs a_t with b_{t-delta} and is normalized by
    (n_valid * std(a) * std(b)), population std, mean-centered in a.  Centering
    only a is enough: sum (a_t - abar) * b equals the full cross-covariance.
    """
    n = a.shape[0]
    abar = a.mean()
    sa = a.std()
    sb = b.std()
    z = np.empty(n_lags)
    for lag in range(1, n_lags + 1):
        past = np.dot(a[lag:] - abar, b[:-lag])
        futr = np.dot(a[:-lag] - abar, b[lag:])
        z[lag - 1] = (past - futr) / ((n - lag) * sa * sb)
    return z


def _zumbach_boot_loop(a, b, starts, block_len, n_lags):
    """Z on circular-block resamples of the aligned pair (a, b).

    starts[r, j] is the start index of block j in resample r; blocks are
    copied jointly from both series so their cross-dependence survives.
    Returns (n_resamples, n_lags).
    """
    n = a.shape[0]
    n_res, n_blocks = starts.shape
    out = np.empty((n_res, n_lags))
    ar = np.empty(n)
    br = np.empty(n)
    for r in range(n_res):
        pos = 0
        for j in range(n_blocks):
            s = starts[r, j]
            for k in range(block_len):
                if pos < n:
                    idx = s + k
                    if idx >= n:
                        idx -= n
                    ar[pos] = a[idx]
                    br[pos] = b[idx]
                    pos += 1
        sa = 0.0
        saa = 0.0
        sb = 0.0
        sbb = 0.0
        for t in range(n):
            sa += ar[t]
            saa += ar[t] * ar[t]
            sb += br[t]
            sbb += br[t] * br[t]
        abar = sa / n
        astd = np.sqrt(saa / n - abar * abar)
        bstd = np.sqrt(sbb / n - (sb / n) * (sb / n))
        for lag in range(1, n_lags + 1):
            s_ab_past = 0.0
            s_b_past = 0.0
            s_ab_futr = 0.0
            s_b_futr = 0.0
            for t in range(lag, n):
                s_ab_past += ar[t] * br[t - lag]
                s_b_past += br[t - lag]
                s_ab_futr += ar[t - lag] * br[t]
                s_b_futr += br[t]
            c_past = (s_ab_past - abar * s_b_past)
            c_futr = (s_ab_futr - abar * s_b_futr)
            out[r, lag - 1] = (c_past - c_futr) / ((n - lag) * astd * bstd)
    return out


def zumbach_boot_np(a, b, starts, block_len, n_lags, chunk=64):
    """Vectorized fallback: processes resamples in chunks to bound memory."""
    n = a.shape[0]
    n_res = starts.shape[0]
    offs = np.arange(block_len)
    out = np.empty((n_res, n_lags))
    for lo in range(0, n_res, chunk):
        hi = min(lo + chunk, n_res)
        idx = (starts[lo:hi, :, None] + offs[None, None, :]).reshape(hi - lo, -1)[:, :n] % n
        ar = a[idx]
        br = b[idx]
        abar = ar.mean(axis=1)
        astd = ar.std(axis=1)
        bstd = br.std(axis=1)
        for lag in range(1, n_lags + 1):
            past = np.einsum("ij,ij->i", ar[:, lag:], br[:, :-lag]) - abar * br[:, :-lag].sum(axis=1)
            futr = np.einsum("ij,ij->i", ar[:, :-lag], br[:, lag:]) - abar * br[:, lag:].sum(axis=1)
            out[lo:hi, lag - 1] = (past - futr) / ((n - lag) * astd * bstd)
    return out


# ---------------------------------------------------------------------------
# Path selection
# ---------------------------------------------------------------------------

if _HAVE_NUMBA:
    _njit = numba.njit(cache=True)
    garch_filter_nb = _njit(_garch_filter_loop)
    gjr_filter_nb = _njit(_gjr_filter_loop)
    garch_sim_nb = _njit(_garch_sim_loop)
    ou_path_nb = _njit(_ou_path_loop)
    rolling_var_nb = _njit(_rolling_var_loop)
    rolling_mean_nb = _njit(_rolling_mean_loop)
    zumbach_boot_nb = _njit(_zumbach_boot_loop)

if USE_NUMBA:
    garch_filter = garch_filter_nb
    gjr_filter = gjr_filter_nb
    garch_sim = garch_sim_nb
    ou_path = ou_path_nb
    rolling_var = rolling_var_nb
    rolling_mean = rolling_mean_nb
    zumbach_boot = zumbach_boot_nb
else:
    garch_filter = garch_filter_np
    gjr_filter = gjr_filter_np
    garch_sim = garch_sim_np
    ou_path = ou_path_np
    rolling_var = rolling_var_np
    rolling_mean = rolling_mean_np
    zumbach_boot = zumbach_boot_np

zumbach_z = zumbach_z_np
