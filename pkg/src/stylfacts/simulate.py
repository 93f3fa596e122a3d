"""Synthetic OHLCV generators: GBM, OU on the log price, GARCH(1,1), and
GJR-GARCH, all sharing one bar-building convention.

Each model produces per-step log returns r_t and a per-step volatility s_t.
A run of n_steps steps emits n_steps + 1 bars: a flat seed bar holding the
start price, then one bar per step, so close-to-close log returns recover
the model increments exactly.  A bar covers one model step: the step is
split into `substeps` equal
slices whose increments sum to r_t exactly (Brownian-bridge conditioning of
the substep grid on the endpoints), and high/low come from one of

- "bridge": per-slice extremes drawn from the exact distribution of a
  Brownian extreme conditional on the slice endpoints, so the bar range has
  no grid-discretization bias;
- "substep": max/min over the substep grid points only.  Cheaper and simple
  to reason about, but systematically narrow; range-based estimators will
  read low with this mode.

Within-bar dynamics are Brownian with the step's own volatility for every
model, which treats volatility (GARCH) and drift pull (OU) as constant inside
one bar.

Determinism: all draws come from a single numpy Generator seeded by
SeedSequence(seed).  Draw order is fixed: model innovations, then substep
normals, then the high uniforms, then the low uniforms, then volume noise.
Equal specs give byte-identical series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .series import PriceSeries

EXTREME_MODES = ("bridge", "substep")
VOLUME_MODES = ("none", "proportional")
INNOVATIONS = ("normal", "student_t")

VOLUME_SCALE = 1e6


@dataclass(frozen=True)
class _SimCommon:
    n_steps: int
    seed: int = 0
    substeps: int = 16
    extremes: str = "bridge"
    step_seconds: int = 86400
    t0: int = 0
    volume_mode: str = "proportional"

    def _check_common(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        if self.extremes not in EXTREME_MODES:
            raise ValueError(f"extremes must be one of {EXTREME_MODES}")
        if self.volume_mode not in VOLUME_MODES:
            raise ValueError(f"volume_mode must be one of {VOLUME_MODES}")
        if self.step_seconds < 1:
            raise ValueError("step_seconds must be >= 1")


@dataclass(frozen=True)
class GbmSpec(_SimCommon):
    """dX = mu dt + sigma dW on the log price, unit time step per bar.

    mu is the drift of the log price itself (per step); no sigma^2/2
    adjustment is applied.
    """
    mu: float = 0.0
    sigma: float = 0.01
    p0: float = 1.0

    def __post_init__(self):
        self._check_common()
        if self.sigma < 0.0:
            raise ValueError("sigma must be >= 0")
        if not (self.p0 > 0.0):
            raise ValueError("p0 must be > 0")


@dataclass(frozen=True)
class OuSpec(_SimCommon):
    """dX = theta (mu - X) dt + sigma dW on the log price, exact one-step
    discretization x_{t+1} = mu + (x_t - mu) e^-theta + eta_t."""
    theta: float = 0.05
    mu: float = 0.0
    sigma: float = 0.01
    x0: Optional[float] = None  # defaults to mu

    def __post_init__(self):
        self._check_common()
        if not (self.theta > 0.0):
            raise ValueError("theta must be > 0")
        if self.sigma < 0.0:
            raise ValueError("sigma must be >= 0")


@dataclass(frozen=True)
class GarchSpec(_SimCommon):
    """r_t = mean + sqrt(h_t) z_t, h_{t+1} = omega + alpha (r_t - mean)^2 + beta h_t."""
    omega: float = 1e-6
    alpha: float = 0.10
    beta: float = 0.85
    mean: float = 0.0
    innovation: str = "normal"
    df: Optional[float] = None
    burn_in: int = 1000
    p0: float = 1.0

    gamma: float = 0.0  # leverage term; stays 0 for the symmetric model

    def __post_init__(self):
        self._check_common()
        if not (self.omega > 0.0):
            raise ValueError("omega must be > 0")
        if self.alpha < 0.0 or self.beta < 0.0 or self.alpha + self.gamma < 0.0:
            raise ValueError("ARCH coefficients must stay non-negative")
        if self.alpha + 0.5 * self.gamma + self.beta >= 1.0:
            raise ValueError("stationarity requires alpha + gamma/2 + beta < 1")
        if self.innovation not in INNOVATIONS:
            raise ValueError(f"innovation must be one of {INNOVATIONS}")
        if self.innovation == "student_t":
            if self.df is None or not (self.df > 2.0):
                raise ValueError("student_t innovations need df > 2 for unit variance")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if not (self.p0 > 0.0):
            raise ValueError("p0 must be > 0")

    @property
    def unconditional_variance(self) -> float:
        return self.omega / (1.0 - self.alpha - 0.5 * self.gamma - self.beta)


@dataclass(frozen=True)
class GjrSpec(GarchSpec):
    """GARCH(1,1) with the leverage term gamma active on negative returns:
    h_{t+1} = omega + (alpha + gamma 1[r_t < mean]) (r_t - mean)^2 + beta h_t."""
    alpha: float = 0.05  # half of gamma moves from alpha so the default stays stationary
    gamma: float = 0.10


def _bars_from_steps(x, step_vols, rng, spec) -> PriceSeries:
    """Build OHLCV bars over a log-price path x (length n+1, x[0] = start).

    Emits n+1 bars: a flat seed bar at t0 holding the start price, then one
    bar per step, so close-to-close log returns reproduce every step
    increment.  Bar t opens at exp(x[t-1]) and closes at exp(x[t]).  Sub-bar
    structure and extremes per the module docstring.
    """
    n = len(x) - 1
    m = spec.substeps
    r = np.diff(x)
    s = np.broadcast_to(np.asarray(step_vols, dtype=float), (n,))

    w = rng.standard_normal((n, m))
    inc = r[:, None] / m + (s[:, None] / math.sqrt(m)) * (w - w.mean(axis=1, keepdims=True))
    sub = np.empty((n, m + 1))
    sub[:, 0] = x[:-1]
    np.cumsum(inc, axis=1, out=sub[:, 1:])
    sub[:, 1:] += x[:-1, None]

    if spec.extremes == "bridge":
        dx = np.diff(sub, axis=1)
        var_sub = (s * s / m)[:, None]
        # 1 - random() lies in (0, 1]: log never overflows
        u = 1.0 - rng.random((n, m))
        hi_sub = 0.5 * (sub[:, :-1] + sub[:, 1:] + np.sqrt(dx * dx - 2.0 * var_sub * np.log(u)))
        v = 1.0 - rng.random((n, m))
        lo_sub = 0.5 * (sub[:, :-1] + sub[:, 1:] - np.sqrt(dx * dx - 2.0 * var_sub * np.log(v)))
        hi = hi_sub.max(axis=1)
        lo = lo_sub.min(axis=1)
    else:
        hi = sub.max(axis=1)
        lo = sub.min(axis=1)

    # substep roundoff must not leave close/open outside [low, high]
    hi = np.maximum(hi, np.maximum(x[:-1], x[1:]))
    lo = np.minimum(lo, np.minimum(x[:-1], x[1:]))

    p0 = math.exp(x[0])
    open_ = np.concatenate(([p0], np.exp(x[:-1])))
    close = np.concatenate(([p0], np.exp(x[1:])))
    high = np.concatenate(([p0], np.exp(hi)))
    low = np.concatenate(([p0], np.exp(lo)))

    if spec.volume_mode == "proportional":
        r_abs = np.abs(r)
        noise_sd = 0.25 * VOLUME_SCALE * float(r_abs.mean())
        v = VOLUME_SCALE * r_abs + np.abs(rng.standard_normal(n) * noise_sd)
        # the seed bar spans no trading interval
        volume = np.concatenate(([0.0], v))
    else:
        volume = np.full(n + 1, np.nan)

    ts = spec.t0 + spec.step_seconds * np.arange(n + 1, dtype=np.int64)
    return PriceSeries(timestamps=ts, open_=open_, high=high, low=low, close=close,
                       volume=volume)


def _model_innovations(rng, spec, size: int) -> np.ndarray:
    if getattr(spec, "innovation", "normal") == "student_t":
        z = rng.standard_t(spec.df, size=size)
        return z * math.sqrt((spec.df - 2.0) / spec.df)
    return rng.standard_normal(size)


def simulate_gbm(spec: GbmSpec) -> PriceSeries:
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    z = rng.standard_normal(spec.n_steps)
    r = spec.mu + spec.sigma * z
    x0 = math.log(spec.p0)
    x = np.empty(spec.n_steps + 1)
    x[0] = x0
    np.cumsum(r, out=x[1:])
    x[1:] += x0
    return _bars_from_steps(x, spec.sigma, rng, spec)


def simulate_ou(spec: OuSpec) -> PriceSeries:
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    z = rng.standard_normal(spec.n_steps)
    b = math.exp(-spec.theta)
    # exact transition noise: Var = sigma^2 (1 - b^2) / (2 theta)
    trans_sd = spec.sigma * math.sqrt((1.0 - b * b) / (2.0 * spec.theta))
    x0 = spec.mu if spec.x0 is None else spec.x0
    x = kernels.ou_path(z, x0, spec.mu, b, trans_sd)
    return _bars_from_steps(x, trans_sd, rng, spec)


def _simulate_garch_family(spec: GarchSpec) -> PriceSeries:
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    z = _model_innovations(rng, spec, spec.burn_in + spec.n_steps)
    eps, h = kernels.garch_sim(z, spec.omega, spec.alpha, spec.gamma, spec.beta,
                               spec.unconditional_variance, spec.burn_in)
    r = spec.mean + eps
    x0 = math.log(spec.p0)
    x = np.empty(spec.n_steps + 1)
    x[0] = x0
    np.cumsum(r, out=x[1:])
    x[1:] += x0
    return _bars_from_steps(x, np.sqrt(h), rng, spec)


def simulate_garch11(spec: GarchSpec) -> PriceSeries:
    if type(spec) is GjrSpec:
        raise TypeError("use simulate_gjr for GjrSpec")
    return _simulate_garch_family(spec)


def simulate_gjr(spec: GjrSpec) -> PriceSeries:
    return _simulate_garch_family(spec)


def simulate(spec) -> PriceSeries:
    """Dispatch to the simulator matching the model spec class."""
    if isinstance(spec, GjrSpec):
        return simulate_gjr(spec)
    if isinstance(spec, GarchSpec):
        return simulate_garch11(spec)
    if isinstance(spec, OuSpec):
        return simulate_ou(spec)
    if isinstance(spec, GbmSpec):
        return simulate_gbm(spec)
    raise TypeError(f"unknown simulation spec {type(spec).__name__}")
