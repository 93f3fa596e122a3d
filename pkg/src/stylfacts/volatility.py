"""Realized volatility estimators on OHLC bars.

Three estimators over a window of n intervals:

- Basic: sample variance of the n per-step log returns in the window
  (two-pass, window mean subtracted).  Reported on the *variance* scale.
- Parkinson: sqrt( (1/(4 n ln 2)) * sum ln(high_i/low_i)^2 ).  Std scale.
- Rogers-Satchell: sqrt( (1/n) * sum [ln(h/c) ln(h/o) + ln(l/c) ln(l/o)] ).
  Std scale.  The radicand can go negative in samples; it is clamped to 0,
  with a warning when it falls below -1e-12 relative to the term magnitude.

`scale="std"` converts Basic to the common standard-deviation scale so the
three estimators are directly comparable.

Window alignment: a window of n intervals ends at bar index e and covers
returns (e-n, e] / bars [e-n+1, e]; its output carries bar e's timestamp.
With stride s the window ends are n, n+s, n+2s, ... so all estimator kinds
share the same grid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateInputError, InsufficientDataError
from .series import PriceSeries

FOUR_LN2 = 4.0 * math.log(2.0)

_KINDS = ("basic", "parkinson", "rogers_satchell")


@dataclass(frozen=True)
class VolatilityWindow:
    """n intervals per window, windows every `stride` bars."""

    n: int
    stride: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("window n must be >= 1")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")


@dataclass(frozen=True)
class VolatilitySeries:
    """Rolling estimates; positions are the bar indices of the window ends."""

    values: np.ndarray
    timestamps: np.ndarray
    positions: np.ndarray
    kind: str
    window: VolatilityWindow
    scale: str  # "variance" (basic native) or "std"

    def __len__(self) -> int:
        return len(self.values)

    def as_std(self) -> "VolatilitySeries":
        if self.scale == "std":
            return self
        return VolatilitySeries(np.sqrt(self.values), self.timestamps, self.positions,
                                self.kind, self.window, "std")


def basic_volatility(returns) -> float:
    """Sample variance of the window returns (the Basic estimator)."""
    r = np.asarray(returns, dtype=float).reshape(-1)
    if len(r) < 2:
        raise InsufficientDataError("basic estimator needs at least 2 returns")
    return float(r.var(ddof=1))


def parkinson_volatility(high, low) -> float:
    h = np.asarray(high, dtype=float).reshape(-1)
    l = np.asarray(low, dtype=float).reshape(-1)
    if len(h) != len(l) or len(h) < 1:
        raise InsufficientDataError("parkinson estimator needs >= 1 bar")
    if np.any(l <= 0) or np.any(h < l):
        raise DegenerateInputError("parkinson needs high >= low > 0")
    x = np.log(h / l)
    return float(np.sqrt(np.mean(x * x) / FOUR_LN2))


def rs_terms(open_, high, low, close) -> np.ndarray:
    """Per-bar Rogers-Satchell terms ln(h/c) ln(h/o) + ln(l/c) ln(l/o)."""
    o = np.asarray(open_, dtype=float)
    h = np.asarray(high, dtype=float)
    l = np.asarray(low, dtype=float)
    c = np.asarray(close, dtype=float)
    return np.log(h / c) * np.log(h / o) + np.log(l / c) * np.log(l / o)


def _rs_finalize(radicand, term_scale) -> np.ndarray:
    rad = np.atleast_1d(np.asarray(radicand, dtype=float))
    neg = rad < 0.0
    if np.any(neg):
        severe = rad < -1e-12 * np.maximum(term_scale, np.finfo(float).tiny)
        if np.any(severe):
            warnings.warn(
                f"Rogers-Satchell radicand negative beyond rounding in {int(np.sum(severe))} "
                "window(s); clamped to 0", RuntimeWarning)
        rad = np.where(neg, 0.0, rad)
    return np.sqrt(rad)


def rogers_satchell_volatility(open_, high, low, close) -> float:
    t = rs_terms(open_, high, low, close)
    if len(t) < 1:
        raise InsufficientDataError("rogers-satchell needs >= 1 bar")
    return float(_rs_finalize(np.mean(t), float(np.mean(np.abs(t))))[0])


def rolling_volatility(series: PriceSeries, kind: str, window: VolatilityWindow,
                       scale: str = "native") -> VolatilitySeries:
    """Rolling estimator over a PriceSeries.  See module docstring for layout."""
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}")
    if scale not in ("native", "std"):
        raise ValueError("scale must be 'native' or 'std'")
    n, stride = window.n, window.stride
    nbars = len(series)
    if kind == "basic" and n < 2:
        raise InsufficientDataError("basic estimator needs window n >= 2")
    if nbars - 1 < n:
        raise InsufficientDataError(f"need more than {n} bars for window n={n}")

    if kind == "basic":
        returns = np.diff(np.log(series.close))
        values = kernels.rolling_var(returns, n, stride)
        out_scale = "variance"
        if scale == "std":
            values = np.sqrt(values)
            out_scale = "std"
    elif kind == "parkinson":
        x = np.log(series.high[1:] / series.low[1:])
        values = np.sqrt(kernels.rolling_mean(x * x, n, stride) / FOUR_LN2)
        out_scale = "std"
    else:
        t = rs_terms(series.open[1:], series.high[1:], series.low[1:], series.close[1:])
        rad = kernels.rolling_mean(t, n, stride)
        term_scale = kernels.rolling_mean(np.abs(t), n, stride)
        values = _rs_finalize(rad, term_scale)
        out_scale = "std"

    ends = n + stride * np.arange(len(values))
    return VolatilitySeries(values=values, timestamps=series.timestamps[ends].copy(),
                            positions=ends, kind=kind, window=window, scale=out_scale)


def default_window(step_seconds: int) -> int:
    """Window length per sampling scale: 12 for monthly bars, 21 for daily,
    one day of bars for intraday grids."""
    if step_seconds >= 28 * 86400:
        return 12
    if step_seconds >= 86400:
        return 21
    return max(2, 86400 // step_seconds)
