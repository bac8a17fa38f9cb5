"""Scaling fits on measured series: entropy slopes, bond-dimension exponents, plateaus."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError, ParameterError

MIN_FIT_POINTS = 4
MIN_SATURATION_POINTS = 6


@dataclass
class Series:
    """Points ``(x, y)`` with strictly increasing ``x`` plus free-form metadata."""

    x: np.ndarray
    y: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise DataError("x and y must be 1-D arrays of equal length")
        if np.any(np.diff(self.x) <= 0):
            raise DataError("x must be strictly increasing")

    def __len__(self):
        return self.x.size

    def log_x(self) -> "Series":
        """Same series against ``log x``."""
        return Series(np.log(self.x), self.y, dict(self.metadata))

    def log_xy(self) -> "Series":
        return Series(np.log(self.x), np.log(self.y), dict(self.metadata))


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    window: tuple
    residual_rms: float
    n_points: int


def default_window(series: Series) -> tuple:
    """Upper half of the measured range."""
    lo, hi = series.x[0], series.x[-1]
    return (0.5 * (lo + hi), hi)


def fit_line(series: Series, window: tuple | None = None) -> ScalingFit:
    """Ordinary least squares of ``y`` on ``x`` restricted to ``window`` (inclusive).

    Raises
    ------
    DataError
        Fewer than four points inside the window.
    """
    if window is None:
        window = default_window(series)
    lo, hi = window
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    mask = (series.x >= lo - tol) & (series.x <= hi + tol)
    n = int(mask.sum())
    if n < MIN_FIT_POINTS:
        raise DataError(f"only {n} points in window [{lo:g}, {hi:g}]; need {MIN_FIT_POINTS}")
    x, y = series.x[mask], series.y[mask]
    a = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - (slope * x + intercept)
    return ScalingFit(float(slope), float(intercept), (float(lo), float(hi)),
                      float(np.sqrt(np.mean(resid ** 2))), n)


def truncation_dimension(weights, eps: float) -> int:
    """Smallest ``D`` whose discarded tail ``sum_{k>D} w_k`` is at most ``eps``."""
    if not 0 <= eps < 1:
        raise ParameterError("eps must lie in [0, 1)")
    w = np.sort(np.asarray(getattr(weights, "weights", weights), dtype=float))[::-1]
    if w.size == 0:
        return 0
    # tail[D] = sum of w[D:], the error after keeping D values
    tail = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])
    return int(np.argmax(tail <= eps * (1 + 1e-12)))


def extract_D_epsilon(betas: Sequence[float], spectra, eps: float) -> Series:
    """``D_eps(beta)`` from one center-bond spectrum per inverse temperature."""
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)")
    dims = [truncation_dimension(s, eps) for s in spectra]
    return Series(np.asarray(betas, dtype=float), np.asarray(dims, dtype=float),
                  {"quantity": "D_eps", "eps": eps})


def detect_saturation(series: Series, tolerance: float) -> tuple[bool, float]:
    """Check whether the tail of a series has flattened out.

    The last third of the points (at least two) is saturated when its total
    variation is at most ``tolerance`` and no single increment exceeds
    ``tolerance / 6``.  The plateau value is the mean over that segment.
    """
    n = len(series)
    if n < MIN_SATURATION_POINTS:
        raise DataError(f"need at least {MIN_SATURATION_POINTS} points, got {n}")
    k = max(2, int(np.ceil(n / 3)))
    tail = series.y[-k:]
    steps = np.abs(np.diff(tail))
    saturated = bool(steps.sum() <= tolerance and steps.max() <= tolerance / 6)
    return saturated, float(tail.mean())
