"""Least-squares utilities for scaling analyses.

Power laws and exponential decay constants are fitted as straight lines in
log space (deterministic, no initialization), matching how such data is
judged on log-scale plots.  Residuals are root-mean-square in the fitted
(log) space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .observables import EnvelopePoints


@dataclass(frozen=True)
class PowerLawFit:
    """y ~ amplitude * x**exponent with log-space rms residual."""

    amplitude: float
    exponent: float
    rms_residual: float
    n_points: int


@dataclass(frozen=True)
class DecayFit:
    """peak(t) ~ amplitude * exp(-t / tau) with log-space rms residual."""

    tau: float
    amplitude: float
    rms_residual: float
    n_points: int


def fit_power_law(x, y) -> PowerLawFit:
    """Ordinary least squares on (log x, log y); needs >= 3 positive points."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise UsageError("x and y must be 1-d arrays of equal length")
    if x.size < 3:
        raise UsageError(f"power-law fit needs >= 3 points, got {x.size}")
    if np.any(x <= 0) or np.any(y <= 0):
        raise UsageError("power-law fit needs strictly positive x and y")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return PowerLawFit(
        amplitude=float(np.exp(intercept)),
        exponent=float(slope),
        rms_residual=float(np.sqrt(np.mean(resid**2))),
        n_points=int(x.size),
    )


def fit_decay_constant(envelope: EnvelopePoints) -> DecayFit:
    """Least squares on (t, log peak) with intercept; tau = -1/slope."""
    t = np.asarray(envelope.t, dtype=np.float64)
    peaks = np.asarray(envelope.peaks, dtype=np.float64)
    if t.size < 3:
        raise UsageError(f"decay fit needs >= 3 peaks, got {t.size}")
    if np.any(peaks <= 0):
        raise UsageError("decay fit needs strictly positive peaks")
    ly = np.log(peaks)
    slope, intercept = np.polyfit(t, ly, 1)
    if slope >= 0:
        raise UsageError("peaks do not decay: fitted slope is non-negative")
    resid = ly - (slope * t + intercept)
    return DecayFit(
        tau=float(-1.0 / slope),
        amplitude=float(np.exp(intercept)),
        rms_residual=float(np.sqrt(np.mean(resid**2))),
        n_points=int(t.size),
    )


def collapse_check(curves, delta: float, n_grid: int = 200) -> float:
    """Maximum vertical spread of size-rescaled curves on their common window.

    ``curves`` is a sequence of ``(size, t, y)`` triples.  Each time axis is
    rescaled by ``size**-delta``; the curves are linearly interpolated on a
    shared grid over the overlapping rescaled-time window and the maximum
    over the grid of (max - min) across curves is returned.  A single curve
    trivially collapses (spread 0).
    """
    prepared = []
    for size, t, y in curves:
        t = np.asarray(t, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if t.size != y.size or t.size < 2:
            raise UsageError("each curve needs >= 2 samples")
        prepared.append((t / float(size) ** delta, y))
    if not prepared:
        raise UsageError("collapse_check needs at least one curve")
    if len(prepared) == 1:
        return 0.0
    lo = max(u.min() for u, _ in prepared)
    hi = min(u.max() for u, _ in prepared)
    if hi <= lo:
        raise UsageError("rescaled curves have no overlapping time window")
    grid = np.linspace(lo, hi, n_grid)
    stack = np.vstack([np.interp(grid, u, y) for u, y in prepared])
    return float((stack.max(axis=0) - stack.min(axis=0)).max())
