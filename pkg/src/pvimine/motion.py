"""Quadratic speed-profile fit and ordinary / non-ordinary classification.

An undisturbed crossing speed profile is well approximated by a quadratic
polynomial over the pedestrian's ROI residence window; profiles that switch
between deceleration and acceleration leave large residuals.  The standard
deviation of the fit residuals is the motion-adaption score, thresholded at
a dataset percentile (shipped default 0.04 m/s).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FitError

#: minimum sample count for a fit (0.4 s at 25 Hz)
MIN_FIT_SAMPLES = 10
#: shipped residual-std threshold, m/s
DEFAULT_THRESHOLD = 0.04
#: dataset percentile used when deriving the threshold from data
DEFAULT_PERCENTILE = 0.95

ORDINARY = "ordinary"
NON_ORDINARY = "non_ordinary"


@dataclass(frozen=True)
class QuadraticFit:
    """Least-squares quadratic fit of v(t) over a window re-centered to 0."""

    beta: tuple[float, float, float]  # (const, linear, quadratic)
    residual_std: float
    n_samples: int
    window: tuple[float, float]


@dataclass(frozen=True)
class MotionClass:
    label: str
    threshold_used: float


def fit_quadratic(times: np.ndarray, speeds: np.ndarray,
                  min_samples: int = MIN_FIT_SAMPLES) -> QuadraticFit:
    """Fit v(t) = b1 + b2*t + b3*t^2 in the least-squares sense.

    Times are shifted so the window starts at 0 before solving (conditions
    the design matrix); ``residual_std`` is the population (divide by n)
    standard deviation of the residuals.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(speeds, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise FitError("times and speeds must be 1-D arrays of equal length")
    n = len(t)
    if n < min_samples:
        raise FitError(f"need >= {min_samples} samples for a quadratic fit, got {n}")
    window = (float(t[0]), float(t[-1]))
    ts = t - t[0]
    if np.ptp(ts) == 0:
        raise FitError("all sample times identical; design matrix is rank deficient")
    design = np.column_stack([np.ones(n), ts, ts * ts])
    beta, *_ = np.linalg.lstsq(design, v, rcond=None)
    residuals = v - design @ beta
    var = max(0.0, float(np.mean(residuals ** 2) - np.mean(residuals) ** 2))
    residual_std = float(np.sqrt(var))
    return QuadraticFit(beta=tuple(float(b) for b in beta),
                        residual_std=residual_std, n_samples=n, window=window)


def dataset_threshold(residual_stds, percentile: float = DEFAULT_PERCENTILE) -> float:
    """Linear-interpolation percentile (inclusive ranks) of the residual stds."""
    values = np.asarray(list(residual_stds), dtype=float)
    if len(values) == 0:
        raise FitError("cannot take a percentile of an empty list")
    if not 0.0 < percentile < 1.0:
        raise ValueError(f"percentile must be in (0, 1), got {percentile}")
    return float(np.percentile(values, percentile * 100.0, method="linear"))


def classify(fit: QuadraticFit, threshold: float = DEFAULT_THRESHOLD) -> MotionClass:
    """Non-ordinary iff residual_std strictly exceeds the threshold."""
    label = NON_ORDINARY if fit.residual_std > threshold else ORDINARY
    return MotionClass(label=label, threshold_used=threshold)
