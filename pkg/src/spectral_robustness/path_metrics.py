"""Prediction-trace metrics: high frequency fraction and consistent distance.

A trace is the (T, K) matrix of class probabilities a model produced along one
interpolation path. HFF measures how much of the class-averaged 1D Fourier
amplitude of those probability sequences sits above a frequency threshold;
consistent distance is the first step whose argmax class differs from the
starting one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, UndefinedMetricError

# Of the 50 one-sided bins at T=100, bins above 10 count as high frequency.
DEFAULT_HFF_THRESHOLD = 10

ROW_SUM_TOLERANCE = 1e-4


@dataclass
class PredictionTrace:
    """Row-stochastic (T, K) probability matrix for one path."""

    probs: np.ndarray
    path_id: str = ""

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 2:
            raise InvalidInputError(f"trace must be a (T, K) matrix, got shape {probs.shape}")
        t, k = probs.shape
        if t < 2 or k < 2:
            raise InvalidInputError(f"trace needs T >= 2 and K >= 2, got {probs.shape}")
        if not np.all(np.isfinite(probs)):
            raise InvalidInputError(f"trace {self.path_id!r} contains non-finite values")
        if np.any(probs < 0):
            raise InvalidInputError(f"trace {self.path_id!r} contains negative probabilities")
        sums = probs.sum(axis=1)
        bad = np.nonzero(np.abs(sums - 1.0) > ROW_SUM_TOLERANCE)[0]
        if bad.size:
            raise InvalidInputError(
                f"trace {self.path_id!r}: row {bad[0]} sums to {sums[bad[0]]:.6f}, not 1"
            )
        self.probs = probs


@dataclass
class PathMetrics:
    """HFF and CD for one path."""

    path_id: str
    hff: float
    cd: int


@dataclass
class MetricSummary:
    """Mean with sample std and Gaussian 95% CI (mean +/- 1.96*std/sqrt(n))."""

    mean: float
    sample_std: float
    n: int
    ci95_low: float
    ci95_high: float


def hff(trace: PredictionTrace, threshold_k: int = DEFAULT_HFF_THRESHOLD) -> float:
    """Fraction of class-averaged one-sided DFT amplitude above threshold_k.

    Per class, the length-T probability sequence is transformed to bins
    0..floor(T/2); the magnitudes are averaged over classes, and the result is
    sum(bins > threshold_k) / sum(all bins), DC included in the denominator.
    A constant trace therefore scores exactly 0.
    """
    t = trace.probs.shape[0]
    if not 1 <= threshold_k <= t // 2:
        raise InvalidInputError(
            f"threshold_k must be in [1, {t // 2}] for T={t}, got {threshold_k}"
        )
    if np.all(trace.probs == trace.probs[0]):
        # All amplitude sits at DC; return 0 exactly rather than FFT roundoff.
        return 0.0
    amplitudes = np.abs(np.fft.rfft(trace.probs, axis=0))  # (T//2 + 1, K)
    mean_amp = amplitudes.mean(axis=1)
    total = mean_amp.sum()
    if total == 0.0:
        raise UndefinedMetricError("HFF undefined for an all-zero trace")
    return float(mean_amp[threshold_k + 1 :].sum() / total)


def consistent_distance(trace: PredictionTrace) -> int:
    """1-based index of the first step classified differently from step 1.

    Ties in a row's argmax resolve to the lowest class index. Returns T when
    the argmax never changes.
    """
    classes = np.argmax(trace.probs, axis=1)
    changed = np.nonzero(classes != classes[0])[0]
    t = trace.probs.shape[0]
    return int(changed[0]) + 1 if changed.size else t


def compute_path_metrics(
    traces, threshold_k: int = DEFAULT_HFF_THRESHOLD
) -> list[PathMetrics]:
    return [
        PathMetrics(path_id=tr.path_id, hff=hff(tr, threshold_k), cd=consistent_distance(tr))
        for tr in traces
    ]


def summarize_gaussian(values) -> MetricSummary:
    """Mean, sample std (n-1 denominator, 0 when n = 1), and Gaussian 95% CI."""
    values = np.asarray(list(values), dtype=np.float64)
    if values.size == 0:
        raise InvalidInputError("cannot summarize an empty sequence")
    n = values.size
    mean = float(values.mean())
    std = float(values.std(ddof=1)) if n > 1 else 0.0
    half = 1.96 * std / np.sqrt(n)
    return MetricSummary(
        mean=mean, sample_std=std, n=int(n), ci95_low=mean - half, ci95_high=mean + half
    )
