"""Probit-domain robustness statistics.

OOD accuracy is regressed against ID accuracy (or any model metric) after
mapping accuracies through the inverse standard normal CDF, where ID/OOD
relationships are approximately linear. Fits are computed per group and the
reported slope and R^2 are unweighted means over groups, never pooled refits.
Accuracy uncertainty uses exact Clopper-Pearson intervals.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .errors import DegenerateFitError, InvalidInputError

PROBIT_EPS = 1e-6
ID_ACCURACY = "ID accuracy"


@dataclass
class AccuracyRecord:
    model_id: str
    group: str
    dataset_id: str
    correct: int
    total: int

    def __post_init__(self):
        if self.total < 1 or not 0 <= self.correct <= self.total:
            raise InvalidInputError(
                f"invalid counts for {self.model_id}: {self.correct}/{self.total}"
            )

    @property
    def accuracy(self) -> float:
        return self.correct / self.total


@dataclass
class MetricRecord:
    model_id: str
    metric_name: str
    value: float
    value_kind: str = "raw"  # "accuracy" values are probit-transformed as predictors

    def __post_init__(self):
        if self.value_kind not in ("accuracy", "raw"):
            raise InvalidInputError(f"unknown value_kind {self.value_kind!r}")
        if self.value_kind == "accuracy" and not 0.0 <= self.value <= 1.0:
            raise InvalidInputError(
                f"accuracy metric {self.metric_name!r} must be in [0, 1], got {self.value}"
            )


@dataclass
class GroupFit:
    group: str
    slope: float
    intercept: float
    r_squared: float
    n_models: int


@dataclass
class ProbitRegression:
    """Per-group probit-domain fits plus their unweighted averages."""

    per_group: list[GroupFit]
    averaged_slope: float
    averaged_r2: float
    x_spec: str
    x_transform: str  # "probit" or "raw", recorded so outputs are self-describing
    ood_dataset: str
    skipped: list[tuple[str, str]] = field(default_factory=list)


def clopper_pearson(correct: int, total: int, alpha: float = 0.05) -> tuple[float, float]:
    """Exact binomial CI from Beta quantiles; closed at 0 and 1 for edge counts."""
    if total < 1 or not 0 <= correct <= total:
        raise InvalidInputError(f"invalid counts: {correct}/{total}")
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError(f"alpha must be in (0, 1), got {alpha}")
    low = 0.0 if correct == 0 else float(stats.beta.ppf(alpha / 2, correct, total - correct + 1))
    high = (
        1.0
        if correct == total
        else float(stats.beta.ppf(1 - alpha / 2, correct + 1, total - correct))
    )
    return low, high


def probit(p: float, eps: float = PROBIT_EPS):
    """Inverse standard normal CDF of p clamped into [eps, 1-eps]."""
    p = np.asarray(p, dtype=np.float64)
    if np.any(p < 0) or np.any(p > 1):
        raise InvalidInputError("probit input must lie in [0, 1]")
    out = special.ndtri(np.clip(p, eps, 1.0 - eps))
    return float(out) if out.ndim == 0 else out


def fit_line(xs, ys) -> tuple[float, float, float]:
    """Ordinary least squares fit; returns (slope, intercept, R^2).

    When the ys have no variance, R^2 is 1 for a perfect fit and 0 otherwise.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise InvalidInputError("xs and ys must be 1D sequences of equal length")
    n = xs.size
    if n < 2:
        raise InvalidInputError(f"need at least 2 points, got {n}")
    x_mean = xs.mean()
    y_mean = ys.mean()
    sxx = np.sum((xs - x_mean) ** 2)
    if sxx == 0.0:
        raise DegenerateFitError("all x values are identical; line is undefined")
    slope = np.sum((xs - x_mean) * (ys - y_mean)) / sxx
    intercept = y_mean - slope * x_mean
    residuals = ys - (slope * xs + intercept)
    ss_res = np.sum(residuals**2)
    ss_tot = np.sum((ys - y_mean) ** 2)
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), float(min(max(r2, 0.0), 1.0))


def grouped_regression(
    accuracies: list[AccuracyRecord],
    metrics: list[MetricRecord],
    x_spec: str,
    ood_dataset: str,
    group_by: str = "group",
    id_dataset: str | None = None,
) -> ProbitRegression:
    """Fit probit(OOD accuracy) against a predictor, per group, then average.

    The predictor is probit(ID accuracy) when x_spec == "ID accuracy",
    probit(value) for accuracy-kind metrics, and the raw value otherwise.
    Groups with fewer than 2 usable models (or a constant predictor) are
    skipped with a warning and excluded from the averages.
    """
    by_model_ood: dict[str, AccuracyRecord] = {}
    for rec in accuracies:
        if rec.dataset_id == ood_dataset:
            by_model_ood[rec.model_id] = rec
    if not by_model_ood:
        raise InvalidInputError(f"no accuracy records for OOD dataset {ood_dataset!r}")

    if x_spec == ID_ACCURACY:
        id_dataset = _resolve_id_dataset(accuracies, ood_dataset, id_dataset)
        x_values = {
            rec.model_id: probit(rec.accuracy)
            for rec in accuracies
            if rec.dataset_id == id_dataset
        }
        x_transform = "probit"
    else:
        wanted = [m for m in metrics if m.metric_name == x_spec]
        if not wanted:
            raise InvalidInputError(f"no metric records named {x_spec!r}")
        kinds = {m.value_kind for m in wanted}
        if len(kinds) != 1:
            raise InvalidInputError(f"metric {x_spec!r} mixes value kinds {sorted(kinds)}")
        x_transform = "probit" if kinds.pop() == "accuracy" else "raw"
        x_values = {
            m.model_id: probit(m.value) if x_transform == "probit" else m.value for m in wanted
        }

    groups: dict[str, list[tuple[float, float]]] = {}
    for model_id, ood_rec in by_model_ood.items():
        if model_id not in x_values:
            continue
        key = str(getattr(ood_rec, group_by))
        groups.setdefault(key, []).append((x_values[model_id], probit(ood_rec.accuracy)))

    fits: list[GroupFit] = []
    skipped: list[tuple[str, str]] = []
    for key in sorted(groups):
        points = groups[key]
        if len(points) < 2:
            reason = f"only {len(points)} usable model(s)"
            warnings.warn(f"skipping group {key!r}: {reason}")
            skipped.append((key, reason))
            continue
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        try:
            slope, intercept, r2 = fit_line(xs, ys)
        except DegenerateFitError:
            reason = "constant predictor values"
            warnings.warn(f"skipping group {key!r}: {reason}")
            skipped.append((key, reason))
            continue
        fits.append(GroupFit(key, slope, intercept, r2, len(points)))

    if not fits:
        raise InvalidInputError("no group had enough usable models to fit")
    return ProbitRegression(
        per_group=fits,
        averaged_slope=float(np.mean([f.slope for f in fits])),
        averaged_r2=float(np.mean([f.r_squared for f in fits])),
        x_spec=x_spec,
        x_transform=x_transform,
        ood_dataset=ood_dataset,
        skipped=skipped,
    )


def effective_robustness(id_acc: float, ood_acc: float, slope: float, intercept: float) -> float:
    """Probit-domain residual above the baseline line; positive means above it."""
    if not (0.0 <= id_acc <= 1.0 and 0.0 <= ood_acc <= 1.0):
        raise InvalidInputError("accuracies must lie in [0, 1]")
    return float(probit(ood_acc) - (slope * probit(id_acc) + intercept))


def _resolve_id_dataset(accuracies, ood_dataset: str, id_dataset: str | None) -> str:
    if id_dataset is not None:
        return id_dataset
    others = sorted({rec.dataset_id for rec in accuracies} - {ood_dataset})
    if len(others) != 1:
        raise InvalidInputError(
            "cannot infer the ID dataset: expected exactly one non-OOD dataset_id, "
            f"found {others}; pass id_dataset explicitly"
        )
    return others[0]
