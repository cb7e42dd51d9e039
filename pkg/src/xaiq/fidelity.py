"""Explanation fidelity metrics: keep the attributed features, hide the rest.

Keep-Positive retains the features with the most positive attribution
(negatively attributed features are always hidden) and tracks the mean
model output, either masking hidden features to their background mean or
resampling them from background rows. Keep-Absolute retains the features
with the largest |phi|, resamples the rest, and tracks classification
accuracy against supplied labels. All three produce a curve over the
fraction of features kept; higher curves mean the attribution ranked the
influential features earlier, and the trapezoidal AUC summarizes a curve
in one number.

Hidden-feature resampling averages over the whole background by default;
draws=k switches to k seeded random background rows per point.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .models.base import OutputKind
from .shapley import BackgroundSet, ShapleyAttribution
from .taxonomy import UNIT_EPS

__all__ = [
    "MetricKind",
    "FidelityCurve",
    "fraction_grid",
    "keep_positive_mask",
    "keep_positive_resample",
    "keep_absolute_resample",
    "curve_auc",
]


class MetricKind(str, Enum):
    KEEP_POSITIVE_MASK = "keep_positive_mask"
    KEEP_POSITIVE_RESAMPLE = "keep_positive_resample"
    KEEP_ABSOLUTE_RESAMPLE = "keep_absolute_resample"


def _trapezoid(fractions: np.ndarray, scores: np.ndarray) -> float:
    span = fractions[-1] - fractions[0]
    return float(np.trapezoid(scores, fractions) / span)


@dataclass(frozen=True)
class FidelityCurve:
    """Score versus fraction-of-features-kept, with the count axis attached.

    counts holds the nominal number of features kept at each grid point
    (ceil(t * M)); the keep-positive metrics may keep fewer on instances
    with few positively attributed features.
    """

    metric_kind: MetricKind
    fractions: tuple[float, ...]
    scores: tuple[float, ...]
    counts: tuple[int, ...]
    auc: float

    def __post_init__(self) -> None:
        if len(self.fractions) < 2:
            raise ValueError("a curve needs at least 2 points")
        if not (len(self.fractions) == len(self.scores) == len(self.counts)):
            raise ValueError("fractions, scores, and counts must align")
        fr = np.asarray(self.fractions)
        if (np.diff(fr) <= 0).any():
            raise ValueError("fractions must be strictly increasing")
        if abs(fr[0]) > UNIT_EPS or abs(fr[-1] - 1.0) > UNIT_EPS:
            raise ValueError("fractions must start at 0 and end at 1")
        expected = _trapezoid(fr, np.asarray(self.scores))
        if abs(expected - self.auc) > 1e-12:
            raise ValueError(
                f"auc {self.auc} does not match the trapezoidal integral {expected}"
            )
        object.__setattr__(self, "metric_kind", MetricKind(self.metric_kind))

    def score_at_count(self, count: int) -> float:
        """Score at the first grid point keeping at least `count` features."""
        for c, s in zip(self.counts, self.scores):
            if c >= count:
                return s
        raise ValueError(f"no grid point keeps {count} features")

    def to_json_dict(self) -> dict:
        return {
            "metric_kind": self.metric_kind.value,
            "fractions": list(self.fractions),
            "counts": list(self.counts),
            "scores": list(self.scores),
            "auc": self.auc,
        }

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["fraction", "count", "score"])
            for f, c, s in zip(self.fractions, self.counts, self.scores):
                writer.writerow([repr(float(f)), c, repr(float(s))])


def fraction_grid(n_features: int) -> tuple[float, ...]:
    """Default grid: 0 to 1 in steps of 1/M, one point per feature count."""
    if n_features < 1:
        raise ValueError("need at least one feature")
    return tuple(k / n_features for k in range(n_features + 1))


def curve_auc(curve: FidelityCurve) -> float:
    """Trapezoidal area under the curve, normalized to the fraction span."""
    if len(curve.fractions) < 2:
        raise ValueError("a curve needs at least 2 points")
    return _trapezoid(np.asarray(curve.fractions), np.asarray(curve.scores))


def _phi_matrix(attributions, n_features: int) -> np.ndarray:
    if isinstance(attributions, np.ndarray) and attributions.ndim == 2:
        matrix = attributions.astype(float)
    else:
        rows = []
        for att in attributions:
            rows.append(att.phi if isinstance(att, ShapleyAttribution) else np.asarray(att, dtype=float))
        matrix = np.vstack(rows)
    if matrix.shape[1] != n_features:
        raise ValueError(
            f"attributions cover {matrix.shape[1]} features, instances have {n_features}"
        )
    return matrix


def _validate_common(instances, attributions, background, grid):
    X = np.asarray(instances, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != background.arity:
        raise ValueError(
            f"instances have {X.shape[1]} features, background has {background.arity}"
        )
    phi = _phi_matrix(attributions, X.shape[1])
    if len(phi) != len(X):
        raise ValueError(f"{len(X)} instances but {len(phi)} attributions")
    grid_arr = np.asarray(grid if grid is not None else fraction_grid(X.shape[1]), dtype=float)
    if (grid_arr < -UNIT_EPS).any() or (grid_arr > 1 + UNIT_EPS).any():
        raise ValueError("grid fractions must lie in [0, 1]")
    grid_arr = np.clip(grid_arr, 0.0, 1.0)
    if len(grid_arr) < 2 or (np.diff(grid_arr) <= 0).any():
        raise ValueError("grid must be strictly increasing with at least 2 points")
    if grid_arr[0] != 0.0 or grid_arr[-1] != 1.0:
        raise ValueError("grid must start at 0 and end at 1")
    return X, phi, grid_arr


def _positive_keep_masks(phi: np.ndarray, fraction: float) -> np.ndarray:
    """Per instance: keep ceil(t * m+) of the largest positive attributions."""
    n, m = phi.shape
    keep = np.zeros((n, m), dtype=bool)
    for i in range(n):
        positive = np.flatnonzero(phi[i] > 0)
        if len(positive) == 0:
            continue
        k = math.ceil(fraction * len(positive))
        if k == 0:
            continue
        order = positive[np.argsort(-phi[i, positive], kind="stable")]
        keep[i, order[:k]] = True
    return keep


def _absolute_keep_masks(phi: np.ndarray, fraction: float) -> np.ndarray:
    """Per instance: keep ceil(t * M) of the largest |phi| features."""
    n, m = phi.shape
    k = math.ceil(fraction * m)
    keep = np.zeros((n, m), dtype=bool)
    if k == 0:
        return keep
    order = np.argsort(-np.abs(phi), axis=1, kind="stable")
    for i in range(n):
        keep[i, order[i, :k]] = True
    return keep


def _mean_outputs(
    model: Callable[[np.ndarray], np.ndarray],
    instances: np.ndarray,
    keep: np.ndarray,
    background: BackgroundSet,
    draw_idx: np.ndarray | None,
) -> np.ndarray:
    """Model outputs with hidden features resampled, averaged over rows.

    Returns shape (n_instances,) for scalar models or (n_instances, k)
    for multi-output models.
    """
    rows = background.rows if draw_idx is None else background.rows[draw_idx]
    n, m = instances.shape
    b = len(rows)
    mixed = np.where(
        keep[:, None, :], instances[:, None, :], rows[None, :, :]
    ).reshape(n * b, m)
    out = np.asarray(model(mixed), dtype=float)
    if out.shape[0] != n * b:
        raise ValueError(f"model returned {out.shape[0]} outputs for {n * b} rows")
    out = out.reshape(n, b, -1).mean(axis=1)
    return out[:, 0] if out.shape[1] == 1 else out


def _masked_outputs(
    model, instances: np.ndarray, keep: np.ndarray, background: BackgroundSet
) -> np.ndarray:
    means = background.rows.mean(axis=0)
    masked = np.where(keep, instances, means[None, :])
    out = np.asarray(model(masked), dtype=float)
    if out.shape != (len(instances),):
        raise ValueError(
            "keep-positive metrics need a scalar-output model; "
            f"got output shape {out.shape}"
        )
    return out


def _build_curve(kind: MetricKind, grid: np.ndarray, scores: list[float], m: int) -> FidelityCurve:
    counts = tuple(math.ceil(t * m) for t in grid)
    fractions = tuple(float(t) for t in grid)
    return FidelityCurve(
        metric_kind=kind,
        fractions=fractions,
        scores=tuple(float(s) for s in scores),
        counts=counts,
        auc=_trapezoid(grid, np.asarray(scores)),
    )


def keep_positive_mask(
    model: Callable[[np.ndarray], np.ndarray],
    instances,
    attributions,
    background: BackgroundSet,
    grid: Sequence[float] | None = None,
) -> FidelityCurve:
    """Mean model output as positively attributed features are unmasked.

    Hidden features (all negatively attributed ones, plus positives
    outside the top ceil(t * m+)) are replaced by their background mean.
    """
    X, phi, grid_arr = _validate_common(instances, attributions, background, grid)
    scores = []
    for t in grid_arr:
        keep = _positive_keep_masks(phi, t)
        scores.append(_masked_outputs(model, X, keep, background).mean())
    return _build_curve(MetricKind.KEEP_POSITIVE_MASK, grid_arr, scores, X.shape[1])


def keep_positive_resample(
    model: Callable[[np.ndarray], np.ndarray],
    instances,
    attributions,
    background: BackgroundSet,
    grid: Sequence[float] | None = None,
    rng_seed: int = 0,
    draws: int | None = None,
) -> FidelityCurve:
    """Keep-positive with hidden features drawn from background rows.

    Scores average the model output over the background (or over `draws`
    seeded row draws); deterministic for a fixed seed.
    """
    X, phi, grid_arr = _validate_common(instances, attributions, background, grid)
    rng = np.random.default_rng(rng_seed)
    scores = []
    for t in grid_arr:
        keep = _positive_keep_masks(phi, t)
        draw_idx = None if draws is None else rng.integers(background.size, size=draws)
        out = _mean_outputs(model, X, keep, background, draw_idx)
        if out.ndim != 1:
            raise ValueError("keep-positive metrics need a scalar-output model")
        scores.append(out.mean())
    return _build_curve(MetricKind.KEEP_POSITIVE_RESAMPLE, grid_arr, scores, X.shape[1])


def _decide(outputs: np.ndarray, output_kind: OutputKind, classes) -> np.ndarray:
    """Averaged model outputs -> class decisions."""
    if outputs.ndim == 2:
        picks = outputs.argmax(axis=1)
        if classes is not None:
            return np.asarray(classes, dtype=object)[picks]
        return picks
    cut = 0.5 if output_kind is OutputKind.PROBABILITY else 0.0
    decided = (outputs > cut).astype(int)
    if classes is not None:
        return np.asarray(classes, dtype=object)[decided]
    return decided


def keep_absolute_resample(
    model: Callable[[np.ndarray], np.ndarray],
    instances,
    true_labels,
    attributions,
    background: BackgroundSet,
    grid: Sequence[float] | None = None,
    rng_seed: int = 0,
    draws: int | None = None,
    output_kind: OutputKind = OutputKind.PROBABILITY,
    classes: Sequence | None = None,
) -> FidelityCurve:
    """Accuracy as the largest-|phi| features are unmasked.

    Hidden features are resampled from the background; predictions are
    averaged over the draws, then thresholded (probability 0.5, margin 0)
    or argmaxed for multi-output models, and compared to true_labels.
    """
    if true_labels is None:
        raise ValueError("keep_absolute_resample needs true labels")
    X, phi, grid_arr = _validate_common(instances, attributions, background, grid)
    labels = np.asarray(true_labels)
    if len(labels) != len(X):
        raise ValueError(f"{len(X)} instances but {len(labels)} labels")
    rng = np.random.default_rng(rng_seed)
    scores = []
    for t in grid_arr:
        keep = _absolute_keep_masks(phi, t)
        draw_idx = None if draws is None else rng.integers(background.size, size=draws)
        averaged = _mean_outputs(model, X, keep, background, draw_idx)
        decisions = _decide(averaged, output_kind, classes)
        scores.append(float((decisions == labels).mean()))
    return _build_curve(MetricKind.KEEP_ABSOLUTE_RESAMPLE, grid_arr, scores, X.shape[1])
