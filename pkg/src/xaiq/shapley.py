"""Shapley-value attribution over tabular predict functions.

exact_shapley enumerates every coalition and applies the combinatorial
weights directly. kernel_shap fits the weighted linear regression whose
solution is the Shapley vector: coalitions are enumerated (or sampled in
complement pairs), each is scored by imputing absent features from a
background sample, weighted by the Shapley kernel

    w(z') = (M - 1) / (binom(M, |z'|) * |z'| * (M - |z'|)),

and the regression is solved with the base value pinned to the mean
background prediction and the coefficient sum pinned to f(x) - phi0 by
constraint elimination. grouped_shap runs the same procedure with one
coalition bit per feature group, which is also how kernel_shap itself is
implemented (singleton groups).

Absent features are averaged over the whole background by default; pass
draws=k for the lighter estimate that substitutes k random background
rows per coalition instead.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

__all__ = [
    "FULL",
    "BackgroundSet",
    "ShapleyAttribution",
    "RankDeficiencyError",
    "exact_shapley",
    "kernel_shap",
    "grouped_shap",
    "stratified_background",
    "stratified_indices",
]

# Sentinel requesting enumeration of every non-trivial coalition.
FULL = "full"

# Enumeration guard: exact mode and explicit full-enumeration kernel mode
# refuse feature counts whose coalition space exceeds 2^15.
MAX_ENUMERATED_FEATURES = 15

# Budgets beyond this are only honored by sampling; smaller spaces are
# enumerated outright.
DEFAULT_BUDGET = 2048
FULL_UP_TO = 11

# Rows per model call when scoring coalitions.
_CHUNK_ROWS = 1 << 18


class RankDeficiencyError(np.linalg.LinAlgError):
    """The weighted coalition system cannot identify the attribution."""

    def __init__(self, rank: int, needed: int):
        self.rank = rank
        self.needed = needed
        super().__init__(
            f"weighted coalition system has rank {rank}, need {needed}; "
            "increase n_samples or the background size"
        )


@dataclass(frozen=True)
class BackgroundSet:
    """Reference rows used to impute absent features.

    strata_label optionally records the class each row was sampled from.
    """

    rows: np.ndarray
    strata_label: np.ndarray | None = None

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] == 0 or rows.shape[1] == 0:
            raise ValueError(f"background must be a non-empty 2-D array, got shape {rows.shape}")
        if not np.isfinite(rows).all():
            raise ValueError("background rows contain non-finite values")
        object.__setattr__(self, "rows", rows)
        if self.strata_label is not None:
            labels = np.asarray(self.strata_label)
            if len(labels) != len(rows):
                raise ValueError("strata_label length must match row count")
            object.__setattr__(self, "strata_label", labels)

    @property
    def size(self) -> int:
        return self.rows.shape[0]

    @property
    def arity(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class ShapleyAttribution:
    """Additive attribution: prediction = phi0 + sum(phi)."""

    feature_names: tuple[str, ...]
    phi: np.ndarray
    phi0: float
    prediction: float
    grouping: dict[str, tuple[int, ...]] | None = None

    def __post_init__(self) -> None:
        phi = np.asarray(self.phi, dtype=float)
        if phi.ndim != 1 or len(phi) != len(self.feature_names):
            raise ValueError("one phi per feature name required")
        object.__setattr__(self, "phi", phi)
        gap = abs(self.phi0 + phi.sum() - self.prediction)
        if gap > 1e-6:
            raise ValueError(
                f"local accuracy violated: phi0 + sum(phi) misses the "
                f"prediction by {gap:.3e}"
            )

    def by_name(self) -> dict[str, float]:
        return {name: float(v) for name, v in zip(self.feature_names, self.phi)}

    def ranked_features(self) -> list[str]:
        """Feature names by descending |phi|, ties by input order."""
        order = np.argsort(-np.abs(self.phi), kind="stable")
        return [self.feature_names[i] for i in order]

    def to_json_dict(self) -> dict:
        payload = {
            "feature_names": list(self.feature_names),
            "phi": [float(v) for v in self.phi],
            "phi0": float(self.phi0),
            "prediction": float(self.prediction),
        }
        if self.grouping is not None:
            payload["grouping"] = {k: list(v) for k, v in self.grouping.items()}
        return payload

    def to_csv(self, path: str | Path) -> None:
        """CSV export: a base-value record followed by one row per feature."""
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["feature", "phi"])
            writer.writerow(["__base_value__", repr(float(self.phi0))])
            for name, value in zip(self.feature_names, self.phi):
                writer.writerow([name, repr(float(value))])


def _validate_instance(instance: np.ndarray, background: BackgroundSet) -> np.ndarray:
    x = np.asarray(instance, dtype=float).reshape(-1)
    if len(x) != background.arity:
        raise ValueError(
            f"instance has {len(x)} features, background has {background.arity}"
        )
    if not np.isfinite(x).all():
        raise ValueError("instance contains non-finite values")
    return x


def _predict_scores(model: Callable[[np.ndarray], np.ndarray], rows: np.ndarray) -> np.ndarray:
    out = np.asarray(model(rows), dtype=float)
    if out.shape != (len(rows),):
        raise ValueError(
            f"model must return one score per row; got shape {out.shape} "
            f"for {len(rows)} rows (wrap multiclass outputs per class)"
        )
    return out


def _coalition_values(
    model: Callable[[np.ndarray], np.ndarray],
    instance: np.ndarray,
    background: BackgroundSet,
    masks: np.ndarray,
    draws: int | None,
    rng: np.random.Generator | None,
) -> np.ndarray:
    """Mean model output per coalition mask (True = feature from instance)."""
    if draws is None:
        rows = background.rows
        draw_idx = None
    else:
        if draws < 1:
            raise ValueError(f"draws must be at least 1, got {draws}")
        if rng is None:
            raise ValueError("draws mode needs an rng")
        draw_idx = rng.integers(background.size, size=(len(masks), draws))

    values = np.empty(len(masks))
    n_rows = background.size if draws is None else draws
    per_chunk = max(1, _CHUNK_ROWS // max(1, n_rows))
    for start in range(0, len(masks), per_chunk):
        chunk = masks[start : start + per_chunk]
        if draws is None:
            base = np.broadcast_to(
                background.rows, (len(chunk),) + background.rows.shape
            ).copy()
        else:
            base = background.rows[draw_idx[start : start + len(chunk)]]
        mixed = np.where(chunk[:, None, :], instance[None, None, :], base)
        flat = mixed.reshape(-1, background.arity)
        scores = _predict_scores(model, flat).reshape(len(chunk), n_rows)
        values[start : start + len(chunk)] = scores.mean(axis=1)
    return values


def exact_shapley(
    model: Callable[[np.ndarray], np.ndarray],
    instance: np.ndarray,
    background: BackgroundSet,
    feature_names: Sequence[str] | None = None,
) -> ShapleyAttribution:
    """Exact Shapley values by coalition enumeration.

    phi_j sums the weighted marginal contributions of feature j over all
    coalitions; coalition values average model outputs over background
    rows with coalition features fixed to the instance. The constant
    base-value shift cancels in the marginals.
    """
    x = _validate_instance(instance, background)
    p = len(x)
    if p > MAX_ENUMERATED_FEATURES:
        raise ValueError(
            f"{p} features exceed the enumeration guard "
            f"({MAX_ENUMERATED_FEATURES}); use kernel_shap with sampling"
        )
    names = _resolve_names(feature_names, p)

    n_masks = 1 << p
    bit_masks = (
        (np.arange(n_masks)[:, None] >> np.arange(p)[None, :]) & 1
    ).astype(bool)
    vals = _coalition_values(model, x, background, bit_masks, draws=None, rng=None)

    factorial = math.factorial
    size_weight = np.array(
        [factorial(s) * factorial(p - s - 1) / factorial(p) for s in range(p)]
    )
    sizes = bit_masks.sum(axis=1)

    phi = np.zeros(p)
    for j in range(p):
        without_j = np.flatnonzero(~bit_masks[:, j])
        with_j = without_j | (1 << j)
        phi[j] = (size_weight[sizes[without_j]] * (vals[with_j] - vals[without_j])).sum()

    phi0 = float(vals[0])
    prediction = float(vals[-1])  # full coalition reproduces f(instance)
    return ShapleyAttribution(
        feature_names=names, phi=phi, phi0=phi0, prediction=prediction
    )


def _resolve_names(feature_names: Sequence[str] | None, m: int) -> tuple[str, ...]:
    if feature_names is None:
        return tuple(f"f{j}" for j in range(m))
    names = tuple(str(n) for n in feature_names)
    if len(names) != m:
        raise ValueError(f"{len(names)} names for {m} features")
    return names


def _class_mass(m: int, size: int) -> float:
    return (m - 1) / (size * (m - size))


def _enumerate_size(m: int, size: int) -> np.ndarray:
    """All coalition masks of one size, in deterministic index order."""
    from itertools import combinations

    masks = np.zeros((math.comb(m, size), m), dtype=bool)
    for row, combo in enumerate(combinations(range(m), size)):
        masks[row, list(combo)] = True
    return masks


def _sample_size_pair(
    m: int, size: int, count: int, rng: np.random.Generator
) -> np.ndarray:
    """count distinct masks of one size plus their complements."""
    seen: set[tuple[int, ...]] = set()
    picked = np.zeros((2 * count, m), dtype=bool)
    row = 0
    while row < 2 * count:
        combo = tuple(sorted(map(int, rng.permutation(m)[:size])))
        if combo in seen:
            continue
        seen.add(combo)
        # register the complement too so self-complementary classes
        # (size = m - size) never emit a coalition twice
        seen.add(tuple(i for i in range(m) if i not in combo))
        picked[row, list(combo)] = True
        picked[row + 1] = ~picked[row]
        row += 2
    return picked


def _coalition_plan(
    m: int, budget: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Masks and regression weights under a sampling budget.

    Complement-paired size classes enter whole, highest kernel mass
    (extreme sizes) first; the class that no longer fits is sampled
    without replacement. Sampled coalitions share their class's total
    kernel mass so partially covered classes keep their aggregate
    influence.
    """
    mask_blocks: list[np.ndarray] = []
    weight_blocks: list[np.ndarray] = []
    remaining = budget
    for size in range(1, m // 2 + 1):
        co_size = m - size
        paired = size != co_size
        class_count = math.comb(m, size)
        block_total = class_count * (2 if paired else 1)
        if block_total <= remaining:
            masks = _enumerate_size(m, size)
            if paired:
                masks = np.vstack([masks, ~masks])
            mask_blocks.append(masks)
            per = _class_mass(m, size) / class_count
            weight_blocks.append(np.full(len(masks), per))
            remaining -= block_total
            continue
        pairs = remaining // 2
        if pairs > 0:
            masks = _sample_size_pair(m, size, pairs, rng)
            mask_blocks.append(masks)
            # paired classes contribute `pairs` coalitions to each of two
            # size classes; a self-complementary class holds all 2*pairs
            per_class_taken = pairs if paired else 2 * pairs
            per = _class_mass(m, size) / per_class_taken
            weight_blocks.append(np.full(len(masks), per))
            remaining -= len(masks)
        break
    if not mask_blocks:
        raise RankDeficiencyError(0, m - 1 if m > 1 else 1)
    return np.vstack(mask_blocks), np.concatenate(weight_blocks)


def _full_plan(m: int) -> tuple[np.ndarray, np.ndarray]:
    codes = np.arange(1, (1 << m) - 1)
    masks = ((codes[:, None] >> np.arange(m)[None, :]) & 1).astype(bool)
    sizes = masks.sum(axis=1)
    counts = np.array([math.comb(m, s) for s in range(m + 1)])
    weights = np.array([_class_mass(m, s) for s in np.arange(1, m)])[sizes - 1]
    weights = weights / counts[sizes]
    return masks, weights


def _solve_constrained(
    group_masks: np.ndarray,
    weights: np.ndarray,
    values: np.ndarray,
    phi0: float,
    prediction: float,
) -> np.ndarray:
    """Weighted least squares with phi0 pinned and sum(phi) pinned.

    The sum constraint eliminates the last coefficient; the reduced
    normal equations get a positive-definite factorization, falling back
    to a least-squares solve only when the system is numerically singular
    yet still full rank.
    """
    m = group_masks.shape[1]
    delta = prediction - phi0
    if m == 1:
        return np.array([delta])
    z = group_masks.astype(float)
    design = z[:, :-1] - z[:, -1:]
    target = values - phi0 - z[:, -1] * delta
    weighted = design.T * weights
    gram = weighted @ design
    rhs = weighted @ target
    try:
        np.linalg.cholesky(gram)
        head = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        scaled = design * np.sqrt(weights)[:, None]
        rank = np.linalg.matrix_rank(scaled)
        if rank < m - 1:
            raise RankDeficiencyError(rank, m - 1) from None
        head, *_ = np.linalg.lstsq(scaled, target * np.sqrt(weights), rcond=None)
    return np.append(head, delta - head.sum())


def _validate_groups(
    groups: Mapping[str, Sequence[int]], arity: int
) -> dict[str, tuple[int, ...]]:
    cleaned: dict[str, tuple[int, ...]] = {}
    seen: list[int] = []
    for name, members in groups.items():
        members = tuple(int(i) for i in members)
        if len(members) == 0:
            raise ValueError(f"group {name!r} is empty")
        cleaned[str(name)] = members
        seen.extend(members)
    if sorted(seen) != list(range(arity)):
        raise ValueError(
            f"groups must partition feature indices 0..{arity - 1}; got {sorted(seen)}"
        )
    return cleaned


def grouped_shap(
    model: Callable[[np.ndarray], np.ndarray],
    instance: np.ndarray,
    background: BackgroundSet,
    groups: Mapping[str, Sequence[int]],
    n_samples: int | str | None = None,
    rng_seed: int = 0,
    draws: int | None = None,
) -> ShapleyAttribution:
    """KernelSHAP over a partition of the features, one phi per group.

    A set group bit fixes all member features to the instance's values.
    n_samples may be a coalition budget, FULL, or None for the default
    (full enumeration up to 11 groups, else a budget of 2048).
    """
    x = _validate_instance(instance, background)
    grouping = _validate_groups(groups, len(x))
    names = tuple(grouping.keys())
    m = len(names)

    full_space = (1 << m) - 2
    if n_samples is None:
        n_samples = FULL if m <= FULL_UP_TO else DEFAULT_BUDGET
    if n_samples != FULL:
        n_samples = int(n_samples)
        if n_samples < 2:
            raise ValueError(f"n_samples must be at least 2, got {n_samples}")
        if n_samples >= full_space:
            n_samples = FULL
    if n_samples == FULL and m > MAX_ENUMERATED_FEATURES:
        raise ValueError(
            f"full enumeration over {m} groups exceeds the guard "
            f"({MAX_ENUMERATED_FEATURES}); pass a sampling budget"
        )

    rng = np.random.default_rng(rng_seed)
    prediction = float(_predict_scores(model, x[None, :])[0])
    phi0 = float(_predict_scores(model, background.rows).mean())

    if m == 1:
        phi = np.array([prediction - phi0])
        return ShapleyAttribution(
            feature_names=names, phi=phi, phi0=phi0, prediction=prediction,
            grouping=grouping,
        )

    if n_samples == FULL:
        group_masks, weights = _full_plan(m)
    else:
        group_masks, weights = _coalition_plan(m, n_samples, rng)

    owner = np.empty(len(x), dtype=int)
    for row, members in enumerate(grouping.values()):
        owner[list(members)] = row
    feature_masks = group_masks[:, owner]

    values = _coalition_values(model, x, background, feature_masks, draws, rng)
    phi = _solve_constrained(group_masks, weights, values, phi0, prediction)
    return ShapleyAttribution(
        feature_names=names, phi=phi, phi0=phi0, prediction=prediction,
        grouping=grouping,
    )


def kernel_shap(
    model: Callable[[np.ndarray], np.ndarray],
    instance: np.ndarray,
    background: BackgroundSet,
    n_samples: int | str | None = None,
    rng_seed: int = 0,
    feature_names: Sequence[str] | None = None,
    draws: int | None = None,
) -> ShapleyAttribution:
    """KernelSHAP attribution, one phi per feature (singleton groups)."""
    x = _validate_instance(instance, background)
    names = _resolve_names(feature_names, len(x))
    groups = {name: (j,) for j, name in enumerate(names)}
    result = grouped_shap(
        model, x, background, groups,
        n_samples=n_samples, rng_seed=rng_seed, draws=draws,
    )
    return ShapleyAttribution(
        feature_names=names, phi=result.phi, phi0=result.phi0,
        prediction=result.prediction, grouping=None,
    )


def stratified_background(
    features: np.ndarray,
    labels,
    fraction: float,
    rng_seed: int = 0,
) -> BackgroundSet:
    """Class-proportional background sample.

    Targets round(fraction * n) rows split across classes by
    largest-remainder rounding, with every class keeping at least one
    row. fraction = 1 returns the whole set (class-grouped order).
    """
    X = np.asarray(features, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("features must be a non-empty 2-D array")
    y = np.asarray(labels)
    if len(y) != len(X):
        raise ValueError(f"{len(X)} rows but {len(y)} labels")
    picked = stratified_indices(y, fraction, rng_seed)
    return BackgroundSet(rows=X[picked], strata_label=y[picked])


def stratified_indices(labels, fraction: float, rng_seed: int = 0) -> np.ndarray:
    """Row indices of a class-proportional sample, grouped by class.

    Same quota rule as stratified_background; exposed separately so
    callers holding several aligned representations of the same rows can
    subset them all consistently.
    """
    y = np.asarray(labels)
    if y.ndim != 1 or len(y) == 0:
        raise ValueError("labels must be a non-empty 1-D array")
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")

    classes, counts = np.unique(y, return_counts=True)

    target = max(1, round(fraction * len(y)))
    quotas = target * counts / len(y)
    takes = np.floor(quotas).astype(int)
    leftover = target - takes.sum()
    if leftover > 0:
        order = np.argsort(-(quotas - takes), kind="stable")
        takes[order[:leftover]] += 1
    takes = np.maximum(takes, 1)
    takes = np.minimum(takes, counts)

    rng = np.random.default_rng(rng_seed)
    picked = []
    for cls, take in zip(classes, takes):
        members = np.flatnonzero(y == cls)
        chosen = members if take == len(members) else rng.choice(members, size=take, replace=False)
        picked.append(np.sort(chosen))
    return np.concatenate(picked)
