"""IF-THEN rule extraction from trained SVMs.

Each support vector is paired with the closest prototype of its own
class (the class centroid by default, or one of k medoids), and the
axis-aligned hyper-rectangle spanning the pair becomes a conjunctive
interval rule labeled with the support vector's class. Duplicate rules
collapse to one.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..taxonomy import Clause, Rule, RuleSet
from .svm import SvmModel

__all__ = ["extract_rules", "class_prototypes"]


def _greedy_medoids(points: np.ndarray, k: int) -> np.ndarray:
    """Pick k medoids by greedy forward selection on Euclidean distance.

    Deterministic: candidates are scanned in row order and ties keep the
    earliest row.
    """
    n = len(points)
    if k >= n:
        return points.copy()
    distances = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
    chosen: list[int] = []
    assigned = np.full(n, np.inf)
    for _ in range(k):
        best_idx, best_cost = -1, np.inf
        for candidate in range(n):
            if candidate in chosen:
                continue
            cost = np.minimum(assigned, distances[candidate]).sum()
            if cost < best_cost - 1e-12:
                best_idx, best_cost = candidate, cost
        chosen.append(best_idx)
        assigned = np.minimum(assigned, distances[best_idx])
    return points[np.array(chosen)]


def class_prototypes(points: np.ndarray, n_prototypes: int) -> np.ndarray:
    """Prototypes for one class: the centroid, or k medoids when k > 1."""
    if n_prototypes < 1:
        raise ValueError(f"n_prototypes must be at least 1, got {n_prototypes}")
    if n_prototypes == 1:
        return points.mean(axis=0, keepdims=True)
    return _greedy_medoids(points, n_prototypes)


def _interval_rule(
    support_vector: np.ndarray,
    prototype: np.ndarray,
    feature_names: Sequence[str],
    label: str,
) -> Rule:
    clauses = tuple(
        Clause(
            feature=name,
            lower=float(min(sv_val, proto_val)),
            upper=float(max(sv_val, proto_val)),
        )
        for name, sv_val, proto_val in zip(feature_names, support_vector, prototype)
    )
    return Rule(clauses=clauses, label=label)


def extract_rules(
    model: SvmModel,
    features: np.ndarray,
    labels,
    feature_names: Sequence[str],
    n_prototypes_per_class: int = 1,
) -> RuleSet:
    """Build the interval rule set for a trained model on its training data.

    Support vectors are collected across all one-vs-rest subproblems;
    each contributes the rectangle between itself and its nearest
    same-class prototype. Raises if any class ends up without support
    vectors.
    """
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    if X.shape[1] != len(feature_names):
        raise ValueError(
            f"{X.shape[1]} feature columns but {len(feature_names)} names"
        )

    support: set[int] = set()
    for indices in model.support_rows().values():
        support.update(indices)
    support_labels = {y[i] for i in support}
    missing = [c for c in model.classes if c not in support_labels]
    if missing:
        raise ValueError(f"classes without support vectors: {missing}")

    prototypes = {
        cls: class_prototypes(X[y == cls], n_prototypes_per_class)
        for cls in model.classes
    }

    rules = []
    for idx in sorted(support):
        point = X[idx]
        cls = y[idx]
        candidates = prototypes[cls]
        nearest = candidates[np.linalg.norm(candidates - point, axis=1).argmin()]
        rules.append(_interval_rule(point, nearest, feature_names, str(cls)))

    unique_rules = tuple(dict.fromkeys(rules))
    return RuleSet(rules=unique_rules, feature_universe=frozenset(feature_names))
