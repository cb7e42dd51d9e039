"""Quantitative scoring of rule-based explanations.

The scores live on a small algebra:

- complexity ``omega`` of an IF-THEN rule: ``(|R| / #S) * (|R| - 1)`` where
  ``|R|`` counts AND-joined clauses and ``#S`` counts the distinct features
  those clauses touch. A one-clause rule has complexity 0.
- understandability ``U(omega; omega_b)``: a sigmoidal decline in
  ``omega / omega_b`` where ``omega_b`` is the complexity a user tolerates.
  Two families are provided, a Gaussian decline ``exp(-(omega/(3*omega_b))^2)``
  and a squared-hyperbolic-tangent decline ``1 - tanh(omega/(3*omega_b))^2``.
  Both are 1 at ``omega = 0``, close to 0.9 at ``omega = omega_b``, and decay
  to 0 as ``omega`` grows.
- explainability ``E = I * C * U``: interpretability times completeness times
  understandability, each in [0, 1].
- total explainability of several explanations: the pairwise combiner
  ``tot(a, b) = max(a, b) + (1 - max(a, b)) * min(a, b)`` folded over the
  list. Algebraically ``tot(a, b) = 1 - (1 - a)(1 - b)``, so the fold is
  symmetric, monotone, and independent of explanation order.

All operations are pure; every value object is a frozen dataclass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Clause",
    "Rule",
    "RuleSet",
    "Aggregation",
    "DeclineFamily",
    "UnderstandabilityParams",
    "ExplanationAssessment",
    "rule_complexity",
    "ruleset_complexity",
    "understandability",
    "explainability",
    "total_two",
    "total_explainability",
]

#: Inputs to [0, 1]-ranged scores are accepted within this slack and clamped.
UNIT_EPS = 1e-9


def _clamp_unit(value: float, name: str) -> float:
    value = float(value)
    if math.isnan(value) or value < -UNIT_EPS or value > 1.0 + UNIT_EPS:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class Clause:
    """One condition of a rule.

    Numeric form asserts ``lower <= feature <= upper``; categorical form
    asserts ``feature in values``. Exactly one form is active: ``values``
    set means categorical, otherwise the bounds apply.
    """

    feature: str
    lower: float = -math.inf
    upper: float = math.inf
    values: frozenset[str] | None = None

    def __post_init__(self) -> None:
        if not self.feature:
            raise ValueError("clause feature name must be non-empty")
        if self.values is not None:
            if len(self.values) == 0:
                raise ValueError(f"categorical clause on {self.feature!r} has no values")
            object.__setattr__(self, "values", frozenset(self.values))
            return
        lower, upper = float(self.lower), float(self.upper)
        if math.isnan(lower) or math.isnan(upper):
            raise ValueError(f"clause bounds on {self.feature!r} must not be NaN")
        if lower > upper:
            raise ValueError(
                f"clause on {self.feature!r} has lower {lower} > upper {upper}"
            )
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def describe(self) -> str:
        if self.values is not None:
            options = ", ".join(sorted(self.values))
            return f"{self.feature} in {{{options}}}"
        return f"{self.lower} <= {self.feature} <= {self.upper}"

    def to_json_dict(self) -> dict:
        if self.values is not None:
            return {"feature": self.feature, "values": sorted(self.values)}
        payload: dict = {"feature": self.feature}
        # unbounded sides are omitted so the dict stays strict-JSON safe
        if math.isfinite(self.lower):
            payload["lower"] = self.lower
        if math.isfinite(self.upper):
            payload["upper"] = self.upper
        return payload


@dataclass(frozen=True)
class Rule:
    """An IF-THEN rule: a conjunction of clauses implying a class label."""

    clauses: tuple[Clause, ...]
    label: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "clauses", tuple(self.clauses))
        if len(self.clauses) == 0:
            raise ValueError("a rule needs at least one clause")

    @property
    def features(self) -> frozenset[str]:
        """Distinct features referenced by the rule's clauses."""
        return frozenset(c.feature for c in self.clauses)

    def describe(self) -> str:
        body = " AND ".join(c.describe() for c in self.clauses)
        return f"IF {body} THEN {self.label}"

    def to_json_dict(self) -> dict:
        return {
            "clauses": [clause.to_json_dict() for clause in self.clauses],
            "label": self.label,
        }


class Aggregation(str, Enum):
    """How per-rule complexities combine into a rule-set complexity."""

    SUM = "sum"
    AVERAGE = "average"


@dataclass(frozen=True)
class RuleSet:
    """Rules plus the feature universe of the model they explain."""

    rules: tuple[Rule, ...]
    feature_universe: frozenset[str]
    aggregation: Aggregation = Aggregation.AVERAGE

    def __post_init__(self) -> None:
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "feature_universe", frozenset(self.feature_universe))
        if len(self.rules) == 0:
            raise ValueError("rule set must contain at least one rule")
        for rule in self.rules:
            stray = rule.features - self.feature_universe
            if stray:
                raise ValueError(
                    f"rule references features outside the universe: {sorted(stray)}"
                )

    def describe(self) -> str:
        return "\n".join(rule.describe() for rule in self.rules)

    def to_json_dict(self) -> dict:
        return {
            "rules": [rule.to_json_dict() for rule in self.rules],
            "feature_universe": sorted(self.feature_universe),
            "aggregation": self.aggregation.value,
        }


class DeclineFamily(str, Enum):
    """Shape of the understandability decline in ``omega / omega_b``."""

    GAUSSIAN = "gaussian"
    SHT = "sht"


@dataclass(frozen=True)
class UnderstandabilityParams:
    """Tolerable complexity of the user plus the decline family."""

    omega_b: float
    family: DeclineFamily = DeclineFamily.GAUSSIAN

    def __post_init__(self) -> None:
        if not (float(self.omega_b) > 0.0):
            raise ValueError(f"omega_b must be positive, got {self.omega_b!r}")
        object.__setattr__(self, "omega_b", float(self.omega_b))
        object.__setattr__(self, "family", DeclineFamily(self.family))


@dataclass(frozen=True)
class ExplanationAssessment:
    """Score bundle for one explanation.

    ``explainability`` is always the product of the other unit-ranged
    factors; construction re-checks the identity to 1e-12.
    """

    interpretability: float
    completeness: float
    complexity: float
    understandability: float
    explainability: float

    def __post_init__(self) -> None:
        i = _clamp_unit(self.interpretability, "interpretability")
        c = _clamp_unit(self.completeness, "completeness")
        u = _clamp_unit(self.understandability, "understandability")
        e = _clamp_unit(self.explainability, "explainability")
        if float(self.complexity) < 0:
            raise ValueError(f"complexity must be non-negative, got {self.complexity!r}")
        if abs(e - i * c * u) > 1e-12:
            raise ValueError(
                f"explainability {e} is not the product {i} * {c} * {u}"
            )
        object.__setattr__(self, "interpretability", i)
        object.__setattr__(self, "completeness", c)
        object.__setattr__(self, "complexity", float(self.complexity))
        object.__setattr__(self, "understandability", u)
        object.__setattr__(self, "explainability", e)


def rule_complexity(rule: Rule, rule_set_context: RuleSet | None = None) -> float:
    """Complexity ``omega = (|R| / #S) * (|R| - 1)`` of a single rule.

    ``|R|`` is the clause count and ``#S`` the number of distinct features
    the clauses touch, so repeated clauses on one feature cost extra while
    a single-clause rule scores exactly 0. When a rule-set context is given
    the rule must stay inside its feature universe.
    """
    if rule_set_context is not None:
        stray = rule.features - rule_set_context.feature_universe
        if stray:
            raise ValueError(
                f"rule uses features outside the rule set universe: {sorted(stray)}"
            )
    n_clauses = len(rule.clauses)
    n_features = len(rule.features)
    return (n_clauses / n_features) * (n_clauses - 1)


def ruleset_complexity(rules: RuleSet) -> float:
    """Total complexity of a rule set: sum or average of per-rule values."""
    if len(rules.rules) == 0:
        raise ValueError("cannot score an empty rule set")
    values = [rule_complexity(rule, rules) for rule in rules.rules]
    if rules.aggregation is Aggregation.SUM:
        return float(sum(values))
    return float(sum(values) / len(values))


def understandability(omega, params: UnderstandabilityParams):
    """Understandability ``U(omega; omega_b)`` in (0, 1].

    Gaussian family: ``exp(-(omega / (3 * omega_b))^2)``.
    SHT family: ``1 - tanh(omega / (3 * omega_b))^2``.

    Accepts a scalar or an array of complexities; returns the same shape.
    """
    omega_arr = np.asarray(omega, dtype=float)
    if np.any(np.isnan(omega_arr)) or np.any(omega_arr < 0):
        raise ValueError("complexity omega must be non-negative")
    scaled = omega_arr / (3.0 * params.omega_b)
    if params.family is DeclineFamily.GAUSSIAN:
        result = np.exp(-(scaled**2))
    else:
        result = 1.0 - np.tanh(scaled) ** 2
    if np.isscalar(omega) or omega_arr.ndim == 0:
        return float(result)
    return result


def explainability(
    interpretability: float,
    completeness: float,
    omega: float,
    params: UnderstandabilityParams,
) -> ExplanationAssessment:
    """Score an explanation: ``E = I * C * U(omega; omega_b)``."""
    i = _clamp_unit(interpretability, "interpretability")
    c = _clamp_unit(completeness, "completeness")
    u = understandability(float(omega), params)
    return ExplanationAssessment(
        interpretability=i,
        completeness=c,
        complexity=float(omega),
        understandability=u,
        explainability=i * c * u,
    )


def total_two(e1: float, e2: float) -> float:
    """Combine two explainability values.

    ``tot(a, b) = max(a, b) + (1 - max(a, b)) * min(a, b)``, which is
    symmetric, bounded by ``max(a, b) <= tot(a, b) <= 1``, and leaves a
    value unchanged when combined with 0.
    """
    a = _clamp_unit(e1, "e1")
    b = _clamp_unit(e2, "e2")
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + (1.0 - hi) * lo


def total_explainability(values: Sequence[float] | Iterable[float]) -> float:
    """Fold ``total_two`` over a non-empty list of explainability values.

    The result does not depend on the order of the list: the combiner
    equals ``1 - (1 - a)(1 - b)``, so the fold is ``1 - prod(1 - e_i)``.
    """
    values = list(values)
    if not values:
        raise ValueError("need at least one explainability value")
    acc = _clamp_unit(values[0], "values[0]")
    for k, value in enumerate(values[1:], start=1):
        acc = total_two(_clamp_unit(value, f"values[{k}]"), acc)
    return acc
