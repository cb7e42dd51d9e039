"""Content-based recommender: conjunctive preference matching over items.

A user profile is a set of acceptable values per categorical field plus
an optional age window. An item is recommended iff every constrained
field matches (disciplines compared at the top hierarchy level) and the
age windows overlap. The match ratio (matched fields / checked fields)
is exposed alongside the decision; the model's default explained output
is the decision itself, since that is the classification the system
acts on.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, fields as dataclass_fields
from pathlib import Path

import numpy as np
import pandas as pd

from ..dataio import SchemaError
from ..taxonomy import Aggregation, Clause, Rule, RuleSet

__all__ = [
    "UserProfile",
    "DEFAULT_PROFILE",
    "RecommendationResult",
    "RecommenderModel",
    "recommender_predict",
    "recommender_rules",
]

# Profile field -> item column holding the value it constrains. Disciplines
# are matched at hierarchy level 0.
FIELD_COLUMNS = {
    "disciplines": "discipline_level_0",
    "language": "language",
    "difficulty": "difficulty",
    "duration": "duration",
    "format": "format",
    "type": "type",
}
AGE_FIELD = "age"


@dataclass(frozen=True)
class UserProfile:
    """Acceptable values per field; None leaves a field unconstrained.

    min_age/max_age come as a pair (both set or both None) and bound the
    user's age window for the overlap check against item age ranges.
    """

    disciplines: tuple[str, ...] | None = None
    language: tuple[str, ...] | None = None
    difficulty: tuple[str, ...] | None = None
    duration: tuple[str, ...] | None = None
    format: tuple[str, ...] | None = None
    type: tuple[str, ...] | None = None
    min_age: int | None = None
    max_age: int | None = None

    def __post_init__(self) -> None:
        for name in FIELD_COLUMNS:
            value = getattr(self, name)
            if value is None:
                continue
            if not isinstance(value, tuple) or len(value) == 0:
                raise ValueError(f"profile field {name!r} must be a non-empty tuple or None")
            if not all(isinstance(v, str) for v in value):
                raise ValueError(f"profile field {name!r} must contain strings")
        if (self.min_age is None) != (self.max_age is None):
            raise ValueError("min_age and max_age must be set together")
        if self.min_age is not None and self.min_age > self.max_age:
            raise ValueError(
                f"min_age {self.min_age} exceeds max_age {self.max_age}"
            )
        if not self.checked_fields():
            raise ValueError("profile must constrain at least one field")

    def checked_fields(self) -> tuple[str, ...]:
        """Constrained fields in canonical order, the age window last."""
        checked = [name for name in FIELD_COLUMNS if getattr(self, name) is not None]
        if self.min_age is not None:
            checked.append(AGE_FIELD)
        return tuple(checked)

    def to_json_dict(self) -> dict:
        payload: dict = {}
        for f in dataclass_fields(self):
            value = getattr(self, f.name)
            payload[f.name] = list(value) if isinstance(value, tuple) else value
        return payload

    @classmethod
    def from_json_dict(cls, payload: dict) -> "UserProfile":
        kwargs = {}
        for f in dataclass_fields(cls):
            if f.name not in payload:
                continue
            value = payload[f.name]
            if f.name in FIELD_COLUMNS and value is not None:
                value = tuple(str(v) for v in value)
            kwargs[f.name] = value
        return cls(**kwargs)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "UserProfile":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


# Reference profile: a Business/English user with mid-level difficulty,
# short durations, text or video material, and an open age window.
DEFAULT_PROFILE = UserProfile(
    disciplines=("Business",),
    language=("English",),
    difficulty=("Medio Alta", "Media"),
    duration=("0-30", "30-60"),
    format=("Text", "Video"),
    type=("Simulation", "Tutorial"),
    min_age=0,
    max_age=100,
)

# An item is recommended only on a full match; the ratio comparison
# tolerates float accumulation.
DECISION_THRESHOLD = 1.0 - 1e-9


@dataclass(frozen=True)
class RecommendationResult:
    """Per-item binary decisions with the underlying match ratios."""

    decisions: np.ndarray
    scores: np.ndarray
    checked_fields: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.decisions)


def _match_matrix(frame: pd.DataFrame, profile: UserProfile) -> tuple[np.ndarray, tuple[str, ...]]:
    checked = profile.checked_fields()
    columns = []
    for name in checked:
        if name == AGE_FIELD:
            columns.extend(["min_age", "max_age"])
        else:
            columns.append(FIELD_COLUMNS[name])
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise SchemaError(f"items lack required columns: {missing}")

    matches = np.empty((len(frame), len(checked)), dtype=bool)
    for k, name in enumerate(checked):
        if name == AGE_FIELD:
            item_min = frame["min_age"].to_numpy(dtype=float)
            item_max = frame["max_age"].to_numpy(dtype=float)
            matches[:, k] = (item_min <= profile.max_age) & (item_max >= profile.min_age)
        else:
            allowed = set(getattr(profile, name))
            matches[:, k] = frame[FIELD_COLUMNS[name]].isin(allowed).to_numpy()
    return matches, checked


def recommender_predict(items, profile: UserProfile) -> RecommendationResult:
    """Evaluate the conjunctive matcher over item rows.

    Accepts a Dataset or a bare DataFrame carrying the item schema
    columns the profile constrains.
    """
    frame = items.frame if hasattr(items, "frame") else items
    matches, checked = _match_matrix(frame, profile)
    scores = matches.mean(axis=1)
    decisions = scores >= DECISION_THRESHOLD
    return RecommendationResult(decisions=decisions, scores=scores, checked_fields=checked)


@dataclass(frozen=True)
class RecommenderModel:
    """Preference matcher behind the frame-model predict contract.

    output selects what predict_frame returns: the binary decision as a
    float (default, the recommend/skip classification) or the raw match
    ratio.
    """

    profile: UserProfile = DEFAULT_PROFILE
    output: str = "decision"

    def __post_init__(self) -> None:
        if self.output not in ("decision", "score"):
            raise ValueError(f"output must be 'decision' or 'score', got {self.output!r}")

    def recommend(self, frame: pd.DataFrame) -> RecommendationResult:
        return recommender_predict(frame, self.profile)

    def predict_frame(self, frame: pd.DataFrame) -> np.ndarray:
        result = self.recommend(frame)
        if self.output == "score":
            return result.scores
        return result.decisions.astype(float)


def recommender_rules(profile: UserProfile, split_disjunctions: bool = False) -> RuleSet:
    """Render the matcher's conjunctive logic as an IF-THEN rule set.

    One membership clause per constrained categorical field plus an
    interval clause for the age window. With split_disjunctions, every
    combination of single preference values becomes its own rule, which
    leaves per-rule complexity unchanged.
    """
    checked = profile.checked_fields()
    universe = frozenset(checked)

    def build_rule(choices: dict[str, tuple[str, ...]]) -> Rule:
        clauses = []
        for name in checked:
            if name == AGE_FIELD:
                clauses.append(
                    Clause(
                        feature=AGE_FIELD,
                        lower=float(profile.min_age),
                        upper=float(profile.max_age),
                    )
                )
            else:
                clauses.append(Clause(feature=name, values=frozenset(choices[name])))
        return Rule(clauses=tuple(clauses), label="Recommended")

    categorical = [name for name in checked if name != AGE_FIELD]
    if not split_disjunctions:
        rules = (build_rule({name: getattr(profile, name) for name in categorical}),)
    else:
        pools = [[(name, (value,)) for value in getattr(profile, name)] for name in categorical]
        rules = tuple(
            build_rule(dict(combo)) for combo in itertools.product(*pools)
        )
    return RuleSet(rules=rules, feature_universe=universe, aggregation=Aggregation.AVERAGE)
