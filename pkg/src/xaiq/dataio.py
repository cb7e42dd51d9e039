"""Tabular data handling for the explainability pipelines.

Covers the MERLOT-style resource/rating schema (ingestion, synthesis,
right-join merge), the integer factorization codebook used to feed
categorical data to numeric explainers, grouping of the four hierarchical
discipline columns into one ``disciplines`` column and back, the wrapped
predict function that undoes both transforms before calling a model, and
the mixed-type correlation screen (Pearson for numeric pairs, Cramer's V
for categorical pairs, correlation ratio for mixed pairs).

Datasets wrap a pandas frame and are treated as immutable after
construction; every operation returns a new Dataset.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol, Sequence

import numpy as np
import pandas as pd

__all__ = [
    "SchemaTag",
    "Dataset",
    "EncodingRules",
    "CorrelationResult",
    "UnseenValueError",
    "SchemaError",
    "encode",
    "decode",
    "group_disciplines",
    "ungroup_disciplines",
    "wrapped_predict",
    "make_array_predictor",
    "correlation_matrix",
    "synthesize_merlot",
    "merge_resources_ratings",
    "filter_by_average_rating",
    "load_csv",
    "save_csv",
    "load_iris",
    "split_features_labels",
]


class SchemaTag(str, Enum):
    IRIS = "iris"
    MERLOT_RESOURCES = "merlot_resources"
    MERLOT_RATINGS = "merlot_ratings"
    GENERIC = "generic"


class SchemaError(ValueError):
    """A frame does not carry the columns an operation requires."""


class UnseenValueError(ValueError):
    """A categorical value has no code in the supplied encoding rules."""

    def __init__(self, column: str, value: str):
        self.column = column
        self.value = value
        super().__init__(f"column {column!r} has value {value!r} not covered by the encoding rules")


# Discipline layout. The four hierarchy columns join into one string with a
# reserved separator; "Absent" is an ordinary vocabulary value at any level.
DISCIPLINE_LEVEL_COLUMNS = tuple(f"discipline_level_{i}" for i in range(4))
DISCIPLINES_COLUMN = "disciplines"
DISCIPLINE_SEPARATOR = "/"
ABSENT = "Absent"

# Resource schema in table order; ratings reference resources by id.
MERLOT_RESOURCE_COLUMNS = (
    "id", "type", "language", "difficulty", "format", "duration",
    "min_age", "max_age", *DISCIPLINE_LEVEL_COLUMNS,
)
MERLOT_RATING_COLUMNS = ("id", "rating", "resource")

# Model-facing feature columns (the id/rating bookkeeping stays outside).
UNGROUPED_FEATURE_COLUMNS = (
    "type", "language", "difficulty", "format", "duration",
    "min_age", "max_age", *DISCIPLINE_LEVEL_COLUMNS,
)
GROUPED_FEATURE_COLUMNS = (
    "type", "language", "difficulty", "format", "duration",
    "min_age", "max_age", DISCIPLINES_COLUMN,
)

# Value vocabularies for the synthetic generator, drawn from the resource
# table sample and the reference user profile. Values never contain the
# discipline separator.
TYPE_VALUES = ("Presentation", "Simulation", "Tutorial")
LANGUAGE_VALUES = ("English",)
DIFFICULTY_VALUES = ("Bassa", "Media", "Medio Alta", "Medio Bassa")
FORMAT_VALUES = ("Text", "Video", "Website")
DURATION_VALUES = ("0-30", "30-60")

# Canonical discipline hierarchy: child maps keyed by the parent value at
# each level, plus the per-level value pools used for noise draws.
LEVEL0_VALUES = (
    "Business", "Humanities", "Mathematics and Statistics", "Science and Technology",
)
_LEVEL1_CHILDREN = {
    "Business": ("Economics",),
    "Humanities": ("History",),
    "Mathematics and Statistics": ("Mathematics",),
    "Science and Technology": ("Physics",),
}
_LEVEL2_CHILDREN = {
    "Economics": ("Micro",),
    "History": ("Area Studies",),
    "Mathematics": ("Geometry and Topology",),
    "Physics": ("Electricity and Magnetism", "Mathematics"),
}
_LEVEL3_CHILDREN = {
    "Micro": (ABSENT,),
    "Area Studies": ("Africa",),
    "Geometry and Topology": ("Euclidean Geometry",),
    "Electricity and Magnetism": ("Circuits",),
    "Mathematics": (ABSENT,),
}
LEVEL1_VALUES = tuple(sorted({v for c in _LEVEL1_CHILDREN.values() for v in c}))
LEVEL2_VALUES = tuple(sorted({v for c in _LEVEL2_CHILDREN.values() for v in c}))
LEVEL3_VALUES = tuple(sorted({v for c in _LEVEL3_CHILDREN.values() for v in c}))


def _is_numeric(series: pd.Series) -> bool:
    return pd.api.types.is_numeric_dtype(series) and not pd.api.types.is_bool_dtype(series)


@dataclass(frozen=True)
class Dataset:
    """A rectangular frame with string categoricals and finite numerics."""

    frame: pd.DataFrame
    schema_tag: SchemaTag = SchemaTag.GENERIC

    def __post_init__(self) -> None:
        frame = self.frame
        if not isinstance(frame, pd.DataFrame):
            raise TypeError("Dataset wraps a pandas DataFrame")
        if frame.columns.duplicated().any():
            dupes = frame.columns[frame.columns.duplicated()].tolist()
            raise ValueError(f"duplicate column names: {dupes}")
        for col in frame.columns:
            series = frame[col]
            if _is_numeric(series):
                values = series.to_numpy()
                if len(values) and not np.isfinite(values.astype(float)).all():
                    raise ValueError(f"numeric column {col!r} contains non-finite values")
            else:
                non_str = series[~series.map(lambda v: isinstance(v, str))]
                if len(non_str):
                    raise ValueError(
                        f"categorical column {col!r} contains non-string cells, "
                        f"e.g. {non_str.iloc[0]!r}"
                    )
        object.__setattr__(self, "schema_tag", SchemaTag(self.schema_tag))

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def columns(self) -> list[str]:
        return list(self.frame.columns)

    def column_kinds(self) -> dict[str, str]:
        """Map each column to ``"numeric"`` or ``"categorical"``."""
        return {
            col: "numeric" if _is_numeric(self.frame[col]) else "categorical"
            for col in self.frame.columns
        }

    def with_frame(self, frame: pd.DataFrame) -> "Dataset":
        return Dataset(frame=frame, schema_tag=self.schema_tag)

    def select(self, columns: Sequence[str]) -> "Dataset":
        missing = [c for c in columns if c not in self.frame.columns]
        if missing:
            raise SchemaError(f"missing columns: {missing}")
        return Dataset(frame=self.frame.loc[:, list(columns)].copy(), schema_tag=self.schema_tag)


@dataclass(frozen=True)
class EncodingRules:
    """Per-column codebooks mapping categorical values to dense 0-based codes.

    Codes follow first occurrence in the data the rules were built from,
    so rebuilding on the same data is stable and decode inverts encode.
    """

    codebooks: dict[str, dict[str, int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for col, book in self.codebooks.items():
            codes = sorted(book.values())
            if codes != list(range(len(codes))):
                raise ValueError(f"codebook for {col!r} is not dense 0-based: {codes}")

    @property
    def columns(self) -> list[str]:
        return list(self.codebooks.keys())

    def inverse(self, column: str) -> dict[int, str]:
        return {code: value for value, code in self.codebooks[column].items()}

    def to_json_dict(self) -> dict:
        return {col: dict(book) for col, book in self.codebooks.items()}

    @classmethod
    def from_json_dict(cls, payload: Mapping) -> "EncodingRules":
        return cls(codebooks={str(c): {str(v): int(k) for v, k in book.items()}
                              for c, book in payload.items()})


def detect_discipline_layout(columns: Iterable[str]) -> str:
    """Classify a column set as ``grouped``, ``ungrouped``, or ``plain``."""
    cols = set(columns)
    if DISCIPLINES_COLUMN in cols:
        return "grouped"
    if all(c in cols for c in DISCIPLINE_LEVEL_COLUMNS):
        return "ungrouped"
    return "plain"


def encode(
    data: Dataset,
    rules: EncodingRules | None = None,
    allow_unseen: bool = False,
) -> tuple[Dataset, EncodingRules]:
    """Replace categorical columns by integer codes.

    Numeric columns pass through. Without rules, codebooks are built by
    first-occurrence factorization and returned. With rules, every value
    must already have a code; unseen values raise unless ``allow_unseen``
    is set, in which case fresh codes are appended and the extended rules
    are returned.
    """
    detect_discipline_layout(data.columns)  # layout check; names stay as-is
    frame = data.frame.copy()
    if rules is None:
        books: dict[str, dict[str, int]] = {}
        for col in frame.columns:
            if _is_numeric(frame[col]):
                continue
            codes, uniques = pd.factorize(frame[col])
            books[col] = {str(v): i for i, v in enumerate(uniques)}
            frame[col] = codes.astype(np.int64)
        return data.with_frame(frame), EncodingRules(codebooks=books)

    books = {col: dict(book) for col, book in rules.codebooks.items()}
    for col in frame.columns:
        if _is_numeric(frame[col]):
            continue
        book = books.get(col)
        if book is None:
            if not allow_unseen:
                raise UnseenValueError(col, str(frame[col].iloc[0]) if len(frame) else "")
            book = books[col] = {}
        unseen = [v for v in pd.unique(frame[col]) if v not in book]
        if unseen:
            if not allow_unseen:
                raise UnseenValueError(col, str(unseen[0]))
            for v in unseen:
                book[str(v)] = len(book)
        frame[col] = frame[col].map(book).astype(np.int64)
    return data.with_frame(frame), EncodingRules(codebooks=books)


def decode(encoded: Dataset, rules: EncodingRules) -> Dataset:
    """Invert :func:`encode` by mapping codes back to their values."""
    detect_discipline_layout(encoded.columns)
    frame = encoded.frame.copy()
    for col in frame.columns:
        if col not in rules.codebooks:
            continue
        series = frame[col]
        if not _is_numeric(series):
            continue  # already raw
        values = series.to_numpy().astype(float)
        if not np.allclose(values, np.rint(values)):
            raise ValueError(f"column {col!r} holds non-integer codes")
        inverse = rules.inverse(col)
        codes = np.rint(values).astype(np.int64)
        unknown = [int(c) for c in np.unique(codes) if int(c) not in inverse]
        if unknown:
            raise ValueError(f"column {col!r} holds unknown codes {unknown}")
        frame[col] = pd.Series(codes, index=frame.index).map(inverse)
    return encoded.with_frame(frame)


def group_disciplines(data: Dataset) -> Dataset:
    """Join the four discipline level columns into one separator-joined column."""
    if detect_discipline_layout(data.columns) != "ungrouped":
        raise SchemaError(
            f"grouping requires the columns {list(DISCIPLINE_LEVEL_COLUMNS)}"
        )
    frame = data.frame.copy()
    for col in DISCIPLINE_LEVEL_COLUMNS:
        bad = frame[col].str.contains(DISCIPLINE_SEPARATOR, regex=False)
        if bad.any():
            raise ValueError(
                f"column {col!r} contains the reserved separator "
                f"{DISCIPLINE_SEPARATOR!r}: {frame[col][bad].iloc[0]!r}"
            )
    joined = frame[list(DISCIPLINE_LEVEL_COLUMNS)].agg(DISCIPLINE_SEPARATOR.join, axis=1)
    insert_at = list(frame.columns).index(DISCIPLINE_LEVEL_COLUMNS[0])
    frame = frame.drop(columns=list(DISCIPLINE_LEVEL_COLUMNS))
    frame.insert(insert_at, DISCIPLINES_COLUMN, joined)
    return data.with_frame(frame)


def ungroup_disciplines(data: Dataset) -> Dataset:
    """Split the joined ``disciplines`` column back into four level columns."""
    if detect_discipline_layout(data.columns) != "grouped":
        raise SchemaError(f"ungrouping requires a {DISCIPLINES_COLUMN!r} column")
    frame = data.frame.copy()
    parts = frame[DISCIPLINES_COLUMN].str.split(DISCIPLINE_SEPARATOR)
    bad_len = parts.map(len) != len(DISCIPLINE_LEVEL_COLUMNS)
    if bad_len.any():
        raise ValueError(
            "malformed grouped discipline value "
            f"{frame[DISCIPLINES_COLUMN][bad_len].iloc[0]!r}: expected "
            f"{len(DISCIPLINE_LEVEL_COLUMNS)} segments"
        )
    insert_at = list(frame.columns).index(DISCIPLINES_COLUMN)
    frame = frame.drop(columns=[DISCIPLINES_COLUMN])
    for offset, col in enumerate(DISCIPLINE_LEVEL_COLUMNS):
        frame.insert(insert_at + offset, col, parts.str[offset])
    return data.with_frame(frame)


class FrameModel(Protocol):
    """A model evaluating raw (decoded, ungrouped) named rows."""

    def predict_frame(self, frame: pd.DataFrame) -> np.ndarray: ...


def wrapped_predict(data: Dataset, model: FrameModel, rules: EncodingRules) -> np.ndarray:
    """Evaluate ``model`` on data in any encoding/grouping state.

    Encoded columns (numeric dtype with a codebook entry) are decoded,
    a grouped disciplines column is split back into its levels, and the
    model sees raw ungrouped rows. Predictions come back in input order.
    """
    frame = data.frame
    encoded_cols = [
        c for c in frame.columns if c in rules.codebooks and _is_numeric(frame[c])
    ]
    current = data
    if encoded_cols:
        current = decode(current, rules)
    if detect_discipline_layout(current.columns) == "grouped":
        current = ungroup_disciplines(current)
    predictions = np.asarray(model.predict_frame(current.frame))
    if len(predictions) != len(frame):
        raise ValueError(
            f"model returned {len(predictions)} predictions for {len(frame)} rows"
        )
    return predictions


def make_array_predictor(
    model: FrameModel,
    rules: EncodingRules,
    columns: Sequence[str] | None = None,
) -> Callable[[np.ndarray], np.ndarray]:
    """Adapt a frame model to bare numeric arrays for the attribution engine.

    Explainers hand back unlabeled matrices, so column names are assigned
    from ``columns`` or, when omitted, inferred from the column count
    against the grouped/ungrouped feature schemas.
    """
    def predict(rows: np.ndarray) -> np.ndarray:
        arr = np.asarray(rows)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        names = columns
        if names is None:
            by_count = {
                len(GROUPED_FEATURE_COLUMNS): GROUPED_FEATURE_COLUMNS,
                len(UNGROUPED_FEATURE_COLUMNS): UNGROUPED_FEATURE_COLUMNS,
            }
            if arr.shape[1] not in by_count:
                raise SchemaError(
                    f"cannot infer feature names for {arr.shape[1]} columns"
                )
            names = by_count[arr.shape[1]]
        elif arr.shape[1] != len(names):
            raise SchemaError(
                f"predictor got {arr.shape[1]} columns, expected {len(names)}"
            )
        frame = pd.DataFrame(arr, columns=list(names))
        return wrapped_predict(Dataset(frame=frame), model, rules)

    return predict


PEARSON = "pearson"
CRAMERS_V = "cramers_v"
CORRELATION_RATIO = "correlation_ratio"


@dataclass(frozen=True)
class CorrelationResult:
    """Symmetric association matrix with a per-entry method tag.

    Undefined entries (zero-variance numeric or single-valued categorical
    columns) hold NaN rather than raising.
    """

    columns: tuple[str, ...]
    values: np.ndarray
    methods: np.ndarray

    def value(self, a: str, b: str) -> float:
        i, j = self.columns.index(a), self.columns.index(b)
        return float(self.values[i, j])

    def method(self, a: str, b: str) -> str:
        i, j = self.columns.index(a), self.columns.index(b)
        return str(self.methods[i, j])

    def max_offdiagonal(self, exclude: Iterable[str] = ()) -> float:
        """Largest absolute off-diagonal association among defined entries."""
        mask = ~np.eye(len(self.columns), dtype=bool)
        if exclude:
            keep = [c not in set(exclude) for c in self.columns]
            mask &= np.outer(keep, keep)
        candidates = np.abs(self.values[mask])
        candidates = candidates[~np.isnan(candidates)]
        return float(candidates.max()) if len(candidates) else math.nan

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, index=list(self.columns), columns=list(self.columns))

    def methods_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.methods, index=list(self.columns), columns=list(self.columns))


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    sx, sy = x.std(), y.std()
    if sx == 0.0 or sy == 0.0:
        return math.nan
    return float(((x - x.mean()) * (y - y.mean())).mean() / (sx * sy))


def _cramers_v(a: pd.Series, b: pd.Series) -> float:
    table = pd.crosstab(a, b).to_numpy(dtype=float)
    n = table.sum()
    r, c = table.shape
    if n == 0 or min(r, c) < 2:
        return math.nan
    row = table.sum(axis=1, keepdims=True)
    col = table.sum(axis=0, keepdims=True)
    expected = row @ col / n
    chi2 = float(((table - expected) ** 2 / expected).sum())
    v = math.sqrt(chi2 / (n * (min(r, c) - 1)))
    return min(v, 1.0)


def _correlation_ratio(categories: pd.Series, values: np.ndarray) -> float:
    total_ss = float(((values - values.mean()) ** 2).sum())
    if total_ss == 0.0:
        return math.nan
    between_ss = 0.0
    for _, group in pd.Series(values).groupby(categories.to_numpy()):
        between_ss += len(group) * (group.mean() - values.mean()) ** 2
    return math.sqrt(between_ss / total_ss)


def correlation_matrix(data: Dataset) -> CorrelationResult:
    """Mixed-type association matrix over all column pairs.

    Numeric pairs use Pearson correlation, categorical pairs Cramer's V
    computed from the contingency chi-squared, and mixed pairs the
    correlation ratio. The diagonal is 1 by convention.
    """
    if len(data) < 2:
        raise ValueError("correlation needs at least 2 rows")
    cols = list(data.frame.columns)
    kinds = data.column_kinds()
    k = len(cols)
    values = np.eye(k)
    methods = np.full((k, k), "self", dtype=object)
    for i in range(k):
        for j in range(i + 1, k):
            a, b = cols[i], cols[j]
            sa, sb = data.frame[a], data.frame[b]
            if kinds[a] == "numeric" and kinds[b] == "numeric":
                value = _pearson(sa.to_numpy(dtype=float), sb.to_numpy(dtype=float))
                method = PEARSON
            elif kinds[a] == "categorical" and kinds[b] == "categorical":
                value = _cramers_v(sa, sb)
                method = CRAMERS_V
            elif kinds[a] == "categorical":
                value = _correlation_ratio(sa, sb.to_numpy(dtype=float))
                method = CORRELATION_RATIO
            else:
                value = _correlation_ratio(sb, sa.to_numpy(dtype=float))
                method = CORRELATION_RATIO
            values[i, j] = values[j, i] = value
            methods[i, j] = methods[j, i] = method
    return CorrelationResult(columns=tuple(cols), values=values, methods=methods)


def _walk_hierarchy(rng: np.random.Generator, noise: float) -> tuple[str, str, str, str]:
    def pick(options: Sequence[str]) -> str:
        return str(options[rng.integers(len(options))])

    def maybe_noisy(canonical: Sequence[str], pool: Sequence[str]) -> str:
        if rng.random() < noise:
            return pick(pool)
        return pick(canonical)

    l0 = pick(LEVEL0_VALUES)
    l1 = maybe_noisy(_LEVEL1_CHILDREN[l0], LEVEL1_VALUES)
    l2 = maybe_noisy(_LEVEL2_CHILDREN.get(l1, LEVEL2_VALUES), LEVEL2_VALUES)
    l3 = maybe_noisy(_LEVEL3_CHILDREN.get(l2, LEVEL3_VALUES), LEVEL3_VALUES)
    return l0, l1, l2, l3


def synthesize_merlot(
    n_resources: int,
    n_ratings: int,
    rng_seed: int,
    planted_correlation: float = 0.95,
) -> tuple[Dataset, Dataset]:
    """Generate schema-faithful resource and rating tables.

    Discipline levels are drawn hierarchically; each level keeps its
    parent's canonical child with probability ``planted_correlation`` and
    otherwise draws uniformly from that level's pool, so the association
    between levels 0 and 1 lands near the requested value. Deterministic
    for a fixed seed.
    """
    if n_resources < 1 or n_ratings < 1:
        raise ValueError("counts must be at least 1")
    if not (0.0 <= planted_correlation <= 1.0):
        raise ValueError(f"planted_correlation must lie in [0, 1], got {planted_correlation}")
    rng = np.random.default_rng(rng_seed)
    noise = 1.0 - planted_correlation

    rows = []
    for rid in range(n_resources):
        l0, l1, l2, l3 = _walk_hierarchy(rng, noise)
        min_age = int(rng.integers(10, 19))
        rows.append({
            "id": rid,
            "type": str(TYPE_VALUES[rng.integers(len(TYPE_VALUES))]),
            "language": str(LANGUAGE_VALUES[rng.integers(len(LANGUAGE_VALUES))]),
            "difficulty": str(DIFFICULTY_VALUES[rng.integers(len(DIFFICULTY_VALUES))]),
            "format": str(FORMAT_VALUES[rng.integers(len(FORMAT_VALUES))]),
            "duration": str(DURATION_VALUES[rng.integers(len(DURATION_VALUES))]),
            "min_age": min_age,
            "max_age": min_age + int(rng.integers(2, 13)),
            "discipline_level_0": l0,
            "discipline_level_1": l1,
            "discipline_level_2": l2,
            "discipline_level_3": l3,
        })
    resources = pd.DataFrame(rows, columns=list(MERLOT_RESOURCE_COLUMNS))

    ratings = pd.DataFrame({
        "id": np.arange(n_ratings, dtype=np.int64),
        "rating": rng.integers(1, 6, size=n_ratings).astype(np.int64),
        "resource": rng.integers(0, n_resources, size=n_ratings).astype(np.int64),
    }, columns=list(MERLOT_RATING_COLUMNS))

    return (
        Dataset(frame=resources, schema_tag=SchemaTag.MERLOT_RESOURCES),
        Dataset(frame=ratings, schema_tag=SchemaTag.MERLOT_RATINGS),
    )


MISSING = "Missing"


def merge_resources_ratings(resources: Dataset, ratings: Dataset) -> Dataset:
    """Right-join resources onto ratings via ``resource = id``.

    Every rating row survives; resource attribute columns are attached.
    Ratings whose resource id is unknown keep their row with attribute
    cells marked (``"Missing"`` for categorical, -1 for numeric) and a
    warning reports how many were affected.
    """
    for col in ("resource",):
        if col not in ratings.frame.columns:
            raise SchemaError(f"ratings table lacks the {col!r} column")
    if "id" not in resources.frame.columns:
        raise SchemaError("resources table lacks the 'id' column")

    attrs = resources.frame.rename(columns={"id": "resource"})
    merged = ratings.frame.merge(attrs, on="resource", how="left", sort=False)
    orphan = ~merged["resource"].isin(resources.frame["id"])
    if orphan.any():
        warnings.warn(
            f"{int(orphan.sum())} rating rows reference missing resources; "
            "their resource fields are marked",
            stacklevel=2,
        )
        attribute_columns = [c for c in attrs.columns if c != "resource"]
        for col in attribute_columns:
            fill = -1 if _is_numeric(resources.frame[col]) else MISSING
            merged.loc[orphan, col] = fill
        for col in attribute_columns:
            if _is_numeric(resources.frame[col]):
                merged[col] = merged[col].astype(resources.frame[col].dtype)
    return Dataset(frame=merged, schema_tag=SchemaTag.GENERIC)


def filter_by_average_rating(merged: Dataset, threshold: float) -> Dataset:
    """Drop every row of a resource whose mean rating falls below threshold.

    Works on the rating-level merged table: the mean is taken per
    ``resource`` over the ``rating`` column and applied to all of that
    resource's rows. Row order is preserved. An off-by-default gate, so
    removing every row is treated as a misconfigured threshold.
    """
    for col in ("resource", "rating"):
        if col not in merged.frame.columns:
            raise SchemaError(f"merged table lacks the {col!r} column")
    threshold = float(threshold)
    if not math.isfinite(threshold):
        raise ValueError(f"rating threshold must be finite, got {threshold!r}")
    means = merged.frame.groupby("resource")["rating"].transform("mean")
    kept = merged.frame.loc[means >= threshold].reset_index(drop=True)
    if kept.empty:
        raise ValueError(f"minimum average rating {threshold} removed every row")
    return merged.with_frame(kept)


def load_csv(path: str | Path, schema_tag: SchemaTag = SchemaTag.GENERIC) -> Dataset:
    frame = pd.read_csv(path)
    return Dataset(frame=frame, schema_tag=schema_tag)


def save_csv(data: Dataset, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    data.frame.to_csv(path, index=False)


IRIS_FEATURES = ("sepal_length", "sepal_width", "petal_length", "petal_width")
IRIS_LABEL = "species"


def load_iris() -> Dataset:
    """The bundled 150-row, 3-class iris table."""
    with importlib_resources.files("xaiq.data").joinpath("iris.csv").open("r") as handle:
        frame = pd.read_csv(handle)
    return Dataset(frame=frame, schema_tag=SchemaTag.IRIS)


def split_features_labels(
    data: Dataset, label_column: str
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Split into a float feature matrix, a label vector, and feature names."""
    if label_column not in data.frame.columns:
        raise SchemaError(f"missing label column {label_column!r}")
    features = data.frame.drop(columns=[label_column])
    names = list(features.columns)
    non_numeric = [c for c in names if not _is_numeric(features[c])]
    if non_numeric:
        raise ValueError(f"non-numeric feature columns: {non_numeric}")
    return features.to_numpy(dtype=float), data.frame[label_column].to_numpy(), names
