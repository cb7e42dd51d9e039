"""Pipeline configuration.

A single dataclass drives both case-study pipelines; the CLI mirrors its
fields as flags and can also load the whole thing from a JSON file. The
only environment override honored is XAIQ_OUTPUT_DIR, which redirects
the report bundle directory.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

__all__ = ["PipelineConfig", "OUTPUT_DIR_ENV"]

OUTPUT_DIR_ENV = "XAIQ_OUTPUT_DIR"

_FAMILY_CHOICES = ("gaussian", "sht", "both")


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs shared by the Iris and recommender pipelines.

    Both understandability families are swept when family == "both"
    (the default); the omega_b grid covers [omega_b_min, omega_b_max]
    with omega_b_points points.
    """

    rng_seed: int = 0
    output_dir: str = "xaiq_out"

    # understandability sweep
    omega_b_min: float = 0.5
    omega_b_max: float = 10.0
    omega_b_points: int = 64
    family: str = "both"

    # attribution stage
    background_fraction: float = 0.1
    shap_budget: int | None = None  # None lets the explainer pick

    # fidelity stage; metric_draws = k resamples k background rows per
    # hidden feature set, None averages over the whole background. The
    # default keeps enough resampling noise for single-feature subsets
    # to degrade while multi-feature subsets stay stable, which is the
    # regime the reference keep-absolute results live in.
    metric_draws: int | None = 4

    # recommender run sizing
    n_resources: int = 500
    n_ratings: int = 2000
    n_explained: int = 100
    planted_correlation: float = 0.95
    grouping_trigger: float = 0.8
    min_average_rating: float | None = None  # None disables the rating gate

    # optional file inputs for the recommender run; None synthesizes
    resources_path: str | None = None
    ratings_path: str | None = None
    profile_path: str | None = None

    def __post_init__(self) -> None:
        if not (0 < self.omega_b_min < self.omega_b_max):
            raise ValueError(
                f"omega_b grid bounds must satisfy 0 < min < max, got "
                f"[{self.omega_b_min}, {self.omega_b_max}]"
            )
        if self.omega_b_points < 2:
            raise ValueError(f"omega_b_points must be >= 2, got {self.omega_b_points}")
        if self.family not in _FAMILY_CHOICES:
            raise ValueError(f"family must be one of {_FAMILY_CHOICES}, got {self.family!r}")
        if not (0.0 < self.background_fraction <= 1.0):
            raise ValueError(
                f"background_fraction must lie in (0, 1], got {self.background_fraction}"
            )
        if self.shap_budget is not None and self.shap_budget < 2:
            raise ValueError(f"shap_budget must be >= 2, got {self.shap_budget}")
        if self.metric_draws is not None and self.metric_draws < 1:
            raise ValueError(f"metric_draws must be >= 1, got {self.metric_draws}")
        for name in ("n_resources", "n_ratings", "n_explained"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.n_explained > self.n_resources:
            raise ValueError(
                f"cannot explain {self.n_explained} of {self.n_resources} resources"
            )
        if not (0.0 <= self.planted_correlation <= 1.0):
            raise ValueError(
                f"planted_correlation must lie in [0, 1], got {self.planted_correlation}"
            )
        if not (0.0 < self.grouping_trigger <= 1.0):
            raise ValueError(
                f"grouping_trigger must lie in (0, 1], got {self.grouping_trigger}"
            )
        if self.min_average_rating is not None and not math.isfinite(
            float(self.min_average_rating)
        ):
            raise ValueError(
                f"min_average_rating must be finite, got {self.min_average_rating!r}"
            )

    @property
    def families(self) -> tuple[str, ...]:
        return ("gaussian", "sht") if self.family == "both" else (self.family,)

    def resolved_output_dir(self) -> Path:
        """Output directory after the environment override, if any."""
        return Path(os.environ.get(OUTPUT_DIR_ENV) or self.output_dir)

    def to_json_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, path: str | Path, **overrides) -> "PipelineConfig":
        raw = json.loads(Path(path).read_text())
        if not isinstance(raw, dict):
            raise ValueError(f"{path}: config JSON must be an object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ValueError(f"{path}: unknown config fields {unknown}")
        raw.update(overrides)
        return cls(**raw)

    def with_overrides(self, **overrides) -> "PipelineConfig":
        return replace(self, **overrides)
